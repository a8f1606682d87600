//! Localized plane waves: third-order homogeneous differential operators that
//! turn a wave-cone direction and a cut-off profile into compactly supported
//! solutions of the linearized system.

pub mod profile;
pub mod stack;

pub use profile::{antiderivative3, mollified_step, profile_mean, ProfileError, ProfileStack};
pub use stack::{
    multi_indices, multi_rank, product_stack, PlaneWaveField, PolyField, ProductField,
    SpaceTimeField, Stack4, TensorBumpField,
};

use crate::numerics::{complete_basis, norm, scale3, SymMat};
use crate::phasegeom::PhasePoint;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("eta must be nonzero")]
    ZeroEta,
    #[error("kernel condition violated: ||M eta|| = {0:.3e} relative to scale")]
    KernelViolated(f64),
    #[error("field stack must carry derivatives through order {need}, got {got}")]
    StackTooShallow { need: usize, got: usize },
}

/// One third-order term `coeff * d^3 g / (d x_a d x_b d x_c)` in rotated
/// coordinates.
#[derive(Debug, Clone, Copy)]
struct Term {
    coeff: f64,
    idx: [u8; 3],
    rank: u8,
}

/// Third-order homogeneous operator triple in matrix form: entry (0,0) is the
/// density operator, row 0 the momentum operators, the spatial block the
/// matrix operators. Stored per upper-triangle entry in rotated coordinates.
#[derive(Debug, Clone)]
pub struct WaveOperator {
    pub n: usize,
    pub eta: [f64; 4],
    pub delta: PhasePoint,
    /// Block rotation `[[1, 0], [0, B]]`; identity when eta is parallel to
    /// e_t or already axis-aligned.
    rotation: Option<[[f64; 4]; 4]>,
    terms: Vec<Vec<Term>>, // indexed by packed upper triangle of (1+n)x(1+n)
    /// per rotated order-3 rank: weighted original ranks making up the
    /// congruence-transformed derivative
    rot3_map: Option<Vec<Vec<(f64, u16)>>>,
}

fn tri_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

/// Build the localized plane-wave operator for a wave-cone direction
/// `delta` with kernel vector `eta`.
pub fn build_operator(delta: &PhasePoint, eta: &[f64; 4]) -> Result<WaveOperator, OperatorError> {
    let n = delta.dim();
    let dim = 1 + n;
    let eta_norm = (0..dim).map(|i| eta[i] * eta[i]).sum::<f64>().sqrt();
    if eta_norm == 0.0 {
        return Err(OperatorError::ZeroEta);
    }
    let st = delta.spacetime_matrix();
    let me = st.mul_vec(eta);
    let me_norm = (0..dim).map(|i| me[i] * me[i]).sum::<f64>().sqrt();
    let scale = delta.scale_norm().max(1e-300);
    if me_norm > 1e-8 * scale * eta_norm {
        return Err(OperatorError::KernelViolated(me_norm / (scale * eta_norm)));
    }

    let eta_x = [eta[1], eta[2], eta[3]];
    let eta_x_norm = norm(n, &eta_x);
    if eta_x_norm <= 1e-14 * eta_norm {
        // eta parallel to e_t: Lemma-op-eta=e1 coefficient table
        let a3 = eta[0].powi(3);
        let mut terms = vec![Vec::new(); dim * (dim + 1) / 2];
        // density: sum_ij U_ij d_t d_i d_j
        for i in 0..n {
            for j in i..n {
                let u = delta.u_entry(i, j);
                let mult = if i == j { 1.0 } else { 2.0 };
                push_term(
                    dim,
                    &mut terms[tri_index(dim, 0, 0)],
                    mult * u / a3,
                    [0, (1 + i) as u8, (1 + j) as u8],
                );
            }
        }
        // momentum k: -sum_i U_ik d_t d_t d_i
        for k in 0..n {
            for i in 0..n {
                let u = delta.u_entry(i, k);
                push_term(
                    dim,
                    &mut terms[tri_index(dim, 0, 1 + k)],
                    -u / a3,
                    [0, 0, (1 + i) as u8],
                );
            }
        }
        // matrix block: U_ij d_t d_t d_t
        for i in 0..n {
            for j in i..n {
                let u = delta.u_entry(i, j);
                push_term(
                    dim,
                    &mut terms[tri_index(dim, 1 + i, 1 + j)],
                    u / a3,
                    [0, 0, 0],
                );
            }
        }
        return Ok(WaveOperator {
            n,
            eta: *eta,
            delta: *delta,
            rotation: None,
            terms,
            rot3_map: None,
        });
    }

    // general case: rotate eta_x onto the first spatial axis
    let b1 = scale3(&eta_x, 1.0 / eta_x_norm);
    let mut basis = vec![b1];
    if n == 2 {
        basis.push([-b1[1], b1[0], 0.0]);
    } else {
        complete_basis(&mut basis);
    }
    basis.truncate(n);
    let mut rot = [[0.0; 4]; 4];
    rot[0][0] = 1.0;
    for (col, b) in basis.iter().enumerate() {
        for row in 0..n {
            rot[1 + row][1 + col] = b[row];
        }
    }
    // rotated direction components via M_rot = A^T M A
    let mrot = congruence(dim, &st_dense(delta), &rot, true);
    let rho_r = mrot[0][0];
    let m2 = mrot[0][2];
    let m3 = if n == 3 { mrot[0][3] } else { 0.0 };
    let u11 = mrot[1][1];
    let u22 = mrot[2][2];
    let u23 = if n == 3 { mrot[2][3] } else { 0.0 };
    let b = eta[0] * rot[0][0]; // placeholder; real b below
    let _ = b;
    let bb = eta_x_norm;
    let b3 = bb * bb * bb;

    let mut terms = vec![Vec::new(); dim * (dim + 1) / 2];
    {
        // shared rows of the 2D and 3D tables
        let t = &mut terms;
        // density
        add(t, dim, 0, 0, rho_r / b3, [[1, 1, 1], [1, 2, 2]]);
        // m1
        add(t, dim, 0, 1, -rho_r / b3, [[0, 1, 1], [0, 2, 2]]);
        add(t, dim, 0, 1, -m2 / b3, [[1, 1, 2], [2, 2, 2]]);
        // m2
        add(t, dim, 0, 2, m2 / b3, [[1, 1, 1], [1, 2, 2]]);
        // U11
        add1(t, dim, 1, 1, rho_r / b3, [0, 0, 1]);
        add1(t, dim, 1, 1, 2.0 * m2 / b3, [0, 1, 2]);
        // U12
        add1(t, dim, 1, 2, rho_r / b3, [0, 0, 2]);
        add1(t, dim, 1, 2, -m2 / b3, [0, 1, 1]);
        add1(t, dim, 1, 2, m2 / b3, [0, 2, 2]);
        if n == 2 {
            // U22 = -U11 (traceless)
            add1(t, dim, 2, 2, -rho_r / b3, [0, 0, 1]);
            add1(t, dim, 2, 2, -2.0 * m2 / b3, [0, 1, 2]);
        } else {
            let su = u11 + u22;
            // extra m1 pieces
            add(t, dim, 0, 1, -m3 / b3, [[1, 1, 3], [3, 3, 3]]);
            // m3
            add(t, dim, 0, 3, m3 / b3, [[1, 1, 1], [1, 3, 3]]);
            // U11 extras
            add1(t, dim, 1, 1, 2.0 * m3 / b3, [0, 1, 3]);
            add1(t, dim, 1, 1, su / b3, [1, 2, 2]);
            add1(t, dim, 1, 1, -su / b3, [1, 3, 3]);
            add1(t, dim, 1, 1, 2.0 * u23 / b3, [1, 2, 3]);
            add1(t, dim, 1, 1, -u23 / b3, [2, 3, 3]);
            add1(t, dim, 1, 1, -u23 / b3, [2, 2, 2]);
            // U12 extras
            add1(t, dim, 1, 2, -su / b3, [1, 1, 2]);
            add1(t, dim, 1, 2, -su / b3, [2, 3, 3]);
            add1(t, dim, 1, 2, -u23 / b3, [1, 1, 3]);
            add1(t, dim, 1, 2, -u23 / b3, [3, 3, 3]);
            add1(t, dim, 1, 2, u23 / b3, [1, 3, 3]);
            add1(t, dim, 1, 2, u23 / b3, [1, 2, 2]);
            // U13
            add1(t, dim, 1, 3, -m3 / b3, [0, 1, 1]);
            add1(t, dim, 1, 3, m3 / b3, [0, 3, 3]);
            add1(t, dim, 1, 3, su / b3, [1, 1, 3]);
            add1(t, dim, 1, 3, su / b3, [2, 2, 3]);
            add1(t, dim, 1, 3, u23 / b3, [2, 3, 3]);
            add1(t, dim, 1, 3, -u23 / b3, [1, 1, 2]);
            // U22
            add1(t, dim, 2, 2, -rho_r / b3, [0, 0, 1]);
            add1(t, dim, 2, 2, -2.0 * m2 / b3, [0, 1, 2]);
            add1(t, dim, 2, 2, su / b3, [1, 1, 1]);
            add1(t, dim, 2, 2, su / b3, [1, 3, 3]);
            add1(t, dim, 2, 2, u23 / b3, [2, 3, 3]);
            add1(t, dim, 2, 2, -u23 / b3, [1, 1, 2]);
            // U23
            add1(t, dim, 2, 3, u23 / b3, [1, 1, 1]);
            add1(t, dim, 2, 3, u23 / b3, [1, 3, 3]);
            add1(t, dim, 2, 3, -u23 / b3, [2, 2, 3]);
            add1(t, dim, 2, 3, -u23 / b3, [1, 1, 3]);
            // U33 = -U11 - U22
            let (r11, r22) = (
                terms[tri_index(dim, 1, 1)].clone(),
                terms[tri_index(dim, 2, 2)].clone(),
            );
            for term in r11.iter().chain(r22.iter()) {
                push_term(dim, &mut terms[tri_index(dim, 3, 3)], -term.coeff, term.idx);
            }
        }
    }
    Ok(WaveOperator {
        n,
        eta: *eta,
        delta: *delta,
        rotation: Some(rot),
        terms,
        rot3_map: Some(build_rot3_map(dim, &rot)),
    })
}

fn push_term(dim: usize, list: &mut Vec<Term>, coeff: f64, mut idx: [u8; 3]) {
    idx.sort_unstable();
    if coeff != 0.0 {
        let rank = multi_rank(dim, &idx) as u8;
        list.push(Term { coeff, idx, rank });
    }
}

fn add(terms: &mut [Vec<Term>], dim: usize, i: usize, j: usize, coeff: f64, idxs: [[u8; 3]; 2]) {
    for idx in idxs {
        push_term(dim, &mut terms[tri_index(dim, i, j)], coeff, idx);
    }
}

fn add1(terms: &mut [Vec<Term>], dim: usize, i: usize, j: usize, coeff: f64, idx: [u8; 3]) {
    push_term(dim, &mut terms[tri_index(dim, i, j)], coeff, idx);
}

fn st_dense(p: &PhasePoint) -> [[f64; 4]; 4] {
    p.spacetime_matrix().to_dense()
}

/// Accumulate, per rotated order-3 multi-index, the weighted original packed
/// ranks of the congruence transform `D_rot[abc] = sum A_ia A_jb A_kc D[ijk]`.
fn build_rot3_map(dim: usize, a: &[[f64; 4]; 4]) -> Vec<Vec<(f64, u16)>> {
    let targets = multi_indices(dim, 3);
    let mut map = Vec::with_capacity(targets.len());
    for tgt in targets {
        let mut weights: std::collections::HashMap<u16, f64> = std::collections::HashMap::new();
        for i in 0..dim as u8 {
            for j in 0..dim as u8 {
                for k in 0..dim as u8 {
                    let w = a[i as usize][tgt[0] as usize]
                        * a[j as usize][tgt[1] as usize]
                        * a[k as usize][tgt[2] as usize];
                    if w != 0.0 {
                        let mut src = [i, j, k];
                        src.sort_unstable();
                        *weights.entry(multi_rank(dim, &src) as u16).or_insert(0.0) += w;
                    }
                }
            }
        }
        let mut list: Vec<(f64, u16)> = weights.into_iter().map(|(r, w)| (w, r)).collect();
        list.sort_by_key(|&(_, r)| r);
        map.push(list);
    }
    map
}

/// `A^T M A` (transpose = true) or `A M A^T` (false) on dense dim x dim blocks.
fn congruence(dim: usize, m: &[[f64; 4]; 4], a: &[[f64; 4]; 4], transpose: bool) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = 0.0;
            for p in 0..dim {
                for q in 0..dim {
                    let (l, r) = if transpose {
                        (a[p][i], a[q][j])
                    } else {
                        (a[i][p], a[j][q])
                    };
                    s += l * m[p][q] * r;
                }
            }
            out[i][j] = s;
        }
    }
    out
}

impl WaveOperator {
    /// The block rotation used internally (identity when none was needed).
    pub fn rotation_matrix(&self) -> [[f64; 4]; 4] {
        match &self.rotation {
            Some(a) => *a,
            None => {
                let mut id = [[0.0; 4]; 4];
                for (i, row) in id.iter_mut().enumerate() {
                    row[i] = 1.0;
                }
                id
            }
        }
    }

    /// Third-order terms `(coefficient, rotated multi-index)` of the operator
    /// entry `(i, j)` of the rotated output matrix.
    pub fn rotated_terms(&self, i: usize, j: usize) -> Vec<(f64, [u8; 3])> {
        let dim = 1 + self.n;
        self.terms[tri_index(dim, i, j)]
            .iter()
            .map(|t| (t.coeff, t.idx))
            .collect()
    }

    /// Evaluate `(L_rho[g], L_m[g], L_U[g])` at a point, from the field's
    /// order-3 derivative stack in original coordinates.
    pub fn apply(&self, stack: &Stack4) -> Result<PhasePoint, OperatorError> {
        if stack.max_order < 3 {
            return Err(OperatorError::StackTooShallow {
                need: 3,
                got: stack.max_order,
            });
        }
        let dim = 1 + self.n;
        // third derivatives in rotated coordinates
        let n3 = multi_indices(dim, 3).len();
        let mut d3_rot = [0.0f64; 20];
        match &self.rot3_map {
            None => d3_rot[..n3].copy_from_slice(&stack.data[3][..n3]),
            Some(map) => {
                for (r, sources) in map.iter().enumerate() {
                    let mut sum = 0.0;
                    for &(w, src) in sources {
                        sum += w * stack.data[3][src as usize];
                    }
                    d3_rot[r] = sum;
                }
            }
        }
        // evaluate the rotated output matrix
        let mut mrot = [[0.0; 4]; 4];
        for i in 0..dim {
            for j in i..dim {
                let mut s = 0.0;
                for t in &self.terms[tri_index(dim, i, j)] {
                    s += t.coeff * d3_rot[t.rank as usize];
                }
                mrot[i][j] = s;
                mrot[j][i] = s;
            }
        }
        let m = match &self.rotation {
            None => mrot,
            Some(a) => congruence(dim, &mrot, a, false),
        };
        let mut mom = [0.0; 3];
        mom[..self.n].copy_from_slice(&m[0][1..dim]);
        let mut u = SymMat::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                u.set(i, j, m[1 + i][1 + j]);
            }
        }
        let (pt, _) = PhasePoint::from_matrix(self.n, m[0][0], mom, &u);
        Ok(pt)
    }

    /// Space-time divergence of the operator output: returns
    /// `(d_t L_rho + div L_m, d_t L_m + div L_U)` assembled from the field's
    /// order-4 stack. Also returns the magnitude scale of the entries.
    pub fn pde_residual(&self, stack: &Stack4) -> Result<(f64, [f64; 3], f64), OperatorError> {
        if stack.max_order < 4 {
            return Err(OperatorError::StackTooShallow {
                need: 4,
                got: stack.max_order,
            });
        }
        let dim = 1 + self.n;
        let mut div = [0.0; 4];
        let mut scale = 1e-300_f64;
        for mu in 0..dim as u8 {
            let sub = stack.derivative_stack(mu);
            let out = self.apply(&sub)?;
            let dense = st_dense(&out);
            for i in 0..dim {
                div[i] += dense[i][mu as usize];
                scale = scale.max(dense[i][mu as usize].abs());
            }
        }
        Ok((div[0], [div[1], div[2], div[3]], scale))
    }
}
