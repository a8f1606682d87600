//! Symmetric derivative stacks of space-time scalar fields through order 4,
//! plus the field implementations used to drive the wave operators: plane
//! waves composed with 1D profiles, products (Leibniz), polynomials, and
//! smooth tensor-product bumps.

use super::profile::ProfileStack;
use crate::numerics::Jet5;
use std::sync::OnceLock;

/// Sorted multi-indices of length `k` over `dim` symbols, in lexicographic
/// order. `dim` is 3 or 4, `k <= 4`.
pub fn multi_indices(dim: usize, k: usize) -> &'static [Vec<u8>] {
    static CACHE: OnceLock<Vec<Vec<Vec<Vec<u8>>>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        let mut per_dim = Vec::new();
        for dim in 0..=4usize {
            let mut per_k = Vec::new();
            for k in 0..=4usize {
                let mut list: Vec<Vec<u8>> = Vec::new();
                gen_sorted(dim as u8, k, 0, &mut Vec::new(), &mut list);
                per_k.push(list);
            }
            per_dim.push(per_k);
        }
        per_dim
    });
    &all[dim][k]
}

fn gen_sorted(dim: u8, k: usize, start: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for d in start..dim {
        cur.push(d);
        gen_sorted(dim, k, d, cur, out);
        cur.pop();
    }
}

/// Rank of a sorted multi-index within [`multi_indices`].
pub fn multi_rank(dim: usize, idx: &[u8]) -> usize {
    let list = multi_indices(dim, idx.len());
    list.binary_search_by(|probe| probe.as_slice().cmp(idx))
        .expect("multi-index out of range")
}

/// Multiplicities per direction of a multi-index.
fn multiplicities(dim: usize, idx: &[u8]) -> [u8; 4] {
    let mut m = [0u8; 4];
    for &d in idx {
        m[d as usize] += 1;
    }
    debug_assert!(dim <= 4);
    m
}

/// Value and symmetric partial derivatives through `max_order` of a scalar
/// space-time field at one point. `data[k]` holds the packed order-k tensor
/// ordered as in [`multi_indices`] (35 slots cover order 4 in dimension 4).
#[derive(Debug, Clone)]
pub struct Stack4 {
    pub dim: usize,
    pub max_order: usize,
    pub data: [[f64; 35]; 5],
}

impl Stack4 {
    pub fn zeros(dim: usize, max_order: usize) -> Self {
        Stack4 {
            dim,
            max_order,
            data: [[0.0; 35]; 5],
        }
    }

    pub fn value(&self) -> f64 {
        self.data[0][0]
    }

    /// Derivative for an arbitrary (unsorted) multi-index.
    pub fn get(&self, idx: &[u8]) -> f64 {
        let mut s = idx.to_vec();
        s.sort_unstable();
        self.data[idx.len()][multi_rank(self.dim, &s)]
    }

    /// The order-3 sub-stack of the field `d_mu g`, extracted from order 4.
    pub fn derivative_stack(&self, mu: u8) -> Stack4 {
        assert!(self.max_order >= 4 || self.max_order >= 3);
        let mut out = Stack4::zeros(self.dim, self.max_order - 1);
        for k in 0..=out.max_order {
            let list = multi_indices(self.dim, k);
            for (r, idx) in list.iter().enumerate() {
                let mut full = idx.clone();
                full.push(mu);
                full.sort_unstable();
                out.data[k][r] = self.data[k + 1][multi_rank(self.dim, &full)];
            }
        }
        out
    }
}

/// A scalar space-time field exposing analytic derivative stacks.
pub trait SpaceTimeField: Send + Sync {
    fn dim(&self) -> usize;
    /// Stack at `(t, x)` through `order` (<= 4).
    fn stack(&self, t: f64, x: &[f64; 3], order: usize) -> Stack4;
}

// ---------------------------------------------------------------------------
// Plane-wave profile fields: g(t, x) = k^power * h(k (t,x).eta)
// ---------------------------------------------------------------------------

pub struct PlaneWaveField {
    pub dim: usize,
    pub eta: [f64; 4],
    pub profile: ProfileStack,
    pub freq: f64,
    pub power: i32,
}

impl PlaneWaveField {
    /// `g(t,x) = h((t,x).eta)`.
    pub fn unit(dim: usize, eta: [f64; 4], profile: ProfileStack) -> Self {
        PlaneWaveField {
            dim,
            eta,
            profile,
            freq: 1.0,
            power: 0,
        }
    }

    /// `g_k(t,x) = k^-3 h(k (t,x).eta)`, the localized oscillation core.
    pub fn oscillation(dim: usize, eta: [f64; 4], profile: ProfileStack, k: usize) -> Self {
        PlaneWaveField {
            dim,
            eta,
            profile,
            freq: k as f64,
            power: -3,
        }
    }

    pub fn phase(&self, t: f64, x: &[f64; 3]) -> f64 {
        let mut s = t * self.eta[0];
        for i in 0..self.dim - 1 {
            s += x[i] * self.eta[1 + i];
        }
        s
    }
}

impl SpaceTimeField for PlaneWaveField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn stack(&self, t: f64, x: &[f64; 3], order: usize) -> Stack4 {
        let s = self.phase(t, x);
        let h = self.profile.eval(self.freq * s);
        let amp = self.freq.powi(self.power);
        let mut out = Stack4::zeros(self.dim, order);
        for k in 0..=order {
            let scale = amp * self.freq.powi(k as i32);
            let list = multi_indices(self.dim, k);
            for (r, idx) in list.iter().enumerate() {
                let mut eta_pow = 1.0;
                for &d in idx {
                    eta_pow *= self.eta[d as usize];
                }
                out.data[k][r] = scale * eta_pow * h[k];
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Product fields (generalized Leibniz rule)
// ---------------------------------------------------------------------------

pub struct ProductField<A: SpaceTimeField, B: SpaceTimeField> {
    pub a: A,
    pub b: B,
}

impl<A: SpaceTimeField, B: SpaceTimeField> SpaceTimeField for ProductField<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn stack(&self, t: f64, x: &[f64; 3], order: usize) -> Stack4 {
        let sa = self.a.stack(t, x, order);
        let sb = self.b.stack(t, x, order);
        product_stack(&sa, &sb, order)
    }
}

fn binom(n: u8, k: u8) -> f64 {
    const TABLE: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    TABLE[n as usize][k as usize]
}

/// One Leibniz contribution: take rank `ra` at order `ka` from the first
/// factor and rank `rb` at order `k - ka` from the second.
#[derive(Clone, Copy)]
struct LeibnizTerm {
    coeff: f64,
    ka: u8,
    ra: u8,
    rb: u8,
}

/// Cached Leibniz expansion per (dim, order, target rank).
fn leibniz_table(dim: usize, k: usize) -> &'static [Vec<LeibnizTerm>] {
    static CACHE: OnceLock<Vec<Vec<Vec<Vec<LeibnizTerm>>>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        let mut per_dim = Vec::new();
        for dim in 0..=4usize {
            let mut per_k = Vec::new();
            for k in 0..=4usize {
                let list = multi_indices(dim, k);
                let mut per_rank = Vec::with_capacity(list.len());
                for idx in list {
                    let alpha = multiplicities(dim.max(1), idx);
                    let mut terms = Vec::new();
                    let mut beta = [0u8; 4];
                    loop {
                        let mut coeff = 1.0;
                        for d in 0..dim {
                            coeff *= binom(alpha[d], beta[d]);
                        }
                        let mut bidx: Vec<u8> = Vec::new();
                        let mut cidx: Vec<u8> = Vec::new();
                        for d in 0..dim as u8 {
                            for _ in 0..beta[d as usize] {
                                bidx.push(d);
                            }
                            for _ in 0..(alpha[d as usize] - beta[d as usize]) {
                                cidx.push(d);
                            }
                        }
                        terms.push(LeibnizTerm {
                            coeff,
                            ka: bidx.len() as u8,
                            ra: multi_rank(dim, &bidx) as u8,
                            rb: multi_rank(dim, &cidx) as u8,
                        });
                        let mut d = 0;
                        loop {
                            if d == dim {
                                break;
                            }
                            if beta[d] < alpha[d] {
                                beta[d] += 1;
                                break;
                            }
                            beta[d] = 0;
                            d += 1;
                        }
                        if d == dim {
                            break;
                        }
                    }
                    per_rank.push(terms);
                }
                per_k.push(per_rank);
            }
            per_dim.push(per_k);
        }
        per_dim
    });
    &all[dim][k]
}

/// Leibniz rule on packed symmetric stacks.
pub fn product_stack(sa: &Stack4, sb: &Stack4, order: usize) -> Stack4 {
    let dim = sa.dim;
    let mut out = Stack4::zeros(dim, order);
    for k in 0..=order {
        let table = leibniz_table(dim, k);
        for (r, terms) in table.iter().enumerate() {
            let mut sum = 0.0;
            for t in terms {
                sum += t.coeff
                    * sa.data[t.ka as usize][t.ra as usize]
                    * sb.data[k - t.ka as usize][t.rb as usize];
            }
            out.data[k][r] = sum;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Polynomial fields (exact stacks, used as operator test inputs)
// ---------------------------------------------------------------------------

/// Multivariate polynomial `sum_j c_j * t^{p_t} x1^{p_1} ...`.
pub struct PolyField {
    pub dim: usize,
    /// (coefficient, powers per direction)
    pub monomials: Vec<(f64, [u8; 4])>,
}

impl SpaceTimeField for PolyField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn stack(&self, t: f64, x: &[f64; 3], order: usize) -> Stack4 {
        let coords = [t, x[0], x[1], x[2]];
        let mut out = Stack4::zeros(self.dim, order);
        for k in 0..=order {
            let list = multi_indices(self.dim, k);
            for (r, idx) in list.iter().enumerate() {
                let alpha = multiplicities(self.dim, idx);
                let mut sum = 0.0;
                for (c, pows) in &self.monomials {
                    let mut term = *c;
                    for d in 0..self.dim {
                        let p = pows[d] as i32;
                        let a = alpha[d] as i32;
                        if a > p {
                            term = 0.0;
                            break;
                        }
                        // falling factorial p (p-1) ... (p-a+1) * coord^(p-a)
                        let mut fall = 1.0;
                        for j in 0..a {
                            fall *= (p - j) as f64;
                        }
                        term *= fall * coords[d].powi(p - a);
                    }
                    sum += term;
                }
                out.data[k][r] = sum;
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Smooth tensor-product bump
// ---------------------------------------------------------------------------

/// Flat-topped C-infinity transition: 1 for u <= 0, 0 for u >= 1, built from
/// the one-sided kernel q(u) = exp(-1/u).
fn smooth_step_jet(u: f64) -> Jet5 {
    const EDGE: f64 = 1e-9;
    if u <= EDGE {
        return Jet5::constant(1.0);
    }
    if u >= 1.0 - EDGE {
        return Jet5::constant(0.0);
    }
    let uj = Jet5::var(u);
    let q = |v: Jet5| v.recip().scale(-1.0).exp();
    let qa = q(uj);
    let qb = q(Jet5::constant(1.0).sub(&uj));
    qb.div(&qa.add(&qb))
}

/// Tensor-product bump over an axis-aligned space-time box: identically 1 on
/// the inner `(1 - frame)` fraction of each axis, 0 outside the box, smooth
/// in between.
pub struct TensorBumpField {
    pub dim: usize,
    pub center: [f64; 4],
    pub halfwidth: [f64; 4],
    pub frame: f64,
}

impl TensorBumpField {
    /// 1D factor as a jet in the axis coordinate.
    fn axis_jet(&self, axis: usize, coord: f64) -> Jet5 {
        let s = (coord - self.center[axis]) / self.halfwidth[axis];
        if s.abs() >= 1.0 {
            return Jet5::constant(0.0);
        }
        let inner = 1.0 - self.frame;
        if s.abs() <= inner {
            return Jet5::constant(1.0);
        }
        let u = (s.abs() - inner) / self.frame;
        let t = smooth_step_jet(u);
        // chain rule for u(coord): du/dcoord = sign(s) / (frame * halfwidth)
        let du = s.signum() / (self.frame * self.halfwidth[axis]);
        let mut out = t.0;
        let mut pow = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 {
                pow *= du;
            }
            *o *= pow;
        }
        Jet5(out)
    }

    pub fn value(&self, t: f64, x: &[f64; 3]) -> f64 {
        let coords = [t, x[0], x[1], x[2]];
        let mut v = 1.0;
        for axis in 0..self.dim {
            v *= self.axis_jet(axis, coords[axis]).0[0];
        }
        v
    }

    /// True when all axes are inside the flat plateau (bump identically 1).
    pub fn in_plateau(&self, t: f64, x: &[f64; 3]) -> bool {
        let coords = [t, x[0], x[1], x[2]];
        (0..self.dim).all(|axis| {
            let s = (coords[axis] - self.center[axis]) / self.halfwidth[axis];
            s.abs() <= 1.0 - self.frame
        })
    }

    /// True when the point lies outside the (closed) support box.
    pub fn outside_support(&self, t: f64, x: &[f64; 3]) -> bool {
        let coords = [t, x[0], x[1], x[2]];
        (0..self.dim).any(|axis| {
            let s = (coords[axis] - self.center[axis]) / self.halfwidth[axis];
            s.abs() >= 1.0
        })
    }
}

impl SpaceTimeField for TensorBumpField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn stack(&self, t: f64, x: &[f64; 3], order: usize) -> Stack4 {
        let coords = [t, x[0], x[1], x[2]];
        let jets: Vec<Jet5> = (0..self.dim)
            .map(|axis| self.axis_jet(axis, coords[axis]))
            .collect();
        let mut out = Stack4::zeros(self.dim, order);
        for k in 0..=order {
            let list = multi_indices(self.dim, k);
            for (r, idx) in list.iter().enumerate() {
                let alpha = multiplicities(self.dim, idx);
                let mut v = 1.0;
                for d in 0..self.dim {
                    v *= jets[d].0[alpha[d] as usize];
                }
                out.data[k][r] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(4, 2).len(), 10);
        assert_eq!(multi_indices(4, 3).len(), 20);
        assert_eq!(multi_indices(4, 4).len(), 35);
        // ranks round-trip
        for (r, idx) in multi_indices(4, 3).iter().enumerate() {
            assert_eq!(multi_rank(4, idx), r);
        }
    }

    #[test]
    fn poly_field_derivatives_exact() {
        // g = t^2 x1 + 3 x2^3
        let g = PolyField {
            dim: 3,
            monomials: vec![(1.0, [2, 1, 0, 0]), (3.0, [0, 0, 3, 0])],
        };
        let s = g.stack(2.0, &[5.0, -1.0, 0.0], 3);
        assert_eq!(s.value(), 4.0 * 5.0 - 3.0);
        assert_eq!(s.get(&[0]), 2.0 * 2.0 * 5.0); // d/dt
        assert_eq!(s.get(&[1]), 4.0); // d/dx1 = t^2
        assert_eq!(s.get(&[2]), 9.0); // d/dx2 = 9 x2^2
        assert_eq!(s.get(&[0, 0, 1]), 2.0); // d3/dt dt dx1
        assert_eq!(s.get(&[2, 2, 2]), 18.0);
    }

    #[test]
    fn plane_wave_stack_matches_chain_rule() {
        let f = ProfileStack::sine();
        let eta = [0.5, 1.0, -2.0, 0.0];
        let g = PlaneWaveField::unit(3, eta, f.clone());
        let (t, x) = (0.3, [0.7, 0.1, 0.0]);
        let s = g.stack(t, &x, 4);
        let phase = 0.5 * t + x[0] - 2.0 * x[1];
        let h = f.eval(phase);
        assert!((s.value() - h[0]).abs() < 1e-14);
        assert!((s.get(&[0]) - 0.5 * h[1]).abs() < 1e-14);
        assert!((s.get(&[1, 2]) - 1.0 * (-2.0) * h[2]).abs() < 1e-13);
        assert!((s.get(&[0, 1, 2]) - 0.5 * (-2.0) * h[3]).abs() < 1e-12);
        assert!((s.get(&[2, 2, 2, 2]) - 16.0 * h[4]).abs() < 1e-11);
    }

    #[test]
    fn product_stack_leibniz_vs_poly_product() {
        // (t + x1)(x1 x2): compare against the expanded polynomial
        let a = PolyField {
            dim: 3,
            monomials: vec![(1.0, [1, 0, 0, 0]), (1.0, [0, 1, 0, 0])],
        };
        let b = PolyField {
            dim: 3,
            monomials: vec![(1.0, [0, 1, 1, 0])],
        };
        let prod = ProductField { a, b };
        let expanded = PolyField {
            dim: 3,
            monomials: vec![(1.0, [1, 1, 1, 0]), (1.0, [0, 2, 1, 0])],
        };
        let (t, x) = (1.3, [0.4, -0.9, 0.0]);
        let s1 = prod.stack(t, &x, 4);
        let s2 = expanded.stack(t, &x, 4);
        for k in 0..=4 {
            for r in 0..multi_indices(3, k).len() {
                assert!(
                    (s1.data[k][r] - s2.data[k][r]).abs() < 1e-12,
                    "order {k} rank {r}"
                );
            }
        }
    }

    #[test]
    fn bump_plateau_support_and_smoothness() {
        let bump = TensorBumpField {
            dim: 3,
            center: [0.0, 0.0, 0.0, 0.0],
            halfwidth: [1.0, 2.0, 1.5, 1.0],
            frame: 0.25,
        };
        assert_eq!(bump.value(0.0, &[0.0; 3]), 1.0);
        assert!(bump.in_plateau(0.5, &[1.0, 0.5, 0.0]));
        assert_eq!(bump.value(0.5, &[1.0, 0.5, 0.0]), 1.0);
        assert_eq!(bump.value(1.1, &[0.0; 3]), 0.0);
        assert!(bump.outside_support(1.1, &[0.0; 3]));
        // transition values strictly inside (0, 1)
        let v = bump.value(0.9, &[0.0; 3]);
        assert!(v > 0.0 && v < 1.0);
        // stack first derivative matches finite differences in the transition
        let s = bump.stack(0.9, &[0.3, 0.2, 0.0], 4);
        let h = 1e-6;
        let fd = (bump.value(0.9 + h, &[0.3, 0.2, 0.0]) - bump.value(0.9 - h, &[0.3, 0.2, 0.0]))
            / (2.0 * h);
        assert!((s.get(&[0]) - fd).abs() < 1e-6 * (1.0 + fd.abs()));
    }

    #[test]
    fn derivative_stack_extraction() {
        let g = PolyField {
            dim: 3,
            monomials: vec![(2.0, [2, 2, 0, 0])],
        };
        let (t, x) = (0.7, [1.1, 0.0, 0.0]);
        let full = g.stack(t, &x, 4);
        let dg_dt = full.derivative_stack(0);
        // d/dt of 2 t^2 x1^2 = 4 t x1^2
        assert!((dg_dt.value() - 4.0 * t * x[0] * x[0]).abs() < 1e-12);
        assert!((dg_dt.get(&[1, 1]) - 8.0 * t).abs() < 1e-12);
    }
}
