//! Small numerical kernels shared across the crate: packed symmetric matrices
//! with closed-form 2x2/3x3 eigensolvers, a Jacobi solver for the space-time
//! matrices, Gauss-Legendre rules, adaptive quadrature, truncated Taylor jets,
//! and safeguarded root finding.

use std::sync::OnceLock;

/// Largest spatial dimension handled by the crate.
pub const MAX_DIM: usize = 3;

// ---------------------------------------------------------------------------
// Spatial vectors ([f64; 3] padded with zeros beyond `n`)
// ---------------------------------------------------------------------------

pub fn dot(n: usize, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..n).map(|i| a[i] * b[i]).sum()
}

pub fn norm(n: usize, a: &[f64; 3]) -> f64 {
    dot(n, a, a).sqrt()
}

pub fn scale3(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

// ---------------------------------------------------------------------------
// Packed symmetric n x n matrices, n in {2, 3}
// ---------------------------------------------------------------------------

/// Symmetric n x n matrix, n in {2, 3}, stored as the packed upper triangle
/// `[a11, a12, a13, a22, a23, a33]` (the 2x2 case uses slots 0, 1, 3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat {
    pub n: usize,
    a: [f64; 6],
}

fn pack_idx(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => unreachable!("index out of range for 3x3 symmetric matrix"),
    }
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n == 2 || n == 3);
        SymMat { n, a: [0.0; 6] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[pack_idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[pack_idx(i, j)] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.a[pack_idx(i, j)] += v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for v in out.a.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn plus(&self, other: &SymMat) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = *self;
        for (v, w) in out.a.iter_mut().zip(other.a.iter()) {
            *v += w;
        }
        out
    }

    pub fn minus(&self, other: &SymMat) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    /// Rank-one update target: `m + s * (v ⊗ v)`.
    pub fn plus_outer(&self, v: &[f64; 3], s: f64) -> Self {
        let mut out = *self;
        for i in 0..self.n {
            for j in i..self.n {
                out.add_to(i, j, s * v[i] * v[j]);
            }
        }
        out
    }

    /// Symmetrized outer product `s * (a ⊗ b + b ⊗ a)`.
    pub fn sym_outer(n: usize, a: &[f64; 3], b: &[f64; 3], s: f64) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                out.set(i, j, s * (a[i] * b[j] + b[i] * a[j]));
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..self.n {
            for j in 0..self.n {
                out[i] += self.get(i, j) * v[j];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        match self.n {
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(0, 1),
            3 => {
                let a = self.get(0, 0);
                let b = self.get(0, 1);
                let c = self.get(0, 2);
                let d = self.get(1, 1);
                let e = self.get(1, 2);
                let f = self.get(2, 2);
                a * (d * f - e * e) - b * (b * f - c * e) + c * (b * e - c * d)
            }
            _ => unreachable!(),
        }
    }

    /// Eigenvalues in ascending order, by closed-form formulas (quadratic for
    /// 2x2, trigonometric Cardano for 3x3).
    pub fn eigenvalues(&self) -> [f64; 3] {
        match self.n {
            2 => {
                let a = self.get(0, 0);
                let b = self.get(0, 1);
                let d = self.get(1, 1);
                let mean = 0.5 * (a + d);
                let disc = (0.25 * (a - d) * (a - d) + b * b).max(0.0).sqrt();
                [mean - disc, mean + disc, f64::NAN]
            }
            3 => {
                let p1 = self.get(0, 1).powi(2) + self.get(0, 2).powi(2) + self.get(1, 2).powi(2);
                let q = self.trace() / 3.0;
                let p2 = (self.get(0, 0) - q).powi(2)
                    + (self.get(1, 1) - q).powi(2)
                    + (self.get(2, 2) - q).powi(2)
                    + 2.0 * p1;
                let p = (p2 / 6.0).sqrt();
                if p < 1e-300 {
                    return [q, q, q];
                }
                let mut b = *self;
                for i in 0..3 {
                    b.add_to(i, i, -q);
                }
                let b = b.scaled(1.0 / p);
                let r = (b.det() / 2.0).clamp(-1.0, 1.0);
                let phi = r.acos() / 3.0;
                let e1 = q + 2.0 * p * phi.cos();
                let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
                let e2 = 3.0 * q - e1 - e3;
                let mut v = [e1, e2, e3];
                v.sort_by(|x, y| x.partial_cmp(y).unwrap());
                v
            }
            _ => unreachable!(),
        }
    }

    pub fn lambda_max(&self) -> f64 {
        let ev = self.eigenvalues();
        if self.n == 2 {
            ev[1]
        } else {
            ev[2]
        }
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Spectral norm (largest eigenvalue magnitude).
    pub fn spec_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        let hi = if self.n == 2 { ev[1] } else { ev[2] };
        ev[0].abs().max(hi.abs())
    }

    /// Orthonormal eigenvectors in the same (ascending) order as
    /// [`Self::eigenvalues`]; cross-product method for 3x3.
    pub fn eigenvectors(&self) -> ([f64; 3], Vec<[f64; 3]>) {
        let ev = self.eigenvalues();
        match self.n {
            2 => {
                let a = self.get(0, 0);
                let b = self.get(0, 1);
                let d = self.get(1, 1);
                let lo = ev[0];
                // rows of (A - lo I) are both orthogonal to the lo-eigenvector
                let r1 = [a - lo, b];
                let r2 = [b, d - lo];
                let r = if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) {
                    r1
                } else {
                    r2
                };
                let nr = r[0].hypot(r[1]);
                let v0 = if nr < 1e-300 {
                    [1.0, 0.0, 0.0]
                } else {
                    [-r[1] / nr, r[0] / nr, 0.0]
                };
                let v1 = [-v0[1], v0[0], 0.0];
                ([ev[0], ev[1], f64::NAN], vec![v0, v1])
            }
            3 => {
                let scale = self.spec_norm().max(1e-300);
                let find = |lambda: f64| -> Option<[f64; 3]> {
                    let mut s = *self;
                    for i in 0..3 {
                        s.add_to(i, i, -lambda);
                    }
                    let rows: [[f64; 3]; 3] = [
                        [s.get(0, 0), s.get(0, 1), s.get(0, 2)],
                        [s.get(1, 0), s.get(1, 1), s.get(1, 2)],
                        [s.get(2, 0), s.get(2, 1), s.get(2, 2)],
                    ];
                    let mut best: Option<([f64; 3], f64)> = None;
                    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                        let c = cross(&rows[i], &rows[j]);
                        let nc = norm(3, &c);
                        if best.as_ref().map(|(_, n0)| nc > *n0).unwrap_or(true) {
                            best = Some((c, nc));
                        }
                    }
                    let (c, nc) = best.unwrap();
                    if nc > 1e-12 * scale * scale {
                        Some(scale3(&c, 1.0 / nc))
                    } else {
                        None
                    }
                };
                let mut vecs: Vec<[f64; 3]> = Vec::with_capacity(3);
                for k in 0..3 {
                    if let Some(v) = find(ev[k]) {
                        vecs.push(v);
                    } else {
                        vecs.push([f64::NAN; 3]);
                    }
                }
                // repair degenerate directions by orthonormal completion
                let good: Vec<usize> = (0..3).filter(|&k| !vecs[k][0].is_nan()).collect();
                match good.len() {
                    3 => {}
                    _ => {
                        let mut basis: Vec<[f64; 3]> = good.iter().map(|&k| vecs[k]).collect();
                        complete_basis(&mut basis);
                        let mut it = basis.into_iter();
                        let firsts: Vec<[f64; 3]> =
                            good.iter().map(|_| it.next().unwrap()).collect();
                        let mut rest: Vec<[f64; 3]> = it.collect();
                        let mut gi = 0;
                        for k in 0..3 {
                            if good.contains(&k) {
                                vecs[k] = firsts[gi];
                                gi += 1;
                            } else {
                                vecs[k] = rest.pop().unwrap();
                            }
                        }
                    }
                }
                (ev, vecs)
            }
            _ => unreachable!(),
        }
    }
}

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Extend a set of orthonormal 3-vectors to a full orthonormal basis of R^3,
/// deterministically (seeded by the most orthogonal standard basis vectors).
pub fn complete_basis(basis: &mut Vec<[f64; 3]>) {
    let mut cands: Vec<usize> = (0..3).collect();
    cands.sort_by(|&i, &j| {
        let pi: f64 = basis.iter().map(|b| b[i] * b[i]).sum();
        let pj: f64 = basis.iter().map(|b| b[j] * b[j]).sum();
        pi.partial_cmp(&pj).unwrap()
    });
    for &i in &cands {
        if basis.len() == 3 {
            break;
        }
        let mut v = [0.0; 3];
        v[i] = 1.0;
        for b in basis.iter() {
            let d = dot(3, &v, b);
            v = sub3(&v, &scale3(b, d));
        }
        let nv = norm(3, &v);
        if nv > 1e-8 {
            basis.push(scale3(&v, 1.0 / nv));
        }
    }
}

// ---------------------------------------------------------------------------
// Space-time symmetric matrices, dim in {3, 4}
// ---------------------------------------------------------------------------

/// Symmetric (1+n) x (1+n) space-time matrix, packed upper triangle row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StSymMat {
    pub dim: usize,
    a: [f64; 10],
}

fn st_idx(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // row-major packed upper triangle
    i * dim - i * (i + 1) / 2 + j
}

impl StSymMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 3 || dim == 4);
        StSymMat { dim, a: [0.0; 10] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[st_idx(self.dim, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[st_idx(self.dim, i, j)] = v;
    }

    pub fn to_dense(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[i][j] = self.get(i, j);
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i] += self.get(i, j) * v[j];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        let m = self.to_dense();
        match self.dim {
            3 => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
            4 => {
                let minor = |r: [usize; 3], c: [usize; 3]| -> f64 {
                    m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
                        - m[r[0]][c[1]]
                            * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
                        + m[r[0]][c[2]]
                            * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
                };
                m[0][0] * minor([1, 2, 3], [1, 2, 3]) - m[0][1] * minor([1, 2, 3], [0, 2, 3])
                    + m[0][2] * minor([1, 2, 3], [0, 1, 3])
                    - m[0][3] * minor([1, 2, 3], [0, 1, 2])
            }
            _ => unreachable!(),
        }
    }

    /// Cyclic Jacobi eigendecomposition; returns eigenvalues (ascending) and
    /// the matching orthonormal eigenvectors as rows.
    pub fn jacobi_eigen(&self) -> (Vec<f64>, Vec<[f64; 4]>) {
        let d = self.dim;
        let mut a = self.to_dense();
        let mut v = [[0.0; 4]; 4];
        for (i, row) in v.iter_mut().enumerate().take(d) {
            row[i] = 1.0;
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += a[i][j] * a[i][j];
                }
            }
            if off < 1e-280 {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut().take(d) {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
        let vals: Vec<f64> = idx.iter().map(|&i| a[i][i]).collect();
        let vecs: Vec<[f64; 4]> = idx
            .iter()
            .map(|&i| {
                let mut col = [0.0; 4];
                for k in 0..d {
                    col[k] = v[k][i];
                }
                col
            })
            .collect();
        (vals, vecs)
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(order: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<
        std::sync::Mutex<std::collections::HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>,
    > = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::HashMap::new()));
    let mut map = cache.lock().unwrap();
    if let Some(r) = map.get(&order) {
        return r;
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton iteration from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    let leaked: &'static (Vec<f64>, Vec<f64>) = Box::leak(Box::new((nodes, weights)));
    map.insert(order, leaked);
    leaked
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` with `cells` equal
/// cells of the given per-cell order.
pub fn integrate_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cells: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let lo = a + c as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Adaptive Simpson quadrature with absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        let s = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        (m, fm, s)
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

// ---------------------------------------------------------------------------
// Truncated Taylor jets (value + derivatives through order 4)
// ---------------------------------------------------------------------------

/// Value and first four derivatives of a scalar function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet5(pub [f64; 5]);

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

impl Jet5 {
    pub fn constant(v: f64) -> Self {
        Jet5([v, 0.0, 0.0, 0.0, 0.0])
    }

    /// The identity jet at `x` (value x, first derivative 1).
    pub fn var(x: f64) -> Self {
        Jet5([x, 1.0, 0.0, 0.0, 0.0])
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn add(&self, o: &Jet5) -> Jet5 {
        let mut r = [0.0; 5];
        for k in 0..5 {
            r[k] = self.0[k] + o.0[k];
        }
        Jet5(r)
    }

    pub fn sub(&self, o: &Jet5) -> Jet5 {
        let mut r = [0.0; 5];
        for k in 0..5 {
            r[k] = self.0[k] - o.0[k];
        }
        Jet5(r)
    }

    pub fn scale(&self, s: f64) -> Jet5 {
        let mut r = self.0;
        for v in r.iter_mut() {
            *v *= s;
        }
        Jet5(r)
    }

    pub fn mul(&self, o: &Jet5) -> Jet5 {
        let mut r = [0.0; 5];
        for (k, rk) in r.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..=k {
                s += BINOM[k][j] * self.0[j] * o.0[k - j];
            }
            *rk = s;
        }
        Jet5(r)
    }

    pub fn recip(&self) -> Jet5 {
        // derivatives of 1/f from (f * g = 1)
        let f = &self.0;
        let mut g = [0.0; 5];
        g[0] = 1.0 / f[0];
        for k in 1..5 {
            let mut s = 0.0;
            for j in 0..k {
                s += BINOM[k][j] * g[j] * f[k - j];
            }
            g[k] = -g[0] * s;
        }
        Jet5(g)
    }

    pub fn div(&self, o: &Jet5) -> Jet5 {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Jet5 {
        // e' = a' e, differentiated repeatedly (Leibniz)
        let a = &self.0;
        let mut e = [0.0; 5];
        e[0] = a[0].exp();
        for k in 1..5 {
            let mut s = 0.0;
            for j in 0..k {
                s += BINOM[k - 1][j] * a[j + 1] * e[k - 1 - j];
            }
            e[k] = s;
        }
        Jet5(e)
    }
}

// ---------------------------------------------------------------------------
// Root finding: safeguarded Newton within a bracket
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct RootError {
    pub last_x: f64,
}

/// Newton iteration safeguarded by bisection on a sign-changing bracket
/// `[lo, hi]`; converges to `rel_tol` relative accuracy in x.
pub fn newton_bisect(
    f_df: &dyn Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let (mut flo, _) = f_df(lo);
    let (fhi, _) = f_df(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError { last_x: lo });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f_df(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let dx = (next - x).abs();
        x = next;
        if dx <= rel_tol * x.abs().max(1e-300) || (hi - lo) <= rel_tol * x.abs().max(1e-300) {
            return Ok(x);
        }
    }
    Ok(x)
}
