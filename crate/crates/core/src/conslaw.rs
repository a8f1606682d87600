//! Fluxes, flux Jacobians, eigenstructure and entropy pairs of the barotropic
//! and full Euler systems, with companion-condition and Hessian-identity
//! checks used as test oracles.

use crate::eos::GammaLaw;
use crate::numerics::{complete_basis, dot, norm, scale3};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsLawError {
    #[error("density must be positive, got rho = {0}")]
    NonPositiveDensity(f64),
    #[error("internal energy must be positive (E - |m|^2/2rho = {0})")]
    NonPositiveInternalEnergy(f64),
    #[error("nu must be a unit vector (|nu| = {0})")]
    NotUnit(f64),
    #[error("entropy coefficient a must be non-negative, got {0}")]
    NegativeA(f64),
}

/// Conserved state of the barotropic system: density and momentum.
#[derive(Debug, Clone, Copy)]
pub struct ConsStateBaro {
    pub n: usize,
    pub rho: f64,
    pub m: [f64; 3],
}

impl ConsStateBaro {
    pub fn new(n: usize, rho: f64, m: [f64; 3]) -> Result<Self, ConsLawError> {
        if !(rho > 0.0) {
            return Err(ConsLawError::NonPositiveDensity(rho));
        }
        Ok(ConsStateBaro { n, rho, m })
    }
}

/// Conserved state of the full system: density, momentum and total energy.
#[derive(Debug, Clone, Copy)]
pub struct ConsStateFull {
    pub n: usize,
    pub rho: f64,
    pub m: [f64; 3],
    pub e_total: f64,
}

impl ConsStateFull {
    pub fn new(n: usize, rho: f64, m: [f64; 3], e_total: f64) -> Result<Self, ConsLawError> {
        if !(rho > 0.0) {
            return Err(ConsLawError::NonPositiveDensity(rho));
        }
        let internal = e_total - 0.5 * dot(n, &m, &m) / rho;
        if !(internal > 0.0) {
            return Err(ConsLawError::NonPositiveInternalEnergy(internal));
        }
        Ok(ConsStateFull { n, rho, m, e_total })
    }

    /// Pressure of the incomplete equation of state,
    /// `p = (gamma-1)(E - |m|^2/2rho)`.
    pub fn pressure(&self, gamma: f64) -> f64 {
        (gamma - 1.0) * (self.e_total - 0.5 * dot(self.n, &self.m, &self.m) / self.rho)
    }
}

/// Entropy function `Z` of the full system, with analytic first and second
/// derivatives.
#[derive(Clone)]
pub struct ZFunction {
    eval: Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>,
}

impl ZFunction {
    pub fn new(f: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static) -> Self {
        ZFunction { eval: Arc::new(f) }
    }

    pub fn constant(z0: f64) -> Self {
        Self::new(move |_| (z0, 0.0, 0.0))
    }

    pub fn identity() -> Self {
        Self::new(|s| (s, 1.0, 0.0))
    }

    /// `Z(s) = -exp(-s)`: increasing and concave, hence admissible.
    pub fn neg_exp() -> Self {
        Self::new(|s| (-(-s).exp(), (-s).exp(), -(-s).exp()))
    }

    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        (self.eval)(s)
    }
}

impl std::fmt::Debug for ZFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ZFunction")
    }
}

/// Specification of an entropy/entropy-flux pair.
#[derive(Debug, Clone)]
pub enum EntropyPairSpec {
    /// `eta = a (|m|^2/2rho + P(rho)) + m.b + c rho + d` with `a >= 0`.
    Baro { a: f64, b: [f64; 3], c: f64, d: f64 },
    /// `eta = -rho Z(log(p/rho^gamma)) + a E + m.b + c`.
    Full {
        z: ZFunction,
        a: f64,
        b: [f64; 3],
        c: f64,
    },
}

impl EntropyPairSpec {
    pub fn baro_energy() -> Self {
        EntropyPairSpec::Baro {
            a: 1.0,
            b: [0.0; 3],
            c: 0.0,
            d: 0.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Fluxes
// ---------------------------------------------------------------------------

/// Flux matrix of the barotropic system: rows `m^T` and `m(x)m/rho + p I`.
pub fn flux_baro(eos: &GammaLaw, st: &ConsStateBaro) -> Result<Vec<Vec<f64>>, ConsLawError> {
    let n = st.n;
    let p = eos
        .pressure(st.rho)
        .map_err(|_| ConsLawError::NonPositiveDensity(st.rho))?;
    let mut f = vec![vec![0.0; n]; 1 + n];
    for k in 0..n {
        f[0][k] = st.m[k];
        for i in 0..n {
            f[1 + i][k] = st.m[i] * st.m[k] / st.rho + if i == k { p } else { 0.0 };
        }
    }
    Ok(f)
}

/// Flux matrix of the full system: rows `m^T`, `m(x)m/rho + p I` and
/// `(E + p) m^T / rho`.
pub fn flux_full(gamma: f64, st: &ConsStateFull) -> Result<Vec<Vec<f64>>, ConsLawError> {
    let n = st.n;
    let p = st.pressure(gamma);
    if !(p > 0.0) {
        return Err(ConsLawError::NonPositiveInternalEnergy(p));
    }
    let mut f = vec![vec![0.0; n]; 2 + n];
    for k in 0..n {
        f[0][k] = st.m[k];
        for i in 0..n {
            f[1 + i][k] = st.m[i] * st.m[k] / st.rho + if i == k { p } else { 0.0 };
        }
        f[1 + n][k] = (st.e_total + p) * st.m[k] / st.rho;
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Flux Jacobians and eigenstructure
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EigenDecomp {
    /// `sum_k nu_k grad_U F_k`, dense.
    pub jacobian: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors matched to `eigenvalues`.
    pub eigenvectors: Vec<Vec<f64>>,
}

fn check_unit(n: usize, nu: &[f64; 3]) -> Result<(), ConsLawError> {
    let nn = norm(n, nu);
    if (nn - 1.0).abs() > 1e-10 {
        return Err(ConsLawError::NotUnit(nn));
    }
    Ok(())
}

fn tangential_frame(n: usize, nu: &[f64; 3]) -> Vec<[f64; 3]> {
    let mut basis = vec![*nu];
    if n == 2 {
        basis.push([-nu[1], nu[0], 0.0]);
    } else {
        complete_basis(&mut basis);
    }
    basis[1..].to_vec()
}

/// Directional flux Jacobian of the barotropic system and its closed-form
/// eigenpairs: `m.nu/rho -+ sqrt(p'(rho))` and `m.nu/rho` (multiplicity n-1).
pub fn flux_jacobian_eigen_baro(
    eos: &GammaLaw,
    st: &ConsStateBaro,
    nu: &[f64; 3],
) -> Result<EigenDecomp, ConsLawError> {
    let n = st.n;
    check_unit(n, nu)?;
    let dp = eos
        .pressure_derivative(st.rho)
        .map_err(|_| ConsLawError::NonPositiveDensity(st.rho))?;
    let c = dp.sqrt();
    let mnu = dot(n, &st.m, nu);
    let d = 1 + n;
    let mut j = vec![vec![0.0; d]; d];
    j[0][1..=n].copy_from_slice(&nu[..n]);
    for i in 0..n {
        j[1 + i][0] = -mnu * st.m[i] / (st.rho * st.rho) + dp * nu[i];
        for k in 0..n {
            j[1 + i][1 + k] = st.m[i] / st.rho * nu[k] + if i == k { mnu / st.rho } else { 0.0 };
        }
    }
    let u = scale3(&st.m, 1.0 / st.rho);
    let mut eigenvalues = Vec::with_capacity(d);
    let mut eigenvectors = Vec::with_capacity(d);
    // slow acoustic
    eigenvalues.push(mnu / st.rho - c);
    eigenvectors.push(stack_baro(n, 1.0, &sub_scaled(n, &u, nu, c)));
    // shear waves
    for a in tangential_frame(n, nu) {
        eigenvalues.push(mnu / st.rho);
        eigenvectors.push(stack_baro(n, 0.0, &a));
    }
    // fast acoustic
    eigenvalues.push(mnu / st.rho + c);
    eigenvectors.push(stack_baro(n, 1.0, &add_scaled(n, &u, nu, c)));
    Ok(EigenDecomp {
        jacobian: j,
        eigenvalues,
        eigenvectors,
    })
}

/// Directional flux Jacobian of the full system and its closed-form
/// eigenpairs: `m.nu/rho -+ sqrt(gamma p / rho)` and `m.nu/rho`
/// (multiplicity n).
pub fn flux_jacobian_eigen_full(
    gamma: f64,
    st: &ConsStateFull,
    nu: &[f64; 3],
) -> Result<EigenDecomp, ConsLawError> {
    let n = st.n;
    check_unit(n, nu)?;
    let p = st.pressure(gamma);
    if !(p > 0.0) {
        return Err(ConsLawError::NonPositiveInternalEnergy(p));
    }
    let rho = st.rho;
    let m = st.m;
    let e_tot = st.e_total;
    let c = (gamma * p / rho).sqrt();
    let mnu = dot(n, &m, nu);
    // pressure gradient pieces of the incomplete equation of state
    let dp_drho = 0.5 * (gamma - 1.0) * dot(n, &m, &m) / (rho * rho);
    let dp_dm: Vec<f64> = (0..n).map(|i| -(gamma - 1.0) * m[i] / rho).collect();
    let dp_de = gamma - 1.0;
    let d = 2 + n;
    let mut j = vec![vec![0.0; d]; d];
    j[0][1..=n].copy_from_slice(&nu[..n]);
    for i in 0..n {
        j[1 + i][0] = -mnu * m[i] / (rho * rho) + dp_drho * nu[i];
        for k in 0..n {
            j[1 + i][1 + k] =
                m[i] / rho * nu[k] + nu[i] * dp_dm[k] + if i == k { mnu / rho } else { 0.0 };
        }
        j[1 + i][1 + n] = dp_de * nu[i];
    }
    j[1 + n][0] = -(e_tot + p) * mnu / (rho * rho) + mnu / rho * dp_drho;
    for k in 0..n {
        j[1 + n][1 + k] = (e_tot + p) * nu[k] / rho + mnu / rho * dp_dm[k];
    }
    j[1 + n][1 + n] = mnu / rho + mnu / rho * dp_de;

    let u = scale3(&m, 1.0 / rho);
    let h = (e_tot + p) / rho;
    let mut eigenvalues = Vec::with_capacity(d);
    let mut eigenvectors = Vec::with_capacity(d);
    eigenvalues.push(mnu / rho - c);
    eigenvectors.push(stack_full(
        n,
        1.0,
        &sub_scaled(n, &u, nu, c),
        h - c * mnu / rho,
    ));
    for a in tangential_frame(n, nu) {
        eigenvalues.push(mnu / rho);
        eigenvectors.push(stack_full(n, 0.0, &a, dot(n, &m, &a) / rho));
    }
    eigenvalues.push(mnu / rho);
    eigenvectors.push(stack_full(n, 1.0, &u, 0.5 * dot(n, &m, &m) / (rho * rho)));
    eigenvalues.push(mnu / rho + c);
    eigenvectors.push(stack_full(
        n,
        1.0,
        &add_scaled(n, &u, nu, c),
        h + c * mnu / rho,
    ));
    Ok(EigenDecomp {
        jacobian: j,
        eigenvalues,
        eigenvectors,
    })
}

fn add_scaled(n: usize, a: &[f64; 3], b: &[f64; 3], s: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..n {
        out[i] = a[i] + s * b[i];
    }
    out
}

fn sub_scaled(n: usize, a: &[f64; 3], b: &[f64; 3], s: f64) -> [f64; 3] {
    add_scaled(n, a, b, -s)
}

fn stack_baro(n: usize, first: f64, rest: &[f64; 3]) -> Vec<f64> {
    let mut v = vec![first];
    v.extend_from_slice(&rest[..n]);
    v
}

fn stack_full(n: usize, first: f64, mid: &[f64; 3], last: f64) -> Vec<f64> {
    let mut v = vec![first];
    v.extend_from_slice(&mid[..n]);
    v.push(last);
    v
}

/// Max eigen residual `||(J - lambda I) v|| / (||J|| ||v||)` over all pairs.
pub fn eigen_residual(dec: &EigenDecomp) -> f64 {
    let d = dec.jacobian.len();
    let jnorm = dec
        .jacobian
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    let mut worst = 0.0_f64;
    for (lam, v) in dec.eigenvalues.iter().zip(dec.eigenvectors.iter()) {
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        for i in 0..d {
            let mut jv = 0.0;
            for k in 0..d {
                jv += dec.jacobian[i][k] * v[k];
            }
            worst = worst.max((jv - lam * v[i]).abs() / (jnorm * vnorm));
        }
    }
    worst
}

/// Rank check: eigenvectors linearly independent (Gram determinant away from
/// zero after normalization).
pub fn eigenvectors_independent(dec: &EigenDecomp) -> bool {
    let d = dec.eigenvectors.len();
    let mut g = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let ni = dec.eigenvectors[i]
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            let nj = dec.eigenvectors[j]
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            g[i][j] = dec.eigenvectors[i]
                .iter()
                .zip(dec.eigenvectors[j].iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / (ni * nj);
        }
    }
    det_dense(&g).abs() > 1e-10
}

fn det_dense(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let mut piv = col;
        for r in (col + 1)..d {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in (col + 1)..d {
            let f = a[r][col] / a[col][col];
            for c in col..d {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// Entropy pairs
// ---------------------------------------------------------------------------

/// Closed-form entropy/entropy-flux pair of the barotropic system.
pub fn entropy_pair_baro(
    eos: &GammaLaw,
    spec: &EntropyPairSpec,
    st: &ConsStateBaro,
) -> Result<(f64, Vec<f64>), ConsLawError> {
    let (a, b, c, d) = match spec {
        EntropyPairSpec::Baro { a, b, c, d } => (*a, *b, *c, *d),
        _ => panic!("baro pair requested with a full spec"),
    };
    if a < 0.0 {
        return Err(ConsLawError::NegativeA(a));
    }
    let n = st.n;
    let p = eos
        .pressure(st.rho)
        .map_err(|_| ConsLawError::NonPositiveDensity(st.rho))?;
    let pp = eos.pressure_potential(st.rho).expect("rho > 0");
    let kin = 0.5 * dot(n, &st.m, &st.m) / st.rho;
    let eta = a * (kin + pp) + dot(n, &st.m, &b) + c * st.rho + d;
    let mb = dot(n, &st.m, &b);
    let q: Vec<f64> = (0..n)
        .map(|k| {
            a * (kin + pp + p) * st.m[k] / st.rho + mb * st.m[k] / st.rho + p * b[k] + c * st.m[k]
        })
        .collect();
    Ok((eta, q))
}

/// Closed-form companion/flux pair of the full system.
pub fn entropy_pair_full(
    gamma: f64,
    spec: &EntropyPairSpec,
    st: &ConsStateFull,
) -> Result<(f64, Vec<f64>), ConsLawError> {
    let (z, a, b, c) = match spec {
        EntropyPairSpec::Full { z, a, b, c } => (z, *a, *b, *c),
        _ => panic!("full pair requested with a baro spec"),
    };
    let n = st.n;
    let p = st.pressure(gamma);
    if !(p > 0.0) {
        return Err(ConsLawError::NonPositiveInternalEnergy(p));
    }
    let s = (p / st.rho.powf(gamma)).ln();
    let (zv, _, _) = z.eval(s);
    let eta = -st.rho * zv + a * st.e_total + dot(n, &st.m, &b) + c;
    let mb = dot(n, &st.m, &b);
    let q: Vec<f64> = (0..n)
        .map(|k| {
            -st.m[k] * zv
                + a * (st.e_total + p) * st.m[k] / st.rho
                + mb * st.m[k] / st.rho
                + p * b[k]
        })
        .collect();
    Ok((eta, q))
}

// ---------------------------------------------------------------------------
// Companion condition (finite-difference oracle)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct CompanionResidual {
    /// max over k, j of `|d_{U_j} q_k - sum_i d_{U_i} eta d_{U_j} F_{ik}|`
    pub residual: f64,
    /// magnitude of the largest term entering the comparison
    pub scale: f64,
}

pub enum SystemState {
    Baro(ConsStateBaro),
    Full(ConsStateFull),
}

/// Central finite-difference check of the companion condition
/// `grad_U q_k = grad_U eta . grad_U F_k` (relative step 1e-6, floor 1e-8).
pub fn companion_residual(
    eos: &GammaLaw,
    spec: &EntropyPairSpec,
    state: &SystemState,
) -> Result<CompanionResidual, ConsLawError> {
    match state {
        SystemState::Baro(st) => {
            let n = st.n;
            let unpack = move |v: &[f64]| {
                let mut m = [0.0; 3];
                m[..n].copy_from_slice(&v[1..=n]);
                ConsStateBaro { n, rho: v[0], m }
            };
            let mut u0 = vec![st.rho];
            u0.extend_from_slice(&st.m[..n]);
            let eta_of = |v: &[f64]| entropy_pair_baro(eos, spec, &unpack(v)).map(|(e, _)| e);
            let q_of = |v: &[f64]| entropy_pair_baro(eos, spec, &unpack(v)).map(|(_, q)| q);
            let f_of = |v: &[f64]| flux_baro(eos, &unpack(v));
            fd_companion(&u0, n, &eta_of, &q_of, &f_of)
        }
        SystemState::Full(st) => {
            let n = st.n;
            let gamma = eos.gamma;
            let unpack = move |v: &[f64]| {
                let mut m = [0.0; 3];
                m[..n].copy_from_slice(&v[1..=n]);
                ConsStateFull {
                    n,
                    rho: v[0],
                    m,
                    e_total: v[1 + n],
                }
            };
            let mut u0 = vec![st.rho];
            u0.extend_from_slice(&st.m[..n]);
            u0.push(st.e_total);
            let eta_of = |v: &[f64]| entropy_pair_full(gamma, spec, &unpack(v)).map(|(e, _)| e);
            let q_of = |v: &[f64]| entropy_pair_full(gamma, spec, &unpack(v)).map(|(_, q)| q);
            let f_of = |v: &[f64]| flux_full(gamma, &unpack(v));
            fd_companion(&u0, n, &eta_of, &q_of, &f_of)
        }
    }
}

fn fd_companion(
    u0: &[f64],
    n: usize,
    eta_of: &dyn Fn(&[f64]) -> Result<f64, ConsLawError>,
    q_of: &dyn Fn(&[f64]) -> Result<Vec<f64>, ConsLawError>,
    f_of: &dyn Fn(&[f64]) -> Result<Vec<Vec<f64>>, ConsLawError>,
) -> Result<CompanionResidual, ConsLawError> {
    let d = u0.len();
    let step = |j: usize| (1e-6 * u0[j].abs()).max(1e-8);
    let grad_eta: Vec<f64> = (0..d)
        .map(|i| {
            let h = step(i);
            let mut up = u0.to_vec();
            let mut dn = u0.to_vec();
            up[i] += h;
            dn[i] -= h;
            Ok::<f64, ConsLawError>((eta_of(&up)? - eta_of(&dn)?) / (2.0 * h))
        })
        .collect::<Result<_, _>>()?;
    let mut residual = 0.0_f64;
    let mut scale = 1e-300_f64;
    for j in 0..d {
        let h = step(j);
        let mut up = u0.to_vec();
        let mut dn = u0.to_vec();
        up[j] += h;
        dn[j] -= h;
        let q_up = q_of(&up)?;
        let q_dn = q_of(&dn)?;
        let f_up = f_of(&up)?;
        let f_dn = f_of(&dn)?;
        for k in 0..n {
            let dq = (q_up[k] - q_dn[k]) / (2.0 * h);
            let mut rhs = 0.0;
            for i in 0..d {
                let df = (f_up[i][k] - f_dn[i][k]) / (2.0 * h);
                rhs += grad_eta[i] * df;
            }
            residual = residual.max((dq - rhs).abs());
            scale = scale.max(dq.abs()).max(rhs.abs());
        }
    }
    Ok(CompanionResidual { residual, scale })
}

// ---------------------------------------------------------------------------
// Hessian quadratic forms of the full system
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct HessianQuadForms {
    pub closed_a: f64,
    pub closed_b: f64,
    pub direct_a: f64,
    pub direct_b: f64,
}

/// The two quadratic forms `w^T A w >= 0` and `w^T B w <= 0` that control
/// convexity of the full-system companions; both the closed squared-term
/// forms and the direct matrix forms are returned.
pub fn hessian_quadforms_full(
    gamma: f64,
    rho: f64,
    m: &[f64; 3],
    p: f64,
    w: &[f64],
) -> Result<HessianQuadForms, ConsLawError> {
    if !(rho > 0.0) {
        return Err(ConsLawError::NonPositiveDensity(rho));
    }
    if !(p > 0.0) {
        return Err(ConsLawError::NonPositiveInternalEnergy(p));
    }
    let n = w.len() - 2;
    let g1 = gamma - 1.0;
    let wt = w[0];
    let wx = &w[1..=n];
    let ws = w[1 + n];
    let m2 = dot(n, m, m);
    let mwx: f64 = (0..n).map(|i| m[i] * wx[i]).sum();

    let lin_a = (0.5 * m2 / rho - p / g1) * wt - mwx + rho * ws;
    let mut shear = 0.0;
    for i in 0..n {
        let t = m[i] / rho * wt - wx[i];
        shear += t * t;
    }
    let closed_a = g1 * g1 / rho * lin_a * lin_a + g1 * p * p * wt * wt / rho + g1 * p * shear;
    let lin_b = (0.5 * m2 / rho - gamma * p / g1) * wt - mwx + rho * ws;
    let closed_b = -g1 * g1 / rho * lin_b * lin_b;

    // direct assembly of A and B
    let d = n + 2;
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![vec![0.0; d]; d];
    a[0][0] = gamma * p * p / rho + 0.25 * g1 * g1 * m2 * m2 / rho.powi(3);
    for i in 0..n {
        a[1 + i][0] = -0.5 * g1 * g1 * m2 / (rho * rho) * m[i];
        a[0][1 + i] = a[1 + i][0];
        for j in 0..n {
            a[1 + i][1 + j] = g1 * (if i == j { p } else { 0.0 } + g1 * m[i] * m[j] / rho);
        }
        a[1 + n][1 + i] = -g1 * g1 * m[i];
        a[1 + i][1 + n] = a[1 + n][1 + i];
    }
    a[1 + n][0] = 0.5 * g1 * g1 * m2 / rho - g1 * p;
    a[0][1 + n] = a[1 + n][0];
    a[1 + n][1 + n] = g1 * g1 * rho;

    let kappa = 0.5 * g1 * m2 / rho - gamma * p;
    b[0][0] = -kappa * kappa / rho;
    for i in 0..n {
        b[1 + i][0] = g1 * m[i] / rho * kappa;
        b[0][1 + i] = b[1 + i][0];
        for j in 0..n {
            b[1 + i][1 + j] = -g1 * g1 * m[i] * m[j] / rho;
        }
        b[1 + n][1 + i] = g1 * g1 * m[i];
        b[1 + i][1 + n] = b[1 + n][1 + i];
    }
    b[1 + n][0] = -g1 * kappa;
    b[0][1 + n] = b[1 + n][0];
    b[1 + n][1 + n] = -g1 * g1 * rho;

    let quad = |mat: &[Vec<f64>]| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += w[i] * mat[i][j] * w[j];
            }
        }
        s
    };
    Ok(HessianQuadForms {
        closed_a,
        closed_b,
        direct_a: quad(&a),
        direct_b: quad(&b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_baro(rng: &mut ChaCha8Rng, n: usize) -> ConsStateBaro {
        let rho = rng.gen_range(0.2..3.0);
        let mut m = [0.0; 3];
        for x in m.iter_mut().take(n) {
            *x = rng.gen_range(-1.5..1.5);
        }
        ConsStateBaro::new(n, rho, m).unwrap()
    }

    fn random_full(rng: &mut ChaCha8Rng, n: usize) -> ConsStateFull {
        let rho = rng.gen_range(0.2..3.0);
        let mut m = [0.0; 3];
        for x in m.iter_mut().take(n) {
            *x = rng.gen_range(-1.5..1.5);
        }
        let kin = 0.5 * dot(n, &m, &m) / rho;
        let e_total = kin + rng.gen_range(0.3..3.0);
        ConsStateFull::new(n, rho, m, e_total).unwrap()
    }

    #[test]
    fn flux_rest_states() {
        let eos = GammaLaw::new(1.0, 2.0).unwrap();
        let st = ConsStateBaro::new(2, 1.5, [0.0; 3]).unwrap();
        let f = flux_baro(&eos, &st).unwrap();
        let p = eos.pressure(1.5).unwrap();
        assert_eq!(f[0], vec![0.0, 0.0]);
        assert_eq!(f[1], vec![p, 0.0]);
        assert_eq!(f[2], vec![0.0, p]);

        let stf = ConsStateFull::new(2, 1.0, [0.0; 3], 2.5).unwrap();
        let ff = flux_full(1.4, &stf).unwrap();
        assert_eq!(ff[3], vec![0.0, 0.0]);
    }

    #[test]
    fn flux_baro_hand_value() {
        // (a=1, gamma=2, rho=1, m=(1,0)) -> [[1,0],[2,0],[0,1]]
        let eos = GammaLaw::new(1.0, 2.0).unwrap();
        let st = ConsStateBaro::new(2, 1.0, [1.0, 0.0, 0.0]).unwrap();
        let f = flux_baro(&eos, &st).unwrap();
        assert_eq!(f[0], vec![1.0, 0.0]);
        assert_eq!(f[1], vec![2.0, 0.0]);
        assert_eq!(f[2], vec![0.0, 1.0]);
    }

    #[test]
    fn eigen_baro_rest_spectrum() {
        let eos = GammaLaw::new(1.0, 2.0).unwrap();
        let st = ConsStateBaro::new(2, 1.3, [0.0; 3]).unwrap();
        let dec = flux_jacobian_eigen_baro(&eos, &st, &[0.0, 1.0, 0.0]).unwrap();
        let c = eos.sound_speed(1.3).unwrap();
        let mut ev = dec.eigenvalues.clone();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + c).abs() < 1e-14);
        assert!(ev[1].abs() < 1e-14);
        assert!((ev[2] - c).abs() < 1e-14);
        assert!(eigen_residual(&dec) < 1e-12);
    }

    #[test]
    fn eigen_full_rest_sound_speed() {
        let st = ConsStateFull::new(2, 1.0, [0.0; 3], 2.5).unwrap();
        let gamma = 1.4;
        let p = st.pressure(gamma);
        let c = (gamma * p / st.rho).sqrt();
        let dec = flux_jacobian_eigen_full(gamma, &st, &[1.0, 0.0, 0.0]).unwrap();
        let mut ev = dec.eigenvalues.clone();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + c).abs() < 1e-13);
        assert!((ev[3] - c).abs() < 1e-13);
        assert!(eigen_residual(&dec) < 1e-12);
    }

    #[test]
    fn eigen_random_states_residual_and_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eos = GammaLaw::new(0.8, 1.4).unwrap();
        for &n in &[2usize, 3] {
            for _ in 0..100 {
                let mut nu = [0.0; 3];
                for x in nu.iter_mut().take(n) {
                    *x = rng.gen_range(-1.0..1.0);
                }
                let s = norm(n, &nu);
                if s < 1e-3 {
                    continue;
                }
                for x in nu.iter_mut().take(n) {
                    *x /= s;
                }
                let st = random_baro(&mut rng, n);
                let dec = flux_jacobian_eigen_baro(&eos, &st, &nu).unwrap();
                assert!(eigen_residual(&dec) < 1e-9);
                assert!(eigenvectors_independent(&dec));
                let stf = random_full(&mut rng, n);
                let dec = flux_jacobian_eigen_full(1.4, &stf, &nu).unwrap();
                assert!(eigen_residual(&dec) < 1e-9);
                assert!(eigenvectors_independent(&dec));
            }
        }
        // non-unit direction rejected
        let st = random_baro(&mut rng, 2);
        assert!(flux_jacobian_eigen_baro(&eos, &st, &[1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn entropy_pair_baro_energy_at_rest() {
        let eos = GammaLaw::new(1.0, 2.0).unwrap();
        let st = ConsStateBaro::new(2, 1.7, [0.0; 3]).unwrap();
        let (eta, q) = entropy_pair_baro(&eos, &EntropyPairSpec::baro_energy(), &st).unwrap();
        assert!((eta - eos.pressure_potential(1.7).unwrap()).abs() < 1e-14);
        assert_eq!(q, vec![0.0, 0.0]);
    }

    #[test]
    fn entropy_pair_full_special_z() {
        // constant Z: eta = -rho Z0, q = -m Z0
        let st = ConsStateFull::new(2, 1.3, [0.4, -0.2, 0.0], 2.0).unwrap();
        let spec = EntropyPairSpec::Full {
            z: ZFunction::constant(2.5),
            a: 0.0,
            b: [0.0; 3],
            c: 0.0,
        };
        let (eta, q) = entropy_pair_full(1.4, &spec, &st).unwrap();
        assert!((eta + 1.3 * 2.5).abs() < 1e-14);
        assert!((q[0] + 0.4 * 2.5).abs() < 1e-14);
        assert!((q[1] + (-0.2) * 2.5).abs() < 1e-14);

        // identity Z composes with the physical entropy up to (gamma-1)
        let gamma = 1.4;
        let spec = EntropyPairSpec::Full {
            z: ZFunction::identity(),
            a: 0.0,
            b: [0.0; 3],
            c: 0.0,
        };
        let (eta, _) = entropy_pair_full(gamma, &spec, &st).unwrap();
        let p = st.pressure(gamma);
        let s = crate::eos::physical_entropy(gamma, st.rho, p).unwrap();
        assert!((eta + st.rho * (gamma - 1.0) * s).abs() < 1e-12);
    }

    #[test]
    fn companion_residual_valid_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eos = GammaLaw::new(1.0, 1.4).unwrap();
        for _ in 0..50 {
            let st = random_baro(&mut rng, 2);
            let r = companion_residual(
                &eos,
                &EntropyPairSpec::baro_energy(),
                &SystemState::Baro(st),
            )
            .unwrap();
            assert!(
                r.residual <= 1e-5 * r.scale,
                "{} vs {}",
                r.residual,
                r.scale
            );
            // linear pair
            let spec = EntropyPairSpec::Baro {
                a: 0.0,
                b: [0.3, -0.7, 0.0],
                c: 1.1,
                d: 0.4,
            };
            let r = companion_residual(&eos, &spec, &SystemState::Baro(st)).unwrap();
            assert!(r.residual <= 1e-6 * r.scale.max(1.0));
            // full pair with admissible Z
            let stf = random_full(&mut rng, 2);
            let spec = EntropyPairSpec::Full {
                z: ZFunction::neg_exp(),
                a: 0.2,
                b: [0.1, 0.2, 0.0],
                c: 0.3,
            };
            let r = companion_residual(&eos, &spec, &SystemState::Full(stf)).unwrap();
            assert!(r.residual <= 1e-5 * r.scale);
        }
    }

    #[test]
    fn companion_residual_detects_corruption() {
        let eos = GammaLaw::new(1.0, 1.4).unwrap();
        let st = ConsStateBaro::new(2, 1.0, [0.5, -0.3, 0.0]).unwrap();
        let pack = [st.rho, st.m[0], st.m[1]];
        let eta_of = |v: &[f64]| {
            let s = ConsStateBaro::new(2, v[0], [v[1], v[2], 0.0]).unwrap();
            entropy_pair_baro(&eos, &EntropyPairSpec::baro_energy(), &s).map(|(e, _)| e)
        };
        // q corrupted by one percent in the first component
        let q_of = |v: &[f64]| {
            let s = ConsStateBaro::new(2, v[0], [v[1], v[2], 0.0]).unwrap();
            entropy_pair_baro(&eos, &EntropyPairSpec::baro_energy(), &s).map(|(_, mut q)| {
                q[0] *= 1.01;
                q
            })
        };
        let f_of = |v: &[f64]| {
            let s = ConsStateBaro::new(2, v[0], [v[1], v[2], 0.0]).unwrap();
            flux_baro(&eos, &s)
        };
        let r = fd_companion(&pack, 2, &eta_of, &q_of, &f_of).unwrap();
        assert!(r.residual > 1e-2, "corruption undetected: {}", r.residual);
    }

    #[test]
    fn baro_hessian_matches_finite_differences() {
        // FD Hessian of the energy entropy vs
        // (a/rho) [[p' + |m|^2/rho^2, -m^T/rho], [-m/rho, I]]
        let eos = GammaLaw::new(1.0, 1.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let st = random_baro(&mut rng, 2);
            let u0 = [st.rho, st.m[0], st.m[1]];
            let eta = |v: &[f64]| {
                let s = ConsStateBaro::new(2, v[0], [v[1], v[2], 0.0]).unwrap();
                entropy_pair_baro(&eos, &EntropyPairSpec::baro_energy(), &s)
                    .unwrap()
                    .0
            };
            let mut hess = [[0.0_f64; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let hi = 1e-4 * u0[i].abs().max(0.5);
                    let hj = 1e-4 * u0[j].abs().max(0.5);
                    let mut pp = u0;
                    pp[i] += hi;
                    pp[j] += hj;
                    let mut pm = u0;
                    pm[i] += hi;
                    pm[j] -= hj;
                    let mut mp = u0;
                    mp[i] -= hi;
                    mp[j] += hj;
                    let mut mm = u0;
                    mm[i] -= hi;
                    mm[j] -= hj;
                    hess[i][j] = (eta(&pp) - eta(&pm) - eta(&mp) + eta(&mm)) / (4.0 * hi * hj);
                }
            }
            let f = 1.0 / st.rho;
            let dp = eos.pressure_derivative(st.rho).unwrap();
            let m2 = dot(2, &st.m, &st.m);
            let want = [
                [
                    f * (dp + m2 / (st.rho * st.rho)),
                    -f * st.m[0] / st.rho,
                    -f * st.m[1] / st.rho,
                ],
                [-f * st.m[0] / st.rho, f, 0.0],
                [-f * st.m[1] / st.rho, 0.0, f],
            ];
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (hess[i][j] - want[i][j]).abs() < 1e-4 * (1.0 + want[i][j].abs()),
                        "H[{i}][{j}] = {} vs {}",
                        hess[i][j],
                        want[i][j]
                    );
                }
            }
            // positive semidefiniteness via the squared-term identity
            for _ in 0..20 {
                let w = [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ];
                let mut quad = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        quad += w[i] * want[i][j] * w[j];
                    }
                }
                let t0 = f * w[0] * w[0] * dp;
                let mut t1 = 0.0;
                for i in 0..2 {
                    let ti = w[0] * st.m[i] / st.rho - w[1 + i];
                    t1 += ti * ti;
                }
                let ident = t0 + f * t1;
                assert!((quad - ident).abs() < 1e-10 * (1.0 + ident.abs()));
                assert!(quad >= -1e-12);
            }
        }
    }

    #[test]
    fn hessian_quadforms_zero_and_hand_case() {
        let hq = hessian_quadforms_full(1.4, 1.0, &[0.0; 3], 1.0, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(hq.closed_a, 0.0);
        assert_eq!(hq.closed_b, 0.0);
        // m = 0, w = (0, a, 0): w^T A w = (gamma-1) p |a|^2, w^T B w = 0
        let g = 1.4;
        let p = 0.7;
        let w = [0.0, 0.3, -0.4, 0.0];
        let hq = hessian_quadforms_full(g, 1.2, &[0.0; 3], p, &w).unwrap();
        let want = (g - 1.0) * p * (0.09 + 0.16);
        assert!((hq.closed_a - want).abs() < 1e-14);
        assert!(hq.closed_b.abs() < 1e-14);
        assert!((hq.direct_a - want).abs() < 1e-12);
        assert!(hq.direct_b.abs() < 1e-12);
    }

    #[test]
    fn hessian_quadforms_agree_and_signed() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let n = if rng.gen_bool(0.5) { 2 } else { 3 };
            let gamma = rng.gen_range(1.1..2.5);
            let rho = rng.gen_range(0.2..3.0);
            let p = rng.gen_range(0.2..3.0);
            let mut m = [0.0; 3];
            for x in m.iter_mut().take(n) {
                *x = rng.gen_range(-1.5..1.5);
            }
            let mut w = vec![0.0; n + 2];
            for x in w.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            let hq = hessian_quadforms_full(gamma, rho, &m, p, &w).unwrap();
            let scale = hq.closed_a.abs().max(hq.closed_b.abs()).max(1.0);
            assert!((hq.closed_a - hq.direct_a).abs() <= 1e-10 * scale);
            assert!((hq.closed_b - hq.direct_b).abs() <= 1e-10 * scale);
            assert!(hq.closed_a >= -1e-12 * scale);
            assert!(hq.closed_b <= 1e-12 * scale);
        }
    }

    #[test]
    fn full_hessian_psd_for_admissible_z() {
        // Z' >= 0, Z'' <= 0: Z'/p^2 wAw + Z''/p^2 wBw >= 0 since wAw >= 0 >= wBw
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let z = ZFunction::neg_exp();
        for _ in 0..1000 {
            let gamma = 1.4;
            let rho = rng.gen_range(0.2..2.0);
            let p = rng.gen_range(0.2..2.0);
            let m = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0];
            let w = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let hq = hessian_quadforms_full(gamma, rho, &m, p, &w).unwrap();
            let s = (p / rho.powf(gamma)).ln();
            let (_, zp, zpp) = z.eval(s);
            let quad = zp / (p * p) * hq.closed_a + zpp / (p * p) * hq.closed_b;
            assert!(quad >= -1e-10);
        }
    }

    #[test]
    fn companion_linearity_in_coefficients() {
        let eos = GammaLaw::new(1.0, 2.0).unwrap();
        let st = ConsStateBaro::new(2, 1.4, [0.7, -0.1, 0.0]).unwrap();
        let s1 = EntropyPairSpec::Baro {
            a: 0.5,
            b: [0.1, 0.2, 0.0],
            c: 0.3,
            d: 0.4,
        };
        let s2 = EntropyPairSpec::Baro {
            a: 0.2,
            b: [-0.3, 0.5, 0.0],
            c: -0.1,
            d: 1.0,
        };
        let sum = EntropyPairSpec::Baro {
            a: 0.7,
            b: [-0.2, 0.7, 0.0],
            c: 0.2,
            d: 1.4,
        };
        let (e1, q1) = entropy_pair_baro(&eos, &s1, &st).unwrap();
        let (e2, q2) = entropy_pair_baro(&eos, &s2, &st).unwrap();
        let (es, qs) = entropy_pair_baro(&eos, &sum, &st).unwrap();
        assert!((e1 + e2 - es).abs() < 1e-12);
        for k in 0..2 {
            assert!((q1[k] + q2[k] - qs[k]).abs() < 1e-12);
        }
    }
}
