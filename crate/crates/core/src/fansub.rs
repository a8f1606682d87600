//! Fan subsolutions: construction, verification and parameter search. The
//! isentropic side implements the shock/rarefaction machinery (the beta/eps
//! closed forms, the candidate assignments, and the auxiliary-state patching
//! for large rarefactions); the full-Euler side implements the two-parameter
//! eps/eps-bar continuation away from the two-shock self-similar solution.

use crate::eos::physical_entropy;
use crate::numerics::SymMat;
use crate::riemann::{
    solve_full_two_shock, solve_isen, MiddleState, RiemannDataFull, RiemannDataIsen, RiemannError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FansubError {
    #[error("shock/rarefaction regime violated: {0}")]
    Regime(String),
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error(transparent)]
    Riemann(#[from] RiemannError),
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

/// Unknowns of the isentropic one-wedge algebraic system.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FanCandidateIsen {
    pub mu0: f64,
    pub mu1: f64,
    pub rho1: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub delta1: f64,
    pub big_c1: f64,
}

impl FanCandidateIsen {
    /// Wedge phase point `(rho_1, m_1, U_1)` and trace constant `c_1`.
    pub fn wedge_state(&self, eos: &crate::eos::GammaLaw) -> (f64, [f64; 3], SymMat, f64) {
        let m = [self.rho1 * self.alpha1, self.rho1 * self.beta1, 0.0];
        let mut u = SymMat::zeros(2);
        u.set(0, 0, self.rho1 * self.gamma1);
        u.set(0, 1, self.rho1 * self.delta1);
        u.set(1, 1, -self.rho1 * self.gamma1);
        let c1 = self.rho1 * self.big_c1 / 2.0 + eos.pressure(self.rho1).expect("rho1 > 0");
        (self.rho1, m, u, c1)
    }
}

/// Per-wedge unknowns of the full-Euler two-wedge system.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FullWedge {
    pub rho: f64,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub big_c: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FanCandidateFull {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub wedge1: FullWedge,
    pub wedge2: FullWedge,
}

impl FullWedge {
    pub fn state(&self) -> (f64, [f64; 3], SymMat, f64) {
        let m = [self.rho * self.alpha, self.rho * self.beta, 0.0];
        let mut u = SymMat::zeros(2);
        u.set(0, 0, self.rho * self.gamma);
        u.set(0, 1, self.rho * self.delta);
        u.set(1, 1, -self.rho * self.gamma);
        let c = self.rho * self.big_c / 2.0 + self.p;
        (self.rho, m, u, c)
    }
}

// ---------------------------------------------------------------------------
// Verification reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct NamedValue {
    pub name: &'static str,
    pub value: f64,
}

/// Residuals and margins of a candidate against the algebraic system.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub residuals: Vec<NamedValue>,
    /// strict margins (subsolution interior, speed order): must be > 0
    pub strict_margins: Vec<NamedValue>,
    /// weak margins (admissibility): must be >= 0
    pub weak_margins: Vec<NamedValue>,
    pub scale: f64,
    /// `c_i - lambda_max` per wedge, the e-functional gap
    pub e_gaps: Vec<f64>,
    /// |determinant/trace margins - eigenvalue margins| consistency defect
    pub eigen_consistency: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .fold(0.0_f64, |a, e| a.max(e.value.abs()))
    }
}

// ---------------------------------------------------------------------------
// Isentropic shock/rarefaction machinery
// ---------------------------------------------------------------------------

/// Validate the 1-shock/3-rarefaction regime and return the radicand
/// `(rho- - rho+)(p- - p+) - rho+ rho- (v- - v+)^2`, which is positive there.
fn sr_regime(data: &RiemannDataIsen) -> Result<f64, FansubError> {
    data.validate()?;
    let eos = &data.eos;
    if !(data.rho_minus < data.rho_plus) {
        return Err(FansubError::Regime(format!(
            "need rho- < rho+, got {} >= {}",
            data.rho_minus, data.rho_plus
        )));
    }
    if (data.u_minus - data.u_plus).abs() > 1e-12 * (1.0 + data.u_minus.abs()) {
        return Err(FansubError::Regime(format!(
            "need u- = u+, got {} vs {}",
            data.u_minus, data.u_plus
        )));
    }
    let dv = data.v_plus - data.v_minus;
    let upper = eos
        .rarefaction_integral(data.rho_minus, data.rho_plus)
        .unwrap();
    let lower = -crate::riemann::shock_jump(eos, data.rho_minus, data.rho_plus);
    if !(dv < upper) {
        return Err(FansubError::Regime(format!(
            "need v+ - v- < {upper:.6e} (rarefaction bound), got {dv:.6e}"
        )));
    }
    if !(dv > lower) {
        return Err(FansubError::Regime(format!(
            "need v+ - v- > {lower:.6e} (shock bound), got {dv:.6e}"
        )));
    }
    let p_minus = eos.pressure(data.rho_minus).unwrap();
    let p_plus = eos.pressure(data.rho_plus).unwrap();
    let rad = (data.rho_minus - data.rho_plus) * (p_minus - p_plus)
        - data.rho_plus * data.rho_minus * dv * dv;
    if rad <= 0.0 {
        return Err(FansubError::Regime(format!(
            "radicand {rad:.6e} not positive"
        )));
    }
    Ok(rad)
}

/// The closed forms `beta_1(rho_1)` and `eps_1(rho_1)` of the one-parameter
/// family solving the six Rankine-Hugoniot equations.
pub fn isen_beta1_eps1(data: &RiemannDataIsen, rho1: f64) -> Result<(f64, f64), FansubError> {
    let rad = sr_regime(data)?;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    if !(rho1 > rl && rho1 < rr) {
        return Err(FansubError::Domain(format!(
            "rho1 must lie strictly in ({rl}, {rr}), got {rho1}"
        )));
    }
    let eos = &data.eos;
    let (vl, vr) = (data.v_minus, data.v_plus);
    let beta1 = (-rl * vl * (rr - rho1) - rr * vr * (rho1 - rl)
        + (rad * (rho1 - rl) * (rr - rho1)).sqrt())
        / (rho1 * (rl - rr));
    let p1 = eos.pressure(rho1).unwrap();
    let pl = eos.pressure(rl).unwrap();
    let inner = rr * (vl - vr) + (rad * (rr - rho1) / (rho1 - rl)).sqrt();
    let eps1 = -(p1 - pl) / rho1
        + rl * (rho1 - rl) / (rho1 * rho1 * (rl - rr) * (rl - rr)) * inner * inner;
    Ok((beta1, eps1))
}

/// Assemble the full candidate from `(rho_1, eps~_1)` by the closed
/// assignments (interface speeds from the radicals, `alpha_1 = u-`,
/// `gamma_1` and `C_1` from the eps bookkeeping).
pub fn isen_build_sr(
    data: &RiemannDataIsen,
    rho1: f64,
    eps_tilde1: f64,
) -> Result<FanCandidateIsen, FansubError> {
    let rad = sr_regime(data)?;
    if !(eps_tilde1 > 0.0) {
        return Err(FansubError::Domain(format!(
            "eps~_1 must be positive, got {eps_tilde1}"
        )));
    }
    let (beta1, eps1) = isen_beta1_eps1(data, rho1)?;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    let (vl, vr) = (data.v_minus, data.v_plus);
    let base = (rl * vl - rr * vr) / (rl - rr);
    let mu0 = base + (rad * (rr - rho1) / (rho1 - rl)).sqrt() / (rl - rr);
    let mu1 = base - (rad * (rho1 - rl) / (rr - rho1)).sqrt() / (rl - rr);
    let u = data.u_minus;
    Ok(FanCandidateIsen {
        mu0,
        mu1,
        rho1,
        alpha1: u,
        beta1,
        gamma1: 0.5 * (eps_tilde1 - eps1 + u * u - beta1 * beta1),
        delta1: u * beta1,
        big_c1: eps_tilde1 + eps1 + u * u + beta1 * beta1,
    })
}

/// Check a candidate against the six Rankine-Hugoniot equations, the two
/// subsolution inequalities, the two admissibility inequalities and the
/// speed order, cross-checking the subsolution conditions against the
/// eigenvalues of the wedge constraint matrix.
pub fn isen_verify(cand: &FanCandidateIsen, data: &RiemannDataIsen) -> VerifyReport {
    let eos = &data.eos;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    let (ul, ur) = (data.u_minus, data.u_plus);
    let (vl, vr) = (data.v_minus, data.v_plus);
    let pl = eos.pressure(rl).unwrap();
    let pr = eos.pressure(rr).unwrap();
    let ppl = eos.pressure_potential(rl).unwrap();
    let ppr = eos.pressure_potential(rr).unwrap();
    let r1 = cand.rho1;
    let p1 = eos.pressure(r1).unwrap();
    let pp1 = eos.pressure_potential(r1).unwrap();
    let (a1, b1, g1, d1, cc1) = (
        cand.alpha1,
        cand.beta1,
        cand.gamma1,
        cand.delta1,
        cand.big_c1,
    );
    let (mu0, mu1) = (cand.mu0, cand.mu1);

    let residuals = vec![
        NamedValue {
            name: "rh-left-mass",
            value: mu0 * (rl - r1) - (rl * vl - r1 * b1),
        },
        NamedValue {
            name: "rh-left-tangential",
            value: mu0 * (rl * ul - r1 * a1) - (rl * ul * vl - r1 * d1),
        },
        NamedValue {
            name: "rh-left-normal",
            value: mu0 * (rl * vl - r1 * b1) - (rl * vl * vl - r1 * (cc1 / 2.0 - g1) + pl - p1),
        },
        NamedValue {
            name: "rh-right-mass",
            value: mu1 * (r1 - rr) - (r1 * b1 - rr * vr),
        },
        NamedValue {
            name: "rh-right-tangential",
            value: mu1 * (r1 * a1 - rr * ur) - (r1 * d1 - rr * ur * vr),
        },
        NamedValue {
            name: "rh-right-normal",
            value: mu1 * (r1 * b1 - rr * vr) - (r1 * (cc1 / 2.0 - g1) - rr * vr * vr + p1 - pr),
        },
    ];
    let sc1 = cc1 - a1 * a1 - b1 * b1;
    let sc2 =
        (cc1 / 2.0 - a1 * a1 + g1) * (cc1 / 2.0 - b1 * b1 - g1) - (d1 - a1 * b1) * (d1 - a1 * b1);
    let strict_margins = vec![
        NamedValue {
            name: "subsolution-trace",
            value: sc1,
        },
        NamedValue {
            name: "subsolution-det",
            value: sc2,
        },
        NamedValue {
            name: "speed-order",
            value: mu1 - mu0,
        },
    ];
    let el = 0.5 * rl * (ul * ul + vl * vl) + ppl;
    let er = 0.5 * rr * (ur * ur + vr * vr) + ppr;
    let e1 = 0.5 * r1 * cc1 + pp1;
    let adml = ((el + pl) * vl - (e1 + p1) * b1) - mu0 * (el - e1);
    let admr = ((e1 + p1) * b1 - (er + pr) * vr) - mu1 * (e1 - er);
    let weak_margins = vec![
        NamedValue {
            name: "admissibility-left",
            value: adml,
        },
        NamedValue {
            name: "admissibility-right",
            value: admr,
        },
    ];
    let scale = [
        rl * vl.abs(),
        r1 * b1.abs(),
        rr * vr.abs(),
        pl + p1 + pr,
        r1 * cc1.abs(),
        el.abs() + e1.abs() + er.abs(),
        mu0.abs().max(mu1.abs()) * (rl + r1 + rr),
    ]
    .into_iter()
    .fold(1.0_f64, f64::max);

    // cross-check: both eigenvalues of the wedge constraint matrix below c_1
    let (_, m1, u_mat, c1) = cand.wedge_state(eos);
    let mut a = SymMat::identity(2).scaled(p1);
    a = a.plus_outer(&m1, 1.0 / r1);
    let a = a.minus(&u_mat);
    let ev = a.eigenvalues();
    let e_gap = c1 - ev[1];
    // the algebraic margins equal the eigenvalue margins:
    // 2 c1 - tr = rho1 sc1 and (c1 - l1)(c1 - l2) = rho1^2 sc2
    let cons1 = (2.0 * c1 - (ev[0] + ev[1])) - r1 * sc1;
    let cons2 = (c1 - ev[0]) * (c1 - ev[1]) - r1 * r1 * sc2;
    let eigen_consistency = (cons1.abs() / (1.0 + c1.abs())).max(cons2.abs() / (1.0 + c1 * c1));

    let pass = residuals.iter().all(|e| e.value.abs() <= 1e-9 * scale)
        && strict_margins.iter().all(|e| e.value > 0.0)
        && weak_margins.iter().all(|e| e.value >= -1e-13 * scale)
        && e_gap > 0.0;
    VerifyReport {
        residuals,
        strict_margins,
        weak_margins,
        scale,
        e_gaps: vec![e_gap],
        eigen_consistency,
        pass,
    }
}

/// Admissibility slack functions: the candidate built from `(rho_1, eps~_1)`
/// satisfies the two admissibility inequalities exactly when `A >= 0` and
/// `B >= 0`; both are positive near the left density for weak rarefactions.
pub fn isen_ab_functions(
    data: &RiemannDataIsen,
    rho1: f64,
    eps_tilde1: f64,
) -> Result<(f64, f64), FansubError> {
    let (beta1, eps1) = isen_beta1_eps1(data, rho1)?;
    let eos = &data.eos;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    let (vl, vr) = (data.v_minus, data.v_plus);
    let p = |r: f64| eos.pressure(r).unwrap();
    let pp = |r: f64| eos.pressure_potential(r).unwrap();
    let a = eps1 * rho1 * (beta1 + vl)
        - (eps1 + eps_tilde1) * rl * rho1 * (beta1 - vl) / (rl - rho1)
        - (beta1 - vl) * (p(rl) + p(rho1) - 2.0 * (rho1 * pp(rl) - rl * pp(rho1)) / (rl - rho1));
    let b = -eps1 * rho1 * (vr + beta1)
        + (eps1 + eps_tilde1) * rho1 * rr * (vr - beta1) / (rho1 - rr)
        - (vr - beta1) * (p(rho1) + p(rr) - 2.0 * (rr * pp(rho1) - rho1 * pp(rr)) / (rho1 - rr));
    Ok((a, b))
}

/// Grid specification for the shock/rarefaction subsolution search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SrGrid {
    pub n_rho: usize,
    pub n_eps: usize,
    /// upper end of the geometric eps~ sweep; defaults to p(rho+)
    pub eps_tilde_max: Option<f64>,
}

impl Default for SrGrid {
    fn default() -> Self {
        SrGrid {
            n_rho: 48,
            n_eps: 40,
            eps_tilde_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SrSolution {
    pub rho1: f64,
    pub eps_tilde1: f64,
    pub candidate: FanCandidateIsen,
}

/// Scan `(rho_1, eps~_1)` for a verified subsolution candidate: `rho_1` over
/// a grid of `(rho-, rho+)` refined geometrically toward both endpoints,
/// `eps~_1` over a geometric sweep. Returns the first hit.
pub fn isen_search_sr(
    data: &RiemannDataIsen,
    grid: &SrGrid,
) -> Result<Option<SrSolution>, FansubError> {
    sr_regime(data)?;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    let eps_max = grid
        .eps_tilde_max
        .unwrap_or_else(|| data.eos.pressure(rr).unwrap());
    // interleave a uniform grid with dyadic refinements toward each endpoint
    let mut fractions: Vec<f64> = Vec::new();
    let uniform = grid.n_rho / 2;
    for i in 1..=uniform {
        fractions.push(i as f64 / (uniform + 1) as f64);
    }
    let dyadic = (grid.n_rho - uniform) / 2;
    for k in 1..=dyadic {
        let t = 0.5_f64.powi(k as i32 + 1);
        fractions.push(t);
        fractions.push(1.0 - t);
    }
    fractions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &t in &fractions {
        let rho1 = rl + t * (rr - rl);
        let Ok((_, eps1)) = isen_beta1_eps1(data, rho1) else {
            continue;
        };
        if eps1 <= 0.0 {
            continue;
        }
        for j in 0..grid.n_eps {
            let eps_tilde1 = eps_max * 0.5_f64.powi(j as i32);
            let Ok((a, b)) = isen_ab_functions(data, rho1, eps_tilde1) else {
                continue;
            };
            if a <= 0.0 || b <= 0.0 {
                continue;
            }
            let cand = isen_build_sr(data, rho1, eps_tilde1)?;
            let report = isen_verify(&cand, data);
            if report.pass {
                return Ok(Some(SrSolution {
                    rho1,
                    eps_tilde1,
                    candidate: cand,
                }));
            }
        }
    }
    Ok(None)
}

/// Result of the auxiliary-state patching for large rarefactions.
#[derive(Debug, Clone, Serialize)]
pub struct AuxPatch {
    pub rho_aux: f64,
    pub v_aux: f64,
    /// the sub-problem from the left state to the auxiliary state
    pub sub_data: RiemannDataIsen,
    pub solution: SrSolution,
    /// `v+ - v_a - int_{rho_a}^{rho+} sqrt(p')/r`, zero by construction
    pub rarefaction_identity: f64,
    /// `lambda_3(rho_a, v_a) - mu_1`, positive when patching is possible
    pub patch_margin: f64,
    pub feasible: bool,
}

/// Patch a wedge subsolution to a large 3-rarefaction through an auxiliary
/// state: walk `rho_a` from `rho+` toward the intermediate density until the
/// direct search succeeds on the shortened problem, then verify that the
/// remainder is a pure 3-rarefaction and that the wedge stays behind it.
pub fn isen_aux_patch(data: &RiemannDataIsen, grid: &SrGrid) -> Result<AuxPatch, FansubError> {
    sr_regime(data)?;
    let eos = &data.eos;
    let fan = solve_isen(data)?;
    let (rho_m, v_m) = match fan.middle {
        MiddleState::Isen { rho_m, v_m, .. } => (rho_m, v_m),
        _ => unreachable!(),
    };
    if fan.case != 5 {
        return Err(FansubError::Regime(format!(
            "self-similar solution is case {}, not a 1-shock/3-rarefaction",
            fan.case
        )));
    }
    let mut rho_a = data.rho_plus;
    loop {
        let v_a = v_m + eos.rarefaction_integral(rho_m, rho_a).unwrap();
        let sub_data = RiemannDataIsen {
            eos: *eos,
            rho_minus: data.rho_minus,
            rho_plus: rho_a,
            u_minus: data.u_minus,
            u_plus: data.u_minus,
            v_minus: data.v_minus,
            v_plus: v_a,
        };
        if let Some(solution) = isen_search_sr(&sub_data, grid)? {
            let identity =
                (data.v_plus - v_a) - eos.rarefaction_integral(rho_a, data.rho_plus).unwrap();
            let lambda3 = v_a + eos.sound_speed(rho_a).unwrap();
            let patch_margin = lambda3 - solution.candidate.mu1;
            let feasible = patch_margin > 0.0;
            return Ok(AuxPatch {
                rho_aux: rho_a,
                v_aux: v_a,
                sub_data,
                solution,
                rarefaction_identity: identity,
                patch_margin,
                feasible,
            });
        }
        rho_a = rho_m + 0.5 * (rho_a - rho_m);
        if rho_a - rho_m < 1e-12 * rho_m {
            return Err(FansubError::SearchExhausted(
                "auxiliary density reached the intermediate density".into(),
            ));
        }
    }
}

// ---------------------------------------------------------------------------
// Full Euler: eps / eps-bar continuation
// ---------------------------------------------------------------------------

/// Shift all velocities so that `u = 0` on both sides and the contact is at
/// rest (`v_M = 0`); returns the shifted data and the `(u, v)` shift applied.
pub fn normalize_galilean(
    data: &RiemannDataFull,
) -> Result<(RiemannDataFull, [f64; 2]), FansubError> {
    let fan = solve_full_two_shock(data)?;
    let v_m = match fan.middle {
        MiddleState::Full { v_m, .. } => v_m,
        _ => unreachable!(),
    };
    let shift = [data.u_minus, v_m];
    let mut out = *data;
    out.u_minus -= shift[0];
    out.u_plus -= shift[0];
    out.v_minus -= shift[1];
    out.v_plus -= shift[1];
    Ok((out, shift))
}

/// Precomputed two-shock background for the continuation: the self-similar
/// middle states and the constructively located parameter bound `eps_max`.
#[derive(Debug, Clone)]
pub struct FullTwoShock {
    pub data: RiemannDataFull,
    pub rho_ml: f64,
    pub rho_mr: f64,
    pub p_m: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    pub eps_max: f64,
}

impl FullTwoShock {
    /// Requires normalized data: `u- = u+ = 0` and `v_M = 0`.
    pub fn new(data: &RiemannDataFull) -> Result<Self, FansubError> {
        if data.u_minus.abs() > 1e-12 || data.u_plus.abs() > 1e-12 {
            return Err(FansubError::Regime(format!(
                "tangential velocities must be normalized to zero, got ({}, {})",
                data.u_minus, data.u_plus
            )));
        }
        let fan = solve_full_two_shock(data)?;
        let (rho_ml, rho_mr, v_m, p_m) = match fan.middle {
            MiddleState::Full {
                rho_m_minus,
                rho_m_plus,
                v_m,
                p_m,
                ..
            } => (rho_m_minus, rho_m_plus, v_m, p_m),
            _ => unreachable!(),
        };
        if v_m.abs() > 1e-10 * (data.v_minus.abs() + data.v_plus.abs()).max(1.0) {
            return Err(FansubError::Regime(format!(
                "contact speed must be normalized to zero, got v_M = {v_m:.3e}"
            )));
        }
        let (sigma_minus, sigma_plus) = match (fan.wave1, fan.wave3) {
            (
                crate::riemann::AcousticWave::Shock { speed: s0 },
                crate::riemann::AcousticWave::Shock { speed: s1 },
            ) => (s0, s1),
            _ => unreachable!(),
        };
        let mut ctx = FullTwoShock {
            data: *data,
            rho_ml,
            rho_mr,
            p_m,
            sigma_minus,
            sigma_plus,
            eps_max: 0.0,
        };
        ctx.eps_max = ctx.locate_eps_max();
        Ok(ctx)
    }

    /// The polynomials `A`, `B`, `D` of the perturbation parameter.
    pub fn abd(&self, eps: f64) -> (f64, f64, f64) {
        let d = &self.data;
        let (rl, rr) = (d.rho_minus, d.rho_plus);
        let (vl, vr) = (d.v_minus, d.v_plus);
        let r1 = self.rho_ml + eps;
        let r2 = self.rho_mr - eps;
        let a = rl * r1 * (r2 - rr) - rr * r2 * (r1 - rl);
        let b = rl * rr * r1 * r2 * (vl - vr) * (vl - vr) - (d.p_minus - d.p_plus) * a;
        let dd = vl * rl * r1 * (r2 - rr) - vr * rr * r2 * (r1 - rl);
        (a, b, dd)
    }

    /// Perturbed interface speeds `(mu_0, mu_1, mu_2)`.
    pub fn mu(&self, eps: f64) -> Result<(f64, f64, f64), FansubError> {
        let d = &self.data;
        let (rl, rr) = (d.rho_minus, d.rho_plus);
        let (vl, vr) = (d.v_minus, d.v_plus);
        let r1 = self.rho_ml + eps;
        let r2 = self.rho_mr - eps;
        let (a, b, dd) = self.abd(eps);
        let rad0 = r1 * r1 * (r2 - rr) / (r1 - rl) * b;
        let rad1 = (r1 - rl) * (r2 - rr) * b;
        let rad2 = r2 * r2 * (r1 - rl) / (r2 - rr) * b;
        if rad0 < 0.0 || rad1 < 0.0 || rad2 < 0.0 {
            return Err(FansubError::Domain(format!(
                "radicand negative at eps = {eps:.3e}; reduce eps"
            )));
        }
        let mu0 = (dd + rl * rr * r2 * (vl - vr) - rad0.sqrt()) / a;
        let mu1 = (dd - rad1.sqrt()) / a;
        let mu2 = (dd + rl * rr * r1 * (vl - vr) - rad2.sqrt()) / a;
        Ok((mu0, mu1, mu2))
    }

    /// The trace constants `C_1, C_2` and matrix entries `gamma_1, gamma_2`.
    pub fn c_gamma(&self, eps: f64, eps_bar: f64) -> Result<(f64, f64, f64, f64), FansubError> {
        if !(eps_bar > 0.0 && eps_bar < self.p_m) {
            return Err(FansubError::Domain(format!(
                "eps-bar must lie in (0, p_M) = (0, {}), got {eps_bar}",
                self.p_m
            )));
        }
        let d = &self.data;
        let g = d.gamma;
        let (mu0, mu1, mu2) = self.mu(eps)?;
        let r1 = self.rho_ml + eps;
        let r2 = self.rho_mr - eps;
        let pm = self.p_m - eps_bar;
        let (rl, rr) = (d.rho_minus, d.rho_plus);
        let (vl, vr) = (d.v_minus, d.v_plus);
        let (pl, pr) = (d.p_minus, d.p_plus);
        let c1 = 2.0 / (r1 * (mu0 - mu1))
            * (-mu0 * ((pm - pl) / (g - 1.0) - 0.5 * rl * vl * vl) + mu1 * g / (g - 1.0) * pm
                - (0.5 * rl * vl * vl + g / (g - 1.0) * pl) * vl);
        let c2 = 2.0 / (r2 * (mu2 - mu1))
            * (-mu2 * ((pm - pr) / (g - 1.0) - 0.5 * rr * vr * vr) + mu1 * g / (g - 1.0) * pm
                - (0.5 * rr * vr * vr + g / (g - 1.0) * pr) * vr);
        let gamma1 = (r1 * c1 / 2.0 - rl * vl * vl + pm - pl - mu0 * (r1 * mu1 - rl * vl)) / r1;
        let gamma2 = (r2 * c2 / 2.0 - rr * vr * vr + pm - pr - mu2 * (r2 * mu1 - rr * vr)) / r2;
        Ok((c1, c2, gamma1, gamma2))
    }

    /// Assemble the candidate for a parameter pair.
    pub fn build(&self, eps: f64, eps_bar: f64) -> Result<FanCandidateFull, FansubError> {
        if !(eps > 0.0 && eps <= self.eps_max) {
            return Err(FansubError::Domain(format!(
                "eps must lie in (0, eps_max] = (0, {}], got {eps}",
                self.eps_max
            )));
        }
        let (mu0, mu1, mu2) = self.mu(eps)?;
        let (c1, c2, gamma1, gamma2) = self.c_gamma(eps, eps_bar)?;
        let p_wedge = self.p_m - eps_bar;
        Ok(FanCandidateFull {
            mu0,
            mu1,
            mu2,
            wedge1: FullWedge {
                rho: self.rho_ml + eps,
                p: p_wedge,
                alpha: 0.0,
                beta: mu1,
                gamma: gamma1,
                delta: 0.0,
                big_c: c1,
            },
            wedge2: FullWedge {
                rho: self.rho_mr - eps,
                p: p_wedge,
                alpha: 0.0,
                beta: mu1,
                gamma: gamma2,
                delta: 0.0,
                big_c: c2,
            },
        })
    }

    /// Geometric two-level sweep over `(eps-bar, eps)`; first verified pair
    /// wins (smallest `k`, then smallest `j`).
    pub fn search(&self) -> Option<(f64, f64, FanCandidateFull)> {
        for k in 1..=40 {
            let eps_bar = self.p_m * 0.5_f64.powi(k);
            for j in 0..=40 {
                let eps = self.eps_max * 0.5_f64.powi(j);
                let Ok(cand) = self.build(eps, eps_bar) else {
                    continue;
                };
                let report = full_verify(&cand, &self.data);
                if report.pass {
                    return Some((eps, eps_bar, cand));
                }
            }
        }
        None
    }

    fn locate_eps_max(&self) -> f64 {
        let hi = self.rho_mr - self.data.rho_plus;
        let ok = |eps: f64| -> bool {
            if eps <= 0.0 || eps >= hi {
                return false;
            }
            let (a, b, _) = self.abd(eps);
            if a == 0.0 || b <= 0.0 {
                return false;
            }
            match self.mu(eps) {
                Ok((m0, m1, m2)) => m0 < m1 && m1 < m2,
                Err(_) => false,
            }
        };
        let samples = 512;
        let mut last_good = 0.0;
        let mut first_bad = hi;
        let mut found_bad = false;
        for i in 1..=samples {
            let eps = hi * i as f64 / (samples + 1) as f64;
            if ok(eps) {
                if !found_bad {
                    last_good = eps;
                }
            } else if !found_bad {
                found_bad = true;
                first_bad = eps;
            }
        }
        if !found_bad {
            return 0.999 * hi;
        }
        if last_good == 0.0 {
            // shrink until a feasible parameter appears
            let mut eps = hi / (samples as f64);
            while eps > 1e-300 && !ok(eps) {
                eps *= 0.5;
            }
            return eps;
        }
        let (mut lo, mut up) = (last_good, first_bad);
        for _ in 0..60 {
            let mid = 0.5 * (lo + up);
            if ok(mid) {
                lo = mid;
            } else {
                up = mid;
            }
        }
        0.999 * lo
    }
}

/// Check a full candidate against the twelve Rankine-Hugoniot equations, four
/// subsolution inequalities, three admissibility inequalities and the speed
/// order, with the per-wedge eigenvalue cross-check.
pub fn full_verify(cand: &FanCandidateFull, data: &RiemannDataFull) -> VerifyReport {
    let g = data.gamma;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    let (ul, ur) = (data.u_minus, data.u_plus);
    let (vl, vr) = (data.v_minus, data.v_plus);
    let (pl, pr) = (data.p_minus, data.p_plus);
    let w1 = &cand.wedge1;
    let w2 = &cand.wedge2;
    let (mu0, mu1, mu2) = (cand.mu0, cand.mu1, cand.mu2);
    let eg = |w: &FullWedge| 0.5 * w.rho * w.big_c + w.p / (g - 1.0);
    let el = 0.5 * rl * (ul * ul + vl * vl) + pl / (g - 1.0);
    let er = 0.5 * rr * (ur * ur + vr * vr) + pr / (g - 1.0);

    let residuals = vec![
        NamedValue {
            name: "rh-left-mass",
            value: mu0 * (rl - w1.rho) - (rl * vl - w1.rho * w1.beta),
        },
        NamedValue {
            name: "rh-left-tangential",
            value: mu0 * (rl * ul - w1.rho * w1.alpha) - (rl * ul * vl - w1.rho * w1.delta),
        },
        NamedValue {
            name: "rh-left-normal",
            value: mu0 * (rl * vl - w1.rho * w1.beta)
                - (rl * vl * vl - w1.rho * (w1.big_c / 2.0 - w1.gamma) + pl - w1.p),
        },
        NamedValue {
            name: "rh-left-energy",
            value: mu0 * (el - eg(w1)) - ((el + pl) * vl - (eg(w1) + w1.p) * w1.beta),
        },
        NamedValue {
            name: "rh-middle-mass",
            value: mu1 * (w1.rho - w2.rho) - (w1.rho * w1.beta - w2.rho * w2.beta),
        },
        NamedValue {
            name: "rh-middle-tangential",
            value: mu1 * (w1.rho * w1.alpha - w2.rho * w2.alpha)
                - (w1.rho * w1.delta - w2.rho * w2.delta),
        },
        NamedValue {
            name: "rh-middle-normal",
            value: mu1 * (w1.rho * w1.beta - w2.rho * w2.beta)
                - (w1.rho * (w1.big_c / 2.0 - w1.gamma) - w2.rho * (w2.big_c / 2.0 - w2.gamma)
                    + w1.p
                    - w2.p),
        },
        NamedValue {
            name: "rh-middle-energy",
            value: mu1 * (eg(w1) - eg(w2))
                - ((eg(w1) + w1.p) * w1.beta - (eg(w2) + w2.p) * w2.beta),
        },
        NamedValue {
            name: "rh-right-mass",
            value: mu2 * (w2.rho - rr) - (w2.rho * w2.beta - rr * vr),
        },
        NamedValue {
            name: "rh-right-tangential",
            value: mu2 * (w2.rho * w2.alpha - rr * ur) - (w2.rho * w2.delta - rr * ur * vr),
        },
        NamedValue {
            name: "rh-right-normal",
            value: mu2 * (w2.rho * w2.beta - rr * vr)
                - (w2.rho * (w2.big_c / 2.0 - w2.gamma) - rr * vr * vr + w2.p - pr),
        },
        NamedValue {
            name: "rh-right-energy",
            value: mu2 * (eg(w2) - er) - ((eg(w2) + w2.p) * w2.beta - (er + pr) * vr),
        },
    ];
    let sc = |w: &FullWedge| {
        (
            w.big_c - w.alpha * w.alpha - w.beta * w.beta,
            (w.big_c / 2.0 - w.alpha * w.alpha + w.gamma)
                * (w.big_c / 2.0 - w.beta * w.beta - w.gamma)
                - (w.delta - w.alpha * w.beta) * (w.delta - w.alpha * w.beta),
        )
    };
    let (sc11, sc12) = sc(w1);
    let (sc21, sc22) = sc(w2);
    let strict_margins = vec![
        NamedValue {
            name: "subsolution-trace-1",
            value: sc11,
        },
        NamedValue {
            name: "subsolution-det-1",
            value: sc12,
        },
        NamedValue {
            name: "subsolution-trace-2",
            value: sc21,
        },
        NamedValue {
            name: "subsolution-det-2",
            value: sc22,
        },
        NamedValue {
            name: "speed-order-left",
            value: mu1 - mu0,
        },
        NamedValue {
            name: "speed-order-right",
            value: mu2 - mu1,
        },
    ];
    let s = |rho: f64, p: f64| physical_entropy(g, rho, p).unwrap();
    let weak_margins = vec![
        NamedValue {
            name: "admissibility-left",
            value: (w1.rho * s(w1.rho, w1.p) * w1.beta - rl * s(rl, pl) * vl)
                - mu0 * (w1.rho * s(w1.rho, w1.p) - rl * s(rl, pl)),
        },
        NamedValue {
            name: "admissibility-middle",
            value: (w2.rho * s(w2.rho, w2.p) * w2.beta - w1.rho * s(w1.rho, w1.p) * w1.beta)
                - mu1 * (w2.rho * s(w2.rho, w2.p) - w1.rho * s(w1.rho, w1.p)),
        },
        NamedValue {
            name: "admissibility-right",
            value: (rr * s(rr, pr) * vr - w2.rho * s(w2.rho, w2.p) * w2.beta)
                - mu2 * (rr * s(rr, pr) - w2.rho * s(w2.rho, w2.p)),
        },
    ];
    let scale = [
        rl * vl.abs(),
        rr * vr.abs(),
        w1.rho * w1.beta.abs(),
        pl + pr + w1.p + w2.p,
        el.abs() + er.abs() + eg(w1).abs() + eg(w2).abs(),
        (mu0.abs().max(mu2.abs())) * (rl + rr + w1.rho + w2.rho),
    ]
    .into_iter()
    .fold(1.0_f64, f64::max);

    let mut e_gaps = Vec::new();
    let mut eigen_consistency = 0.0_f64;
    for (w, sc1v, sc2v) in [(w1, sc11, sc12), (w2, sc21, sc22)] {
        let (rho, m, u_mat, c) = w.state();
        let mut a = SymMat::identity(2).scaled(w.p);
        a = a.plus_outer(&m, 1.0 / rho);
        let a = a.minus(&u_mat);
        let ev = a.eigenvalues();
        e_gaps.push(c - ev[1]);
        let cons1 = (2.0 * c - (ev[0] + ev[1])) - rho * sc1v;
        let cons2 = (c - ev[0]) * (c - ev[1]) - rho * rho * sc2v;
        eigen_consistency = eigen_consistency
            .max(cons1.abs() / (1.0 + c.abs()))
            .max(cons2.abs() / (1.0 + c * c));
    }

    let pass = residuals.iter().all(|e| e.value.abs() <= 1e-8 * scale)
        && strict_margins.iter().all(|e| e.value > 0.0)
        && weak_margins.iter().all(|e| e.value >= -1e-13 * scale)
        && e_gaps.iter().all(|&g| g > 0.0);
    VerifyReport {
        residuals,
        strict_margins,
        weak_margins,
        scale,
        e_gaps,
        eigen_consistency,
        pass,
    }
}

/// Search driver for general (possibly unnormalized) two-shock data: normalize,
/// run the continuation, and return the shift alongside the result.
pub fn full_search(
    data: &RiemannDataFull,
) -> Result<
    (
        RiemannDataFull,
        [f64; 2],
        Option<(f64, f64, FanCandidateFull)>,
    ),
    FansubError,
> {
    if !(data.gamma < 3.0) {
        return Err(FansubError::Domain(format!(
            "the continuation requires gamma < 3, got {}",
            data.gamma
        )));
    }
    if (data.u_minus - data.u_plus).abs() > 1e-12 * (1.0 + data.u_minus.abs()) {
        return Err(FansubError::Regime(format!(
            "need u- = u+, got {} vs {}",
            data.u_minus, data.u_plus
        )));
    }
    let (normalized, shift) = normalize_galilean(data)?;
    let ctx = FullTwoShock::new(&normalized)?;
    Ok((normalized, shift, ctx.search()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::GammaLaw;
    use crate::riemann::shock_jump;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eos2() -> GammaLaw {
        GammaLaw::new(1.0, 2.0).unwrap()
    }

    /// Shock/rarefaction datum built from a 1-shock to `rho_m` followed by a
    /// 3-rarefaction to `rho_plus`.
    fn sr_datum(eos: GammaLaw, rho_minus: f64, rho_m: f64, rho_plus: f64) -> RiemannDataIsen {
        let v_minus = 0.0;
        let v_m = v_minus - shock_jump(&eos, rho_minus, rho_m);
        let v_plus = v_m + eos.rarefaction_integral(rho_m, rho_plus).unwrap();
        RiemannDataIsen {
            eos,
            rho_minus,
            rho_plus,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus,
            v_plus,
        }
    }

    #[test]
    fn beta_eps_degenerate_at_left_density() {
        // generic datum: beta1 -> v- at a sqrt rate, eps1 -> Rad/(rho- (rho+ - rho-))
        let data = sr_datum(eos2(), 1.0, 2.0, 4.0);
        let rad = {
            let p = |r: f64| data.eos.pressure(r).unwrap();
            let dv = data.v_plus - data.v_minus;
            (data.rho_minus - data.rho_plus) * (p(data.rho_minus) - p(data.rho_plus))
                - data.rho_plus * data.rho_minus * dv * dv
        };
        let offset = 1e-9 * data.rho_minus;
        let rho1 = data.rho_minus + offset;
        let (beta1, eps1) = isen_beta1_eps1(&data, rho1).unwrap();
        let beta_rate = (rad * offset * (data.rho_plus - rho1)).sqrt()
            / (rho1 * (data.rho_plus - data.rho_minus));
        assert!((beta1 - data.v_minus).abs() < 2.0 * beta_rate + 1e-12);
        let eps_limit = rad / (data.rho_minus * (data.rho_plus - data.rho_minus));
        assert!((eps1 - eps_limit).abs() < 1e-3 * (1.0 + eps_limit));

        // at the pure-shock boundary the radicand collapses and both closed
        // forms degenerate to (v-, 0)
        let near = sr_datum(eos2(), 1.0, 2.0, 2.0 * (1.0 + 1e-8));
        let rho1 = near.rho_minus * (1.0 + 1e-9);
        let (beta1, eps1) = isen_beta1_eps1(&near, rho1).unwrap();
        assert!((beta1 - near.v_minus).abs() < 1e-6, "beta1 = {beta1}");
        assert!(eps1.abs() < 1e-6, "eps1 = {eps1}");
    }

    #[test]
    fn eps_positive_between_left_and_intermediate_density() {
        let data = sr_datum(eos2(), 1.0, 2.0, 2.2);
        let rho_m = 2.0;
        for k in 1..40 {
            let rho1 = data.rho_minus + (rho_m - data.rho_minus) * k as f64 / 40.0;
            let (_, eps1) = isen_beta1_eps1(&data, rho1).unwrap();
            assert!(eps1 > 0.0, "eps1 = {eps1} at rho1 = {rho1}");
        }
    }

    #[test]
    fn beta_eps_regime_errors() {
        let mut data = sr_datum(eos2(), 1.0, 2.0, 4.0);
        assert!(isen_beta1_eps1(&data, 0.5).is_err()); // rho1 below range
        data.rho_minus = 5.0; // breaks rho- < rho+
        assert!(matches!(
            isen_beta1_eps1(&data, 2.0),
            Err(FansubError::Regime(_))
        ));
        let mut data = sr_datum(eos2(), 1.0, 2.0, 4.0);
        data.u_plus = 0.3;
        assert!(matches!(
            isen_beta1_eps1(&data, 2.0),
            Err(FansubError::Regime(_))
        ));
        // two-shock datum is the wrong regime
        let eos = eos2();
        let dv = -shock_jump(&eos, 1.0, 4.0) - 0.5;
        let data = RiemannDataIsen {
            eos,
            rho_minus: 1.0,
            rho_plus: 4.0,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: 0.0,
            v_plus: dv,
        };
        assert!(matches!(
            isen_search_sr(&data, &SrGrid::default()),
            Err(FansubError::Regime(_))
        ));
    }

    #[test]
    fn build_consistent_with_beta_eps_and_identity() {
        let data = sr_datum(eos2(), 1.0, 2.0, 2.1);
        let rho1 = 1.5;
        let eps_t = 0.01;
        let cand = isen_build_sr(&data, rho1, eps_t).unwrap();
        let (beta1, eps1) = isen_beta1_eps1(&data, rho1).unwrap();
        assert_eq!(cand.beta1, beta1);
        // C1 - alpha1^2 - beta1^2 = eps~ + eps identically
        let got = cand.big_c1 - cand.alpha1 * cand.alpha1 - cand.beta1 * cand.beta1;
        assert!((got - (eps_t + eps1)).abs() < 1e-14 * (1.0 + got.abs()));
        assert!(cand.mu0 < cand.mu1);
        // RH equations hold by construction
        let report = isen_verify(&cand, &data);
        assert!(report.max_residual() <= 1e-9 * report.scale);
    }

    #[test]
    fn verify_detects_perturbation() {
        let data = sr_datum(eos2(), 1.0, 2.0, 2.1);
        let mut cand = isen_build_sr(&data, 1.5, 0.01).unwrap();
        cand.beta1 += 1e-3;
        let report = isen_verify(&cand, &data);
        assert!(report.max_residual() > 1e-5 * report.scale);
        assert!(!report.pass);
    }

    #[test]
    fn verify_eigen_cross_check() {
        let data = sr_datum(eos2(), 1.0, 2.0, 2.05);
        let sol = isen_search_sr(&data, &SrGrid::default())
            .unwrap()
            .expect("small rarefaction must be feasible");
        let report = isen_verify(&sol.candidate, &data);
        assert!(report.pass);
        assert!(report.eigen_consistency < 1e-10);
        assert!(report.e_gaps[0] > 0.0);
    }

    #[test]
    fn search_succeeds_for_small_rarefaction() {
        // rho+ barely above the intermediate density of a genuine 1-shock
        let eos = eos2();
        let rho_m = 2.0;
        let data = sr_datum(eos, 1.0, rho_m, rho_m * 1.001);
        let sol = isen_search_sr(&data, &SrGrid::default()).unwrap();
        let sol = sol.expect("feasible for a small rarefaction");
        assert!(sol.rho1 > data.rho_minus && sol.rho1 < rho_m);
        assert!(isen_verify(&sol.candidate, &data).pass);
    }

    #[test]
    fn aux_patch_small_rarefaction_first_try() {
        let eos = eos2();
        let data = sr_datum(eos, 1.0, 2.0, 2.001);
        let patch = isen_aux_patch(&data, &SrGrid::default()).unwrap();
        assert_eq!(patch.rho_aux, data.rho_plus);
        assert!(patch.feasible);
        assert!(patch.patch_margin > 0.0);
        assert!(patch.rarefaction_identity.abs() < 1e-12);
    }

    #[test]
    fn aux_patch_large_rarefaction() {
        // gamma = 2, rho- = 1, rho+ = 4: a large 3-rarefaction
        let eos = eos2();
        let data = sr_datum(eos, 1.0, 1.5, 4.0);
        let patch = isen_aux_patch(&data, &SrGrid::default()).unwrap();
        assert!(patch.feasible, "patch must succeed");
        assert!(patch.patch_margin > 0.0);
        assert!(patch.rarefaction_identity.abs() < 1e-10);
        let report = isen_verify(&patch.solution.candidate, &patch.sub_data);
        assert!(report.pass);
    }

    #[test]
    fn galilean_invariance_of_reports() {
        let eos = eos2();
        let base = sr_datum(eos, 1.0, 2.0, 2.05);
        let sol = isen_search_sr(&base, &SrGrid::default()).unwrap().unwrap();
        let report0 = isen_verify(&sol.candidate, &base);
        // shift all velocities; rebuild with the same (rho1, eps~1)
        let shift = 0.8;
        let mut shifted = base;
        shifted.v_minus += shift;
        shifted.v_plus += shift;
        let cand1 = isen_build_sr(&shifted, sol.rho1, sol.eps_tilde1).unwrap();
        let report1 = isen_verify(&cand1, &shifted);
        assert!((cand1.mu0 - sol.candidate.mu0 - shift).abs() < 1e-12);
        for (a, b) in report0.residuals.iter().zip(report1.residuals.iter()) {
            assert!(
                (a.value - b.value).abs() <= 1e-12 * report0.scale.max(report1.scale),
                "{}: {} vs {}",
                a.name,
                a.value,
                b.value
            );
        }
        for (a, b) in report0
            .strict_margins
            .iter()
            .zip(report1.strict_margins.iter())
        {
            assert!((a.value - b.value).abs() <= 1e-11 * report0.scale.max(report1.scale));
        }
    }

    // ---------------- full Euler ----------------

    fn two_shock_datum(gamma: f64, v_in: f64) -> RiemannDataFull {
        RiemannDataFull {
            gamma,
            rho_minus: 1.0,
            rho_plus: 1.0,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: v_in,
            v_plus: -v_in,
            p_minus: 1.0,
            p_plus: 1.0,
        }
    }

    #[test]
    fn abd_signs_and_symmetric_antisymmetry() {
        let ctx = FullTwoShock::new(&two_shock_datum(1.4, 1.0)).unwrap();
        let (a0, b0, _) = ctx.abd(0.0);
        assert!(b0 > 0.0, "B(0) = {b0}");
        // symmetric data: A(0) = 0 by antisymmetry
        assert!(a0.abs() < 1e-12, "A(0) = {a0}");
        // B(0) closed form
        let d = &ctx.data;
        let vl = d.v_minus;
        let vr = d.v_plus;
        let q = vl * ((ctx.p_m - d.p_plus) / (ctx.p_m - d.p_minus)).sqrt()
            - vr * ((ctx.p_m - d.p_minus) / (ctx.p_m - d.p_plus)).sqrt();
        let want = d.rho_minus * d.rho_plus * ctx.rho_ml * ctx.rho_mr * q * q;
        assert!((b0 - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn abd_asymmetric_positive_b() {
        let data = RiemannDataFull {
            gamma: 1.4,
            rho_minus: 1.0,
            rho_plus: 1.7,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: 1.2,
            v_plus: -1.5,
            p_minus: 1.0,
            p_plus: 0.6,
        };
        let (norm, _) = normalize_galilean(&data).unwrap();
        let ctx = FullTwoShock::new(&norm).unwrap();
        for k in 0..20 {
            let eps = ctx.eps_max * k as f64 / 20.0;
            let (_, b, _) = ctx.abd(eps);
            assert!(b > 0.0, "B({eps}) = {b}");
        }
    }

    #[test]
    fn mu_limits_and_ordering() {
        let ctx = FullTwoShock::new(&two_shock_datum(1.4, 1.0)).unwrap();
        let (m0, m1, m2) = ctx.mu(1e-8).unwrap();
        let scale = ctx.sigma_plus.abs().max(ctx.sigma_minus.abs());
        assert!((m0 - ctx.sigma_minus).abs() < 1e-5 * scale, "mu0 -> sigma-");
        assert!(m1.abs() < 1e-5 * scale, "mu1 -> v_M = 0");
        assert!((m2 - ctx.sigma_plus).abs() < 1e-5 * scale, "mu2 -> sigma+");
        let (m0, m1, m2) = ctx.mu(ctx.eps_max / 2.0).unwrap();
        assert!(m0 < m1 && m1 < m2);
        // symmetric data: the density perturbation breaks mirror symmetry,
        // so mu1 is not identically zero but shrinks linearly with eps
        let mut prev = f64::INFINITY;
        for k in 1..=12 {
            let eps = ctx.eps_max.min(0.1) * 0.25_f64.powi(k);
            let (_, m1, _) = ctx.mu(eps).unwrap();
            assert!(m1.abs() <= prev, "mu1 not shrinking: {m1}");
            prev = m1.abs();
        }
        assert!(prev < 1e-8 * ctx.sigma_plus.abs());
    }

    #[test]
    fn mu1_decreases_toward_contact_speed() {
        // asymmetric normalized datum: |mu1(10^-k)| decreasing over k = 2..6
        let data = RiemannDataFull {
            gamma: 1.4,
            rho_minus: 1.0,
            rho_plus: 1.4,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: 1.5,
            v_plus: -1.2,
            p_minus: 1.0,
            p_plus: 0.8,
        };
        let (norm, _) = normalize_galilean(&data).unwrap();
        let ctx = FullTwoShock::new(&norm).unwrap();
        let mut prev = f64::INFINITY;
        for k in 2..=6 {
            let eps = 10.0_f64.powi(-k);
            if eps > ctx.eps_max {
                continue;
            }
            let (_, m1, _) = ctx.mu(eps).unwrap();
            assert!(m1.abs() < prev, "|mu1| not decreasing at k = {k}");
            prev = m1.abs();
        }
        assert!(prev <= 1e-4 * ctx.sigma_plus.abs());
    }

    #[test]
    fn c_gamma_limits_and_expansion_identity() {
        let data = RiemannDataFull {
            gamma: 1.4,
            rho_minus: 1.0,
            rho_plus: 1.4,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: 1.5,
            v_plus: -1.2,
            p_minus: 1.0,
            p_plus: 0.8,
        };
        let (norm, _) = normalize_galilean(&data).unwrap();
        let ctx = FullTwoShock::new(&norm).unwrap();
        let eps = 1e-8_f64.min(ctx.eps_max);
        let (c1, c2, g1, g2) = ctx.c_gamma(eps, 1e-8).unwrap();
        // limits: C_i -> v_M^2 = 0, gamma_i -> -v_M^2/2 = 0
        let scale = ctx.p_m;
        assert!(c1.abs() < 1e-4 * scale, "C1 limit {c1}");
        assert!(c2.abs() < 1e-4 * scale, "C2 limit {c2}");
        assert!(g1.abs() < 1e-4 * scale, "gamma1 limit {g1}");
        assert!(g2.abs() < 1e-4 * scale, "gamma2 limit {g2}");
        // eps-bar expansion identity of C1/2 + gamma1
        let g = norm.gamma;
        let eps = (ctx.eps_max / 3.0).min(0.05);
        let eps_bar = 0.3 * ctx.p_m;
        let (c1b, _, g1b, _) = ctx.c_gamma(eps, eps_bar).unwrap();
        let (mu0, mu1, _) = ctx.mu(eps).unwrap();
        // the eps-bar = 0 limit evaluated directly from the definitions
        let (c10, _, g10, _) = ctx.c_gamma(eps, 1e-300_f64.max(f64::MIN_POSITIVE)).unwrap();
        let lhs = c1b / 2.0 + g1b;
        let r1 = ctx.rho_ml + eps;
        let rhs = (3.0 - g) / (g - 1.0) * eps_bar / r1 - 2.0 * mu1 * eps_bar / (r1 * (mu0 - mu1))
            + c10 / 2.0
            + g10;
        assert!(
            (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn build_satisfies_equations_and_middle_identities() {
        let ctx = FullTwoShock::new(&two_shock_datum(1.4, 1.0)).unwrap();
        let eps = ctx.eps_max / 4.0;
        let eps_bar = ctx.p_m / 8.0;
        let cand = ctx.build(eps, eps_bar).unwrap();
        assert_eq!(cand.wedge1.alpha, 0.0);
        assert_eq!(cand.wedge1.delta, 0.0);
        assert_eq!(cand.wedge1.beta, cand.mu1);
        assert_eq!(cand.wedge2.beta, cand.mu1);
        assert_eq!(cand.wedge1.p, cand.wedge2.p);
        let report = full_verify(&cand, &ctx.data);
        assert!(
            report.max_residual() <= 1e-8 * report.scale,
            "max residual {} at scale {}",
            report.max_residual(),
            report.scale
        );
        // middle admissibility is an exact identity under the ansatz
        let admm = report
            .weak_margins
            .iter()
            .find(|e| e.name == "admissibility-middle")
            .unwrap();
        assert!(admm.value.abs() < 1e-12 * report.scale);
    }

    #[test]
    fn full_verify_detects_perturbation() {
        let ctx = FullTwoShock::new(&two_shock_datum(1.4, 1.0)).unwrap();
        let (eps, eps_bar, cand) = ctx.search().expect("search succeeds");
        assert!(eps > 0.0 && eps_bar > 0.0);
        let mut bad = cand;
        bad.wedge1.big_c *= 1.01;
        let report = full_verify(&bad, &ctx.data);
        let rhl4 = report
            .residuals
            .iter()
            .find(|e| e.name == "rh-left-energy")
            .unwrap();
        assert!(rhl4.value.abs() > 1e-4 * report.scale);
        assert!(!report.pass);
    }

    #[test]
    fn search_gamma14_symmetric() {
        let ctx = FullTwoShock::new(&two_shock_datum(1.4, 1.0)).unwrap();
        let (_, _, cand) = ctx.search().expect("feasible for this datum");
        let report = full_verify(&cand, &ctx.data);
        assert!(report.pass);
        assert!(report.e_gaps.iter().all(|&g| g > 0.0));
        assert!(report.eigen_consistency < 1e-10);
    }

    #[test]
    fn search_gamma2_asymmetric() {
        let data = RiemannDataFull {
            gamma: 2.0,
            rho_minus: 1.0,
            rho_plus: 1.6,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: 1.4,
            v_plus: -1.6,
            p_minus: 1.0,
            p_plus: 1.3,
        };
        let (_, _, found) = full_search(&data).unwrap();
        let (_, _, cand) = found.expect("feasible");
        let (norm, _) = normalize_galilean(&data).unwrap();
        assert!(full_verify(&cand, &norm).pass);
    }

    #[test]
    fn search_guards() {
        let mut data = two_shock_datum(3.5, 1.0);
        assert!(matches!(full_search(&data), Err(FansubError::Domain(_))));
        data = two_shock_datum(1.4, 1.0);
        data.u_plus = 1.0;
        assert!(matches!(full_search(&data), Err(FansubError::Regime(_))));
        // non-normalized context rejected
        let mut shifted = two_shock_datum(1.4, 1.0);
        shifted.v_minus += 1.0;
        shifted.v_plus += 1.0;
        assert!(FullTwoShock::new(&shifted).is_err());
    }

    #[test]
    fn wedge_trace_identity_links_to_relaxation() {
        // |m|^2/(2 rho_i) + (n/2) p_i(rho) = c_i for the wedge pressure law
        let ctx = FullTwoShock::new(&two_shock_datum(1.4, 1.0)).unwrap();
        let (_, _, cand) = ctx.search().unwrap();
        for w in [&cand.wedge1, &cand.wedge2] {
            let (rho, m, _, c) = w.state();
            let kinetic = (m[0] * m[0] + m[1] * m[1]) / (2.0 * rho);
            // with the wedge pressure law p_i(rho) = p_i (rho/rho_i)^gamma,
            // the slack of the trace identity at rho = rho_i is
            // c - p_i - |m|^2/2rho = rho (C - alpha^2 - beta^2)/2 > 0
            let gap = c - w.p - kinetic;
            assert!(
                (gap - 0.5 * rho * (w.big_c - w.alpha * w.alpha - w.beta * w.beta)).abs()
                    < 1e-12 * (1.0 + gap.abs())
            );
            assert!(gap > 0.0);
        }
    }

    #[test]
    fn random_two_shock_data_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let mut successes = 0;
        for _ in 0..5 {
            let gamma = rng.gen_range(1.2..2.4);
            let data = RiemannDataFull {
                gamma,
                rho_minus: rng.gen_range(0.5..1.5),
                rho_plus: rng.gen_range(0.5..1.5),
                u_minus: 0.0,
                u_plus: 0.0,
                v_minus: rng.gen_range(1.0..2.0),
                v_plus: rng.gen_range(-2.0..-1.0),
                p_minus: rng.gen_range(0.5..1.5),
                p_plus: rng.gen_range(0.5..1.5),
            };
            if let Ok((norm, _, Some((_, _, cand)))) = full_search(&data) {
                assert!(full_verify(&cand, &norm).pass);
                successes += 1;
            }
        }
        assert!(successes >= 4, "only {successes}/5 searches succeeded");
    }
}
