//! End-to-end verification suite: each check pins one acceptance property of
//! the toolkit (phase-space instances, operator identities, solver round
//! trips, subsolution searches, oscillation functionals) together with a
//! runtime budget. The CLI `check` verb and the acceptance test target both
//! drive [`run_all`].

use crate::conslaw::{
    companion_residual, eigen_residual, eigenvectors_independent, flux_jacobian_eigen_baro,
    flux_jacobian_eigen_full, hessian_quadforms_full, ConsStateBaro, ConsStateFull,
    EntropyPairSpec, SystemState, ZFunction,
};
use crate::eos::GammaLaw;
use crate::fansub::{
    full_verify, isen_aux_patch, isen_search_sr, isen_verify, normalize_galilean, FullTwoShock,
    SrGrid,
};
use crate::numerics::{integrate_gl, norm, scale3};
use crate::oscsynth::{
    relaxed_e, synthesize, weak_residual, OscMeanProbe, PiecewiseFanField, SpaceTimeBox, TentProbe,
};
use crate::phasegeom::{
    build_hn_family, in_wave_cone, verify_hn, HullClass, PhasePoint, RelaxationContext,
    WAVE_CONE_TOL,
};
use crate::planewave::{
    build_operator, mollified_step, PlaneWaveField, PolyField, ProfileStack, SpaceTimeField,
};
use crate::riemann::{
    classify_row, rh_report_full, shock_jump, solve_full_two_shock, solve_isen, MiddleState,
    RiemannDataFull, RiemannDataIsen, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Instant;

/// Outcome of one acceptance check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub millis: f64,
    pub budget_ms: f64,
    pub details: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:2}. {:<28} {:>10.1} ms / {:>8.0} ms  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.millis,
            self.budget_ms,
            self.details
        )
    }
}

fn finish(
    id: u8,
    name: &'static str,
    budget_ms: f64,
    started: Instant,
    ok: bool,
    details: String,
) -> CheckResult {
    let millis = started.elapsed().as_secs_f64() * 1e3;
    CheckResult {
        id,
        name,
        pass: ok && millis < budget_ms,
        millis,
        budget_ms,
        details,
    }
}

/// Run every acceptance check with the given sampling seed.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        check_wave_cone_instance(),
        check_boundary_instance(),
        check_hull_reconstruction(seed),
        check_operator_identities(seed),
        check_weak_star_decay(seed),
        check_isen_riemann(seed),
        check_full_two_shock(seed),
        check_isen_sr_pipeline(),
        check_full_continuation(),
        check_entropy_suite(seed),
        check_oscillation_functional(),
    ]
}

// ---------------------------------------------------------------------------
// 1. wave-cone instance
// ---------------------------------------------------------------------------

fn check_wave_cone_instance() -> CheckResult {
    let t0 = Instant::now();
    let s3 = 3.0_f64.sqrt();
    let ctx = RelaxationContext::new(GammaLaw::new(1.0, 2.0).unwrap(), 2, 1.5).unwrap();
    let p1 = PhasePoint::new(2, 1.0, [1.0, 0.0, 0.0], &[0.5, 0.0]).unwrap();
    let p2 = PhasePoint::new(
        2,
        (s3 - 1.0) / 2.0,
        [1.0, 0.0, 0.0],
        &[(s3 + 1.0) / 2.0, 0.0],
    )
    .unwrap();
    let e1 = ctx.e_functional(&p1).unwrap();
    let e2 = ctx.e_functional(&p2).unwrap();
    let chk = in_wave_cone(&p2.minus(&p1), WAVE_CONE_TOL);
    let want = (9.0 - 3.0 * s3) / 8.0;
    let ok = (e1 - 1.5).abs() <= 1e-10
        && (e2 - 1.5).abs() <= 1e-10
        && !chk.member
        && (chk.det.abs() - want).abs() <= 1e-12;
    let details = format!(
        "det = {:.15} (target {want:.15}), e = ({e1:.12}, {e2:.12})",
        chk.det.abs()
    );
    finish(1, "wave-cone counterexample", 1.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 2. boundary instance
// ---------------------------------------------------------------------------

fn check_boundary_instance() -> CheckResult {
    let t0 = Instant::now();
    let ctx = RelaxationContext::new(GammaLaw::new(1.0, 2.0).unwrap(), 2, 1.0).unwrap();
    // p(rho) = 2c/n^2, m = 0, U = diag((1-n) 2c/n^2, 2c/n^2)
    let rho = 1.0 / 2.0_f64.sqrt();
    let pt = PhasePoint::new(2, rho, [0.0; 3], &[-0.5, 0.0]).unwrap();
    let e = ctx.e_functional(&pt).unwrap();
    let a = ctx.constraint_matrix(&pt).unwrap();
    let ev = a.eigenvalues();
    let gap = ev[1] - ev[0];
    let ok = (e - ctx.c).abs() <= 1e-12
        && ctx.hull_classify(&pt).unwrap() == HullClass::BoundaryU
        && gap >= ctx.c * (1.0 - 1e-10);
    let details = format!("e - c = {:.3e}, eigenvalue gap = {gap:.12}", e - ctx.c);
    finish(2, "boundary instance", 1.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 3. hull reconstruction
// ---------------------------------------------------------------------------

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> [f64; 3] {
    loop {
        let mut v = [0.0; 3];
        for x in v.iter_mut().take(n) {
            *x = rng.gen_range(-1.0..1.0);
        }
        let nv = norm(n, &v);
        if nv > 1e-3 {
            return scale3(&v, 1.0 / nv);
        }
    }
}

fn random_interior_point(ctx: &RelaxationContext, rng: &mut ChaCha8Rng) -> PhasePoint {
    let rho_max = ctx
        .eos
        .inverse_pressure(2.0 * ctx.c / ctx.n as f64)
        .unwrap();
    loop {
        let rho = rng.gen_range(0.15 * rho_max..0.9 * rho_max);
        let m0 = ctx.slice_momentum(rho).unwrap();
        // strict convex combination of K points on the slice
        let count = rng.gen_range(3..=5);
        let mut weights = Vec::new();
        let mut points = Vec::new();
        for _ in 0..count {
            weights.push(rng.gen_range(0.2..1.0));
            let d = random_direction(rng, ctx.n);
            points.push(ctx.lift_to_k(rho, scale3(&d, m0)).unwrap());
        }
        let total: f64 = weights.iter().sum();
        let mut pt = PhasePoint::zero(ctx.n);
        for (w, p) in weights.iter().zip(points.iter()) {
            pt = pt.plus(&p.scaled(w / total));
        }
        if ctx.hull_classify(&pt).unwrap() == HullClass::InteriorU {
            return pt;
        }
    }
}

fn check_hull_reconstruction(seed: u64) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
    let mut ok = true;
    let mut details = String::new();
    let mut worst_bary = 0.0_f64;
    let mut worst_e = 0.0_f64;
    for &n in &[2usize, 3] {
        let ctx = RelaxationContext::new(GammaLaw::new(1.0, 2.0).unwrap(), n, 1.0).unwrap();
        for _ in 0..50 {
            let pt = random_interior_point(&ctx, &mut rng);
            let base = match ctx.decompose_into_k(&pt) {
                Ok(f) => f,
                Err(e) => {
                    ok = false;
                    let _ = write!(details, "decompose failed: {e}; ");
                    continue;
                }
            };
            for (_, q) in &base.entries {
                let e = ctx.e_functional(q).unwrap();
                worst_e = worst_e.max((e - ctx.c).abs());
                if (e - ctx.c).abs() > 1e-8 {
                    ok = false;
                }
            }
            let fam = match build_hn_family(&base) {
                Ok(f) => f,
                Err(e) => {
                    ok = false;
                    let _ = write!(details, "family build failed: {e}; ");
                    continue;
                }
            };
            // barycenter error
            let bary = fam.barycenter();
            let diff = bary.minus(&pt).scale_norm();
            worst_bary = worst_bary.max(diff);
            if diff > 1e-9 {
                ok = false;
            }
            // block-weight identity: mu_k equals the k-th block sum
            for k in 2..=base.len() {
                let lo = 1usize << (k - 2);
                let hi = 1usize << (k - 1);
                let s: f64 = fam.entries[lo..hi].iter().map(|(t, _)| t).sum();
                if (s - base.entries[k - 1].0).abs() > 1e-12 {
                    ok = false;
                    let _ = write!(details, "block-weight defect at k={k}; ");
                }
            }
            if verify_hn(&fam, 1e-10).is_none() {
                ok = false;
                let _ = write!(details, "verify_hn failed (N={}); ", fam.len());
            }
        }
    }
    let _ = write!(
        details,
        "worst |e-c| = {worst_e:.2e}, worst barycenter error = {worst_bary:.2e}"
    );
    finish(3, "hull reconstruction", 1000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 4. operator identities
// ---------------------------------------------------------------------------

fn random_slice_cone_member(
    ctx: &RelaxationContext,
    rng: &mut ChaCha8Rng,
) -> (PhasePoint, [f64; 4]) {
    loop {
        let rho_max = ctx
            .eos
            .inverse_pressure(2.0 * ctx.c / ctx.n as f64)
            .unwrap();
        let rho = rng.gen_range(0.2 * rho_max..0.8 * rho_max);
        let m0 = ctx.slice_momentum(rho).unwrap();
        let p1 = ctx
            .lift_to_k(rho, scale3(&random_direction(rng, ctx.n), m0))
            .unwrap();
        let p2 = ctx
            .lift_to_k(rho, scale3(&random_direction(rng, ctx.n), m0))
            .unwrap();
        let delta = p2.minus(&p1);
        if delta.scale_norm() < 1e-3 {
            continue;
        }
        if let Some(eta) = in_wave_cone(&delta, WAVE_CONE_TOL).eta {
            return (delta, eta);
        }
    }
}

/// Rank-deficient space-time matrix with traceless spatial block, giving a
/// generic cone member with nonzero density component.
fn random_generic_cone_member(n: usize, rng: &mut ChaCha8Rng) -> Option<(PhasePoint, [f64; 4])> {
    let dim = n + 1;
    let mut w2 = [0.0; 4];
    let mut w3 = [0.0; 4];
    for k in 0..dim {
        w2[k] = rng.gen_range(-1.0..1.0);
        w3[k] = rng.gen_range(-1.0..1.0);
    }
    let n2 = (0..dim).map(|k| w2[k] * w2[k]).sum::<f64>().sqrt();
    for v in w2.iter_mut() {
        *v /= n2;
    }
    let d23: f64 = (0..dim).map(|k| w2[k] * w3[k]).sum();
    for k in 0..dim {
        w3[k] -= d23 * w2[k];
    }
    let n3 = (0..dim).map(|k| w3[k] * w3[k]).sum::<f64>().sqrt();
    if n3 < 1e-3 {
        return None;
    }
    for v in w3.iter_mut() {
        *v /= n3;
    }
    let sp2: f64 = (1..dim).map(|k| w2[k] * w2[k]).sum();
    let sp3: f64 = (1..dim).map(|k| w3[k] * w3[k]).sum();
    if sp3 < 1e-3 {
        return None;
    }
    let l2 = rng.gen_range(0.5..2.0);
    let l3 = -l2 * sp2 / sp3;
    let mm = |i: usize, j: usize| l2 * w2[i] * w2[j] + l3 * w3[i] * w3[j];
    let mut mvec = [0.0; 3];
    for i in 1..dim {
        mvec[i - 1] = mm(0, i);
    }
    let mut packed = [0.0; 5];
    if n == 2 {
        packed[0] = mm(1, 1);
        packed[1] = mm(1, 2);
    } else {
        packed[0] = mm(1, 1);
        packed[1] = mm(1, 2);
        packed[2] = mm(1, 3);
        packed[3] = mm(2, 2);
        packed[4] = mm(2, 3);
    }
    let slots = if n == 2 { 2 } else { 5 };
    let pt = PhasePoint::new(n, mm(0, 0), mvec, &packed[..slots]).unwrap();
    in_wave_cone(&pt, 1e-8).eta.map(|eta| (pt, eta))
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize) -> PolyField {
    let mut monomials = Vec::new();
    for _ in 0..8 {
        let mut pows = [0u8; 4];
        let mut total = 0u8;
        for p in pows.iter_mut().take(dim) {
            let v = rng.gen_range(0..=2u8);
            if total + v <= 4 {
                *p = v;
                total += v;
            }
        }
        monomials.push((rng.gen_range(-1.0..1.0), pows));
    }
    PolyField { dim, monomials }
}

fn check_operator_identities(seed: u64) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
    let mut ok = true;
    let mut worst_pde = 0.0_f64;
    let mut worst_rep = 0.0_f64;
    let mut worst_rho = 0.0_f64;
    let mut count = 0;
    while count < 100 {
        let n = if count % 2 == 0 { 2 } else { 3 };
        let ctx = RelaxationContext::new(GammaLaw::new(1.0, 2.0).unwrap(), n, 1.0).unwrap();
        // alternate slice members (zero density component) and generic ones
        let member = if count % 4 < 2 {
            Some(random_slice_cone_member(&ctx, &mut rng))
        } else {
            random_generic_cone_member(n, &mut rng)
        };
        let Some((delta, eta)) = member else {
            continue;
        };
        count += 1;
        let op = match build_operator(&delta, &eta) {
            Ok(op) => op,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        let dim = 1 + n;
        // PDE residual on a random polynomial with analytic order-4 stack
        let g = random_poly(&mut rng, dim);
        let (rt, rx, scale) = op
            .pde_residual(&g.stack(0.37, &[0.11, -0.41, 0.23], 4))
            .unwrap();
        let denom = scale.max(delta.scale_norm());
        let pde = rt.abs().max(rx.iter().fold(0.0_f64, |a, v| a.max(v.abs()))) / denom;
        worst_pde = worst_pde.max(pde);
        if pde > 1e-9 {
            ok = false;
        }
        // plane-wave reproduction
        let wave = PlaneWaveField::unit(dim, eta, ProfileStack::sine());
        let (t, x) = (0.29, [0.53, -0.12, 0.31]);
        let out = op.apply(&wave.stack(t, &x, 3)).unwrap();
        let hppp = ProfileStack::sine().deriv(wave.phase(t, &x), 3);
        let want = delta.scaled(hppp);
        let rep = out.minus(&want).scale_norm() / delta.scale_norm().max(1e-300);
        worst_rep = worst_rep.max(rep);
        if rep > 1e-9 {
            ok = false;
        }
        // zero density row when the direction carries no density jump
        let eta_x_norm = norm(n, &[eta[1], eta[2], eta[3]]);
        if delta.rho.abs() < 1e-13 && eta_x_norm > 1e-10 {
            let out = op.apply(&g.stack(0.81, &[-0.2, 0.1, 0.7], 3)).unwrap();
            worst_rho = worst_rho.max(out.rho.abs());
            if out.rho.abs() > 1e-12 * delta.scale_norm().max(1.0) {
                ok = false;
            }
        }
    }
    let details = format!(
        "worst pde residual = {worst_pde:.2e}, reproduction = {worst_rep:.2e}, rho row = {worst_rho:.2e}"
    );
    finish(4, "operator identities", 1000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 5. weak-* decay
// ---------------------------------------------------------------------------

fn log_log_slope(ks: &[usize], vals: &[f64]) -> f64 {
    let lx: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let sx: f64 = lx.iter().sum();
    let sy: f64 = ly.iter().sum();
    let sxx: f64 = lx.iter().map(|v| v * v).sum();
    let sxy: f64 = lx.iter().zip(ly.iter()).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn check_weak_star_decay(seed: u64) -> CheckResult {
    let t0 = Instant::now();
    let mut ok = true;
    // part 1: profile composition against box indicators
    let f = mollified_step(0.4, 0.06).unwrap();
    let eta = [0.6, 1.0, -0.4, 0.0];
    let eta_norm: f64 = (0..3).map(|i: usize| eta[i] * eta[i]).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
    let ks = [1usize, 2, 4, 8, 16, 32, 64];
    let mut means = vec![0.0; ks.len()];
    let boxes = 12;
    for _ in 0..boxes {
        let s0 = rng.gen_range(-0.5..0.0);
        let s1 = s0 + rng.gen_range(0.8..1.7);
        let area: f64 = rng.gen_range(0.3..1.5);
        for (ki, &k) in ks.iter().enumerate() {
            // the transverse factors of a box integral reduce to 1D
            let val = area
                * integrate_gl(
                    &|s: f64| f.value(k as f64 * eta_norm * s),
                    s0,
                    s1,
                    64 * k.max(4),
                    8,
                );
            means[ki] += val.abs() / boxes as f64;
        }
    }
    let slope_profile = log_log_slope(&ks, &means);
    if !(-1.15..=-0.85).contains(&slope_profile) {
        ok = false;
    }
    // part 2: synthesized oscillation means against the same frequency ladder
    let ctx = RelaxationContext::new(GammaLaw::new(1.0, 2.0).unwrap(), 2, 1.0).unwrap();
    let rho = 0.55;
    let m0 = ctx.slice_momentum(rho).unwrap();
    let ang: f64 = 2.0 * std::f64::consts::PI / 3.0;
    let p1 = ctx.lift_to_k(rho, scale3(&[1.0, 0.0, 0.0], m0)).unwrap();
    let p2 = ctx
        .lift_to_k(rho, scale3(&[ang.cos(), ang.sin(), 0.0], m0))
        .unwrap();
    let base = p1.scaled(0.55).plus(&p2.scaled(0.45));
    let gs = SpaceTimeBox {
        dim: 3,
        lo: [0.2, -0.5, -0.5, 0.0],
        hi: [1.2, 0.5, 0.5, 0.0],
    };
    let field = synthesize(&ctx, &base, &p1, &p2, &gs, 1, 0.3, 0.05).unwrap();
    let probe = TentProbe {
        s_center: 0.45,
        s_half: 0.15,
        s_indicator: true,
        w_centers: [0.0; 3],
        w_halves: [0.3, 0.3, 0.0],
    };
    let mean_probe = OscMeanProbe::new(&field, &probe, 64, 6, 6);
    let mut osc_means = Vec::new();
    for &k in &ks {
        let (r, m) = mean_probe.means(k);
        osc_means.push(r.abs().max(m[0].abs()).max(m[1].abs()));
    }
    let slope_osc = log_log_slope(&ks, &osc_means);
    if !(-1.15..=-0.85).contains(&slope_osc) {
        ok = false;
    }
    let details = format!("profile slope = {slope_profile:.3}, oscillation slope = {slope_osc:.3}");
    finish(5, "weak-* decay", 10_000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 6. isentropic Riemann round trips
// ---------------------------------------------------------------------------

fn check_isen_riemann(seed: u64) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x66);
    let mut ok = true;
    let mut worst = 0.0_f64;
    // 200 forward-constructed instances over the four two-wave shapes
    for i in 0..200 {
        let gamma = if i % 2 == 0 { 1.4 } else { 2.0 };
        let eos = GammaLaw::new(1.0, gamma).unwrap();
        let shape = i % 4;
        let u = rng.gen_range(-0.5..0.5);
        let (rl, rr, rho_m, v_minus): (f64, f64, f64, f64);
        let v_m_target: f64;
        let v_plus: f64;
        match shape {
            0 => {
                // two shocks
                rl = rng.gen_range(0.3..1.5);
                rr = rng.gen_range(0.3..1.5);
                rho_m = rl.max(rr) * rng.gen_range(1.2..3.0);
                v_minus = rng.gen_range(-0.5..0.5);
                v_m_target = v_minus - shock_jump(&eos, rl, rho_m);
                v_plus = v_m_target - shock_jump(&eos, rr, rho_m);
            }
            1 => {
                // 1-shock, 3-rarefaction
                rl = rng.gen_range(0.3..1.0);
                rho_m = rl * rng.gen_range(1.2..2.5);
                rr = rho_m * rng.gen_range(1.1..2.0);
                v_minus = rng.gen_range(-0.5..0.5);
                v_m_target = v_minus - shock_jump(&eos, rl, rho_m);
                v_plus = v_m_target + eos.rarefaction_integral(rho_m, rr).unwrap();
            }
            2 => {
                // 1-rarefaction, 3-shock
                rr = rng.gen_range(0.3..1.0);
                rho_m = rr * rng.gen_range(1.2..2.5);
                rl = rho_m * rng.gen_range(1.1..2.0);
                v_minus = rng.gen_range(-0.5..0.5);
                v_m_target = v_minus + eos.rarefaction_integral(rho_m, rl).unwrap();
                v_plus = v_m_target - shock_jump(&eos, rr, rho_m);
            }
            _ => {
                // two rarefactions
                rl = rng.gen_range(0.5..1.5);
                rr = rng.gen_range(0.5..1.5);
                rho_m = rl.min(rr) * rng.gen_range(0.2..0.8);
                v_minus = rng.gen_range(-0.5..0.5);
                v_m_target = v_minus + eos.rarefaction_integral(rho_m, rl).unwrap();
                v_plus = v_m_target + eos.rarefaction_integral(rho_m, rr).unwrap();
            }
        }
        let data = RiemannDataIsen {
            eos,
            rho_minus: rl,
            rho_plus: rr,
            u_minus: u,
            u_plus: -u,
            v_minus,
            v_plus,
        };
        match solve_isen(&data) {
            Ok(fan) => match fan.middle {
                MiddleState::Isen { rho_m: rm, v_m, .. } => {
                    let e1 = (rm - rho_m).abs() / rho_m;
                    let e2 = (v_m - v_m_target).abs() / (1.0 + v_m_target.abs());
                    worst = worst.max(e1).max(e2);
                    if e1 > 1e-10 || e2 > 1e-10 {
                        ok = false;
                    }
                }
                _ => ok = false,
            },
            Err(_) => ok = false,
        }
    }
    // exhaustive classification on random data
    for _ in 0..10_000 {
        let gamma = if rng.gen_bool(0.5) { 1.4 } else { 2.0 };
        let eos = GammaLaw::new(1.0, gamma).unwrap();
        let data = RiemannDataIsen {
            eos,
            rho_minus: rng.gen_range(0.05..3.0),
            rho_plus: rng.gen_range(0.05..3.0),
            u_minus: rng.gen_range(-1.0..1.0),
            u_plus: rng.gen_range(-1.0..1.0),
            v_minus: rng.gen_range(-3.0..3.0),
            v_plus: rng.gen_range(-3.0..3.0),
        };
        match solve_isen(&data) {
            Ok(fan) => {
                if !(1..=7).contains(&fan.case) {
                    ok = false;
                }
            }
            Err(_) => ok = false,
        }
    }
    // all 18 table rows reachable with the right verdicts
    let eos = GammaLaw::new(1.0, 2.0).unwrap();
    let mut seen = std::collections::BTreeMap::new();
    for &contact in &[false, true] {
        let (ul, ur) = if contact { (-0.5, 0.5) } else { (0.0, 0.0) };
        let witnesses: Vec<RiemannDataIsen> = {
            let base = |rl: f64, rr: f64, vl: f64, vr: f64| RiemannDataIsen {
                eos,
                rho_minus: rl,
                rho_plus: rr,
                u_minus: ul,
                u_plus: ur,
                v_minus: vl,
                v_plus: vr,
            };
            vec![
                base(1.0, 1.0, 0.1, 0.1),
                base(1.4, 0.6, 0.0, -shock_jump(&eos, 0.6, 1.4)),
                base(1.0, 2.0, 0.0, eos.rarefaction_integral(1.0, 2.0).unwrap()),
                base(0.6, 1.4, 0.0, -shock_jump(&eos, 0.6, 1.4)),
                base(1.0, 2.0, 0.0, -shock_jump(&eos, 1.0, 2.0) - 0.8),
                {
                    let (rl, rr, rho_m) = (0.5, 2.5, 1.3);
                    let v_m = -shock_jump(&eos, rl, rho_m);
                    base(
                        rl,
                        rr,
                        0.0,
                        v_m + eos.rarefaction_integral(rho_m, rr).unwrap(),
                    )
                },
                base(2.0, 1.0, 0.0, eos.rarefaction_integral(1.0, 2.0).unwrap()),
                {
                    let (rl, rr, rho_m) = (2.0, 0.5, 1.1);
                    base(
                        rl,
                        rr,
                        -eos.rarefaction_integral(rho_m, rl).unwrap(),
                        -shock_jump(&eos, rr, rho_m),
                    )
                },
                {
                    let (rl, rr, rho_m) = (1.0, 1.5, 0.4);
                    let v_m = eos.rarefaction_integral(rho_m, rl).unwrap();
                    base(
                        rl,
                        rr,
                        0.0,
                        v_m + eos.rarefaction_integral(rho_m, rr).unwrap(),
                    )
                },
            ]
        };
        for data in witnesses {
            if let Ok(fan) = solve_isen(&data) {
                let (row, verdict) = classify_row(&fan);
                seen.insert(row, verdict);
            }
        }
    }
    if seen.len() != 18 {
        ok = false;
    }
    for (row, verdict) in &seen {
        let want = match row {
            1 | 3 | 7 | 9 => Verdict::Unique,
            10 | 12 | 16 | 18 => Verdict::Open,
            _ => Verdict::NonUnique,
        };
        if *verdict != want {
            ok = false;
        }
    }
    let details = format!(
        "worst round-trip error = {worst:.2e}, table rows reached = {}",
        seen.len()
    );
    finish(6, "isentropic Riemann solver", 5000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 7. full-Euler two-shock solver
// ---------------------------------------------------------------------------

fn check_full_two_shock(seed: u64) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
    let g = 1.4;
    let mut ok = true;
    let mut worst_pm = 0.0_f64;
    let mut worst_rh = 0.0_f64;
    let mut min_margin = f64::INFINITY;
    for _ in 0..100 {
        let rl = rng.gen_range(0.4..1.6);
        let rr = rng.gen_range(0.4..1.6);
        let pl: f64 = rng.gen_range(0.4..1.6);
        let pr: f64 = rng.gen_range(0.4..1.6);
        let p_m = pl.max(pr) * rng.gen_range(1.2..4.0);
        let (fl, _) = crate::riemann::full_shock_branch(g, rl, pl, p_m);
        let (fr, _) = crate::riemann::full_shock_branch(g, rr, pr, p_m);
        let v_m = rng.gen_range(-0.5..0.5);
        let data = RiemannDataFull {
            gamma: g,
            rho_minus: rl,
            rho_plus: rr,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: v_m + fl,
            v_plus: v_m - fr,
            p_minus: pl,
            p_plus: pr,
        };
        match solve_full_two_shock(&data) {
            Ok(fan) => {
                if let MiddleState::Full { p_m: pm, .. } = fan.middle {
                    let err = (pm - p_m).abs() / p_m;
                    worst_pm = worst_pm.max(err);
                    if err > 1e-10 {
                        ok = false;
                    }
                }
                let report = rh_report_full(&fan, &data);
                let rh = report.max_residual() / report.scale;
                worst_rh = worst_rh.max(rh);
                min_margin = min_margin.min(report.min_margin());
                if rh > 1e-9 || report.min_margin() <= 0.0 {
                    ok = false;
                }
            }
            Err(_) => ok = false,
        }
    }
    let details = format!(
        "worst p_M error = {worst_pm:.2e}, worst RH residual = {worst_rh:.2e}, min margin = {min_margin:.2e}"
    );
    finish(7, "full-Euler two-shock solver", 2000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 8. isentropic shock/rarefaction pipeline
// ---------------------------------------------------------------------------

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

fn check_isen_sr_pipeline() -> CheckResult {
    let t0 = Instant::now();
    let eos = GammaLaw::new(1.0, 2.0).unwrap();
    let mut ok = true;
    let mut details = String::new();
    // small rarefaction: direct search must succeed
    let small = sr_datum(eos, 1.0, 2.0, 2.0 * 1.001);
    match isen_search_sr(&small, &SrGrid::default()) {
        Ok(Some(sol)) => {
            let report = isen_verify(&sol.candidate, &small);
            let rh = report.max_residual() / report.scale;
            let margins_ok = report.strict_margins.iter().all(|m| m.value > 0.0)
                && report.weak_margins.iter().all(|m| m.value > 0.0);
            if rh > 1e-9 || !margins_ok || !report.pass {
                ok = false;
            }
            let _ = write!(
                details,
                "direct: rho1 = {:.6}, max residual = {rh:.2e}; ",
                sol.rho1
            );
        }
        _ => {
            ok = false;
            let _ = write!(details, "direct search failed; ");
        }
    }
    // large rarefaction: the patched construction must succeed
    let large = sr_datum(eos, 1.0, 1.5, 4.0);
    match isen_aux_patch(&large, &SrGrid::default()) {
        Ok(patch) => {
            if !patch.feasible || patch.patch_margin <= 0.0 {
                ok = false;
            }
            if patch.rarefaction_identity.abs() > 1e-10 {
                ok = false;
            }
            let _ = write!(
                details,
                "patch: rho_a = {:.6}, margin = {:.3e}",
                patch.rho_aux, patch.patch_margin
            );
        }
        Err(e) => {
            ok = false;
            let _ = write!(details, "patch failed: {e}");
        }
    }
    finish(8, "isentropic SR pipeline", 30_000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 9. full-Euler continuation
// ---------------------------------------------------------------------------

fn check_full_continuation() -> CheckResult {
    let t0 = Instant::now();
    let mut ok = true;
    let mut details = String::new();
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
    let (norm_data, _) = match normalize_galilean(&data) {
        Ok(v) => v,
        Err(e) => {
            return finish(
                9,
                "full-Euler continuation",
                60_000.0,
                t0,
                false,
                format!("normalization failed: {e}"),
            );
        }
    };
    let ctx = match FullTwoShock::new(&norm_data) {
        Ok(c) => c,
        Err(e) => {
            return finish(
                9,
                "full-Euler continuation",
                60_000.0,
                t0,
                false,
                format!("context failed: {e}"),
            );
        }
    };
    // mu1 decreasing along eps = 10^-k, k = 2..6
    let mut prev = f64::INFINITY;
    let mut last = f64::NAN;
    for k in 2..=6 {
        let eps = 10.0_f64.powi(-k).min(ctx.eps_max);
        match ctx.mu(eps) {
            Ok((_, m1, _)) => {
                if m1.abs() > prev {
                    ok = false;
                }
                prev = m1.abs();
                last = m1.abs();
            }
            Err(_) => ok = false,
        }
    }
    if !(last <= 1e-4 * ctx.sigma_plus.abs()) {
        ok = false;
    }
    let _ = write!(details, "|mu1(1e-6)| = {last:.2e}; ");
    // C and gamma limits at (1e-8, 1e-8)
    match ctx.c_gamma(1e-8_f64.min(ctx.eps_max), 1e-8) {
        Ok((c1, c2, g1, g2)) => {
            let lim = c1.abs().max(c2.abs()).max(g1.abs()).max(g2.abs());
            if lim > 1e-4 * ctx.p_m.max(1.0) {
                ok = false;
            }
            let _ = write!(details, "limit defect = {lim:.2e}; ");
        }
        Err(_) => ok = false,
    }
    // search and verify
    match ctx.search() {
        Some((eps, eps_bar, cand)) => {
            let report = full_verify(&cand, &ctx.data);
            let rh = report.max_residual() / report.scale;
            let margins = report.strict_margins.iter().all(|m| m.value > 0.0)
                && report
                    .weak_margins
                    .iter()
                    .all(|m| m.value >= -1e-13 * report.scale);
            if rh > 1e-8 || !margins || !report.pass {
                ok = false;
            }
            let _ = write!(
                details,
                "search hit (eps, eps-bar) = ({eps:.3e}, {eps_bar:.3e}), max residual = {rh:.2e}"
            );
        }
        None => {
            ok = false;
            let _ = write!(details, "search exhausted");
        }
    }
    finish(9, "full-Euler continuation", 60_000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 10. entropy suite
// ---------------------------------------------------------------------------

fn check_entropy_suite(seed: u64) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xaa);
    let eos = GammaLaw::new(1.0, 1.4).unwrap();
    let mut ok = true;
    let mut worst_comp = 0.0_f64;
    let specs_baro = vec![
        EntropyPairSpec::baro_energy(),
        EntropyPairSpec::Baro {
            a: 0.0,
            b: [0.4, -0.3, 0.0],
            c: 0.7,
            d: -0.2,
        },
    ];
    let zs = [
        ZFunction::neg_exp(),
        ZFunction::identity(),
        ZFunction::constant(1.3),
    ];
    for _ in 0..100 {
        let n = 2;
        let rho = rng.gen_range(0.2..3.0);
        let m = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), 0.0];
        let st = ConsStateBaro::new(n, rho, m).unwrap();
        for spec in &specs_baro {
            let r = companion_residual(&eos, spec, &SystemState::Baro(st)).unwrap();
            worst_comp = worst_comp.max(r.residual / r.scale.max(1.0));
            if r.residual > 1e-5 * r.scale.max(1.0) {
                ok = false;
            }
        }
        let kin = 0.5 * (m[0] * m[0] + m[1] * m[1]) / rho;
        let stf = ConsStateFull::new(n, rho, m, kin + rng.gen_range(0.3..3.0)).unwrap();
        for z in &zs {
            let spec = EntropyPairSpec::Full {
                z: z.clone(),
                a: 0.2,
                b: [0.1, -0.2, 0.0],
                c: 0.3,
            };
            let r = companion_residual(&eos, &spec, &SystemState::Full(stf)).unwrap();
            worst_comp = worst_comp.max(r.residual / r.scale.max(1.0));
            if r.residual > 1e-5 * r.scale.max(1.0) {
                ok = false;
            }
        }
    }
    // Hessian quadratic forms at 10^4 samples
    let mut worst_hq = 0.0_f64;
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
        let agree = (hq.closed_a - hq.direct_a)
            .abs()
            .max((hq.closed_b - hq.direct_b).abs())
            / scale;
        worst_hq = worst_hq.max(agree);
        if agree > 1e-10 || hq.closed_a < -1e-12 * scale || hq.closed_b > 1e-12 * scale {
            ok = false;
        }
    }
    // flux-Jacobian eigen residuals
    let mut worst_eig = 0.0_f64;
    for _ in 0..100 {
        let n = if rng.gen_bool(0.5) { 2 } else { 3 };
        let mut nu = random_direction(&mut rng, n);
        let s = norm(n, &nu);
        for x in nu.iter_mut().take(n) {
            *x /= s;
        }
        let rho = rng.gen_range(0.2..3.0);
        let mut m = [0.0; 3];
        for x in m.iter_mut().take(n) {
            *x = rng.gen_range(-1.5..1.5);
        }
        let st = ConsStateBaro::new(n, rho, m).unwrap();
        let dec = flux_jacobian_eigen_baro(&eos, &st, &nu).unwrap();
        worst_eig = worst_eig.max(eigen_residual(&dec));
        if eigen_residual(&dec) > 1e-9 || !eigenvectors_independent(&dec) {
            ok = false;
        }
        let kin = 0.5 * crate::numerics::dot(n, &m, &m) / rho;
        let stf = ConsStateFull::new(n, rho, m, kin + rng.gen_range(0.3..3.0)).unwrap();
        let dec = flux_jacobian_eigen_full(1.4, &stf, &nu).unwrap();
        worst_eig = worst_eig.max(eigen_residual(&dec));
        if eigen_residual(&dec) > 1e-9 || !eigenvectors_independent(&dec) {
            ok = false;
        }
    }
    let details = format!(
        "worst companion = {worst_comp:.2e}, quadform gap = {worst_hq:.2e}, eigen residual = {worst_eig:.2e}"
    );
    finish(10, "entropy suite", 5000.0, t0, ok, details)
}

// ---------------------------------------------------------------------------
// 11. oscillation functional
// ---------------------------------------------------------------------------

fn check_oscillation_functional() -> CheckResult {
    let t0 = Instant::now();
    let mut ok = true;
    let mut details = String::new();
    // passing isentropic candidate with a small rarefaction
    let eos = GammaLaw::new(1.0, 2.0).unwrap();
    let data = sr_datum(eos, 1.0, 2.0, 2.0 * 1.01);
    let Ok(Some(sol)) = isen_search_sr(&data, &SrGrid::default()) else {
        return finish(
            11,
            "oscillation functional",
            120_000.0,
            t0,
            false,
            "search failed".into(),
        );
    };
    let cand = sol.candidate;
    let (rho1, _, _, c1) = cand.wedge_state(&eos);
    let ctx = RelaxationContext::new(eos, 2, c1).unwrap();
    // wedge-inscribed box: thin in t so the axis-aligned box fits
    let t0_box = 1.0;
    let dt = 0.9 * (cand.mu1 - cand.mu0) / cand.mu0.abs().max(cand.mu1.abs()).max(1.0);
    let t1_box = t0_box + dt.clamp(0.05, 0.5);
    let y_lo = (cand.mu0 * t0_box).max(cand.mu0 * t1_box);
    let y_hi = (cand.mu1 * t0_box).min(cand.mu1 * t1_box);
    let pad = 0.05 * (y_hi - y_lo);
    let gs = SpaceTimeBox {
        dim: 3,
        lo: [t0_box, -0.5, y_lo + pad, 0.0],
        hi: [t1_box, 0.5, y_hi - pad, 0.0],
    };
    if gs.volume() <= 0.0 {
        return finish(
            11,
            "oscillation functional",
            120_000.0,
            t0,
            false,
            "degenerate wedge box".into(),
        );
    }
    // K pair on the wedge slice and a base strictly between them
    let m0 = ctx.slice_momentum(rho1).unwrap();
    let th1 = 0.4_f64;
    let th2 = 2.3_f64;
    let p1 = ctx
        .lift_to_k(rho1, [m0 * th1.cos(), m0 * th1.sin(), 0.0])
        .unwrap();
    let p2 = ctx
        .lift_to_k(rho1, [m0 * th2.cos(), m0 * th2.sin(), 0.0])
        .unwrap();
    let tau = 0.55;
    let base = p1.scaled(tau).plus(&p2.scaled(1.0 - tau));
    let i_base = gs.volume() * relaxed_e(&ctx, base.rho, &base.m);
    if !(i_base < 0.0) {
        ok = false;
    }
    let _ = write!(details, "I(base) = {i_base:.4e}; ");
    let (frame, delta) = (0.2_f64, 0.02_f64);
    // epsilon from the collar and slice budget of the construction
    let eps = 2.0 * ctx.c * (1.0 - (1.0 - frame).powi(3)) * gs.volume()
        + 8.0 * delta * ctx.c * gs.volume();
    let e_tol = 0.05 * ctx.c;
    let mut rng = ChaCha8Rng::seed_from_u64(0xbb);
    let mut k = 8usize;
    let mut k_min = None;
    let mut i_values: Vec<(usize, f64)> = Vec::new();
    while k <= 512 {
        let field = match synthesize(&ctx, &base, &p1, &p2, &gs, k, frame, delta) {
            Ok(f) => f,
            Err(e) => {
                return finish(
                    11,
                    "oscillation functional",
                    120_000.0,
                    t0,
                    false,
                    format!("synthesis failed: {e}"),
                );
            }
        };
        // e-bound at 10^4 samples
        let bound = field.e_bound() + e_tol;
        let mut bound_ok = true;
        for _ in 0..10_000 {
            let t = rng.gen_range(gs.lo[0]..gs.hi[0]);
            let x = [
                rng.gen_range(gs.lo[1]..gs.hi[1]),
                rng.gen_range(gs.lo[2]..gs.hi[2]),
                0.0,
            ];
            let s = field.sample(t, &x);
            if ctx.e_functional(&s).unwrap() > bound {
                bound_ok = false;
                break;
            }
        }
        let i_k = field.functional_i(8);
        i_values.push((k, i_k));
        if bound_ok && i_k > -eps {
            k_min = Some(k);
            break;
        }
        k *= 2;
    }
    match k_min {
        Some(k) => {
            let i_k = i_values.last().unwrap().1;
            let _ = write!(
                details,
                "k_min = {k}, I(k_min) = {i_k:.4e}, eps = {eps:.4e}; "
            );
            // the oscillation lifts I from the base value toward zero
            if !(i_k > i_base) {
                ok = false;
            }
        }
        None => {
            ok = false;
            let _ = write!(
                details,
                "no k satisfied the bounds; I trace: {i_values:?}; "
            );
        }
    }
    // plateau values hit the pair states
    if let Some(k) = k_min {
        let field = synthesize(&ctx, &base, &p1, &p2, &gs, k, frame, delta).unwrap();
        let mut hits = 0;
        let mut worst_plateau = 0.0_f64;
        let mut tries = 0;
        while hits < 200 && tries < 400_000 {
            tries += 1;
            let t = rng.gen_range(gs.lo[0]..gs.hi[0]);
            let x = [
                rng.gen_range(gs.lo[1]..gs.hi[1]),
                rng.gen_range(gs.lo[2]..gs.hi[2]),
                0.0,
            ];
            if let Some(which) = field.plateau_of(t, &x) {
                hits += 1;
                let target = if which == 1 { &p1 } else { &p2 };
                let err =
                    field.sample(t, &x).minus(target).scale_norm() / target.scale_norm().max(1.0);
                worst_plateau = worst_plateau.max(err);
            }
        }
        if hits < 50 || worst_plateau > 1e-8 {
            ok = false;
        }
        let _ = write!(
            details,
            "plateau error = {worst_plateau:.2e} ({hits} hits); "
        );
    }
    // weak residuals of the piecewise-constant fan
    let field = PiecewiseFanField::from_isen(&cand, &data).unwrap();
    let residuals = weak_residual(&field, 20, 16, 4242);
    let max_weak = residuals.iter().cloned().fold(0.0_f64, f64::max);
    if max_weak > 1e-7 {
        ok = false;
    }
    let _ = write!(details, "max weak residual = {max_weak:.2e}");
    finish(11, "oscillation functional", 120_000.0, t0, ok, details)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instant_checks_pass() {
        assert!(check_wave_cone_instance().pass);
        assert!(check_boundary_instance().pass);
    }
}
