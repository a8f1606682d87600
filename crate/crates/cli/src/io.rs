//! JSON schemas and command implementations.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crate::CliError;
use convint::eos::GammaLaw;
use convint::fansub::{
    full_verify, isen_aux_patch, isen_search_sr, isen_verify, FanCandidateFull, FanCandidateIsen,
    SrGrid,
};
use convint::oscsynth::{relaxed_e, synthesize, SpaceTimeBox};
use convint::phasegeom::RelaxationContext;
use convint::riemann::{
    classify_full, classify_isen, classify_row, rh_report_full, rh_report_isen, sample_isen,
    solve_isen, RiemannDataFull, RiemannDataIsen, WaveFan,
};
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::PathBuf;

// ---------------------------------------------------------------------------
// Input schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EosJson {
    #[serde(default = "default_a")]
    pub a: f64,
    pub gamma: f64,
}

fn default_a() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemJson {
    pub system: String,
    pub left: StateJson,
    pub right: StateJson,
    pub eos: EosJson,
}

impl ProblemJson {
    pub fn to_isen(&self) -> Result<RiemannDataIsen, CliError> {
        let eos = GammaLaw::new(self.eos.a, self.eos.gamma)
            .map_err(|e| CliError::domain(e.to_string()))?;
        Ok(RiemannDataIsen {
            eos,
            rho_minus: self.left.rho,
            rho_plus: self.right.rho,
            u_minus: self.left.u,
            u_plus: self.right.u,
            v_minus: self.left.v,
            v_plus: self.right.v,
        })
    }

    pub fn to_full(&self) -> Result<RiemannDataFull, CliError> {
        let p_minus = self
            .left
            .p
            .ok_or_else(|| CliError::parse("full system requires \"p\" in both states"))?;
        let p_plus = self
            .right
            .p
            .ok_or_else(|| CliError::parse("full system requires \"p\" in both states"))?;
        Ok(RiemannDataFull {
            gamma: self.eos.gamma,
            rho_minus: self.left.rho,
            rho_plus: self.right.rho,
            u_minus: self.left.u,
            u_plus: self.right.u,
            v_minus: self.left.v,
            v_plus: self.right.v,
            p_minus,
            p_plus,
        })
    }
}

fn read_input(input: Option<PathBuf>, json: Option<String>) -> Result<String, CliError> {
    match (input, json) {
        (Some(path), None) => std::fs::read_to_string(&path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display()))),
        (None, Some(text)) => Ok(text),
        _ => Err(CliError::parse("provide exactly one of --input or --json")),
    }
}

fn parse_problem(input: Option<PathBuf>, json: Option<String>) -> Result<ProblemJson, CliError> {
    let text = read_input(input, json)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("bad problem JSON: {e}")))
}

fn write_out(out: Option<PathBuf>, payload: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(&path, payload)
            .map_err(|e| CliError::domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{payload}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// riemann / classify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FanReport {
    system: String,
    fan: WaveFan,
    table_row: Option<u8>,
    verdict: Option<convint::riemann::Verdict>,
    max_rh_residual: Option<f64>,
    min_admissibility_margin: Option<f64>,
    entries: Vec<convint::riemann::ReportEntry>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn cmd_riemann(
    system: &str,
    input: Option<PathBuf>,
    json: Option<String>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    grid: usize,
) -> Result<(), CliError> {
    let problem = parse_problem(input, json)?;
    match system {
        "isen" => {
            let data = problem.to_isen()?;
            let fan = solve_isen(&data).map_err(|e| CliError::domain(e.to_string()))?;
            let report = rh_report_isen(&fan, &data);
            let (row, verdict) = classify_row(&fan);
            let payload = FanReport {
                system: "isen".into(),
                fan,
                table_row: Some(row),
                verdict: Some(verdict),
                max_rh_residual: finite(report.max_residual()),
                min_admissibility_margin: finite(report.min_margin()),
                entries: report.entries,
            };
            write_out(out, &to_json(&payload))?;
            if let Some(path) = csv {
                write_isen_csv(&path, &fan, &data, grid)?;
            }
            Ok(())
        }
        "full" => {
            let data = problem.to_full()?;
            let fan = classify_full(&data).map_err(|e| CliError::domain(e.to_string()))?;
            let solved = matches!(
                fan.middle,
                convint::riemann::MiddleState::Full { solved: true, .. }
            );
            let (residual, margin, entries) = if solved {
                let report = rh_report_full(&fan, &data);
                (report.max_residual(), report.min_margin(), report.entries)
            } else {
                (f64::NAN, f64::NAN, Vec::new())
            };
            let payload = FanReport {
                system: "full".into(),
                fan,
                table_row: None,
                verdict: None,
                max_rh_residual: finite(residual),
                min_admissibility_margin: finite(margin),
                entries,
            };
            write_out(out, &to_json(&payload))
        }
        _ => Err(CliError::parse("unknown system")),
    }
}

fn write_isen_csv(
    path: &PathBuf,
    fan: &WaveFan,
    data: &RiemannDataIsen,
    grid: usize,
) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::domain(format!("cannot create {}: {e}", path.display())))?;
    writeln!(f, "xi,rho,u,v").map_err(|e| CliError::domain(e.to_string()))?;
    // sampling window spanning every wave
    let mut speeds = vec![data.v_minus.abs(), data.v_plus.abs(), 1.0];
    for w in [&fan.wave1, &fan.wave3] {
        match w {
            convint::riemann::AcousticWave::Shock { speed } => speeds.push(speed.abs()),
            convint::riemann::AcousticWave::Rarefaction { lo, hi } => {
                speeds.push(lo.abs());
                speeds.push(hi.abs());
            }
            convint::riemann::AcousticWave::None => {}
        }
    }
    let span = 1.5 * speeds.iter().cloned().fold(0.0_f64, f64::max);
    let grid = grid.max(2);
    for i in 0..grid {
        let xi = -span + 2.0 * span * i as f64 / (grid - 1) as f64;
        let (rho, u, v) = sample_isen(fan, data, xi);
        writeln!(f, "{xi},{rho},{u},{v}").map_err(|e| CliError::domain(e.to_string()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport {
    table_row: u8,
    verdict: convint::riemann::Verdict,
    case: u8,
    fan: WaveFan,
}

pub fn cmd_classify(
    input: Option<PathBuf>,
    json: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let problem = parse_problem(input, json)?;
    if problem.system != "isen" {
        return Err(CliError::parse(
            "classify supports the isentropic system (the full table is structural only)",
        ));
    }
    let data = problem.to_isen()?;
    let fan = solve_isen(&data).map_err(|e| CliError::domain(e.to_string()))?;
    let (table_row, verdict) = classify_isen(&data).map_err(|e| CliError::domain(e.to_string()))?;
    let payload = ClassifyReport {
        table_row,
        verdict,
        case: fan.case,
        fan,
    };
    write_out(out, &to_json(&payload))
}

// ---------------------------------------------------------------------------
// fan-search / fan-verify
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchOutput {
    pub system: String,
    pub problem: ProblemJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isen_candidate: Option<FanCandidateIsen>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_candidate: Option<FanCandidateFull>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    /// for patched isentropic constructions: the auxiliary sub-problem the
    /// candidate actually solves
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_problem: Option<ProblemJson>,
    /// for normalized full-Euler searches: the Galilean shift applied
    #[serde(skip_serializing_if = "Option::is_none")]
    pub galilean_shift: Option<[f64; 2]>,
}

pub fn cmd_fan_search(
    system: &str,
    input: Option<PathBuf>,
    json: Option<String>,
    out: Option<PathBuf>,
    aux_patch: bool,
    grid: usize,
) -> Result<(), CliError> {
    let problem = parse_problem(input, json)?;
    let grid_spec = SrGrid {
        n_rho: grid,
        ..SrGrid::default()
    };
    match system {
        "isen" => {
            let data = problem.to_isen()?;
            if aux_patch {
                let patch = isen_aux_patch(&data, &grid_spec)
                    .map_err(|e| CliError::domain(e.to_string()))?;
                if !patch.feasible {
                    return Err(CliError::infeasible(
                        "auxiliary patching found no feasible wedge",
                    ));
                }
                let sub = ProblemJson {
                    system: "isen".into(),
                    left: StateJson {
                        rho: patch.sub_data.rho_minus,
                        u: patch.sub_data.u_minus,
                        v: patch.sub_data.v_minus,
                        p: None,
                    },
                    right: StateJson {
                        rho: patch.sub_data.rho_plus,
                        u: patch.sub_data.u_plus,
                        v: patch.sub_data.v_plus,
                        p: None,
                    },
                    eos: problem.eos.clone(),
                };
                let payload = SearchOutput {
                    system: "isen".into(),
                    problem,
                    isen_candidate: Some(patch.solution.candidate),
                    full_candidate: None,
                    params: Some(serde_json::json!({
                        "rho1": patch.solution.rho1,
                        "eps_tilde1": patch.solution.eps_tilde1,
                        "rho_aux": patch.rho_aux,
                        "v_aux": patch.v_aux,
                        "patch_margin": patch.patch_margin,
                    })),
                    sub_problem: Some(sub),
                    galilean_shift: None,
                };
                return write_out(out, &to_json(&payload));
            }
            let found =
                isen_search_sr(&data, &grid_spec).map_err(|e| CliError::domain(e.to_string()))?;
            match found {
                Some(sol) => {
                    let payload = SearchOutput {
                        system: "isen".into(),
                        problem,
                        isen_candidate: Some(sol.candidate),
                        full_candidate: None,
                        params: Some(serde_json::json!({
                            "rho1": sol.rho1,
                            "eps_tilde1": sol.eps_tilde1,
                        })),
                        sub_problem: None,
                        galilean_shift: None,
                    };
                    write_out(out, &to_json(&payload))
                }
                None => Err(CliError::infeasible(
                    "grid exhausted without a verified candidate; try --aux-patch",
                )),
            }
        }
        "full" => {
            let data = problem.to_full()?;
            let (normalized, shift, found) =
                convint::fansub::full_search(&data).map_err(|e| CliError::domain(e.to_string()))?;
            match found {
                Some((eps, eps_bar, cand)) => {
                    let mut normalized_problem = problem.clone();
                    normalized_problem.left = StateJson {
                        rho: normalized.rho_minus,
                        u: normalized.u_minus,
                        v: normalized.v_minus,
                        p: Some(normalized.p_minus),
                    };
                    normalized_problem.right = StateJson {
                        rho: normalized.rho_plus,
                        u: normalized.u_plus,
                        v: normalized.v_plus,
                        p: Some(normalized.p_plus),
                    };
                    let payload = SearchOutput {
                        system: "full".into(),
                        problem: normalized_problem,
                        isen_candidate: None,
                        full_candidate: Some(cand),
                        params: Some(serde_json::json!({
                            "eps": eps,
                            "eps_bar": eps_bar,
                        })),
                        sub_problem: None,
                        galilean_shift: Some(shift),
                    };
                    write_out(out, &to_json(&payload))
                }
                None => Err(CliError::infeasible(
                    "continuation exhausted without a verified candidate",
                )),
            }
        }
        _ => Err(CliError::parse("unknown system")),
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    pass: bool,
    report: convint::fansub::VerifyReport,
}

pub fn cmd_fan_verify(
    input: Option<PathBuf>,
    json: Option<String>,
    out: Option<PathBuf>,
    tol: Option<f64>,
) -> Result<(), CliError> {
    let text = read_input(input, json)?;
    let search: SearchOutput = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(format!("bad candidate JSON: {e}")))?;
    // a patched candidate verifies against its auxiliary sub-problem
    let problem = search.sub_problem.as_ref().unwrap_or(&search.problem);
    let report = match search.system.as_str() {
        "isen" => {
            let cand = search
                .isen_candidate
                .ok_or_else(|| CliError::parse("missing isentropic candidate"))?;
            isen_verify(&cand, &problem.to_isen()?)
        }
        "full" => {
            let cand = search
                .full_candidate
                .ok_or_else(|| CliError::parse("missing full candidate"))?;
            full_verify(&cand, &problem.to_full()?)
        }
        other => return Err(CliError::parse(format!("unknown system {other}"))),
    };
    let pass = match tol {
        None => report.pass,
        Some(t) => {
            if !(t > 0.0) {
                return Err(CliError::parse("tolerance must be positive"));
            }
            report.max_residual() <= t * report.scale
                && report.strict_margins.iter().all(|m| m.value > 0.0)
                && report
                    .weak_margins
                    .iter()
                    .all(|m| m.value >= -t * report.scale)
        }
    };
    write_out(out, &to_json(&VerifyOutput { pass, report }))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::domain("candidate failed verification"))
    }
}

// ---------------------------------------------------------------------------
// oscillate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OscillateTrace {
    i_base: f64,
    trace: Vec<(usize, f64)>,
    e_bound: f64,
    wedge_box: SpaceTimeBox,
}

pub fn cmd_oscillate(
    input: Option<PathBuf>,
    json: Option<String>,
    k: usize,
    quad: usize,
    grid: usize,
    csv: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let text = read_input(input, json)?;
    let search: SearchOutput = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(format!("bad candidate JSON: {e}")))?;
    if search.system != "isen" {
        return Err(CliError::parse(
            "oscillate requires an isentropic candidate",
        ));
    }
    let cand = search
        .isen_candidate
        .ok_or_else(|| CliError::parse("missing isentropic candidate"))?;
    let problem = search.sub_problem.as_ref().unwrap_or(&search.problem);
    let data = problem.to_isen()?;
    let eos = data.eos;
    let (rho1, _, _, c1) = cand.wedge_state(&eos);
    let ctx = RelaxationContext::new(eos, 2, c1).map_err(|e| CliError::domain(e.to_string()))?;
    // wedge-inscribed axis-aligned box
    let t0 = 1.0;
    let dt = (0.9 * (cand.mu1 - cand.mu0) / cand.mu0.abs().max(cand.mu1.abs()).max(1.0))
        .clamp(0.05, 0.5);
    let t1 = t0 + dt;
    let y_lo = (cand.mu0 * t0).max(cand.mu0 * t1);
    let y_hi = (cand.mu1 * t0).min(cand.mu1 * t1);
    let pad = 0.05 * (y_hi - y_lo);
    let gs = SpaceTimeBox {
        dim: 3,
        lo: [t0, -0.5, y_lo + pad, 0.0],
        hi: [t1, 0.5, y_hi - pad, 0.0],
    };
    if gs.volume() <= 0.0 {
        return Err(CliError::domain("wedge too thin for an inscribed box"));
    }
    // K pair on the wedge slice and a base between them
    let m0 = ctx
        .slice_momentum(rho1)
        .map_err(|e| CliError::domain(e.to_string()))?;
    let (th1, th2) = (0.4_f64, 2.3_f64);
    let p1 = ctx
        .lift_to_k(rho1, [m0 * th1.cos(), m0 * th1.sin(), 0.0])
        .map_err(|e| CliError::domain(e.to_string()))?;
    let p2 = ctx
        .lift_to_k(rho1, [m0 * th2.cos(), m0 * th2.sin(), 0.0])
        .map_err(|e| CliError::domain(e.to_string()))?;
    let base = p1.scaled(0.55).plus(&p2.scaled(0.45));
    let (frame, delta) = (0.2, 0.02);
    let i_base = gs.volume() * relaxed_e(&ctx, base.rho, &base.m);
    // functional trace over the frequency ladder up to k
    let mut trace = Vec::new();
    let mut kk = 8;
    let mut field = None;
    while kk <= k.max(8) {
        let f = synthesize(&ctx, &base, &p1, &p2, &gs, kk, frame, delta)
            .map_err(|e| CliError::domain(e.to_string()))?;
        trace.push((kk, f.functional_i(quad)));
        let done = kk >= k;
        field = Some(f);
        if done {
            break;
        }
        kk *= 2;
    }
    let field = field.expect("ladder is nonempty");
    let payload = OscillateTrace {
        i_base,
        trace,
        e_bound: field.e_bound(),
        wedge_box: gs,
    };
    write_out(out, &to_json(&payload))?;
    if let Some(path) = csv {
        let mut f = std::fs::File::create(&path)
            .map_err(|e| CliError::domain(format!("cannot create {}: {e}", path.display())))?;
        writeln!(f, "t,x,y,rho,m1,m2,U11,U12,U22,E,e")
            .map_err(|e| CliError::domain(e.to_string()))?;
        let grid = grid.max(2);
        for it in 0..grid {
            let t = gs.lo[0] + (gs.hi[0] - gs.lo[0]) * it as f64 / (grid - 1) as f64;
            for ix in 0..grid {
                let x1 = gs.lo[1] + (gs.hi[1] - gs.lo[1]) * ix as f64 / (grid - 1) as f64;
                for iy in 0..grid {
                    let x2 = gs.lo[2] + (gs.hi[2] - gs.lo[2]) * iy as f64 / (grid - 1) as f64;
                    let s = field.sample(t, &[x1, x2, 0.0]);
                    let e = ctx
                        .e_functional(&s)
                        .map_err(|e| CliError::domain(e.to_string()))?;
                    let big_e = relaxed_e(&ctx, s.rho, &s.m);
                    writeln!(
                        f,
                        "{t},{x1},{x2},{},{},{},{},{},{},{big_e},{e}",
                        s.rho,
                        s.m[0],
                        s.m[1],
                        s.u_entry(0, 0),
                        s.u_entry(0, 1),
                        s.u_entry(1, 1)
                    )
                    .map_err(|e| CliError::domain(e.to_string()))?;
                }
            }
        }
    }
    Ok(())
}
