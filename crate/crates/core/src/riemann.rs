//! Exact self-similar Riemann solvers: the complete seven-case isentropic
//! solver with the 18-row structure classification, and the full-Euler
//! two-shock solver. Non-two-shock full-Euler data are classified
//! structurally but not solved.

use crate::eos::GammaLaw;
use crate::numerics::newton_bisect;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiemannError {
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("pressure must be positive, got {0}")]
    NonPositivePressure(f64),
    #[error("bracket expansion failed while solving for the intermediate state")]
    BracketFailed,
    #[error("two-shock condition fails: {0}")]
    NotTwoShock(String),
    #[error("tangential velocities must agree for the two-shock solver (u- = {0}, u+ = {1})")]
    TangentialJump(f64, f64),
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

/// Riemann data for the isentropic system: `u` is the tangential velocity
/// component, `v` the component normal to the initial discontinuity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiemannDataIsen {
    pub eos: GammaLaw,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
}

impl RiemannDataIsen {
    pub fn validate(&self) -> Result<(), RiemannError> {
        if !(self.rho_minus > 0.0) {
            return Err(RiemannError::NonPositiveDensity(self.rho_minus));
        }
        if !(self.rho_plus > 0.0) {
            return Err(RiemannError::NonPositiveDensity(self.rho_plus));
        }
        Ok(())
    }
}

/// Riemann data for the full system.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiemannDataFull {
    pub gamma: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub p_minus: f64,
    pub p_plus: f64,
}

impl RiemannDataFull {
    pub fn validate(&self) -> Result<(), RiemannError> {
        if !(self.rho_minus > 0.0) {
            return Err(RiemannError::NonPositiveDensity(self.rho_minus));
        }
        if !(self.rho_plus > 0.0) {
            return Err(RiemannError::NonPositiveDensity(self.rho_plus));
        }
        if !(self.p_minus > 0.0) {
            return Err(RiemannError::NonPositivePressure(self.p_minus));
        }
        if !(self.p_plus > 0.0) {
            return Err(RiemannError::NonPositivePressure(self.p_plus));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Wave fans
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcousticWave {
    None,
    Shock { speed: f64 },
    Rarefaction { lo: f64, hi: f64 },
}

impl AcousticWave {
    pub fn is_shock(&self) -> bool {
        matches!(self, AcousticWave::Shock { .. })
    }

    pub fn is_rarefaction(&self) -> bool {
        matches!(self, AcousticWave::Rarefaction { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContactWave {
    None,
    Contact { speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MiddleState {
    Isen {
        rho_m: f64,
        v_m: f64,
        vacuum: bool,
    },
    Full {
        rho_m_minus: f64,
        rho_m_plus: f64,
        v_m: f64,
        p_m: f64,
        /// false when only the wave structure was classified
        solved: bool,
    },
}

/// Structure of a self-similar Riemann solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveFan {
    pub wave1: AcousticWave,
    pub contact: ContactWave,
    pub wave3: AcousticWave,
    pub middle: MiddleState,
    /// 1..=7, the isentropic classification case (0 for full-system fans)
    pub case: u8,
}

// ---------------------------------------------------------------------------
// Isentropic solver
// ---------------------------------------------------------------------------

/// Shock bracket `sqrt((rho_hi - rho_lo)(p(rho_hi) - p(rho_lo)) / (rho_hi rho_lo))`,
/// the velocity jump magnitude across a shock between the two densities.
pub fn shock_jump(eos: &GammaLaw, rho_lo: f64, rho_hi: f64) -> f64 {
    let p_lo = eos.pressure(rho_lo).expect("rho > 0");
    let p_hi = eos.pressure(rho_hi).expect("rho > 0");
    (((rho_hi - rho_lo) * (p_hi - p_lo)) / (rho_hi * rho_lo))
        .max(0.0)
        .sqrt()
}

fn d_shock_jump(eos: &GammaLaw, rho_fixed: f64, rho_m: f64) -> f64 {
    // derivative in rho_m of shock_jump between rho_fixed and rho_m
    let p_f = eos.pressure(rho_fixed).expect("rho > 0");
    let p_m = eos.pressure(rho_m).expect("rho > 0");
    let dp_m = eos.pressure_derivative(rho_m).expect("rho > 0");
    let num = (rho_m - rho_fixed) * (p_m - p_f);
    let den = rho_m * rho_fixed;
    let s = (num / den).max(1e-300).sqrt();
    let dnum = (p_m - p_f) + (rho_m - rho_fixed) * dp_m;
    let dden = rho_fixed;
    let dratio = (dnum * den - num * dden) / (den * den);
    dratio / (2.0 * s)
}

/// Solve the isentropic Riemann problem exactly, classifying into the seven
/// self-similar cases (boundary ties resolve to the lower-numbered case).
pub fn solve_isen(data: &RiemannDataIsen) -> Result<WaveFan, RiemannError> {
    data.validate()?;
    let eos = &data.eos;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    let dv = data.v_plus - data.v_minus;
    let vac_threshold =
        eos.rarefaction_integral(0.0, rl).unwrap() + eos.rarefaction_integral(0.0, rr).unwrap();
    let raref_gap = eos.rarefaction_integral(rl.min(rr), rl.max(rr)).unwrap();
    let shock_gap = shock_jump(eos, rl.min(rr), rl.max(rr));

    let contact = |v_m: f64| {
        if data.u_minus != data.u_plus {
            ContactWave::Contact { speed: v_m }
        } else {
            ContactWave::None
        }
    };
    let sound = |rho: f64| eos.sound_speed(rho).expect("rho > 0");
    let raref1 = |rho_m: f64, v_m: f64| AcousticWave::Rarefaction {
        lo: data.v_minus - sound(rl),
        hi: v_m - sound(rho_m),
    };
    let raref3 = |rho_m: f64, v_m: f64| AcousticWave::Rarefaction {
        lo: v_m + sound(rho_m),
        hi: data.v_plus + sound(rr),
    };
    // mass Rankine-Hugoniot: sigma (rho_l - rho_r) = rho_l v_l - rho_r v_r
    let shock1 = |rho_m: f64, v_m: f64| AcousticWave::Shock {
        speed: (rl * data.v_minus - rho_m * v_m) / (rl - rho_m),
    };
    let shock3 = |rho_m: f64, v_m: f64| AcousticWave::Shock {
        speed: (rho_m * v_m - rr * data.v_plus) / (rho_m - rr),
    };

    if dv >= vac_threshold {
        // case 1: two rarefactions around a vacuum region
        let v_vac_l = data.v_minus + eos.rarefaction_integral(0.0, rl).unwrap();
        let v_vac_r = data.v_plus - eos.rarefaction_integral(0.0, rr).unwrap();
        return Ok(WaveFan {
            wave1: AcousticWave::Rarefaction {
                lo: data.v_minus - sound(rl),
                hi: v_vac_l,
            },
            contact: contact(0.5 * (v_vac_l + v_vac_r)),
            wave3: AcousticWave::Rarefaction {
                lo: v_vac_r,
                hi: data.v_plus + sound(rr),
            },
            middle: MiddleState::Isen {
                rho_m: 0.0,
                v_m: v_vac_l,
                vacuum: true,
            },
            case: 1,
        });
    }
    if dv > raref_gap {
        // case 2: two rarefactions, rho_m < min(rho-, rho+)
        let f = |rho_m: f64| {
            let val = eos.rarefaction_integral(rho_m, rl).unwrap()
                + eos.rarefaction_integral(rho_m, rr).unwrap()
                - dv;
            let c = sound(rho_m);
            (val, -2.0 * c / rho_m)
        };
        let lo = 1e-300_f64.max(rl.min(rr) * 1e-12);
        let rho_m = newton_bisect(&f, lo, rl.min(rr), 1e-13, 200)
            .map_err(|_| RiemannError::BracketFailed)?;
        let v_m = data.v_minus + eos.rarefaction_integral(rho_m, rl).unwrap();
        return Ok(WaveFan {
            wave1: raref1(rho_m, v_m),
            contact: contact(v_m),
            wave3: raref3(rho_m, v_m),
            middle: MiddleState::Isen {
                rho_m,
                v_m,
                vacuum: false,
            },
            case: 2,
        });
    }
    if dv == raref_gap {
        // case 3: one rarefaction (or equal states when the gap is zero)
        let (rho_m, v_m, w1, w3) = if rl > rr {
            let (r, v) = (rr, data.v_plus);
            (r, v, raref1(r, v), AcousticWave::None)
        } else if rl < rr {
            let (r, v) = (rl, data.v_minus);
            (r, v, AcousticWave::None, raref3(r, v))
        } else {
            (rl, data.v_minus, AcousticWave::None, AcousticWave::None)
        };
        return Ok(WaveFan {
            wave1: w1,
            contact: contact(v_m),
            wave3: w3,
            middle: MiddleState::Isen {
                rho_m,
                v_m,
                vacuum: false,
            },
            case: 3,
        });
    }
    if dv > -shock_gap {
        if rl > rr {
            // case 4: 1-rarefaction and 3-shock, rho+ < rho_m < rho-
            let f = |rho_m: f64| {
                let val =
                    eos.rarefaction_integral(rho_m, rl).unwrap() - shock_jump(eos, rr, rho_m) - dv;
                let d = -sound(rho_m) / rho_m - d_shock_jump(eos, rr, rho_m);
                (val, d)
            };
            let rho_m =
                newton_bisect(&f, rr, rl, 1e-13, 200).map_err(|_| RiemannError::BracketFailed)?;
            let v_m = data.v_minus + eos.rarefaction_integral(rho_m, rl).unwrap();
            return Ok(WaveFan {
                wave1: raref1(rho_m, v_m),
                contact: contact(v_m),
                wave3: shock3(rho_m, v_m),
                middle: MiddleState::Isen {
                    rho_m,
                    v_m,
                    vacuum: false,
                },
                case: 4,
            });
        } else {
            // case 5: 1-shock and 3-rarefaction, rho- < rho_m < rho+
            let f = |rho_m: f64| {
                let val =
                    eos.rarefaction_integral(rho_m, rr).unwrap() - shock_jump(eos, rl, rho_m) - dv;
                let d = -sound(rho_m) / rho_m - d_shock_jump(eos, rl, rho_m);
                (val, d)
            };
            let rho_m =
                newton_bisect(&f, rl, rr, 1e-13, 200).map_err(|_| RiemannError::BracketFailed)?;
            let v_m = data.v_minus - shock_jump(eos, rl, rho_m);
            return Ok(WaveFan {
                wave1: shock1(rho_m, v_m),
                contact: contact(v_m),
                wave3: raref3(rho_m, v_m),
                middle: MiddleState::Isen {
                    rho_m,
                    v_m,
                    vacuum: false,
                },
                case: 5,
            });
        }
    }
    if dv == -shock_gap && rl != rr {
        // case 6: a single shock
        let (rho_m, v_m, w1, w3) = if rl < rr {
            let (r, v) = (rr, data.v_plus);
            (r, v, shock1(r, v), AcousticWave::None)
        } else {
            let (r, v) = (rl, data.v_minus);
            (r, v, AcousticWave::None, shock3(r, v))
        };
        return Ok(WaveFan {
            wave1: w1,
            contact: contact(v_m),
            wave3: w3,
            middle: MiddleState::Isen {
                rho_m,
                v_m,
                vacuum: false,
            },
            case: 6,
        });
    }
    // case 7: two shocks, rho_m > max(rho-, rho+)
    let f = |rho_m: f64| {
        let val = -shock_jump(eos, rr, rho_m) - shock_jump(eos, rl, rho_m) - dv;
        let d = -d_shock_jump(eos, rr, rho_m) - d_shock_jump(eos, rl, rho_m);
        (val, d)
    };
    let lo = rl.max(rr);
    let mut hi = 2.0 * lo;
    let mut expansions = 0;
    while f(hi).0 > 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(RiemannError::BracketFailed);
        }
    }
    let rho_m = newton_bisect(&f, lo, hi, 1e-13, 200).map_err(|_| RiemannError::BracketFailed)?;
    let v_m = data.v_minus - shock_jump(eos, rl, rho_m);
    Ok(WaveFan {
        wave1: shock1(rho_m, v_m),
        contact: contact(v_m),
        wave3: shock3(rho_m, v_m),
        middle: MiddleState::Isen {
            rho_m,
            v_m,
            vacuum: false,
        },
        case: 7,
    })
}

// ---------------------------------------------------------------------------
// Structure classification (Table rows 1..18)
// ---------------------------------------------------------------------------

/// Uniqueness verdict attached to a structure row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Unique,
    NonUnique,
    Open,
}

/// Map a fan structure (1-wave kind, contact present, 3-wave kind) to the
/// 18-row table index and its uniqueness verdict.
pub fn classify_row(fan: &WaveFan) -> (u8, Verdict) {
    let w1 = match fan.wave1 {
        AcousticWave::None => 0u8,
        AcousticWave::Shock { .. } => 1,
        AcousticWave::Rarefaction { .. } => 2,
    };
    let w3 = match fan.wave3 {
        AcousticWave::None => 0u8,
        AcousticWave::Shock { .. } => 1,
        AcousticWave::Rarefaction { .. } => 2,
    };
    let has_contact = matches!(fan.contact, ContactWave::Contact { .. });
    let row = 1 + w3 + 3 * w1 + if has_contact { 9 } else { 0 };
    let verdict = match row {
        1 | 3 | 7 | 9 => Verdict::Unique,
        10 | 12 | 16 | 18 => Verdict::Open,
        _ => Verdict::NonUnique,
    };
    (row, verdict)
}

/// Solve and classify isentropic data against the 18-row table.
pub fn classify_isen(data: &RiemannDataIsen) -> Result<(u8, Verdict), RiemannError> {
    let fan = solve_isen(data)?;
    Ok(classify_row(&fan))
}

// ---------------------------------------------------------------------------
// Full Euler: two-shock solver
// ---------------------------------------------------------------------------

/// Shock branch of the full-system velocity-jump function,
/// `sqrt(2) (p - p0) / sqrt(rho0 ((gamma-1) p0 + (gamma+1) p))`, with its
/// derivative in `p`.
pub fn full_shock_branch(gamma: f64, rho0: f64, p0: f64, p: f64) -> (f64, f64) {
    let den2 = rho0 * ((gamma - 1.0) * p0 + (gamma + 1.0) * p);
    let den = den2.sqrt();
    let val = std::f64::consts::SQRT_2 * (p - p0) / den;
    let dden = rho0 * (gamma + 1.0) / (2.0 * den);
    let dval = std::f64::consts::SQRT_2 * (1.0 / den - (p - p0) * dden / den2);
    (val, dval)
}

/// Rarefaction branch of the full-system velocity-jump function (used only to
/// locate structure thresholds, never to solve through a rarefaction):
/// `2 c0/(gamma-1) ((p/p0)^((gamma-1)/2gamma) - 1)`.
fn full_raref_branch(gamma: f64, rho0: f64, p0: f64, p: f64) -> f64 {
    let c0 = (gamma * p0 / rho0).sqrt();
    2.0 * c0 / (gamma - 1.0) * ((p / p0).powf((gamma - 1.0) / (2.0 * gamma)) - 1.0)
}

/// Exact solution of the full-Euler Riemann problem when the self-similar
/// solution consists of a 1-shock, a possible contact, and a 3-shock.
/// Requires `u- = u+`.
pub fn solve_full_two_shock(data: &RiemannDataFull) -> Result<WaveFan, RiemannError> {
    data.validate()?;
    if (data.u_minus - data.u_plus).abs() > 1e-12 * (1.0 + data.u_minus.abs()) {
        return Err(RiemannError::TangentialJump(data.u_minus, data.u_plus));
    }
    let g = data.gamma;
    let (rl, rr) = (data.rho_minus, data.rho_plus);
    let (pl, pr) = (data.p_minus, data.p_plus);
    let dv = data.v_plus - data.v_minus;
    // two-shock condition of the self-similar classification
    if pl <= pr {
        let threshold =
            -std::f64::consts::SQRT_2 * (pr - pl) / (rl * ((g - 1.0) * pl + (g + 1.0) * pr)).sqrt();
        if !(dv < threshold) {
            return Err(RiemannError::NotTwoShock(format!(
                "p- <= p+ requires v+ - v- < {threshold:.6e}, got {dv:.6e}"
            )));
        }
    } else {
        let threshold =
            -std::f64::consts::SQRT_2 * (pl - pr) / (rr * ((g - 1.0) * pr + (g + 1.0) * pl)).sqrt();
        if !(dv < threshold) {
            return Err(RiemannError::NotTwoShock(format!(
                "p+ <= p- requires v+ - v- < {threshold:.6e}, got {dv:.6e}"
            )));
        }
    }
    // solve v+ - v- = -(fl(pm) + fr(pm)) on (max(pl, pr), infinity)
    let f = |pm: f64| {
        let (fl, dfl) = full_shock_branch(g, rl, pl, pm);
        let (fr, dfr) = full_shock_branch(g, rr, pr, pm);
        (dv + fl + fr, dfl + dfr)
    };
    let lo = pl.max(pr);
    let mut hi = 2.0 * lo;
    let mut expansions = 0;
    while f(hi).0 < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(RiemannError::BracketFailed);
        }
    }
    let p_m = newton_bisect(&f, lo, hi, 1e-14, 200).map_err(|_| RiemannError::BracketFailed)?;
    let (fl, _) = full_shock_branch(g, rl, pl, p_m);
    let v_m = data.v_minus - fl;
    let rho_ml = rl * ((g - 1.0) * pl + (g + 1.0) * p_m) / ((g - 1.0) * p_m + (g + 1.0) * pl);
    let rho_mr = rr * ((g - 1.0) * pr + (g + 1.0) * p_m) / ((g - 1.0) * p_m + (g + 1.0) * pr);
    let sigma_minus = (rl * data.v_minus - rho_ml * v_m) / (rl - rho_ml);
    let sigma_plus = (rho_mr * v_m - rr * data.v_plus) / (rho_mr - rr);
    let contact = if (data.u_minus - data.u_plus).abs() > 0.0
        || (rho_ml - rho_mr).abs() > 1e-12 * rho_ml.max(rho_mr)
    {
        ContactWave::Contact { speed: v_m }
    } else {
        ContactWave::None
    };
    Ok(WaveFan {
        wave1: AcousticWave::Shock { speed: sigma_minus },
        contact,
        wave3: AcousticWave::Shock { speed: sigma_plus },
        middle: MiddleState::Full {
            rho_m_minus: rho_ml,
            rho_m_plus: rho_mr,
            v_m,
            p_m,
            solved: true,
        },
        case: 0,
    })
}

/// Structure-only classification of full-Euler data: wave kinds from the sign
/// pattern of the monotone pressure-jump function, without solving through
/// rarefactions. Two-shock data are solved exactly.
pub fn classify_full(data: &RiemannDataFull) -> Result<WaveFan, RiemannError> {
    data.validate()?;
    if let Ok(fan) = solve_full_two_shock_relaxed(data) {
        return Ok(fan);
    }
    let g = data.gamma;
    let dv = data.v_plus - data.v_minus;
    let branch = |rho0: f64, p0: f64, p: f64| {
        if p >= p0 {
            full_shock_branch(g, rho0, p0, p).0
        } else {
            full_raref_branch(g, rho0, p0, p)
        }
    };
    let total = |p: f64| {
        dv + branch(data.rho_minus, data.p_minus, p) + branch(data.rho_plus, data.p_plus, p)
    };
    // vacuum threshold: p -> 0 limit of the rarefaction branches
    let cl = (g * data.p_minus / data.rho_minus).sqrt();
    let cr = (g * data.p_plus / data.rho_plus).sqrt();
    let vac = 2.0 * (cl + cr) / (g - 1.0);
    let (w1, w3, vacuum) = if dv >= vac {
        (false, false, true)
    } else {
        // the total is increasing in p; p_m lies where it crosses zero
        let at_min = total(data.p_minus.min(data.p_plus));
        let at_max = total(data.p_minus.max(data.p_plus));
        let above_min = at_min < 0.0; // p_m above the smaller initial pressure
        let above_max = at_max < 0.0; // p_m above the larger initial pressure
        let w1_shock = if data.p_minus >= data.p_plus {
            above_max
        } else {
            above_min
        };
        let w3_shock = if data.p_plus >= data.p_minus {
            above_max
        } else {
            above_min
        };
        (w1_shock, w3_shock, false)
    };
    let wave = |is_shock: bool| {
        if is_shock {
            AcousticWave::Shock { speed: f64::NAN }
        } else {
            AcousticWave::Rarefaction {
                lo: f64::NAN,
                hi: f64::NAN,
            }
        }
    };
    let contact = if data.u_minus != data.u_plus {
        ContactWave::Contact { speed: f64::NAN }
    } else {
        ContactWave::None
    };
    Ok(WaveFan {
        wave1: wave(w1),
        contact,
        wave3: wave(w3),
        middle: MiddleState::Full {
            rho_m_minus: f64::NAN,
            rho_m_plus: f64::NAN,
            v_m: f64::NAN,
            p_m: if vacuum { 0.0 } else { f64::NAN },
            solved: false,
        },
        case: 0,
    })
}

/// Internal variant of the two-shock solver that tolerates a tangential jump
/// (only the normal problem is solved; `u` rides along as a contact).
fn solve_full_two_shock_relaxed(data: &RiemannDataFull) -> Result<WaveFan, RiemannError> {
    let mut d = *data;
    d.u_minus = 0.0;
    d.u_plus = 0.0;
    let mut fan = solve_full_two_shock(&d)?;
    if data.u_minus != data.u_plus {
        if let MiddleState::Full { v_m, .. } = fan.middle {
            fan.contact = ContactWave::Contact { speed: v_m };
        }
    }
    Ok(fan)
}

// ---------------------------------------------------------------------------
// Rankine-Hugoniot and admissibility report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: f64,
    /// residuals must vanish; margins must be non-negative
    pub is_margin: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhReport {
    pub entries: Vec<ReportEntry>,
    pub scale: f64,
}

impl RhReport {
    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| !e.is_margin)
            .fold(0.0_f64, |acc, e| acc.max(e.value.abs()))
    }

    pub fn min_margin(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.is_margin)
            .fold(f64::INFINITY, |acc, e| acc.min(e.value))
    }
}

/// Rankine-Hugoniot residuals and admissibility margins of an isentropic fan.
pub fn rh_report_isen(fan: &WaveFan, data: &RiemannDataIsen) -> RhReport {
    let eos = &data.eos;
    let (rho_m, v_m) = match fan.middle {
        MiddleState::Isen { rho_m, v_m, .. } => (rho_m, v_m),
        _ => panic!("isentropic report requested for a full fan"),
    };
    let mut entries = Vec::new();
    let mut scale = 1.0_f64;
    // a shock between (rho_l, u, v_l) and (rho_r, u, v_r) at speed sigma:
    // mass and normal momentum residuals plus the energy admissibility margin
    let mut shock_checks =
        |label: &str, sigma: f64, rho_l: f64, v_l: f64, rho_r: f64, v_r: f64, u: f64| {
            let p_l = eos.pressure(rho_l).unwrap();
            let p_r = eos.pressure(rho_r).unwrap();
            let mass = sigma * (rho_l - rho_r) - (rho_l * v_l - rho_r * v_r);
            let mom = sigma * (rho_l * v_l - rho_r * v_r)
                - (rho_l * v_l * v_l + p_l - rho_r * v_r * v_r - p_r);
            let energy = |rho: f64, v: f64| {
                0.5 * rho * (u * u + v * v) + eos.pressure_potential(rho).unwrap()
            };
            let eflux = |rho: f64, v: f64, p: f64| (energy(rho, v) + p) * v;
            // admissibility: sigma (eta_r - eta_l) - (q_r - q_l) >= 0
            let margin = sigma * (energy(rho_r, v_r) - energy(rho_l, v_l))
                - (eflux(rho_r, v_r, p_r) - eflux(rho_l, v_l, p_l));
            scale = scale
                .max(mass.abs().max((rho_l * v_l).abs()))
                .max(p_l.abs() + p_r.abs());
            entries.push(ReportEntry {
                name: format!("{label}-mass"),
                value: mass,
                is_margin: false,
            });
            entries.push(ReportEntry {
                name: format!("{label}-momentum"),
                value: mom,
                is_margin: false,
            });
            entries.push(ReportEntry {
                name: format!("{label}-admissibility"),
                value: margin,
                is_margin: true,
            });
        };
    if let AcousticWave::Shock { speed } = fan.wave1 {
        shock_checks(
            "1-shock",
            speed,
            data.rho_minus,
            data.v_minus,
            rho_m,
            v_m,
            data.u_minus,
        );
    }
    if let AcousticWave::Shock { speed } = fan.wave3 {
        shock_checks(
            "3-shock",
            speed,
            rho_m,
            v_m,
            data.rho_plus,
            data.v_plus,
            data.u_plus,
        );
    }
    RhReport { entries, scale }
}

/// Rankine-Hugoniot residuals (mass, momentum, energy) and entropy margins of
/// a solved full-Euler two-shock fan.
pub fn rh_report_full(fan: &WaveFan, data: &RiemannDataFull) -> RhReport {
    let g = data.gamma;
    let (rho_ml, rho_mr, v_m, p_m) = match fan.middle {
        MiddleState::Full {
            rho_m_minus,
            rho_m_plus,
            v_m,
            p_m,
            ..
        } => (rho_m_minus, rho_m_plus, v_m, p_m),
        _ => panic!("full report requested for an isentropic fan"),
    };
    let mut entries = Vec::new();
    let mut scale = 1.0_f64;
    let mut shock_checks = |label: &str,
                            sigma: f64,
                            rho_l: f64,
                            v_l: f64,
                            p_l: f64,
                            rho_r: f64,
                            v_r: f64,
                            p_r: f64| {
        let mass = sigma * (rho_l - rho_r) - (rho_l * v_l - rho_r * v_r);
        let mom = sigma * (rho_l * v_l - rho_r * v_r)
            - (rho_l * v_l * v_l + p_l - rho_r * v_r * v_r - p_r);
        let etot = |rho: f64, v: f64, p: f64| 0.5 * rho * v * v + p / (g - 1.0);
        let en = sigma * (etot(rho_l, v_l, p_l) - etot(rho_r, v_r, p_r))
            - ((etot(rho_l, v_l, p_l) + p_l) * v_l - (etot(rho_r, v_r, p_r) + p_r) * v_r);
        let s = |rho: f64, p: f64| crate::eos::physical_entropy(g, rho, p).unwrap();
        // entropy production margin:
        // (rho_r s_r v_r - rho_l s_l v_l) - sigma (rho_r s_r - rho_l s_l) >= 0
        let margin = (rho_r * s(rho_r, p_r) * v_r - rho_l * s(rho_l, p_l) * v_l)
            - sigma * (rho_r * s(rho_r, p_r) - rho_l * s(rho_l, p_l));
        scale = scale
            .max((rho_l * v_l).abs())
            .max(p_l.abs() + p_r.abs())
            .max(etot(rho_l, v_l, p_l).abs());
        entries.push(ReportEntry {
            name: format!("{label}-mass"),
            value: mass,
            is_margin: false,
        });
        entries.push(ReportEntry {
            name: format!("{label}-momentum"),
            value: mom,
            is_margin: false,
        });
        entries.push(ReportEntry {
            name: format!("{label}-energy"),
            value: en,
            is_margin: false,
        });
        entries.push(ReportEntry {
            name: format!("{label}-admissibility"),
            value: margin,
            is_margin: true,
        });
    };
    if let AcousticWave::Shock { speed } = fan.wave1 {
        shock_checks(
            "1-shock",
            speed,
            data.rho_minus,
            data.v_minus,
            data.p_minus,
            rho_ml,
            v_m,
            p_m,
        );
    }
    if let AcousticWave::Shock { speed } = fan.wave3 {
        shock_checks(
            "3-shock",
            speed,
            rho_mr,
            v_m,
            p_m,
            data.rho_plus,
            data.v_plus,
            data.p_plus,
        );
    }
    RhReport { entries, scale }
}

// ---------------------------------------------------------------------------
// Self-similar state sampling (CSV support)
// ---------------------------------------------------------------------------

/// Evaluate the isentropic self-similar solution at the ray `xi = y/t`.
/// Returns `(rho, u, v)`; inside a vacuum region the density is 0.
pub fn sample_isen(fan: &WaveFan, data: &RiemannDataIsen, xi: f64) -> (f64, f64, f64) {
    let eos = &data.eos;
    let (rho_m, v_m, vacuum) = match fan.middle {
        MiddleState::Isen { rho_m, v_m, vacuum } => (rho_m, v_m, vacuum),
        _ => panic!("isentropic sampling of a full fan"),
    };
    let contact_speed = match fan.contact {
        ContactWave::Contact { speed } => speed,
        ContactWave::None => v_m,
    };
    let u_of = |xi: f64| {
        if xi < contact_speed {
            data.u_minus
        } else {
            data.u_plus
        }
    };
    let left_edge = match fan.wave1 {
        AcousticWave::None => f64::NEG_INFINITY,
        AcousticWave::Shock { speed } => speed,
        AcousticWave::Rarefaction { lo, .. } => lo,
    };
    if xi <= left_edge {
        return (data.rho_minus, data.u_minus, data.v_minus);
    }
    let right_edge = match fan.wave3 {
        AcousticWave::None => f64::INFINITY,
        AcousticWave::Shock { speed } => speed,
        AcousticWave::Rarefaction { hi, .. } => hi,
    };
    if xi >= right_edge {
        return (data.rho_plus, data.u_plus, data.v_plus);
    }
    // inside the 1-rarefaction: v - c(rho) = xi with the 1-Riemann invariant
    // v + int sqrt(p')/r through the left state
    if let AcousticWave::Rarefaction { lo, hi } = fan.wave1 {
        if xi > lo && xi < hi {
            let inv = data.v_minus + eos.rarefaction_integral(0.0, data.rho_minus).unwrap();
            let f = |rho: f64| {
                let c = eos.sound_speed(rho).unwrap();
                let v = inv - eos.rarefaction_integral(0.0, rho).unwrap();
                let dc = 0.5 * (eos.gamma - 1.0) * c / rho;
                (v - c - xi, -c / rho - dc)
            };
            let rho = newton_bisect(&f, 1e-12 * data.rho_minus, data.rho_minus, 1e-12, 200)
                .unwrap_or(rho_m);
            let v = inv - eos.rarefaction_integral(0.0, rho).unwrap();
            return (rho, u_of(xi), v);
        }
    }
    if let AcousticWave::Rarefaction { lo, hi } = fan.wave3 {
        if xi > lo && xi < hi {
            let inv = data.v_plus - eos.rarefaction_integral(0.0, data.rho_plus).unwrap();
            let f = |rho: f64| {
                let c = eos.sound_speed(rho).unwrap();
                let v = inv + eos.rarefaction_integral(0.0, rho).unwrap();
                let dc = 0.5 * (eos.gamma - 1.0) * c / rho;
                (v + c - xi, c / rho + dc)
            };
            let rho = newton_bisect(&f, 1e-12 * data.rho_plus, data.rho_plus, 1e-12, 200)
                .unwrap_or(rho_m);
            let v = inv + eos.rarefaction_integral(0.0, rho).unwrap();
            return (rho, u_of(xi), v);
        }
    }
    if vacuum {
        return (0.0, u_of(xi), 0.5 * (data.v_minus + data.v_plus));
    }
    (rho_m, u_of(xi), v_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eos2() -> GammaLaw {
        GammaLaw::new(1.0, 2.0).unwrap()
    }

    fn isen(
        eos: GammaLaw,
        rl: f64,
        rr: f64,
        ul: f64,
        ur: f64,
        vl: f64,
        vr: f64,
    ) -> RiemannDataIsen {
        RiemannDataIsen {
            eos,
            rho_minus: rl,
            rho_plus: rr,
            u_minus: ul,
            u_plus: ur,
            v_minus: vl,
            v_plus: vr,
        }
    }

    #[test]
    fn equal_states_give_trivial_fan() {
        let data = isen(eos2(), 1.0, 1.0, 0.3, 0.3, 0.7, 0.7);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 3);
        assert_eq!(fan.wave1, AcousticWave::None);
        assert_eq!(fan.contact, ContactWave::None);
        assert_eq!(fan.wave3, AcousticWave::None);
        match fan.middle {
            MiddleState::Isen { rho_m, v_m, vacuum } => {
                assert_eq!(rho_m, 1.0);
                assert_eq!(v_m, 0.7);
                assert!(!vacuum);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn two_shock_forward_construction_round_trip() {
        // pick (rho-, rho+, rho_M, v_M), compute (v-, v+) from the two-shock
        // case formulas, feed back and recover
        let eos = eos2();
        let (rl, rr, rho_m, v_m) = (1.0, 2.0, 3.0, 0.0);
        let v_minus = v_m + shock_jump(&eos, rl, rho_m);
        let v_plus = v_m - shock_jump(&eos, rr, rho_m);
        let data = isen(eos, rl, rr, 0.0, 0.0, v_minus, v_plus);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 7);
        match fan.middle {
            MiddleState::Isen {
                rho_m: rm, v_m: vm, ..
            } => {
                assert!((rm - rho_m).abs() < 1e-10 * rho_m);
                assert!((vm - v_m).abs() < 1e-10);
            }
            _ => panic!(),
        }
        let report = rh_report_isen(&fan, &data);
        assert!(report.max_residual() <= 1e-9 * report.scale);
        assert!(report.min_margin() > 0.0);
    }

    #[test]
    fn vacuum_case_detected() {
        let eos = eos2();
        let thresh = eos.rarefaction_integral(0.0, 1.0).unwrap()
            + eos.rarefaction_integral(0.0, 1.0).unwrap();
        let data = isen(eos, 1.0, 1.0, 0.0, 0.0, 0.0, thresh + 1.0);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 1);
        match fan.middle {
            MiddleState::Isen { rho_m, vacuum, .. } => {
                assert_eq!(rho_m, 0.0);
                assert!(vacuum);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rarefaction_cases_round_trip() {
        let eos = eos2();
        // case 2: two rarefactions via forward construction from rho_m
        let (rl, rr, rho_m) = (1.0, 1.5, 0.4);
        let v_minus = 0.2;
        let v_m = v_minus + eos.rarefaction_integral(rho_m, rl).unwrap();
        let v_plus = v_m + eos.rarefaction_integral(rho_m, rr).unwrap();
        let data = isen(eos, rl, rr, 0.0, 0.0, v_minus, v_plus);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 2);
        match fan.middle {
            MiddleState::Isen {
                rho_m: rm, v_m: vm, ..
            } => {
                assert!((rm - rho_m).abs() < 1e-10);
                assert!((vm - v_m).abs() < 1e-10);
            }
            _ => panic!(),
        }
        // case 4: 1-rarefaction + 3-shock
        let (rl, rr, rho_m) = (2.0, 0.5, 1.1);
        let v_m = -0.1;
        let v_minus = v_m - eos.rarefaction_integral(rho_m, rl).unwrap();
        let v_plus = v_m - shock_jump(&eos, rr, rho_m);
        let data = isen(eos, rl, rr, 0.0, 0.0, v_minus, v_plus);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 4);
        assert!(fan.wave1.is_rarefaction() && fan.wave3.is_shock());
        // case 5: 1-shock + 3-rarefaction
        let (rl, rr, rho_m) = (0.5, 2.5, 1.3);
        let v_minus = 0.4;
        let v_m = v_minus - shock_jump(&eos, rl, rho_m);
        let v_plus = v_m + eos.rarefaction_integral(rho_m, rr).unwrap();
        let data = isen(eos, rl, rr, 0.0, 0.0, v_minus, v_plus);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 5);
        match fan.middle {
            MiddleState::Isen { rho_m: rm, .. } => assert!((rm - rho_m).abs() < 1e-10),
            _ => panic!(),
        }
    }

    #[test]
    fn single_wave_boundaries() {
        let eos = eos2();
        // single-rarefaction boundary: dv equals the rarefaction gap exactly
        let (rl, rr) = (1.0, 2.0);
        let dv = eos.rarefaction_integral(rl, rr).unwrap();
        let data = isen(eos, rl, rr, 0.0, 0.0, 0.0, dv);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 3);
        assert_eq!(fan.wave1, AcousticWave::None);
        assert!(fan.wave3.is_rarefaction());
        // single-shock boundary: dv equals minus the shock gap exactly
        let dv = -shock_jump(&eos, rl, rr);
        let data = isen(eos, rl, rr, 0.0, 0.0, 0.0, dv);
        let fan = solve_isen(&data).unwrap();
        assert_eq!(fan.case, 6);
        assert!(fan.wave1.is_shock());
        assert_eq!(fan.wave3, AcousticWave::None);
    }

    #[test]
    fn classification_is_exhaustive_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let gamma = if rng.gen_bool(0.5) { 1.4 } else { 2.0 };
            let eos = GammaLaw::new(1.0, gamma).unwrap();
            let data = isen(
                eos,
                rng.gen_range(0.05..3.0),
                rng.gen_range(0.05..3.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let fan = solve_isen(&data).unwrap();
            assert!((1..=7).contains(&fan.case));
            // wave speeds ordered left to right when present
            let mut speeds: Vec<f64> = Vec::new();
            match fan.wave1 {
                AcousticWave::Shock { speed } => speeds.push(speed),
                AcousticWave::Rarefaction { lo, hi } => {
                    assert!(lo <= hi + 1e-12);
                    speeds.push(lo);
                    speeds.push(hi);
                }
                AcousticWave::None => {}
            }
            if let MiddleState::Isen {
                v_m, vacuum: false, ..
            } = fan.middle
            {
                speeds.push(v_m);
            }
            match fan.wave3 {
                AcousticWave::Shock { speed } => speeds.push(speed),
                AcousticWave::Rarefaction { lo, hi } => {
                    assert!(lo <= hi + 1e-12);
                    speeds.push(lo);
                    speeds.push(hi);
                }
                AcousticWave::None => {}
            }
            for w in speeds.windows(2) {
                assert!(w[0] <= w[1] + 1e-9, "speeds out of order: {speeds:?}");
            }
        }
    }

    #[test]
    fn table_rows_and_verdicts() {
        let eos = eos2();
        // two shocks, no contact: row 5, non-unique
        let v = -shock_jump(&eos, 1.0, 3.0) - 0.5;
        let data = isen(eos, 1.0, 3.0, 0.0, 0.0, 0.0, v);
        assert_eq!(classify_isen(&data).unwrap(), (5, Verdict::NonUnique));
        // single 3-rarefaction: row 3, unique
        let dv = eos.rarefaction_integral(1.0, 2.0).unwrap();
        let data = isen(eos, 1.0, 2.0, 0.0, 0.0, 0.0, dv);
        assert_eq!(classify_isen(&data).unwrap(), (3, Verdict::Unique));
        // contact only: row 10, open
        let data = isen(eos, 1.0, 1.0, -1.0, 1.0, 0.0, 0.0);
        assert_eq!(classify_isen(&data).unwrap(), (10, Verdict::Open));
    }

    #[test]
    fn all_18_rows_reachable() {
        let eos = eos2();
        let mut seen = std::collections::BTreeMap::new();
        for &contact in &[false, true] {
            let (ul, ur) = if contact { (-0.5, 0.5) } else { (0.0, 0.0) };
            for w1 in 0..3 {
                for w3 in 0..3 {
                    let data = match (w1, w3) {
                        (0, 0) => isen(eos, 1.0, 1.0, ul, ur, 0.1, 0.1),
                        (0, 1) => {
                            // single 3-shock: rho- > rho+
                            let dv = -shock_jump(&eos, 0.6, 1.4);
                            isen(eos, 1.4, 0.6, ul, ur, 0.0, dv)
                        }
                        (0, 2) => {
                            let dv = eos.rarefaction_integral(1.0, 2.0).unwrap();
                            isen(eos, 1.0, 2.0, ul, ur, 0.0, dv)
                        }
                        (1, 0) => {
                            // single 1-shock: rho- < rho+
                            let dv = -shock_jump(&eos, 0.6, 1.4);
                            isen(eos, 0.6, 1.4, ul, ur, 0.0, dv)
                        }
                        (1, 1) => {
                            let dv = -shock_jump(&eos, 1.0, 2.0) - 0.8;
                            isen(eos, 1.0, 2.0, ul, ur, 0.0, dv)
                        }
                        (1, 2) => {
                            let (rl, rr, rho_m) = (0.5, 2.5, 1.3);
                            let v_m = -shock_jump(&eos, rl, rho_m);
                            let v_plus = v_m + eos.rarefaction_integral(rho_m, rr).unwrap();
                            isen(eos, rl, rr, ul, ur, 0.0, v_plus)
                        }
                        (2, 0) => {
                            // single 1-rarefaction: rho- > rho+
                            let dv = eos.rarefaction_integral(1.0, 2.0).unwrap();
                            isen(eos, 2.0, 1.0, ul, ur, 0.0, dv)
                        }
                        (2, 1) => {
                            let (rl, rr, rho_m) = (2.0, 0.5, 1.1);
                            let v_minus = -eos.rarefaction_integral(rho_m, rl).unwrap();
                            let v_plus = -shock_jump(&eos, rr, rho_m);
                            isen(eos, rl, rr, ul, ur, v_minus, v_plus)
                        }
                        (2, 2) => {
                            let (rl, rr, rho_m) = (1.0, 1.5, 0.4);
                            let v_m = eos.rarefaction_integral(rho_m, rl).unwrap();
                            let v_plus = v_m + eos.rarefaction_integral(rho_m, rr).unwrap();
                            isen(eos, rl, rr, ul, ur, 0.0, v_plus)
                        }
                        _ => unreachable!(),
                    };
                    let fan = solve_isen(&data).unwrap();
                    let (row, verdict) = classify_row(&fan);
                    seen.insert(row, verdict);
                }
            }
        }
        assert_eq!(seen.len(), 18, "rows seen: {:?}", seen.keys());
        let want_unique = [1u8, 3, 7, 9];
        let want_open = [10u8, 12, 16, 18];
        for (row, verdict) in seen {
            if want_unique.contains(&row) {
                assert_eq!(verdict, Verdict::Unique);
            } else if want_open.contains(&row) {
                assert_eq!(verdict, Verdict::Open);
            } else {
                assert_eq!(verdict, Verdict::NonUnique);
            }
        }
    }

    #[test]
    fn galilean_shift_invariance() {
        let eos = eos2();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let data = isen(
                eos,
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.2..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let shift = rng.gen_range(-3.0..3.0);
            let mut shifted = data;
            shifted.v_minus += shift;
            shifted.v_plus += shift;
            let f0 = solve_isen(&data).unwrap();
            let f1 = solve_isen(&shifted).unwrap();
            assert_eq!(f0.case, f1.case);
            match (f0.middle, f1.middle) {
                (
                    MiddleState::Isen {
                        rho_m: r0,
                        v_m: v0,
                        vacuum: vac0,
                    },
                    MiddleState::Isen {
                        rho_m: r1,
                        v_m: v1,
                        vacuum: vac1,
                    },
                ) => {
                    assert_eq!(vac0, vac1);
                    if !vac0 {
                        assert!((r0 - r1).abs() <= 1e-10 * (1.0 + r0.abs()));
                        assert!((v1 - v0 - shift).abs() <= 1e-10 * (1.0 + v0.abs() + shift.abs()));
                    }
                }
                _ => panic!(),
            }
            let speed_of = |w: &AcousticWave| match w {
                AcousticWave::Shock { speed } => Some(*speed),
                AcousticWave::Rarefaction { lo, .. } => Some(*lo),
                AcousticWave::None => None,
            };
            if let (Some(s0), Some(s1)) = (speed_of(&f0.wave1), speed_of(&f1.wave1)) {
                assert!((s1 - s0 - shift).abs() < 1e-9 * (1.0 + s0.abs() + shift.abs()));
            }
        }
    }

    #[test]
    fn isen_shock_inequalities() {
        // (b): the rarefaction integral is dominated by the shock bracket
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let gamma = rng.gen_range(1.1..2.8);
            let eos = GammaLaw::new(rng.gen_range(0.3..2.0), gamma).unwrap();
            let rl = rng.gen_range(0.05..2.0);
            let rr = rl + rng.gen_range(0.01..3.0);
            let lhs = eos.rarefaction_integral(rl, rr).unwrap();
            let rhs = shock_jump(&eos, rl, rr);
            assert!(lhs < rhs, "inequality (b) failed: {lhs} vs {rhs}");
        }
        // (a): p- + p+ - 2 (rho- P+ - rho+ P-)/(rho+ - rho-) > 0
        for _ in 0..1000 {
            let gamma = rng.gen_range(1.1..2.8);
            let eos = GammaLaw::new(1.0, gamma).unwrap();
            let rl: f64 = rng.gen_range(0.05..2.0);
            let rr = rl + rng.gen_range(0.01..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -0.4 };
            if rr <= 0.0 || (rl - rr).abs() < 1e-9 {
                continue;
            }
            let p = |r: f64| eos.pressure(r).unwrap();
            let pp = |r: f64| eos.pressure_potential(r).unwrap();
            let val = p(rl) + p(rr) - 2.0 * (rl * pp(rr) - rr * pp(rl)) / (rr - rl);
            assert!(val > 0.0, "inequality (a) failed: {val}");
        }
        // (c): shock strength grows with the far density
        for _ in 0..1000 {
            let eos = GammaLaw::new(1.0, rng.gen_range(1.1..2.8)).unwrap();
            let rl = rng.gen_range(0.05..1.5);
            let rm = rl + rng.gen_range(0.01..1.0);
            let rr = rm + rng.gen_range(0.01..1.0);
            assert!(shock_jump(&eos, rl, rm) < shock_jump(&eos, rl, rr));
        }
    }

    // ---------------- full Euler ----------------

    fn full(gamma: f64, rl: f64, rr: f64, vl: f64, vr: f64, pl: f64, pr: f64) -> RiemannDataFull {
        RiemannDataFull {
            gamma,
            rho_minus: rl,
            rho_plus: rr,
            u_minus: 0.0,
            u_plus: 0.0,
            v_minus: vl,
            v_plus: vr,
            p_minus: pl,
            p_plus: pr,
        }
    }

    #[test]
    fn full_two_shock_symmetric_data() {
        let data = full(1.4, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0);
        let fan = solve_full_two_shock(&data).unwrap();
        match fan.middle {
            MiddleState::Full {
                rho_m_minus,
                rho_m_plus,
                v_m,
                p_m,
                solved,
            } => {
                assert!(solved);
                assert!(v_m.abs() < 1e-12);
                assert!((rho_m_minus - rho_m_plus).abs() < 1e-12);
                assert!(p_m > 1.0);
            }
            _ => panic!(),
        }
        // symmetric data: no contact (equal middle densities, u- = u+)
        assert_eq!(fan.contact, ContactWave::None);
        let report = rh_report_full(&fan, &data);
        assert!(report.max_residual() <= 1e-9 * report.scale);
        assert!(report.min_margin() > 0.0);
    }

    #[test]
    fn full_two_shock_forward_round_trip() {
        // choose p_M, compute v-/v+ from the closed forms, feed back
        let g = 1.4;
        let (rl, rr, pl, pr) = (1.0, 1.0, 1.0, 1.0);
        let p_m = 2.0;
        let (fl, _) = full_shock_branch(g, rl, pl, p_m);
        let (fr, _) = full_shock_branch(g, rr, pr, p_m);
        let v_minus = 0.3 + fl; // v_m = 0.3
        let v_plus = 0.3 - fr;
        let data = full(g, rl, rr, v_minus, v_plus, pl, pr);
        let fan = solve_full_two_shock(&data).unwrap();
        match fan.middle {
            MiddleState::Full { p_m: pm, v_m, .. } => {
                assert!((pm - p_m).abs() < 1e-10 * p_m, "pm = {pm}");
                assert!((v_m - 0.3).abs() < 1e-10);
            }
            _ => panic!(),
        }
        let report = rh_report_full(&fan, &data);
        assert!(report.max_residual() <= 1e-9 * report.scale);
        assert!(report.min_margin() > 0.0);
    }

    #[test]
    fn full_two_shock_regime_guards() {
        // weak jump: not two-shock
        let data = full(1.4, 1.0, 1.0, 0.0, 0.1, 1.0, 1.0);
        assert!(matches!(
            solve_full_two_shock(&data),
            Err(RiemannError::NotTwoShock(_))
        ));
        // tangential jump rejected
        let mut data = full(1.4, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0);
        data.u_plus = 0.5;
        assert!(matches!(
            solve_full_two_shock(&data),
            Err(RiemannError::TangentialJump(_, _))
        ));
    }

    #[test]
    fn full_report_detects_corruption() {
        let data = full(1.4, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0);
        let mut fan = solve_full_two_shock(&data).unwrap();
        if let AcousticWave::Shock { speed } = fan.wave1 {
            fan.wave1 = AcousticWave::Shock {
                speed: speed * 1.01,
            };
        }
        let report = rh_report_full(&fan, &data);
        assert!(report.max_residual() > 1e-3, "corruption undetected");
    }

    #[test]
    fn full_classification_structure() {
        // strong compression from both sides: two shocks
        let fan = classify_full(&full(1.4, 1.0, 1.0, 2.0, -2.0, 1.0, 1.0)).unwrap();
        assert!(fan.wave1.is_shock() && fan.wave3.is_shock());
        // strong expansion: two rarefactions, unsolved
        let fan = classify_full(&full(1.4, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0)).unwrap();
        assert!(fan.wave1.is_rarefaction() && fan.wave3.is_rarefaction());
        match fan.middle {
            MiddleState::Full { solved, .. } => assert!(!solved),
            _ => panic!(),
        }
        // pressure imbalance with mild velocities: one rarefaction, one shock
        let fan = classify_full(&full(1.4, 1.0, 1.0, 0.0, 0.0, 2.0, 0.5)).unwrap();
        assert!(fan.wave1.is_rarefaction() && fan.wave3.is_shock());
    }

    #[test]
    fn sample_isen_traverses_fan() {
        let eos = eos2();
        let data = isen(eos, 1.0, 2.0, -0.5, 0.5, 0.5, -1.5);
        let fan = solve_isen(&data).unwrap();
        let (r, u, v) = sample_isen(&fan, &data, -100.0);
        assert_eq!((r, u, v), (1.0, -0.5, 0.5));
        let (r, u, v) = sample_isen(&fan, &data, 100.0);
        assert_eq!((r, u, v), (2.0, 0.5, -1.5));
        if let MiddleState::Isen { rho_m, v_m, .. } = fan.middle {
            let xi = match fan.contact {
                ContactWave::Contact { speed } => speed - 1e-6,
                ContactWave::None => v_m,
            };
            let (r, _, v) = sample_isen(&fan, &data, xi);
            assert!((r - rho_m).abs() < 1e-9);
            assert!((v - v_m).abs() < 1e-9);
        }
        if let AcousticWave::Rarefaction { lo, hi } = fan.wave3 {
            let (r_lo, _, _) = sample_isen(&fan, &data, lo + 1e-9);
            let (r_hi, _, _) = sample_isen(&fan, &data, hi - 1e-9);
            if let MiddleState::Isen { rho_m, .. } = fan.middle {
                assert!((r_lo - rho_m).abs() < 1e-5);
            }
            assert!((r_hi - 2.0).abs() < 1e-5);
        }
    }
}
