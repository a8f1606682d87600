//! 1-periodic zero-mean profiles with analytic derivative stacks: the
//! mollified two-level step and its bounded periodic third antiderivative.

use crate::numerics::{integrate_gl, Jet5};
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("step parameters out of range: need 0 < tau < 1 and 0 < delta < min(tau, 1-tau)/2, got tau = {tau}, delta = {delta}")]
    BadStepParams { tau: f64, delta: f64 },
    #[error("profile mean {0} exceeds 1e-6; antiderivatives would be unbounded")]
    NonZeroMean(f64),
}

/// Value and first four derivatives of a 1-periodic scalar profile.
#[derive(Clone)]
pub struct ProfileStack {
    eval: Arc<dyn Fn(f64) -> [f64; 5] + Send + Sync>,
}

impl ProfileStack {
    pub fn from_fn(f: impl Fn(f64) -> [f64; 5] + Send + Sync + 'static) -> Self {
        ProfileStack { eval: Arc::new(f) }
    }

    /// `sin(2 pi t)`, handy as an eigenfunction of differentiation.
    pub fn sine() -> Self {
        let w = 2.0 * std::f64::consts::PI;
        Self::from_fn(move |t| {
            let (s, c) = (w * t).sin_cos();
            [s, w * c, -w * w * s, -w * w * w * c, w * w * w * w * s]
        })
    }

    pub fn eval(&self, t: f64) -> [f64; 5] {
        (self.eval)(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    pub fn deriv(&self, t: f64, k: usize) -> f64 {
        self.eval(t)[k]
    }
}

impl std::fmt::Debug for ProfileStack {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ProfileStack")
    }
}

// ---------------------------------------------------------------------------
// The standard mollifier
// ---------------------------------------------------------------------------

/// Unit bump kernel `exp(1/(v^2-1))` on (-1, 1) and its derivatives, by jet
/// arithmetic.
fn unit_kernel_jet(v: f64) -> [f64; 5] {
    if v.abs() >= 1.0 {
        return [0.0; 5];
    }
    let x = Jet5::var(v);
    let inner = x.mul(&x).sub(&Jet5::constant(1.0)).recip();
    inner.exp().0
}

/// `int_{-1}^{1} exp(1/(v^2-1)) dv`, computed once.
fn kernel_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        // integrand is symmetric and flat at the endpoints
        2.0 * integrate_gl(&|v: f64| unit_kernel_jet(v)[0], 0.0, 1.0, 256, 12)
    })
}

/// Cumulative table of the unit kernel: `int_{-1}^{u}` on a fine grid.
struct KernelCdf {
    cells: usize,
    cum: Vec<f64>,
}

fn kernel_cdf() -> &'static KernelCdf {
    static CDF: OnceLock<KernelCdf> = OnceLock::new();
    CDF.get_or_init(|| {
        let cells = 4096;
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(0.0);
        let h = 2.0 / cells as f64;
        let mut acc = 0.0;
        for c in 0..cells {
            let lo = -1.0 + c as f64 * h;
            acc += integrate_gl(&|v: f64| unit_kernel_jet(v)[0], lo, lo + h, 1, 10);
            cum.push(acc);
        }
        KernelCdf { cells, cum }
    })
}

impl KernelCdf {
    /// `int_{-1}^{u} exp(1/(v^2-1)) dv`.
    fn eval(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return *self.cum.last().unwrap();
        }
        let h = 2.0 / self.cells as f64;
        let cell = (((u + 1.0) / h).floor() as usize).min(self.cells - 1);
        let lo = -1.0 + cell as f64 * h;
        self.cum[cell] + integrate_gl(&|v: f64| unit_kernel_jet(v)[0], lo, u, 1, 10)
    }
}

// ---------------------------------------------------------------------------
// Mollified two-level step
// ---------------------------------------------------------------------------

/// The mollification `f_delta` of the 1-periodic two-level step taking the
/// value `tau - 1` on `[0, tau) + Z` and `tau` on `[tau, 1) + Z`.
///
/// The result is 1-periodic with zero mean and range `[tau-1, tau]`, equal to
/// `tau - 1` exactly on `[delta, tau-delta] + Z` and to `tau` exactly on
/// `[tau+delta, 1-delta] + Z`.
pub fn mollified_step(tau: f64, delta: f64) -> Result<ProfileStack, ProfileError> {
    if !(tau > 0.0 && tau < 1.0) || !(delta > 0.0 && delta < 0.5 * tau.min(1.0 - tau)) {
        return Err(ProfileError::BadStepParams { tau, delta });
    }
    let mass = kernel_mass();
    let cdf = kernel_cdf();
    let eval = move |t: f64| -> [f64; 5] {
        let u = t - t.floor();
        if u >= delta && u <= tau - delta {
            return [tau - 1.0, 0.0, 0.0, 0.0, 0.0];
        }
        if u >= tau + delta && u <= 1.0 - delta {
            return [tau, 0.0, 0.0, 0.0, 0.0];
        }
        // transition layer around one jump: w is the signed distance
        let (w, sign) = if u < delta || u > 1.0 - delta {
            // downward jump at integers: f goes from tau to tau - 1
            (if u < delta { u } else { u - 1.0 }, -1.0)
        } else {
            // upward jump at tau
            (u - tau, 1.0)
        };
        let v = w / delta;
        let phi = unit_kernel_jet(v);
        let cdf_w = cdf.eval(v) / mass;
        let base = if sign < 0.0 { tau } else { tau - 1.0 };
        let mut out = [0.0; 5];
        out[0] = base + sign * cdf_w;
        for k in 1..5 {
            // d^k/dw^k of Cdf(w/delta)/1 = phi^(k-1)(w/delta) / (mass delta^k)
            out[k] = sign * phi[k - 1] / (mass * delta.powi(k as i32));
        }
        out
    };
    Ok(ProfileStack::from_fn(eval))
}

// ---------------------------------------------------------------------------
// Periodic antiderivatives
// ---------------------------------------------------------------------------

const GRID: usize = 16_384;

/// One antidifferentiation level on a dense grid: values at `i / GRID` with
/// the exact derivative being the previous level. Evaluation is cubic Hermite
/// with exact endpoint derivatives.
struct DenseLevel {
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl DenseLevel {
    /// Cumulative integral of the previous level (given by grid values plus
    /// its own derivative grid for the Hermite step rule), shifted to zero
    /// mean.
    fn integrate(prev_vals: &[f64], prev_derivs: &[f64]) -> DenseLevel {
        let n = GRID;
        let h = 1.0 / n as f64;
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            // exact integral of the cubic Hermite interpolant on one step
            acc += 0.5 * h * (prev_vals[i] + prev_vals[i + 1])
                + h * h / 12.0 * (prev_derivs[i] - prev_derivs[i + 1]);
            cum.push(acc);
        }
        // zero mean via the same step rule applied to the cumulative level
        let mut mean = 0.0;
        for i in 0..n {
            mean +=
                0.5 * h * (cum[i] + cum[i + 1]) + h * h / 12.0 * (prev_vals[i] - prev_vals[i + 1]);
        }
        for v in cum.iter_mut() {
            *v -= mean;
        }
        DenseLevel {
            values: cum,
            derivs: prev_vals.to_vec(),
        }
    }

    fn eval(&self, u: f64) -> f64 {
        let n = GRID;
        let x = u * n as f64;
        let cell = (x.floor() as usize).min(n - 1);
        let s = x - cell as f64;
        let h = 1.0 / n as f64;
        let (a, b) = (self.values[cell], self.values[cell + 1]);
        let (da, db) = (self.derivs[cell] * h, self.derivs[cell + 1] * h);
        // cubic Hermite basis in s
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * a
            + (s3 - 2.0 * s2 + s) * da
            + (-2.0 * s3 + 3.0 * s2) * b
            + (s3 - s2) * db
    }
}

/// Bounded periodic third antiderivative: returns `h` with `h''' = f`, all
/// levels 1-periodic with zero mean. The returned stack satisfies
/// `d3 = f.value` and `d4 = f.d1`.
pub fn antiderivative3(f: &ProfileStack) -> Result<ProfileStack, ProfileError> {
    let mean = integrate_gl(&|t| f.value(t), 0.0, 1.0, 2048, 8);
    if mean.abs() > 1e-6 {
        return Err(ProfileError::NonZeroMean(mean));
    }
    let n = GRID;
    let mut fvals = Vec::with_capacity(n + 1);
    let mut fderivs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let e = f.eval(i as f64 / n as f64);
        fvals.push(e[0]);
        fderivs.push(e[1]);
    }
    let h2 = DenseLevel::integrate(&fvals, &fderivs); // h'' level
    let h1 = DenseLevel::integrate(&h2.values, &h2.derivs); // h' level
    let h0 = DenseLevel::integrate(&h1.values, &h1.derivs); // h level
    let f1 = f.clone();
    Ok(ProfileStack::from_fn(move |t| {
        let u = t - t.floor();
        let base = f1.eval(t);
        [h0.eval(u), h1.eval(u), h2.eval(u), base[0], base[1]]
    }))
}

/// Convenience check used by tests: composite quadrature of the profile value
/// over one period.
pub fn profile_mean(f: &ProfileStack) -> f64 {
    integrate_gl(&|t| f.value(t), 0.0, 1.0, 2048, 8)
}
