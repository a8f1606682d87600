//! Isentropic gamma-law equation of state, the pressure potential, internal
//! energy, physical entropy and the rarefaction integral that feeds the shock
//! and rarefaction curves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    #[error("pressure constant must be positive, got a = {0}")]
    NonPositiveA(f64),
    #[error("adiabatic coefficient must exceed 1, got gamma = {0}")]
    GammaOutOfRange(f64),
    #[error("density must be positive, got rho = {0}")]
    NonPositiveDensity(f64),
    #[error("pressure must be positive, got p = {0}")]
    NonPositivePressure(f64),
    #[error("density interval must satisfy 0 < rho_lo <= rho_hi, got [{0}, {1}]")]
    BadInterval(f64, f64),
}

/// Gamma-law pressure `p(rho) = a rho^gamma` with `a > 0`, `gamma > 1`.
///
/// `gamma = 1` is rejected at construction: the closed form of the pressure
/// potential divides by `gamma - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaLaw {
    pub a: f64,
    pub gamma: f64,
}

impl GammaLaw {
    pub fn new(a: f64, gamma: f64) -> Result<Self, EosError> {
        if !(a > 0.0) {
            return Err(EosError::NonPositiveA(a));
        }
        if !(gamma > 1.0) {
            return Err(EosError::GammaOutOfRange(gamma));
        }
        Ok(GammaLaw { a, gamma })
    }

    /// `p(rho) = a rho^gamma`.
    pub fn pressure(&self, rho: f64) -> Result<f64, EosError> {
        check_density(rho)?;
        Ok(self.a * rho.powf(self.gamma))
    }

    /// `p'(rho) = a gamma rho^(gamma-1)`, the squared sound speed.
    pub fn pressure_derivative(&self, rho: f64) -> Result<f64, EosError> {
        check_density(rho)?;
        Ok(self.a * self.gamma * rho.powf(self.gamma - 1.0))
    }

    /// Sound speed `sqrt(p'(rho))`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64, EosError> {
        Ok(self.pressure_derivative(rho)?.sqrt())
    }

    /// Pressure potential `P(rho) = a/(gamma-1) rho^gamma`, the closed form of
    /// `rho * int p(r)/r^2 dr`; satisfies `rho P' = P + p` and `P'' = p'/rho`.
    pub fn pressure_potential(&self, rho: f64) -> Result<f64, EosError> {
        check_density(rho)?;
        Ok(self.a / (self.gamma - 1.0) * rho.powf(self.gamma))
    }

    /// Inverse pressure `p^{-1}(y) = (y/a)^{1/gamma}` for `y > 0`.
    pub fn inverse_pressure(&self, y: f64) -> Result<f64, EosError> {
        if !(y > 0.0) {
            return Err(EosError::NonPositivePressure(y));
        }
        Ok((y / self.a).powf(1.0 / self.gamma))
    }

    /// `int_{rho_lo}^{rho_hi} sqrt(p'(r))/r dr` in closed form:
    /// `2 sqrt(a gamma)/(gamma-1) (rho_hi^((gamma-1)/2) - rho_lo^((gamma-1)/2))`.
    ///
    /// The lower limit may be `0` (the integral converges for `gamma > 1`).
    pub fn rarefaction_integral(&self, rho_lo: f64, rho_hi: f64) -> Result<f64, EosError> {
        if !(rho_lo >= 0.0) || !(rho_hi >= rho_lo) {
            return Err(EosError::BadInterval(rho_lo, rho_hi));
        }
        let half = 0.5 * (self.gamma - 1.0);
        let coeff = 2.0 * (self.a * self.gamma).sqrt() / (self.gamma - 1.0);
        Ok(coeff * (rho_hi.powf(half) - rho_lo.powf(half)))
    }
}

fn check_density(rho: f64) -> Result<(), EosError> {
    if rho > 0.0 {
        Ok(())
    } else {
        Err(EosError::NonPositiveDensity(rho))
    }
}

/// Specific internal energy of the incomplete equation of state,
/// `e(rho, p) = p / ((gamma-1) rho)`.
pub fn internal_energy(gamma: f64, rho: f64, p: f64) -> Result<f64, EosError> {
    if !(gamma > 1.0) {
        return Err(EosError::GammaOutOfRange(gamma));
    }
    check_density(rho)?;
    if !(p > 0.0) {
        return Err(EosError::NonPositivePressure(p));
    }
    Ok(p / ((gamma - 1.0) * rho))
}

/// Physical (specific) entropy `s(rho, p) = (log p - gamma log rho)/(gamma-1)`.
pub fn physical_entropy(gamma: f64, rho: f64, p: f64) -> Result<f64, EosError> {
    if !(gamma > 1.0) {
        return Err(EosError::GammaOutOfRange(gamma));
    }
    check_density(rho)?;
    if !(p > 0.0) {
        return Err(EosError::NonPositivePressure(p));
    }
    Ok((p.ln() - gamma * rho.ln()) / (gamma - 1.0))
}
