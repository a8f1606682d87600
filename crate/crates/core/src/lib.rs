// Index-heavy numerical kernels read better with explicit loops, and the
// negated comparisons are deliberate NaN guards.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::too_many_arguments)]
#![allow(clippy::type_complexity)]

//! Constructive machinery behind convex integration for the multi-dimensional
//! compressible Euler equations.
//!
//! The crate is organized around the pipeline that turns Riemann initial data
//! into verified oscillatory subsolution fields:
//!
//! - [`eos`]: isentropic gamma-law equation of state and the rarefaction integral,
//! - [`conslaw`]: fluxes, flux Jacobians, eigenstructure and entropy pairs of the
//!   barotropic and full Euler systems,
//! - [`phasegeom`]: the extended phase space (constraint set, wave cone,
//!   Lambda-convex hull, H_N families),
//! - [`planewave`]: periodic profiles and the third-order homogeneous operators
//!   producing localized plane waves,
//! - [`riemann`]: exact self-similar Riemann solvers and structure classification,
//! - [`fansub`]: fan subsolution construction, verification and parameter search,
//! - [`oscsynth`]: synthesis of oscillatory fields on fan wedges plus the
//!   relaxed-energy functionals and weak-form residuals,
//! - [`selfcheck`]: the end-to-end verification suite driven by the CLI and the
//!   acceptance tests.

pub mod numerics;

pub mod eos;

pub mod conslaw;

pub mod phasegeom;

pub mod planewave;

pub mod riemann;

pub mod fansub;

pub mod oscsynth;

pub mod selfcheck;

pub use eos::GammaLaw;
pub use phasegeom::{PhasePoint, RelaxationContext, WeightedFamily};
