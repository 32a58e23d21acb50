//! # fracmc
//!
//! Numerical toolkit for sequential-order fractional differential equations.
//!
//! A linear constant-coefficient equation built from repeated fractional
//! derivatives of order `beta` in (0, 1] is solved by a random time change:
//! the classical integer-order equation is integrated once with an adaptive
//! Runge-Kutta method, the solution is evaluated at draws of the inverse
//! beta-stable random time `T_beta(t)`, and the draws are averaged. Closed
//! forms built from Mittag-Leffler functions serve as analytic references.
//!
//! Modules:
//!
//! - [`specfun`]: Gamma, Mittag-Leffler, Wright functions, the inverse-stable
//!   time density, and the power-series time transform.
//! - [`subordinator`]: exact sampling of one-sided stable variates and of the
//!   inverse-stable random time.
//! - [`odeint`]: Dormand-Prince 5(4) integrator with dense output.
//! - [`mcsolver`]: the Monte Carlo averaging solver and trajectory tables.
//! - [`catalog`]: transform-pair tables, closed-form solution families, and
//!   named problem presets (circuits, beams, forced oscillators).
//! - [`wave`]: traveling-wave solver `u(x,t) = E[f(x + c T) + f(x - c T)]/2`.
//! - [`ffnn`]: small feedforward-network surrogate for next-step prediction
//!   of simulated trajectories.

pub mod catalog;
pub mod error;
pub mod ffnn;
pub mod mcsolver;
pub mod odeint;
mod quad;
pub mod specfun;
pub mod subordinator;
pub mod wave;

pub use error::{Error, Result};
