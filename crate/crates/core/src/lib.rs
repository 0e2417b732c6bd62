//! Instrumental-variable estimation of causal effects under structural
//! equation models.
//!
//! The crate covers three observational regimes for a response `Y`, an
//! explanatory variable `X` and an instrument `Z`:
//!
//! * [`discrete_iv`]: categorical `X` and `Z`. Contrasts of conditional
//!   means and conditional choice probabilities across instrument-level
//!   pairs form a linear system `A θ = b` whose solution is the vector of
//!   mean potential-outcome differences against the baseline level.
//! * [`smooth_iv`]: categorical `X`, real `Z` on `[0, 1]`. Derivatives of
//!   the class-probability curves and of the conditional mean of `Y` form
//!   a functional linear system fitted over a grid.
//! * [`continuous_iv`]: real-valued `X` and `Z`. The ratio (or pointwise
//!   least-squares solve) of conditional-mean derivatives identifies
//!   `phi(z) = E(dY/dX | Z = z)`, from which average or pointwise effects
//!   are recovered under additional structure.
//!
//! [`scm`] provides generative simulators for all three regimes together
//! with an exact finite-population oracle used to verify the
//! identification algebra without sampling error. [`npreg`] holds the
//! local-polynomial machinery shared by the smooth and continuous
//! estimators.
//!
//! Estimation and simulation are pure functions of their inputs and a
//! seed; replication loops, bootstraps and cross-validation sweeps run on
//! a data-parallel pool when the `parallel` feature (default) is enabled,
//! and fall back to plain sequential loops otherwise. Results are
//! identical either way.

pub mod baseline;
pub mod continuous_iv;
pub mod dataset;
pub mod discrete_iv;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod npreg;
pub mod rng;
pub mod scm;
pub mod smooth_iv;

pub use error::{Error, Result};
