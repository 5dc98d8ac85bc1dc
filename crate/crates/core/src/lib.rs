//! Lagrangian vortex-particle simulator for the axisymmetric incompressible
//! Euler equations without swirl.
//!
//! The vorticity is odd in `z` and nonnegative on the upper quadrant, so only
//! the upper-quadrant particles are stored and the lower half enters every
//! sum as a sign-flipped mirror image.
//!
//! Module map:
//! - [`kernel`]: the ring stream-function kernel `F`, its derivative and the
//!   complete elliptic integrals they reduce to.
//! - [`field`]: Biot–Savart velocity and stream function by direct summation.
//! - [`particles`]: particle systems, seeding and snapshots.
//! - [`dynamics`]: RK4 time stepping and the run driver.
//! - [`diagnostics`]: moments, masses, energy, norms and the two-sided
//!   identity checks.
//! - [`config`] and [`series`]: run configuration and CSV output.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod field;
pub mod kernel;
pub mod particles;
pub mod quadrature;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
