//! Octonion-valued monogenic functions on the upper half-space `R^8_+`.
//!
//! - [`octonion`]: table-driven octonion arithmetic.
//! - [`fields`]: monogenic generators with closed-form Jacobians.
//! - [`dirac`]: the Cauchy-Riemann-Fueter residual and related identities.
//! - [`area`]: truncated cones and the Lusin area integral.
//! - [`boundary`]: normal and non-tangential limit estimators.
//! - [`herglotz`]: Poisson kernel, boundary measures and ball-mass criteria.
//! - [`subharmonic`]: mean-value tests for `|f|^p`.
//! - [`config`] and [`experiment`]: declarative experiment runner behind the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod area;
pub mod boundary;
pub mod config;
pub mod dirac;
pub mod error;
pub mod experiment;
pub mod fields;
pub mod herglotz;
pub mod octonion;
pub mod quadrature;
pub mod rng;
pub mod subharmonic;

pub use error::{Error, Result};
pub use fields::{Field, HarmonicPotential, Point8};
pub use octonion::Octonion;

/// Startup checks: the literal Dirac matrix against the multiplication
/// table, and the Poisson constant against radial quadrature.
pub fn self_check() -> Result<()> {
    let bad = dirac::dirac_table_mismatches();
    if !bad.is_empty() {
        return Err(Error::Rejected(format!("Dirac matrix disagrees with the table at {bad:?}")));
    }
    if dirac::pd_matrix_from_dirac(&dirac::DIRAC_MATRIX) != Some(dirac::PD_MATRIX) {
        return Err(Error::Rejected("P(D) matrix disagrees with the Dirac system".into()));
    }
    herglotz::verify_poisson_constant()
}
