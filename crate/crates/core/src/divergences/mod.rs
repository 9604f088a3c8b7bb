//! Grid-based divergence and information estimators.
//!
//! Densities live on rectangular grids in one or two dimensions
//! ([`Grid`], [`GridDensity`]); the estimators compare an empirical law
//! against a target on the same grid: KL, total variation, chi-square
//! variance, Fisher information `∫ |∇ log(mu/pi)|^2 dmu`, and its
//! un-logged analogue `∫ |∇ (mu/pi)|^2 dpi`. A finite-difference
//! eigensolver provides a numerical Poincaré-constant oracle, and the two
//! dichotomy checks turn an information budget plus a local constant into
//! a mass-or-closeness verdict per region.

mod estimators;
mod grid;
mod poincare;

pub use estimators::{
    chi2_variance, dichotomy_check_lsi, dichotomy_check_pi, divergence_report,
    empirical_conditional_density, empirical_density_from_counts, fisher_information_grid,
    kl_divergence, pfi_grid, target_conditional_density, tv_distance, DivergenceReport,
    EmpiricalDensity, LsiDichotomy, PiDichotomy,
};
pub use grid::{Grid, GridAxis, GridDensity};
pub use poincare::poincare_constant_grid;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DivergenceError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("densities live on incompatible grids")]
    IncompatibleGrids,
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("conditional distribution undefined: {0}")]
    UndefinedConditional(String),
    #[error("density support is not connected on the grid")]
    DisconnectedSupport,
    #[error("eigensolve failed to converge within {iterations} iterations")]
    EigensolveFailed { iterations: usize },
}
