//! Target distributions `pi ∝ exp(-V)` as evaluatable potentials.
//!
//! A [`Potential`] exposes the energy `V(x)`, its gradient, and an optional
//! gradient-Lipschitz bound. Evaluations are pure and `Sync`, so samplers
//! may call them concurrently on shared targets.

mod dissipativity;
mod gmm;
mod power_posterior;
mod simple;

pub use dissipativity::{dissipativity_estimate, Dissipativity};
pub use gmm::GaussianMixtureTarget;
pub use power_posterior::PowerPosteriorTarget;
pub use simple::{Quadratic, RippledQuadratic};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("weights must be positive and sum to 1 (sum = {0})")]
    InvalidWeights(f64),
    #[error("covariance must be symmetric with eigenvalues above the floor {floor} (found {found})")]
    CovarianceNotAdmissible { floor: f64, found: f64 },
    #[error("matrix square root inaccurate: max |UU - Sigma| = {0:e}")]
    SqrtInaccurate(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("non-finite gradient at sampled point")]
    NonFiniteGradient,
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

/// An energy function `V` with gradient, defining `pi ∝ exp(-V)`.
pub trait Potential: Sync + Send {
    fn dim(&self) -> usize;

    /// `V(x)`. Finite for every finite `x`.
    fn eval(&self, x: &[f64]) -> f64;

    /// Writes `∇V(x)` into `out`.
    fn grad_into(&self, x: &[f64], out: &mut [f64]);

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.grad_into(x, &mut out);
        out
    }

    /// Upper bound on the Lipschitz constant of `∇V`, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

impl<P: Potential + ?Sized> Potential for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).grad_into(x, out)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }
}

/// `log(cosh(t))`, stable for large `|t|` and exactly even.
pub(crate) fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cosh_matches_naive_in_moderate_range() {
        for &t in &[0.0, 0.3, -0.7, 2.0, -5.0, 10.0] {
            let naive = f64::cosh(t).ln();
            assert!((log_cosh(t) - naive).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn log_cosh_survives_huge_arguments() {
        let v = log_cosh(1e6);
        assert!((v - (1e6 - std::f64::consts::LN_2)).abs() < 1e-6);
        assert_eq!(log_cosh(-1e6), v);
    }
}
