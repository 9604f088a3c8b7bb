//! Closed-form test potentials.

use super::Potential;

/// `V(x) = |x|^2 / 2`, the standard Gaussian potential. Strongly
/// dissipative with `m = 1`, `b = 0`, and gradient-Lipschitz with `L = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    pub dim: usize,
}

impl Potential for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `V(x) = |x|^2 / 2 + sin(x_1)`: a quadratic with a bounded ripple,
/// still dissipative but with gradient critical points off the origin.
#[derive(Debug, Clone, Copy)]
pub struct RippledQuadratic {
    pub dim: usize,
}

impl Potential for RippledQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>() + x[0].sin()
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        out[0] += x[0].cos();
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(2.0)
    }
}
