//! Tempered posterior over the location of a symmetric two-component
//! Gaussian mixture.

use std::fs;
use std::path::Path;

use super::{log_cosh, Potential, PotentialError};
use crate::config::ConfigFile;

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Target `pi(theta) ∝ prod_i (f_theta(X_i))^{beta/n}` with
/// `f_theta = 1/2 N(theta, I) + 1/2 N(-theta, I)` and a flat prior.
///
/// The potential is
/// `V(theta) = -(beta/n) sum_i log( 1/2 phi(theta - X_i) + 1/2 phi(theta + X_i) )`,
/// which after expanding the Gaussian densities reduces to a `log cosh`
/// form that is exactly even in `theta`.
#[derive(Debug, Clone)]
pub struct PowerPosteriorTarget {
    dim: usize,
    /// `n` observations, flattened row-major.
    data: Vec<f64>,
    n: usize,
    beta: f64,
    theta0_norm: f64,
    /// `(beta/n) sum_i |X_i|^2 / 2 + beta d/2 log 2pi`, the theta-free part.
    constant: f64,
}

impl PowerPosteriorTarget {
    pub fn new(data: &[Vec<f64>], beta: f64, theta0_norm: f64) -> Result<Self, PotentialError> {
        if data.is_empty() {
            return Err(PotentialError::Invalid("need at least one observation".into()));
        }
        if !(beta > 0.0) {
            return Err(PotentialError::Invalid(format!("beta must be positive, got {beta}")));
        }
        let dim = data[0].len();
        if dim == 0 || data.iter().any(|x| x.len() != dim) {
            return Err(PotentialError::Invalid("observations must share a positive dimension".into()));
        }
        if data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(PotentialError::Invalid("non-finite observation".into()));
        }
        let n = data.len();
        let sq_sum: f64 = data.iter().flatten().map(|v| v * v).sum();
        let constant = beta / n as f64 * sq_sum / 2.0 + beta * dim as f64 / 2.0 * LN_2PI;
        Ok(Self {
            dim,
            data: data.iter().flatten().copied().collect(),
            n,
            beta,
            theta0_norm,
            constant,
        })
    }

    /// Reads `beta`, `data_file` (one whitespace-separated vector per
    /// line, resolved relative to the config file) and optional
    /// `theta0_norm`.
    pub fn from_config(cfg: &ConfigFile) -> Result<Self, PotentialError> {
        let beta = cfg
            .get_f64("beta")?
            .ok_or(crate::config::ConfigError::MissingKey("beta"))?;
        let data_file = cfg.require("data_file")?;
        let path = cfg.base_dir().join(data_file);
        let data = load_data_file(&path)?;
        let theta0_norm = cfg.get_f64("theta0_norm")?.unwrap_or(0.0);
        Self::new(&data, beta, theta0_norm)
    }

    pub fn n_observations(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Recorded `|theta_0|` of the generating model; bookkeeping only, the
    /// potential depends on the data and `beta` alone.
    pub fn theta0_norm(&self) -> f64 {
        self.theta0_norm
    }

    pub fn observation(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

impl Potential for PowerPosteriorTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.dim);
        let norm_sq: f64 = theta.iter().map(|v| v * v).sum();
        let mut cosh_sum = 0.0;
        for i in 0..self.n {
            let x = self.observation(i);
            let dot: f64 = theta.iter().zip(x).map(|(a, b)| a * b).sum();
            cosh_sum += log_cosh(dot);
        }
        self.beta * norm_sq / 2.0 + self.constant - self.beta / self.n as f64 * cosh_sum
    }

    /// `∇V(theta) = (beta/n) sum_i (theta - tanh(<theta, X_i>) X_i)`.
    fn grad_into(&self, theta: &[f64], out: &mut [f64]) {
        debug_assert_eq!(theta.len(), self.dim);
        let scale = self.beta / self.n as f64;
        for (o, &t) in out.iter_mut().zip(theta) {
            *o = self.beta * t;
        }
        for i in 0..self.n {
            let x = self.observation(i);
            let dot: f64 = theta.iter().zip(x).map(|(a, b)| a * b).sum();
            let s = dot.tanh();
            for (o, &xj) in out.iter_mut().zip(x) {
                *o -= scale * s * xj;
            }
        }
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        // eigenvalues of the Hessian lie in
        // [beta - (beta/n) lam_max(sum X X^T), beta]; bound by the trace.
        let sq_mean = self.data.iter().map(|v| v * v).sum::<f64>() / self.n as f64;
        Some(self.beta * (1.0 + sq_mean))
    }
}

fn load_data_file(path: &Path) -> Result<Vec<Vec<f64>>, PotentialError> {
    let text = fs::read_to_string(path)
        .map_err(|e| PotentialError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(|t| t.parse::<f64>()).collect();
        let row = row.map_err(|_| {
            PotentialError::Invalid(format!("{}:{}: bad number", path.display(), i + 1))
        })?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi1(z: f64) -> f64 {
        (-z * z / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn origin_value_reduces_to_data_likelihood() {
        let data = vec![vec![0.7, -1.2], vec![2.0, 0.3], vec![-0.4, 0.9]];
        let t = PowerPosteriorTarget::new(&data, 1.3, 1.0).unwrap();
        // 1/2 phi(-X) + 1/2 phi(X) = phi(X), so V(0) = -(beta/n) sum log phi(X_i).
        let expected: f64 = -1.3 / 3.0
            * data
                .iter()
                .map(|x| {
                    let sq: f64 = x.iter().map(|v| v * v).sum();
                    -sq / 2.0 - LN_2PI
                })
                .sum::<f64>();
        assert!((t.eval(&[0.0, 0.0]) - expected).abs() < 1e-12);
    }

    #[test]
    fn potential_is_exactly_even_and_gradient_odd() {
        let data = vec![vec![0.3, 1.0, -0.5], vec![1.4, -2.2, 0.1]];
        let t = PowerPosteriorTarget::new(&data, 0.8, 1.0).unwrap();
        for theta in [[0.2, -1.0, 0.7], [3.0, 0.1, -2.5]] {
            let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
            assert_eq!(t.eval(&theta), t.eval(&neg));
            let g = t.grad(&theta);
            let gn = t.grad(&neg);
            for j in 0..3 {
                assert_eq!(g[j], -gn[j]);
            }
        }
    }

    #[test]
    fn two_term_value_matches_direct_sum() {
        // n=1, d=1, X=2, beta=1, theta=1: V = -log(1/2 phi(-1) + 1/2 phi(3)).
        let t = PowerPosteriorTarget::new(&[vec![2.0]], 1.0, 2.0).unwrap();
        let direct = -(0.5 * phi1(-1.0) + 0.5 * phi1(3.0)).ln();
        assert!((direct - 2.093_935_785_846_808).abs() < 1e-12);
        assert!((t.eval(&[1.0]) - direct).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_origin() {
        let data = vec![vec![1.0, 2.0], vec![-0.3, 0.4]];
        let t = PowerPosteriorTarget::new(&data, 2.0, 1.0).unwrap();
        let g = t.grad(&[0.0, 0.0]);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_datum_gives_pure_quadratic() {
        let t = PowerPosteriorTarget::new(&[vec![0.0]], 1.7, 0.0).unwrap();
        for &x in &[0.5, -2.0, 4.0] {
            assert!((t.grad(&[x])[0] - 1.7 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let data = vec![vec![0.9, -0.4], vec![1.6, 2.1], vec![-2.0, 0.0]];
        let t = PowerPosteriorTarget::new(&data, 1.2, 1.0).unwrap();
        let h = 1e-5;
        for theta in [[0.3, -0.8], [1.5, 2.0]] {
            let g = t.grad(&theta);
            for j in 0..2 {
                let mut hi = theta;
                let mut lo = theta;
                hi[j] += h;
                lo[j] -= h;
                let fd = (t.eval(&hi) - t.eval(&lo)) / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0));
            }
        }
    }
}
