//! Gaussian mixtures with a shared covariance across components.

use nalgebra::{DMatrix, DVector};

use super::{Potential, PotentialError};
use crate::config::{parse_f64_list, parse_vector_list, ConfigFile};

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Target `pi = sum_i w_i N(mu_i, Sigma)` with one covariance for all
/// components. The potential is `V(x) = -log pi(x)`.
///
/// Construction caches `Sigma^{-1}`, `log det Sigma`, and the symmetric
/// positive-definite square root `U` with `U U = Sigma`.
#[derive(Debug, Clone)]
pub struct GaussianMixtureTarget {
    dim: usize,
    weights: Vec<f64>,
    /// `log w_i - d/2 log 2pi - 1/2 log det Sigma`, the per-component
    /// constant of the log density.
    log_coeff: Vec<f64>,
    means: Vec<f64>,
    sigma: DMatrix<f64>,
    sigma_inv: Vec<f64>,
    sqrt_sigma: DMatrix<f64>,
    log_det_sigma: f64,
    sigma_sq_floor: f64,
    hessian_bound: f64,
}

impl GaussianMixtureTarget {
    /// Builds a mixture; `sigma_sq_floor` defaults to the smallest
    /// eigenvalue of `covariance` when not supplied.
    pub fn new(
        weights: &[f64],
        means: &[Vec<f64>],
        covariance: DMatrix<f64>,
        sigma_sq_floor: Option<f64>,
    ) -> Result<Self, PotentialError> {
        let wsum: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0)) || (wsum - 1.0).abs() > 1e-12
        {
            return Err(PotentialError::InvalidWeights(wsum));
        }
        if means.len() != weights.len() {
            return Err(PotentialError::Invalid(format!(
                "{} weights but {} means",
                weights.len(),
                means.len()
            )));
        }
        let dim = means[0].len();
        if dim == 0 || means.iter().any(|m| m.len() != dim) {
            return Err(PotentialError::Invalid("means must share a positive dimension".into()));
        }
        if means.iter().flatten().any(|v| !v.is_finite()) {
            return Err(PotentialError::Invalid("non-finite mean".into()));
        }
        if covariance.nrows() != dim || covariance.ncols() != dim {
            return Err(PotentialError::DimensionMismatch {
                expected: dim,
                got: covariance.nrows(),
            });
        }
        let asym = (&covariance - covariance.transpose()).abs().max();
        if asym > 1e-10 {
            return Err(PotentialError::Invalid(format!(
                "covariance not symmetric (max asymmetry {asym:e})"
            )));
        }

        let eig = covariance.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        let floor = sigma_sq_floor.unwrap_or(min_eig);
        if !(floor > 0.0) || min_eig <= floor - 1e-10 {
            return Err(PotentialError::CovarianceNotAdmissible {
                floor,
                found: min_eig,
            });
        }
        let log_det_sigma: f64 = eig.eigenvalues.iter().map(|&l| l.ln()).sum();
        let sqrt_lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            eig.eigenvalues.iter().map(|&l| l.sqrt()),
        ));
        let sqrt_sigma = &eig.eigenvectors * sqrt_lambda * eig.eigenvectors.transpose();
        let sqrt_err = (&sqrt_sigma * &sqrt_sigma - &covariance).abs().max();
        if sqrt_err > 1e-10 {
            return Err(PotentialError::SqrtInaccurate(sqrt_err));
        }
        let sigma_inv_mat = covariance
            .clone()
            .try_inverse()
            .ok_or_else(|| PotentialError::Invalid("covariance not invertible".into()))?;
        let sigma_inv: Vec<f64> = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .map(|(r, c)| sigma_inv_mat[(r, c)])
            .collect();

        let mut max_pair_dist_sq: f64 = 0.0;
        for i in 0..means.len() {
            for j in (i + 1)..means.len() {
                let d2: f64 = means[i]
                    .iter()
                    .zip(&means[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                max_pair_dist_sq = max_pair_dist_sq.max(d2);
            }
        }
        let hessian_bound = max_pair_dist_sq / (floor * floor) + 1.0 / floor;

        let log_coeff = weights
            .iter()
            .map(|w| w.ln() - 0.5 * dim as f64 * LN_2PI - 0.5 * log_det_sigma)
            .collect();

        Ok(Self {
            dim,
            weights: weights.to_vec(),
            log_coeff,
            means: means.iter().flatten().copied().collect(),
            sigma: covariance,
            sigma_inv,
            sqrt_sigma,
            log_det_sigma,
            sigma_sq_floor: floor,
            hessian_bound,
        })
    }

    /// 1D convenience: `sum_i w_i N(m_i, sigma_sq)`.
    pub fn univariate(weights: &[f64], means: &[f64], sigma_sq: f64) -> Result<Self, PotentialError> {
        let means: Vec<Vec<f64>> = means.iter().map(|&m| vec![m]).collect();
        Self::new(weights, &means, DMatrix::from_element(1, 1, sigma_sq), None)
    }

    /// Reads `weights`, `means`, `covariance` (matrix rows `;`-separated)
    /// and optional `sigma_sq_floor` keys.
    pub fn from_config(cfg: &ConfigFile) -> Result<Self, PotentialError> {
        let weights = parse_f64_list("weights", cfg.require("weights")?)?;
        let means = parse_vector_list("means", cfg.require("means")?)?;
        let rows = parse_vector_list("covariance", cfg.require("covariance")?)?;
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(PotentialError::Invalid("covariance must be square".into()));
        }
        let cov = DMatrix::from_fn(dim, dim, |r, c| rows[r][c]);
        let floor = cfg.get_f64("sigma_sq_floor")?;
        Self::new(&weights, &means, cov, floor)
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self, i: usize) -> &[f64] {
        &self.means[i * self.dim..(i + 1) * self.dim]
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Symmetric positive-definite `U` with `U U = Sigma`.
    pub fn sqrt_covariance(&self) -> &DMatrix<f64> {
        &self.sqrt_sigma
    }

    pub fn log_det_covariance(&self) -> f64 {
        self.log_det_sigma
    }

    pub fn sigma_sq_floor(&self) -> f64 {
        self.sigma_sq_floor
    }

    /// `max_{i,j} |mu_i - mu_j|^2 / sigma^4 + sigma^{-2}`, an upper bound
    /// on `|∇²V|` over all of space; also served as [`Potential::lipschitz_hint`].
    pub fn hessian_bound(&self) -> f64 {
        self.hessian_bound
    }

    /// `(x - mu_i)^T Sigma^{-1} (x - mu_i)`.
    pub fn mahalanobis_sq(&self, i: usize, x: &[f64]) -> f64 {
        let d = self.dim;
        let mu = self.mean(i);
        let mut q = 0.0;
        for r in 0..d {
            let dr = x[r] - mu[r];
            let row = &self.sigma_inv[r * d..(r + 1) * d];
            let mut acc = 0.0;
            for c in 0..d {
                acc += row[c] * (x[c] - mu[c]);
            }
            q += dr * acc;
        }
        q
    }

    /// `log pi(x) = log sum_i w_i N(x; mu_i, Sigma)`, evaluated with a
    /// running max shift so widely separated modes cannot underflow.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for i in 0..self.n_components() {
            let term = self.log_coeff[i] - 0.5 * self.mahalanobis_sq(i, x);
            if term > max {
                sum = sum * (max - term).exp() + 1.0;
                max = term;
            } else {
                sum += (term - max).exp();
            }
        }
        max + sum.ln()
    }
}

impl Potential for GaussianMixtureTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        -self.log_density(x)
    }

    /// `∇V(x) = Sigma^{-1} (x - sum_i r_i(x) mu_i)` where the
    /// responsibilities `r_i` are accumulated under the same running max
    /// shift as the log density.
    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        let d = self.dim;
        let mut max = f64::NEG_INFINITY;
        let mut denom = 0.0;
        // out temporarily holds the responsibility-weighted mean numerator.
        out.fill(0.0);
        for i in 0..self.n_components() {
            let term = self.log_coeff[i] - 0.5 * self.mahalanobis_sq(i, x);
            let mu = &self.means[i * d..(i + 1) * d];
            if term > max {
                let scale = (max - term).exp();
                denom = denom * scale + 1.0;
                for (o, &m) in out.iter_mut().zip(mu) {
                    *o = *o * scale + m;
                }
                max = term;
            } else {
                let w = (term - max).exp();
                denom += w;
                for (o, &m) in out.iter_mut().zip(mu) {
                    *o += w * m;
                }
            }
        }
        // out := Sigma^{-1} (x - weighted mean)
        let mut diff = [0.0f64; 8];
        if d <= diff.len() {
            for (dst, (&xj, &oj)) in diff.iter_mut().zip(x.iter().zip(out.iter())) {
                *dst = xj - oj / denom;
            }
            for (r, o) in out.iter_mut().enumerate() {
                let row = &self.sigma_inv[r * d..(r + 1) * d];
                *o = row.iter().zip(&diff[..d]).map(|(a, b)| a * b).sum();
            }
        } else {
            let diff: Vec<f64> = (0..d).map(|j| x[j] - out[j] / denom).collect();
            for (r, o) in out.iter_mut().enumerate() {
                let row = &self.sigma_inv[r * d..(r + 1) * d];
                *o = row.iter().zip(&diff).map(|(a, b)| a * b).sum();
            }
        }
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.hessian_bound)
    }
}
