//! Empirical certification of strong dissipativity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Potential, PotentialError};

/// A certified pair `(m, b)` with `<∇V(x), x> >= m |x|^2 - b` over the
/// sampled ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipativity {
    pub m: f64,
    pub b: f64,
}

impl Dissipativity {
    /// Whether `(m, b)` certifies the inequality at `x`.
    pub fn holds_at<P: Potential>(&self, p: &P, x: &[f64]) -> bool {
        let g = p.grad(x);
        let lhs: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
        let norm_sq: f64 = x.iter().map(|v| v * v).sum();
        lhs >= self.m * norm_sq - self.b
    }
}

/// Samples points uniformly in the ball of the given radius and fits a
/// dissipativity pair: `m` is pinned to half the smallest observed ratio
/// `<∇V(x), x> / |x|^2` over the outer half of the ball, and `b` to 1.5x
/// the largest observed violation of `<∇V(x), x> >= m |x|^2`. Both
/// margins keep the certificate valid at points the sample missed; an
/// exactly dissipative potential still certifies `b = 0`.
pub fn dissipativity_estimate<P: Potential>(
    p: &P,
    radius: f64,
    samples: usize,
    rng_seed: u64,
) -> Result<Dissipativity, PotentialError> {
    assert!(radius > 0.0, "radius must be positive");
    assert!(samples > 0, "need at least one sample");
    let dim = p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut grad = vec![0.0; dim];
    let mut points = Vec::with_capacity(samples);
    let mut min_outer_ratio = f64::INFINITY;
    for _ in 0..samples {
        let x = sample_ball(&mut rng, dim, radius);
        p.grad_into(&x, &mut grad);
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(PotentialError::NonFiniteGradient);
        }
        let inner: f64 = grad.iter().zip(&x).map(|(a, b)| a * b).sum();
        let norm_sq: f64 = x.iter().map(|v| v * v).sum();
        if norm_sq >= radius * radius / 4.0 {
            min_outer_ratio = min_outer_ratio.min(inner / norm_sq);
        }
        points.push((norm_sq, inner));
    }
    if !min_outer_ratio.is_finite() {
        return Err(PotentialError::Invalid(
            "no sample landed in the outer half of the ball; increase samples".into(),
        ));
    }
    let m = 0.5 * min_outer_ratio;
    let b = 1.5
        * points
            .iter()
            .map(|&(norm_sq, inner)| m * norm_sq - inner)
            .fold(0.0f64, f64::max);
    Ok(Dissipativity { m, b })
}

fn sample_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / dim as f64);
    if norm > 0.0 {
        for v in &mut x {
            *v *= r / norm;
        }
    }
    x
}
