//! Unadjusted Langevin sampling over particle ensembles.
//!
//! One update is `x <- x - h ∇V(x) + sqrt(2h) xi` with `xi ~ N(0, I)`.
//! Each particle owns a counter-based ChaCha stream (stream id = particle
//! index), so a run is bit-reproducible for a fixed seed regardless of
//! thread count or execution mode. Particle updates within a step run in
//! parallel; the step barrier is sequential.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::exec::{chunked_zip_map, Exec};
use crate::potentials::Potential;

#[derive(Debug, Error)]
pub enum LmcError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("divergence (non-finite state) at step {step}, particle {particle}")]
    Diverged { step: usize, particle: usize },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Sampler parameters.
#[derive(Debug, Clone)]
pub struct LmcConfig {
    pub step_size: f64,
    pub iterations: usize,
    pub n_particles: usize,
    pub rng_seed: u64,
    /// Trajectory thinning stride; defaults to `max(1, iterations / 1000)`.
    pub record_every: usize,
}

impl LmcConfig {
    pub fn new(
        step_size: f64,
        iterations: usize,
        n_particles: usize,
        rng_seed: u64,
    ) -> Result<Self, LmcError> {
        if !(step_size > 0.0) || !step_size.is_finite() {
            return Err(LmcError::InvalidConfig(format!(
                "step size must be positive and finite, got {step_size}"
            )));
        }
        if n_particles == 0 {
            return Err(LmcError::InvalidConfig("need at least one particle".into()));
        }
        Ok(Self {
            step_size,
            iterations,
            n_particles,
            rng_seed,
            record_every: (iterations / 1000).max(1),
        })
    }

    pub fn with_record_every(mut self, record_every: usize) -> Result<Self, LmcError> {
        if record_every == 0 {
            return Err(LmcError::InvalidConfig("record_every must be positive".into()));
        }
        self.record_every = record_every;
        Ok(self)
    }

    /// Discretization guarantees need `h < 1/(6L)`; returns a warning when
    /// the configured step leaves that range for the given Lipschitz bound.
    pub fn step_size_warning(&self, lipschitz_hint: Option<f64>) -> Option<String> {
        let l = lipschitz_hint?;
        if l > 0.0 && self.step_size >= 1.0 / (6.0 * l) {
            Some(format!(
                "step size {h} >= 1/(6L) = {lim} for gradient Lipschitz bound L = {l}; \
                 discretization guarantees do not apply",
                h = self.step_size,
                lim = 1.0 / (6.0 * l),
            ))
        } else {
            None
        }
    }
}

/// Step-size schedules exposed by the analysis: `Lsi` uses `h = 1/sqrt(T)`,
/// `Pi` uses `h = c T^{-2/3} d^{-2/3}` with a configurable constant (the
/// analysis hides a target-dependent factor; the schedule exposes the
/// scaling only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSizePreset {
    Lsi,
    Pi { c: f64 },
}

impl StepSizePreset {
    pub fn step_size(&self, iterations: usize, dim: usize) -> f64 {
        let t = iterations.max(1) as f64;
        match self {
            StepSizePreset::Lsi => t.sqrt().recip(),
            StepSizePreset::Pi { c } => c * t.powf(-2.0 / 3.0) * (dim as f64).powf(-2.0 / 3.0),
        }
    }
}

/// How the initial ensemble is drawn (i.i.d. per particle).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDistribution {
    /// Uniform on `[lo, hi]^d`.
    UniformBox { lo: f64, hi: f64 },
    /// `N(0, sigma^2 I)`.
    IsotropicGaussian { sigma: f64 },
    /// Every particle starts at the given point.
    PointMass(Vec<f64>),
}

impl InitialDistribution {
    /// Parses `uniform:lo,hi`, `gauss:sigma`, or `point:x1,...,xd`.
    pub fn parse(spec: &str) -> Result<Self, LmcError> {
        let bad = |m: String| LmcError::InvalidConfig(m);
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad(format!("bad init spec {spec:?}")))?;
        let nums: Result<Vec<f64>, _> = rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|_| bad(format!("bad numbers in init spec {spec:?}")))?;
        match kind.trim() {
            "uniform" => {
                if nums.len() != 2 || !(nums[0] < nums[1]) {
                    return Err(bad(format!("uniform init needs lo < hi, got {rest:?}")));
                }
                Ok(Self::UniformBox { lo: nums[0], hi: nums[1] })
            }
            "gauss" => {
                if nums.len() != 1 || !(nums[0] > 0.0) {
                    return Err(bad(format!("gauss init needs one positive sigma, got {rest:?}")));
                }
                Ok(Self::IsotropicGaussian { sigma: nums[0] })
            }
            "point" => {
                if nums.is_empty() || nums.iter().any(|v| !v.is_finite()) {
                    return Err(bad(format!("point init needs finite coordinates, got {rest:?}")));
                }
                Ok(Self::PointMass(nums))
            }
            other => Err(bad(format!("unknown init kind {other:?}"))),
        }
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self {
            Self::UniformBox { lo, hi } => {
                for v in out.iter_mut() {
                    *v = rng.random_range(*lo..*hi);
                }
            }
            Self::IsotropicGaussian { sigma } => {
                for v in out.iter_mut() {
                    *v = sigma * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Self::PointMass(p) => out.copy_from_slice(p),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<(), LmcError> {
        if let Self::PointMass(p) = self {
            if p.len() != dim {
                return Err(LmcError::DimensionMismatch { expected: dim, got: p.len() });
            }
        }
        Ok(())
    }
}

/// Anything holding a flat row-major set of `d`-dimensional positions.
pub trait PositionSet {
    fn dim(&self) -> usize;
    fn flat(&self) -> &[f64];
    fn n_points(&self) -> usize {
        self.flat().len() / self.dim()
    }
}

/// Particle positions at one time index (physical time `index * h`).
#[derive(Debug, Clone)]
pub struct Ensemble {
    dim: usize,
    time_index: usize,
    positions: Vec<f64>,
}

impl Ensemble {
    pub fn new(dim: usize, time_index: usize, positions: Vec<f64>) -> Result<Self, LmcError> {
        if dim == 0 || positions.is_empty() || !positions.len().is_multiple_of(dim) {
            return Err(LmcError::InvalidConfig(format!(
                "positions length {} not a multiple of dim {dim}",
                positions.len()
            )));
        }
        if let Some(bad) = positions.iter().position(|v| !v.is_finite()) {
            return Err(LmcError::Diverged { step: time_index, particle: bad / dim });
        }
        Ok(Self { dim, time_index, positions })
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn n_particles(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }
}

impl PositionSet for Ensemble {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flat(&self) -> &[f64] {
        &self.positions
    }
}

/// All recorded positions pooled with equal weight: the empirical stand-in
/// for the time-averaged law over the horizon `Th`.
#[derive(Debug, Clone)]
pub struct TrajectoryAverage {
    dim: usize,
    pub horizon: f64,
    pooled: Vec<f64>,
}

impl PositionSet for TrajectoryAverage {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flat(&self) -> &[f64] {
        &self.pooled
    }
}

/// One Langevin update with explicit noise.
pub fn lmc_step<P: Potential + ?Sized>(x: &[f64], p: &P, h: f64, noise: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), p.dim());
    assert_eq!(noise.len(), p.dim());
    let mut grad = vec![0.0; x.len()];
    p.grad_into(x, &mut grad);
    let s = (2.0 * h).sqrt();
    x.iter()
        .zip(&grad)
        .zip(noise)
        .map(|((&xi, &gi), &ni)| xi - h * gi + s * ni)
        .collect()
}

/// Runs the sampler, invoking `observer` on the initial ensemble and on
/// every `record_every`-th step (plus the final one). Observers that only
/// fold snapshots into summaries keep memory flat for long runs.
pub fn run_lmc_observed<P, F>(
    cfg: &LmcConfig,
    p: &P,
    init: &InitialDistribution,
    exec: Exec,
    mut observer: F,
) -> Result<(), LmcError>
where
    P: Potential + ?Sized,
    F: FnMut(&Ensemble),
{
    let d = p.dim();
    init.check_dim(d)?;
    let n = cfg.n_particles;
    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            r.set_stream(i as u64);
            r
        })
        .collect();
    let mut positions = vec![0.0; n * d];
    for (i, chunk) in positions.chunks_mut(d).enumerate() {
        init.sample_into(&mut rngs[i], chunk);
    }
    observer(&Ensemble::new(d, 0, positions.clone())?);

    const CHUNK: usize = 256;
    let h = cfg.step_size;
    let s = (2.0 * h).sqrt();
    for t in 1..=cfg.iterations {
        let first_bad = chunked_zip_map(
            exec,
            &mut positions,
            CHUNK * d,
            &mut rngs,
            CHUNK,
            |chunk_idx, pos, rngs| {
                let mut grad = vec![0.0; d];
                let mut bad: Option<usize> = None;
                for (k, (x, rng)) in pos.chunks_exact_mut(d).zip(rngs.iter_mut()).enumerate() {
                    p.grad_into(x, &mut grad);
                    let mut finite = true;
                    for (xj, &gj) in x.iter_mut().zip(&grad) {
                        let noise: f64 = rng.sample(StandardNormal);
                        *xj = *xj - h * gj + s * noise;
                        finite &= xj.is_finite();
                    }
                    if !finite && bad.is_none() {
                        bad = Some(chunk_idx * CHUNK + k);
                    }
                }
                bad
            },
        )
        .into_iter()
        .flatten()
        .min();
        if let Some(particle) = first_bad {
            return Err(LmcError::Diverged { step: t, particle });
        }
        if t % cfg.record_every == 0 || t == cfg.iterations {
            observer(&Ensemble::new(d, t, positions.clone())?);
        }
    }
    Ok(())
}

/// Runs the sampler and collects the recorded ensembles.
pub fn run_lmc_exec<P: Potential + ?Sized>(
    cfg: &LmcConfig,
    p: &P,
    init: &InitialDistribution,
    exec: Exec,
) -> Result<Vec<Ensemble>, LmcError> {
    let mut out = Vec::new();
    run_lmc_observed(cfg, p, init, exec, |e| out.push(e.clone()))?;
    Ok(out)
}

/// [`run_lmc_exec`] with the default execution mode.
pub fn run_lmc<P: Potential + ?Sized>(
    cfg: &LmcConfig,
    p: &P,
    init: &InitialDistribution,
) -> Result<Vec<Ensemble>, LmcError> {
    run_lmc_exec(cfg, p, init, Exec::default())
}

/// Pools every recorded position with equal weight.
pub fn averaged_measure(traj: &[Ensemble], step_size: f64) -> Result<TrajectoryAverage, LmcError> {
    let first = traj.first().ok_or(LmcError::EmptyTrajectory)?;
    let dim = first.dim;
    let mut pooled = Vec::with_capacity(traj.iter().map(|e| e.positions.len()).sum());
    let mut last_index = 0;
    for e in traj {
        if e.dim != dim {
            return Err(LmcError::DimensionMismatch { expected: dim, got: e.dim });
        }
        pooled.extend_from_slice(&e.positions);
        last_index = last_index.max(e.time_index);
    }
    Ok(TrajectoryAverage { dim, horizon: step_size * last_index as f64, pooled })
}

/// Terminal positions of independent single-particle chains.
#[derive(Debug, Clone)]
pub struct RestartOutcome {
    dim: usize,
    /// Terminal positions of surviving chains, in chain order.
    pub terminal: Vec<f64>,
    /// Chain indices that diverged (their positions are omitted).
    pub diverged_chains: Vec<usize>,
}

impl PositionSet for RestartOutcome {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flat(&self) -> &[f64] {
        &self.terminal
    }
}

/// Runs `n_restarts` independent single-particle chains for
/// `cfg.iterations` steps each (fresh noise stream per chain; the
/// configured `n_particles` is ignored) and returns the terminal points.
pub fn restart_run_exec<P: Potential + ?Sized>(
    cfg: &LmcConfig,
    p: &P,
    n_restarts: usize,
    init: &InitialDistribution,
    exec: Exec,
) -> Result<RestartOutcome, LmcError> {
    if n_restarts == 0 {
        return Err(LmcError::InvalidConfig("need at least one restart".into()));
    }
    let d = p.dim();
    init.check_dim(d)?;
    let h = cfg.step_size;
    let s = (2.0 * h).sqrt();
    let finals = crate::exec::map_range(exec, n_restarts, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(c as u64);
        let mut x = vec![0.0; d];
        init.sample_into(&mut rng, &mut x);
        let mut grad = vec![0.0; d];
        for _ in 0..cfg.iterations {
            p.grad_into(&x, &mut grad);
            for (xj, &gj) in x.iter_mut().zip(&grad) {
                let noise: f64 = rng.sample(StandardNormal);
                *xj = *xj - h * gj + s * noise;
            }
            if x.iter().any(|v| !v.is_finite()) {
                return None;
            }
        }
        Some(x)
    });
    let mut terminal = Vec::with_capacity(n_restarts * d);
    let mut diverged_chains = Vec::new();
    for (c, res) in finals.into_iter().enumerate() {
        match res {
            Some(x) => terminal.extend_from_slice(&x),
            None => diverged_chains.push(c),
        }
    }
    Ok(RestartOutcome { dim: d, terminal, diverged_chains })
}

/// [`restart_run_exec`] with the default execution mode.
pub fn restart_run<P: Potential + ?Sized>(
    cfg: &LmcConfig,
    p: &P,
    n_restarts: usize,
    init: &InitialDistribution,
) -> Result<RestartOutcome, LmcError> {
    restart_run_exec(cfg, p, n_restarts, init, Exec::default())
}
