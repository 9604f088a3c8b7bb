//! Conditioning sets and restriction of position sets to them.
//!
//! A [`Region`] is a deterministic membership predicate over state space.
//! Two families cover the studied targets: Voronoi cells of mixture
//! components under the shared-covariance Mahalanobis metric, and the
//! slab/ball box decomposition `R1, R2, R3` around a distinguished axis.

use std::sync::Arc;

use thiserror::Error;

use crate::exec::{map_range, Exec};
use crate::lmc::PositionSet;
use crate::potentials::GaussianMixtureTarget;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("{0}")]
    Invalid(String),
}

/// A deterministic, total membership predicate with a display label.
pub trait Region: Sync + Send {
    fn contains(&self, x: &[f64]) -> bool;
    fn label(&self) -> &str;
}

/// The trivial region containing everything.
#[derive(Debug, Clone)]
pub struct WholeSpace;

impl Region for WholeSpace {
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }
    fn label(&self) -> &str {
        "all"
    }
}

/// 1D half-open membership `lo <= x < hi` on the first coordinate; test
/// and calibration helper.
#[derive(Debug, Clone)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    label: String,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, label: format!("[{lo},{hi})") }
    }
}

impl Region for Interval {
    fn contains(&self, x: &[f64]) -> bool {
        self.lo <= x[0] && x[0] < self.hi
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// The cells `S_i = {x : (x-mu_i)^T Sigma^{-1} (x-mu_i) minimal}` of a
/// shared-covariance mixture. Component weights do not enter; ties go to
/// the smallest index, so the cells partition space exactly.
#[derive(Debug)]
pub struct VoronoiPartition {
    target: GaussianMixtureTarget,
}

impl VoronoiPartition {
    pub fn new(target: &GaussianMixtureTarget) -> Self {
        Self { target: target.clone() }
    }

    pub fn n_cells(&self) -> usize {
        self.target.n_components()
    }

    pub fn cell_index(&self, x: &[f64]) -> usize {
        voronoi_cell_index(&self.target, x)
    }

    /// All cells, sharing this partition.
    pub fn cells(self: &Arc<Self>) -> Vec<VoronoiCell> {
        (0..self.n_cells())
            .map(|i| VoronoiCell {
                partition: Arc::clone(self),
                index: i,
                label: format!("S{i}"),
            })
            .collect()
    }

    pub fn cell(self: &Arc<Self>, index: usize) -> Result<VoronoiCell, RegionError> {
        if index >= self.n_cells() {
            return Err(RegionError::Invalid(format!(
                "cell index {index} out of range (mixture has {} components)",
                self.n_cells()
            )));
        }
        Ok(VoronoiCell { partition: Arc::clone(self), index, label: format!("S{index}") })
    }
}

/// Index of the component whose Mahalanobis distance to `x` is smallest;
/// ties break toward the smallest index.
pub fn voronoi_cell_index(target: &GaussianMixtureTarget, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_q = target.mahalanobis_sq(0, x);
    for i in 1..target.n_components() {
        let q = target.mahalanobis_sq(i, x);
        if q < best_q {
            best_q = q;
            best = i;
        }
    }
    best
}

/// One Voronoi cell of a mixture partition.
#[derive(Debug, Clone)]
pub struct VoronoiCell {
    partition: Arc<VoronoiPartition>,
    index: usize,
    label: String,
}

impl VoronoiCell {
    pub fn index(&self) -> usize {
        self.index
    }
}

impl Region for VoronoiCell {
    fn contains(&self, x: &[f64]) -> bool {
        self.partition.cell_index(x) == self.index
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// The decomposition `R1 = [0,A] x B(0,M)`, `R2 = [-A,0) x B(0,M)`,
/// `R3 = (R1 ∪ R2)^c`, where the first factor is the coordinate along
/// `axis` and the ball constrains the orthogonal complement. The slab
/// `theta_axis = 0` belongs to `R1`.
#[derive(Debug, Clone)]
pub struct BoxRegions {
    a: f64,
    m: f64,
    axis: Vec<f64>,
}

impl BoxRegions {
    /// Axis defaults to `e_1`.
    pub fn new(a: f64, m: f64, dim: usize) -> Result<Self, RegionError> {
        let mut axis = vec![0.0; dim];
        axis[0] = 1.0;
        Self::with_axis(a, m, axis)
    }

    pub fn with_axis(a: f64, m: f64, axis: Vec<f64>) -> Result<Self, RegionError> {
        if !(a > 0.0) || !(m > 0.0) {
            return Err(RegionError::Invalid(format!("A and M must be positive, got A={a}, M={m}")));
        }
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(RegionError::Invalid("axis must be a nonzero finite vector".into()));
        }
        let axis = axis.iter().map(|v| v / norm).collect();
        Ok(Self { a, m, axis })
    }

    /// Default sizing `A = M = d + log(1/eps)` for an accuracy budget `eps`.
    pub fn sized_for(dim: usize, eps: f64) -> Result<Self, RegionError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(RegionError::Invalid(format!("eps must lie in (0,1), got {eps}")));
        }
        let a = dim as f64 + (1.0 / eps).ln();
        Self::new(a, a, dim)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Which of `R1`, `R2`, `R3` contains `theta`.
    pub fn region_index(&self, theta: &[f64]) -> u8 {
        box_region_index(self, theta)
    }

    pub fn region(&self, which: u8) -> Result<BoxRegion, RegionError> {
        if !(1..=3).contains(&which) {
            return Err(RegionError::Invalid(format!("box region index must be 1..=3, got {which}")));
        }
        Ok(BoxRegion { boxes: self.clone(), which, label: format!("R{which}") })
    }
}

/// Decomposes `theta = t * axis + perp` and classifies:
/// `1` if `t ∈ [0, A]` and `|perp| <= M`, `2` if `t ∈ [-A, 0)` and
/// `|perp| <= M`, else `3`.
pub fn box_region_index(boxes: &BoxRegions, theta: &[f64]) -> u8 {
    let t: f64 = boxes.axis.iter().zip(theta).map(|(a, b)| a * b).sum();
    let perp_sq: f64 = theta.iter().map(|v| v * v).sum::<f64>() - t * t;
    let perp = perp_sq.max(0.0).sqrt();
    if perp <= boxes.m {
        if (0.0..=boxes.a).contains(&t) {
            return 1;
        }
        if (-boxes.a..0.0).contains(&t) {
            return 2;
        }
    }
    3
}

/// One of the three box regions.
#[derive(Debug, Clone)]
pub struct BoxRegion {
    boxes: BoxRegions,
    which: u8,
    label: String,
}

impl Region for BoxRegion {
    fn contains(&self, x: &[f64]) -> bool {
        self.boxes.region_index(x) == self.which
    }
    fn label(&self) -> &str {
        &self.label
    }
}

/// Outcome of restricting a position set to a region: the contained mass
/// fraction and the inside subset (the empirical conditional sample).
/// `mass == 0` marks the conditional distribution as undefined.
#[derive(Debug, Clone)]
pub struct Restriction {
    dim: usize,
    pub mass: f64,
    pub inside: Vec<f64>,
    pub n_total: usize,
}

impl Restriction {
    /// False when no position fell in the region, i.e. the empirical
    /// conditional distribution is undefined.
    pub fn is_defined(&self) -> bool {
        self.mass > 0.0
    }

    pub fn n_inside(&self) -> usize {
        self.inside.len() / self.dim
    }
}

impl PositionSet for Restriction {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flat(&self) -> &[f64] {
        &self.inside
    }
}

/// Restricts `positions` to `region`, preserving input order.
pub fn restrict_exec<P: PositionSet, R: Region + ?Sized>(
    positions: &P,
    region: &R,
    exec: Exec,
) -> Restriction {
    let d = positions.dim();
    let flat = positions.flat();
    let n = flat.len() / d;
    assert!(n > 0, "restrict needs a nonempty position set");
    const CHUNK: usize = 4096;
    let n_chunks = n.div_ceil(CHUNK);
    let kept: Vec<Vec<f64>> = map_range(exec, n_chunks, |c| {
        let start = c * CHUNK;
        let stop = (start + CHUNK).min(n);
        let mut keep = Vec::new();
        for i in start..stop {
            let x = &flat[i * d..(i + 1) * d];
            if region.contains(x) {
                keep.extend_from_slice(x);
            }
        }
        keep
    });
    let inside: Vec<f64> = kept.into_iter().flatten().collect();
    let mass = (inside.len() / d) as f64 / n as f64;
    Restriction { dim: d, mass, inside, n_total: n }
}

/// [`restrict_exec`] with the default execution mode.
pub fn restrict<P: PositionSet, R: Region + ?Sized>(positions: &P, region: &R) -> Restriction {
    restrict_exec(positions, region, Exec::default())
}
