//! Shared histogram-to-divergence pipeline.
//!
//! Region membership is resolved once per grid cell (at the cell center),
//! so a checkpoint costs one pass over the count vector per region and the
//! reported region mass is exactly the mass of the reported conditional
//! histogram.

use std::sync::Arc;

use condmix_core::divergences::{
    chi2_variance, empirical_density_from_counts, fisher_information_grid, kl_divergence,
    pfi_grid, poincare_constant_grid, target_conditional_density, tv_distance, Grid, GridDensity,
};
use condmix_core::lmc::{Ensemble, PositionSet};
use condmix_core::potentials::Potential;
use condmix_core::regions::{Region, WholeSpace};

use crate::CliError;

pub struct RegionSlot {
    pub label: String,
    pub cell_mask: Vec<bool>,
    pub target_conditional: GridDensity,
    /// Quadrature mass of the global target on this region's cells.
    pub target_mass: f64,
    /// Poincaré constant of the conditional target (when requested).
    pub alpha: Option<f64>,
}

pub struct GridPipeline {
    pub grid: Arc<Grid>,
    pub target_global: GridDensity,
    pub regions: Vec<RegionSlot>,
    pub eps: f64,
}

/// Divergences of one conditional histogram; `NaN` marks an undefined
/// conditional (no samples in the region).
pub struct RegionStats {
    pub mass: f64,
    pub cond_kl: f64,
    pub cond_tv: f64,
    pub cond_chi2: f64,
}

pub struct CheckpointStats {
    pub global_kl: f64,
    pub global_tv: f64,
    pub fi: f64,
    pub pfi: f64,
    pub regions: Vec<RegionStats>,
}

impl GridPipeline {
    pub fn new<P: Potential + ?Sized>(
        target: &P,
        regions: &[Box<dyn Region>],
        grid: &Arc<Grid>,
        eps: f64,
        with_alpha: bool,
    ) -> Result<Self, CliError> {
        let target_global = target_conditional_density(target, &WholeSpace, grid)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let vol = grid.cell_volume();
        let mut slots = Vec::with_capacity(regions.len());
        let mut center = vec![0.0; grid.dim()];
        for region in regions {
            let mut cell_mask = vec![false; grid.n_cells()];
            for (flat, slot) in cell_mask.iter_mut().enumerate() {
                grid.center_into(flat, &mut center);
                *slot = region.contains(&center);
            }
            let target_conditional = target_conditional_density(target, region.as_ref(), grid)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let target_mass = target_global
                .values()
                .iter()
                .zip(&cell_mask)
                .filter(|(_, &m)| m)
                .map(|(&v, _)| v * vol)
                .sum();
            let alpha = if with_alpha {
                Some(
                    poincare_constant_grid(&target_conditional)
                        .map_err(|e| CliError::Runtime(e.to_string()))?,
                )
            } else {
                None
            };
            slots.push(RegionSlot {
                label: region.label().to_string(),
                cell_mask,
                target_conditional,
                target_mass,
                alpha,
            });
        }
        Ok(Self {
            grid: Arc::clone(grid),
            target_global,
            regions: slots,
            eps,
        })
    }

    /// Adds an ensemble to a count vector; returns the number of points
    /// that fell outside the grid.
    pub fn bin(&self, counts: &mut [f64], ensemble: &Ensemble) -> usize {
        let d = ensemble.dim();
        let mut out_of_grid = 0;
        for x in ensemble.flat().chunks_exact(d) {
            match self.grid.locate(x) {
                Some(flat) => counts[flat] += 1.0,
                None => out_of_grid += 1,
            }
        }
        out_of_grid
    }

    /// All divergence statistics of one count vector.
    pub fn checkpoint(&self, counts: &[f64]) -> Result<CheckpointStats, CliError> {
        let run = |e: condmix_core::divergences::DivergenceError| CliError::Runtime(e.to_string());
        let emp = empirical_density_from_counts(&self.grid, counts, self.eps).map_err(run)?;
        let global_kl = kl_divergence(&emp, &self.target_global).map_err(run)?;
        let global_tv = tv_distance(&emp, &self.target_global).map_err(run)?;
        let fi = fisher_information_grid(&emp, &self.target_global).map_err(run)?;
        let pfi = pfi_grid(&emp, &self.target_global).map_err(run)?;
        let total: f64 = counts.iter().sum();
        let mut regions = Vec::with_capacity(self.regions.len());
        for slot in &self.regions {
            let in_region: f64 = counts
                .iter()
                .zip(&slot.cell_mask)
                .filter(|(_, &m)| m)
                .map(|(&c, _)| c)
                .sum();
            let mass = if total > 0.0 { in_region / total } else { 0.0 };
            if in_region == 0.0 {
                regions.push(RegionStats {
                    mass,
                    cond_kl: f64::NAN,
                    cond_tv: f64::NAN,
                    cond_chi2: f64::NAN,
                });
                continue;
            }
            let masked: Vec<f64> = counts
                .iter()
                .zip(&slot.cell_mask)
                .map(|(&c, &m)| if m { c + self.eps } else { 0.0 })
                .collect();
            let cond = GridDensity::normalized(Arc::clone(&self.grid), masked).map_err(run)?;
            regions.push(RegionStats {
                mass,
                cond_kl: kl_divergence(&cond, &slot.target_conditional).map_err(run)?,
                cond_tv: tv_distance(&cond, &slot.target_conditional).map_err(run)?,
                cond_chi2: chi2_variance(&cond, &slot.target_conditional).map_err(run)?,
            });
        }
        Ok(CheckpointStats { global_kl, global_tv, fi, pfi, regions })
    }

    /// Trace rows (one per region) in the shared schema.
    pub fn trace_rows(&self, t: usize, stats: &CheckpointStats, rows: &mut Vec<String>) {
        for (slot, r) in self.regions.iter().zip(&stats.regions) {
            rows.push(format!(
                "{t},{},{},{},{},{},{},{},{},{}",
                stats.global_kl,
                stats.global_tv,
                slot.label,
                r.mass,
                r.cond_kl,
                r.cond_tv,
                r.cond_chi2,
                stats.fi,
                stats.pfi
            ));
        }
    }
}

/// All Voronoi cells of a mixture as boxed regions.
pub fn voronoi_regions(
    target: &condmix_core::potentials::GaussianMixtureTarget,
) -> Vec<Box<dyn Region>> {
    let part = Arc::new(condmix_core::regions::VoronoiPartition::new(target));
    part.cells()
        .into_iter()
        .map(|c| Box::new(c) as Box<dyn Region>)
        .collect()
}
