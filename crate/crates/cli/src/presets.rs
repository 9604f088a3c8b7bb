//! Built-in targets and their experiment defaults.

use std::sync::Arc;

use condmix_core::config::{ConfigFile, RegionSpec};
use condmix_core::divergences::Grid;
use condmix_core::lmc::InitialDistribution;
use condmix_core::potentials::{GaussianMixtureTarget, PotentialError};
use condmix_core::regions::{BoxRegions, Region, VoronoiPartition};

use crate::CliError;

/// A mixture target bundled with the defaults its experiments use.
pub struct MixtureSetup {
    pub name: String,
    pub target: GaussianMixtureTarget,
    pub default_iterations: usize,
    pub default_grid: Arc<Grid>,
    pub default_init: InitialDistribution,
    /// Conditioning regions named in the config; `None` means "all
    /// Voronoi cells of the target".
    pub regions: Option<Vec<Box<dyn Region>>>,
}

impl MixtureSetup {
    /// The configured regions, or every Voronoi cell by default.
    pub fn take_regions(&mut self) -> Vec<Box<dyn Region>> {
        match self.regions.take() {
            Some(r) => r,
            None => crate::pipeline::voronoi_regions(&self.target),
        }
    }
}

/// `nu1`, `nu2`, `nu3` are the studied one- and two-dimensional mixtures;
/// `twowell` is a symmetric pair with a moderate barrier used by the
/// dichotomy suite.
pub fn mixture_preset(name: &str) -> Result<MixtureSetup, CliError> {
    let build = |weights: &[f64], means1d: &[f64]| {
        GaussianMixtureTarget::univariate(weights, means1d, 1.0)
    };
    let setup = match name {
        "nu1" => MixtureSetup {
            name: name.into(),
            target: build(&[0.9, 0.1], &[-10.0, 10.0])?,
            default_iterations: 500,
            default_grid: Grid::line(-15.0, 15.0, 300)?,
            default_init: InitialDistribution::UniformBox { lo: -15.0, hi: 15.0 },
            regions: None,
        },
        "nu2" => MixtureSetup {
            name: name.into(),
            target: build(&[0.15, 0.15, 0.3, 0.2, 0.2], &[-5.0, -2.5, 0.0, 2.5, 5.0])?,
            default_iterations: 5000,
            default_grid: Grid::line(-15.0, 15.0, 300)?,
            default_init: InitialDistribution::UniformBox { lo: -15.0, hi: 15.0 },
            regions: None,
        },
        "nu3" => MixtureSetup {
            name: name.into(),
            target: GaussianMixtureTarget::new(
                &[0.4, 0.4, 0.1, 0.1],
                &[
                    vec![-5.0, -5.0],
                    vec![5.0, 5.0],
                    vec![-5.0, 5.0],
                    vec![5.0, -5.0],
                ],
                nalgebra::DMatrix::identity(2, 2),
                None,
            )?,
            default_iterations: 500,
            default_grid: Grid::plane((-10.0, 10.0, 100), (-10.0, 10.0, 100))?,
            default_init: InitialDistribution::UniformBox { lo: -10.0, hi: 10.0 },
            regions: None,
        },
        "twowell" => MixtureSetup {
            name: name.into(),
            target: build(&[0.5, 0.5], &[-3.0, 3.0])?,
            default_iterations: 500,
            default_grid: Grid::line(-9.0, 9.0, 240)?,
            default_init: InitialDistribution::UniformBox { lo: -9.0, hi: 9.0 },
            regions: None,
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown preset {other:?} (expected nu1, nu2, nu3, or twowell)"
            )))
        }
    };
    Ok(setup)
}

/// Loads a mixture from a config file, with optional `grid` and `init`
/// keys supplying defaults.
pub fn mixture_from_config(path: &std::path::Path) -> Result<MixtureSetup, CliError> {
    let cfg = ConfigFile::load(path)?;
    let target = GaussianMixtureTarget::from_config(&cfg)?;
    let default_grid = match cfg.get("grid") {
        Some(spec) => Grid::parse(spec)?,
        None => default_grid_for(&target)?,
    };
    let default_init = match cfg.get("init") {
        Some(spec) => InitialDistribution::parse(spec)?,
        None => InitialDistribution::UniformBox { lo: -15.0, hi: 15.0 },
    };
    let regions = regions_from_config(&cfg, &target)?;
    Ok(MixtureSetup {
        name: path.display().to_string(),
        target,
        default_iterations: 500,
        default_grid,
        default_init,
        regions,
    })
}

/// Materializes `region = voronoi:<i>` / `region = box:<which>,A=..,M=..`
/// entries against the target.
fn regions_from_config(
    cfg: &ConfigFile,
    target: &GaussianMixtureTarget,
) -> Result<Option<Vec<Box<dyn Region>>>, CliError> {
    let specs = cfg.get_all("region");
    if specs.is_empty() {
        return Ok(None);
    }
    let partition = Arc::new(VoronoiPartition::new(target));
    let dim = <GaussianMixtureTarget as condmix_core::potentials::Potential>::dim(target);
    let mut regions: Vec<Box<dyn Region>> = Vec::with_capacity(specs.len());
    for spec in specs {
        match RegionSpec::parse(spec)? {
            RegionSpec::Voronoi(i) => {
                let cell = partition
                    .cell(i)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                regions.push(Box::new(cell));
            }
            RegionSpec::Box { which, a, m } => {
                let boxes =
                    BoxRegions::new(a, m, dim).map_err(|e| CliError::Config(e.to_string()))?;
                let region = boxes
                    .region(which)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                regions.push(Box::new(region));
            }
        }
    }
    Ok(Some(regions))
}

fn default_grid_for(target: &GaussianMixtureTarget) -> Result<Arc<Grid>, CliError> {
    let span = (0..target.n_components())
        .flat_map(|i| target.mean(i).iter().copied())
        .fold(0.0f64, |acc, m| acc.max(m.abs()))
        + 5.0;
    Ok(match <GaussianMixtureTarget as condmix_core::potentials::Potential>::dim(target) {
        1 => Grid::line(-span, span, 300)?,
        _ => Grid::plane((-span, span, 100), (-span, span, 100))?,
    })
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use condmix_core::potentials::Potential;

    #[test]
    fn presets_expand_to_the_studied_mixtures() {
        let nu1 = mixture_preset("nu1").unwrap();
        assert_eq!(nu1.target.weights(), &[0.9, 0.1]);
        assert_eq!(nu1.target.mean(0), &[-10.0]);
        assert_eq!(nu1.target.mean(1), &[10.0]);
        assert_eq!(nu1.target.sigma_sq_floor(), 1.0);
        assert_eq!(nu1.default_iterations, 500);

        let nu2 = mixture_preset("nu2").unwrap();
        assert_eq!(nu2.target.weights(), &[0.15, 0.15, 0.3, 0.2, 0.2]);
        let means: Vec<f64> = (0..5).map(|i| nu2.target.mean(i)[0]).collect();
        assert_eq!(means, vec![-5.0, -2.5, 0.0, 2.5, 5.0]);
        assert_eq!(nu2.default_iterations, 5000);

        let nu3 = mixture_preset("nu3").unwrap();
        assert_eq!(nu3.target.weights(), &[0.4, 0.4, 0.1, 0.1]);
        assert_eq!(nu3.target.mean(0), &[-5.0, -5.0]);
        assert_eq!(nu3.target.mean(1), &[5.0, 5.0]);
        assert_eq!(nu3.target.mean(2), &[-5.0, 5.0]);
        assert_eq!(nu3.target.mean(3), &[5.0, -5.0]);
        assert_eq!(nu3.target.dim(), 2);

        assert!(mixture_preset("nu4").is_err());
    }
}
