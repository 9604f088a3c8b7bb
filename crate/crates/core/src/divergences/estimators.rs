//! Divergence estimators, conditional density builders, and the two
//! dichotomy checks.

use std::sync::Arc;

use super::grid::{Grid, GridDensity};
use super::DivergenceError;
use crate::lmc::PositionSet;
use crate::potentials::Potential;
use crate::regions::Region;

/// Discretized `pi | region`: `exp(-V)` at in-region cell centers,
/// renormalized by the quadrature sum over those cells (never by an
/// analytic normalizer — none exists for the studied posteriors).
pub fn target_conditional_density<P: Potential + ?Sized, R: Region + ?Sized>(
    p: &P,
    region: &R,
    grid: &Arc<Grid>,
) -> Result<GridDensity, DivergenceError> {
    let n = grid.n_cells();
    let mut log_vals = vec![f64::NEG_INFINITY; n];
    let mut x = vec![0.0; grid.dim()];
    let mut max = f64::NEG_INFINITY;
    let mut any = false;
    for (flat, lv) in log_vals.iter_mut().enumerate() {
        grid.center_into(flat, &mut x);
        if region.contains(&x) {
            *lv = -p.eval(&x);
            max = max.max(*lv);
            any = true;
        }
    }
    if !any || !max.is_finite() {
        return Err(DivergenceError::UndefinedConditional(format!(
            "region {} has no quadrature mass on the grid",
            region.label()
        )));
    }
    let values: Vec<f64> = log_vals
        .iter()
        .map(|&lv| if lv.is_finite() { (lv - max).exp() } else { 0.0 })
        .collect();
    GridDensity::normalized(Arc::clone(grid), values)
}

/// Histogram density with metadata about discarded points.
#[derive(Debug, Clone)]
pub struct EmpiricalDensity {
    pub density: GridDensity,
    /// In-region points that fell outside the grid bounds.
    pub out_of_grid: usize,
    /// Total in-region points (including out-of-grid ones).
    pub n_in_region: usize,
}

/// Histogram of the in-region positions on the grid, `eps` added to every
/// cell, renormalized.
pub fn empirical_conditional_density<P: PositionSet, R: Region + ?Sized>(
    positions: &P,
    region: &R,
    grid: &Arc<Grid>,
    eps: f64,
) -> Result<EmpiricalDensity, DivergenceError> {
    let d = positions.dim();
    if d != grid.dim() {
        return Err(DivergenceError::InvalidGrid(format!(
            "positions of dimension {d} on a {}-dimensional grid",
            grid.dim()
        )));
    }
    let mut counts = vec![0.0f64; grid.n_cells()];
    let mut n_in_region = 0usize;
    let mut out_of_grid = 0usize;
    for x in positions.flat().chunks_exact(d) {
        if !region.contains(x) {
            continue;
        }
        n_in_region += 1;
        match grid.locate(x) {
            Some(flat) => counts[flat] += 1.0,
            None => out_of_grid += 1,
        }
    }
    if n_in_region == 0 {
        return Err(DivergenceError::UndefinedConditional(format!(
            "no positions inside region {}",
            region.label()
        )));
    }
    let density = empirical_density_from_counts(grid, &counts, eps)?;
    Ok(EmpiricalDensity { density, out_of_grid, n_in_region })
}

/// Builds the smoothed, normalized density from raw per-cell counts.
pub fn empirical_density_from_counts(
    grid: &Arc<Grid>,
    counts: &[f64],
    eps: f64,
) -> Result<GridDensity, DivergenceError> {
    if !(eps >= 0.0) {
        return Err(DivergenceError::InvalidDensity(format!("negative smoothing eps {eps}")));
    }
    let values: Vec<f64> = counts.iter().map(|&c| c + eps).collect();
    GridDensity::normalized(Arc::clone(grid), values)
}

/// `KL(mu ‖ pi) = sum mu log(mu/pi) * volume`, clipped at zero to absorb
/// round-off on identical inputs.
pub fn kl_divergence(mu: &GridDensity, pi: &GridDensity) -> Result<f64, DivergenceError> {
    mu.check_compatible(pi)?;
    let vol = mu.grid().cell_volume();
    let mut acc = 0.0;
    for (&m, &p) in mu.values().iter().zip(pi.values()) {
        if m > 0.0 {
            if p <= 0.0 {
                return Err(DivergenceError::InvalidDensity(
                    "pi vanishes where mu is positive; smooth before comparing".into(),
                ));
            }
            acc += m * (m / p).ln();
        }
    }
    Ok((acc * vol).max(0.0))
}

/// `1/2 sum |mu - pi| * volume`.
pub fn tv_distance(mu: &GridDensity, pi: &GridDensity) -> Result<f64, DivergenceError> {
    mu.check_compatible(pi)?;
    let vol = mu.grid().cell_volume();
    let acc: f64 = mu
        .values()
        .iter()
        .zip(pi.values())
        .map(|(&m, &p)| (m - p).abs())
        .sum();
    Ok(0.5 * acc * vol)
}

/// `Var_pi[mu/pi] = sum pi (mu/pi - 1)^2 * volume`.
pub fn chi2_variance(mu: &GridDensity, pi: &GridDensity) -> Result<f64, DivergenceError> {
    mu.check_compatible(pi)?;
    let vol = mu.grid().cell_volume();
    let mut acc = 0.0;
    for (&m, &p) in mu.values().iter().zip(pi.values()) {
        if p > 0.0 {
            let r = m / p - 1.0;
            acc += p * r * r;
        } else if m > 0.0 {
            return Err(DivergenceError::InvalidDensity(
                "pi vanishes where mu is positive; smooth before comparing".into(),
            ));
        }
    }
    Ok(acc * vol)
}

/// Per-cell, per-axis derivative of a scalar field on the grid: central
/// differences in the interior, 3-point one-sided stencils at the
/// boundary (order 2 throughout). Output is `n_cells * dim`, axis-minor.
fn grid_gradient(grid: &Grid, field: &[f64]) -> Vec<f64> {
    let dim = grid.dim();
    let (nx, ny) = grid.shape();
    let mut out = vec![0.0; field.len() * dim];
    let deriv = |fm: f64, f0: f64, fp: f64, at_lo: bool, at_hi: bool, h: f64| -> f64 {
        if at_lo {
            // f0 here is f[0]; fp = f[1]; fm holds f[2]
            (-3.0 * f0 + 4.0 * fp - fm) / (2.0 * h)
        } else if at_hi {
            // f0 = f[n-1]; fm = f[n-2]; fp holds f[n-3]
            (3.0 * f0 - 4.0 * fm + fp) / (2.0 * h)
        } else {
            (fp - fm) / (2.0 * h)
        }
    };
    let hx = grid.axis(0).width();
    for i in 0..nx {
        for j in 0..ny {
            let flat = i * ny + j;
            let fx = if i == 0 {
                deriv(field[2 * ny + j], field[j], field[ny + j], true, false, hx)
            } else if i == nx - 1 {
                deriv(field[(nx - 2) * ny + j], field[flat], field[(nx - 3) * ny + j], false, true, hx)
            } else {
                deriv(field[(i - 1) * ny + j], field[flat], field[(i + 1) * ny + j], false, false, hx)
            };
            out[flat * dim] = fx;
        }
    }
    if dim == 2 {
        let hy = grid.axis(1).width();
        for i in 0..nx {
            let row = i * ny;
            for j in 0..ny {
                let flat = row + j;
                let fy = if j == 0 {
                    deriv(field[row + 2], field[row], field[row + 1], true, false, hy)
                } else if j == ny - 1 {
                    deriv(field[row + ny - 2], field[flat], field[row + ny - 3], false, true, hy)
                } else {
                    deriv(field[flat - 1], field[flat], field[flat + 1], false, false, hy)
                };
                out[flat * dim + 1] = fy;
            }
        }
    }
    out
}

fn require_positive(d: &GridDensity, who: &str) -> Result<(), DivergenceError> {
    if d.values().iter().any(|&v| v <= 0.0) {
        return Err(DivergenceError::InvalidDensity(format!(
            "{who} must be strictly positive on the whole grid (smooth first)"
        )));
    }
    Ok(())
}

/// `∫ |∇ log(mu/pi)|^2 dmu` by finite differences of the log ratio.
pub fn fisher_information_grid(
    mu: &GridDensity,
    pi: &GridDensity,
) -> Result<f64, DivergenceError> {
    mu.check_compatible(pi)?;
    require_positive(mu, "mu")?;
    require_positive(pi, "pi")?;
    let log_ratio: Vec<f64> = mu
        .values()
        .iter()
        .zip(pi.values())
        .map(|(&m, &p)| (m / p).ln())
        .collect();
    let grad = grid_gradient(mu.grid(), &log_ratio);
    let dim = mu.grid().dim();
    let vol = mu.grid().cell_volume();
    let acc: f64 = mu
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &m)| {
            let g = &grad[flat * dim..(flat + 1) * dim];
            m * g.iter().map(|v| v * v).sum::<f64>()
        })
        .sum();
    Ok(acc * vol)
}

/// `∫ |∇ (mu/pi)|^2 dpi`: the un-logged ratio differentiated, integrated
/// against the target.
pub fn pfi_grid(mu: &GridDensity, pi: &GridDensity) -> Result<f64, DivergenceError> {
    mu.check_compatible(pi)?;
    require_positive(pi, "pi")?;
    let ratio: Vec<f64> = mu
        .values()
        .iter()
        .zip(pi.values())
        .map(|(&m, &p)| m / p)
        .collect();
    let grad = grid_gradient(mu.grid(), &ratio);
    let dim = mu.grid().dim();
    let vol = mu.grid().cell_volume();
    let acc: f64 = pi
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &p)| {
            let g = &grad[flat * dim..(flat + 1) * dim];
            p * g.iter().map(|v| v * v).sum::<f64>()
        })
        .sum();
    Ok(acc * vol)
}

/// Conditional and global divergence values with estimator metadata.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub kl: f64,
    pub tv: f64,
    pub chi2_var: f64,
    pub region_mass: f64,
    pub n_samples: usize,
    pub smoothing_eps: f64,
}

/// Computes the three divergences of `mu` against `pi` on their grid.
pub fn divergence_report(
    mu: &GridDensity,
    pi: &GridDensity,
    region_mass: f64,
    n_samples: usize,
    smoothing_eps: f64,
) -> Result<DivergenceReport, DivergenceError> {
    let kl = kl_divergence(mu, pi)?;
    let tv = tv_distance(mu, pi)?;
    let chi2_var = chi2_variance(mu, pi)?;
    debug_assert!(tv <= (kl / 2.0).sqrt() + 1e-6, "Pinsker violated: tv={tv}, kl={kl}");
    Ok(DivergenceReport { kl, tv, chi2_var, region_mass, n_samples, smoothing_eps })
}

/// Verdict of the entropy dichotomy: with information budget `fi` and
/// local log-Sobolev constant `alpha`, either the region mass or the
/// conditional entropy must fall below `sqrt(fi / alpha)`.
#[derive(Debug, Clone, Copy)]
pub struct LsiDichotomy {
    pub threshold: f64,
    pub mass_branch: bool,
    pub entropy_branch: bool,
}

impl LsiDichotomy {
    pub fn passed(&self) -> bool {
        self.mass_branch || self.entropy_branch
    }

    pub fn branch_name(&self) -> &'static str {
        match (self.mass_branch, self.entropy_branch) {
            (true, true) => "both",
            (true, false) => "mass",
            (false, true) => "entropy",
            (false, false) => "none",
        }
    }
}

pub fn dichotomy_check_lsi(
    fi: f64,
    alpha: f64,
    region_mass: f64,
    conditional_ent: f64,
) -> LsiDichotomy {
    assert!(fi >= 0.0 && alpha > 0.0, "need fi >= 0 and alpha > 0");
    let threshold = (fi / alpha).sqrt();
    LsiDichotomy {
        threshold,
        mass_branch: region_mass <= threshold,
        entropy_branch: conditional_ent <= threshold,
    }
}

/// Verdict of the variance dichotomy:
/// `mass^2 * Var_{pi|S}[mu|S / pi|S] <= pfi * pi(S) / rho`.
#[derive(Debug, Clone, Copy)]
pub struct PiDichotomy {
    pub lhs: f64,
    pub rhs: f64,
}

impl PiDichotomy {
    pub fn passed(&self) -> bool {
        self.lhs <= self.rhs
    }
}

pub fn dichotomy_check_pi(
    pfi: f64,
    rho: f64,
    region_mass: f64,
    target_region_mass: f64,
    conditional_var: f64,
) -> PiDichotomy {
    assert!(pfi >= 0.0 && rho > 0.0, "need pfi >= 0 and rho > 0");
    PiDichotomy {
        lhs: region_mass * region_mass * conditional_var,
        rhs: pfi * target_region_mass / rho,
    }
}
