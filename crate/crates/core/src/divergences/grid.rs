//! Rectangular grids and densities on them.

use std::sync::Arc;

use super::DivergenceError;

/// One axis of a grid: `bins` equal cells covering `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl GridAxis {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }
}

/// A 1D or 2D rectangular grid; cells are indexed flat, first axis major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<GridAxis>,
}

impl Grid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Arc<Self>, DivergenceError> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(DivergenceError::InvalidGrid(format!(
                "supported dimensions are 1 and 2, got {}",
                axes.len()
            )));
        }
        for ax in &axes {
            if !(ax.lo.is_finite() && ax.hi.is_finite() && ax.lo < ax.hi) {
                return Err(DivergenceError::InvalidGrid(format!(
                    "axis bounds must be finite with lo < hi, got [{}, {}]",
                    ax.lo, ax.hi
                )));
            }
            if ax.bins < 8 {
                return Err(DivergenceError::InvalidGrid(format!(
                    "need at least 8 bins per axis, got {}",
                    ax.bins
                )));
            }
        }
        Ok(Arc::new(Self { axes }))
    }

    pub fn line(lo: f64, hi: f64, bins: usize) -> Result<Arc<Self>, DivergenceError> {
        Self::new(vec![GridAxis { lo, hi, bins }])
    }

    pub fn plane(
        x: (f64, f64, usize),
        y: (f64, f64, usize),
    ) -> Result<Arc<Self>, DivergenceError> {
        Self::new(vec![
            GridAxis { lo: x.0, hi: x.1, bins: x.2 },
            GridAxis { lo: y.0, hi: y.1, bins: y.2 },
        ])
    }

    /// Parses `lo,hi,bins[;lo,hi,bins]`.
    pub fn parse(spec: &str) -> Result<Arc<Self>, DivergenceError> {
        let mut axes = Vec::new();
        for part in spec.split(';') {
            let toks: Vec<&str> = part.split(',').map(str::trim).collect();
            if toks.len() != 3 {
                return Err(DivergenceError::InvalidGrid(format!(
                    "expected lo,hi,bins, got {part:?}"
                )));
            }
            let lo: f64 = toks[0]
                .parse()
                .map_err(|_| DivergenceError::InvalidGrid(format!("bad number {:?}", toks[0])))?;
            let hi: f64 = toks[1]
                .parse()
                .map_err(|_| DivergenceError::InvalidGrid(format!("bad number {:?}", toks[1])))?;
            let bins: usize = toks[2]
                .parse()
                .map_err(|_| DivergenceError::InvalidGrid(format!("bad bin count {:?}", toks[2])))?;
            axes.push(GridAxis { lo, hi, bins });
        }
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> &GridAxis {
        &self.axes[k]
    }

    pub fn n_cells(&self) -> usize {
        self.axes.iter().map(|a| a.bins).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.width()).product()
    }

    /// Cell counts per axis, `(bins0, bins1)`; `bins1 = 1` in 1D.
    pub fn shape(&self) -> (usize, usize) {
        (self.axes[0].bins, self.axes.get(1).map_or(1, |a| a.bins))
    }

    /// Flat index of the cell containing `x`; points exactly on the upper
    /// boundary fall into the last cell; anything outside returns `None`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        debug_assert_eq!(x.len(), self.dim());
        let mut flat = 0;
        for (ax, &v) in self.axes.iter().zip(x) {
            if !(v >= ax.lo && v <= ax.hi) {
                return None;
            }
            let mut i = ((v - ax.lo) / ax.width()) as usize;
            if i >= ax.bins {
                i = ax.bins - 1;
            }
            flat = flat * ax.bins + i;
        }
        Some(flat)
    }

    /// Coordinates of the center of the flat-indexed cell.
    pub fn center_into(&self, flat: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        let mut rem = flat;
        for (k, ax) in self.axes.iter().enumerate().rev() {
            let i = rem % ax.bins;
            rem /= ax.bins;
            out[k] = ax.lo + (i as f64 + 0.5) * ax.width();
        }
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.center_into(flat, &mut out);
        out
    }
}

/// Nonnegative cell values on a grid; when normalized,
/// `sum(values) * cell_volume = 1`.
#[derive(Debug, Clone)]
pub struct GridDensity {
    grid: Arc<Grid>,
    values: Vec<f64>,
    normalized: bool,
}

impl GridDensity {
    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, DivergenceError> {
        if values.len() != grid.n_cells() {
            return Err(DivergenceError::InvalidDensity(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DivergenceError::InvalidDensity(
                "values must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { grid, values, normalized: false })
    }

    /// Builds and normalizes in one go.
    pub fn normalized(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, DivergenceError> {
        let mut d = Self::from_values(grid, values)?;
        d.normalize()?;
        Ok(d)
    }

    pub fn normalize(&mut self) -> Result<(), DivergenceError> {
        let mass: f64 = self.values.iter().sum::<f64>() * self.grid.cell_volume();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(DivergenceError::UndefinedConditional(format!(
                "total quadrature mass {mass} is not positive"
            )));
        }
        for v in &mut self.values {
            *v /= mass;
        }
        self.normalized = true;
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Probability mass of one cell.
    pub fn cell_mass(&self, flat: usize) -> f64 {
        self.values[flat] * self.grid.cell_volume()
    }

    pub(crate) fn check_compatible(&self, other: &GridDensity) -> Result<(), DivergenceError> {
        if self.grid.as_ref() != other.grid.as_ref() {
            return Err(DivergenceError::IncompatibleGrids);
        }
        if !self.normalized || !other.normalized {
            return Err(DivergenceError::InvalidDensity(
                "both densities must be normalized".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_shape() {
        let g = Grid::parse("-15,15,300").unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.n_cells(), 300);
        assert!((g.cell_volume() - 0.1).abs() < 1e-12);
        let g2 = Grid::parse("-10,10,100; -10,10,50").unwrap();
        assert_eq!(g2.dim(), 2);
        assert_eq!(g2.n_cells(), 5000);
        assert_eq!(g2.shape(), (100, 50));
        assert!(Grid::parse("0,1").is_err());
        assert!(Grid::parse("0,1,4").is_err());
        assert!(Grid::parse("1,0,16").is_err());
    }

    #[test]
    fn locate_and_center_roundtrip() {
        let g = Grid::plane((-1.0, 1.0, 10), (0.0, 5.0, 25)).unwrap();
        let mut buf = vec![0.0; 2];
        for flat in [0, 13, 249, 124] {
            g.center_into(flat, &mut buf);
            assert_eq!(g.locate(&buf), Some(flat));
        }
        assert_eq!(g.locate(&[1.0, 5.0]), Some(249));
        assert_eq!(g.locate(&[1.01, 2.0]), None);
    }

    #[test]
    fn normalization() {
        let g = Grid::line(0.0, 1.0, 10).unwrap();
        let d = GridDensity::normalized(Arc::clone(&g), vec![1.0; 10]).unwrap();
        let total: f64 = d.values().iter().sum::<f64>() * g.cell_volume();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(GridDensity::normalized(g, vec![0.0; 10]).is_err());
    }
}
