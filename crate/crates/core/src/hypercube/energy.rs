//! Energy functions on cube vertices and their file format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{HypercubeError, Subset, MAX_DIM};

/// An energy `f: {0,1}^d -> [0, inf)`, indexed by vertex bitmask. Integer
/// levels are the classical setting; real values are accepted throughout.
#[derive(Debug, Clone)]
pub struct EnergyFunction {
    d: usize,
    values: Vec<f64>,
}

impl EnergyFunction {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self, HypercubeError> {
        if d == 0 || d > MAX_DIM {
            return Err(HypercubeError::InvalidEnergy(format!(
                "dimension must lie in 1..={MAX_DIM}, got {d}"
            )));
        }
        if values.len() != 1usize << d {
            return Err(HypercubeError::InvalidEnergy(format!(
                "need {} values for d = {d}, got {}",
                1usize << d,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(HypercubeError::InvalidEnergy(
                "values must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { d, values })
    }

    pub fn from_integers(d: usize, values: &[u32]) -> Result<Self, HypercubeError> {
        Self::new(d, values.iter().map(|&v| v as f64).collect())
    }

    pub fn constant(d: usize, level: f64) -> Result<Self, HypercubeError> {
        Self::new(d, vec![level; 1usize << d])
    }

    /// `f(x) = c^T x`, shifted so the minimum value is zero (a constant
    /// shift changes neither the Gibbs measure nor the kernel).
    pub fn linear(d: usize, c: &[f64]) -> Result<Self, HypercubeError> {
        if c.len() != d {
            return Err(HypercubeError::InvalidEnergy(format!(
                "coefficient vector of length {} for d = {d}",
                c.len()
            )));
        }
        let shift: f64 = c.iter().filter(|&&v| v < 0.0).sum();
        let values = (0..1usize << d)
            .map(|x| {
                let dot: f64 = (0..d).filter(|&j| (x >> j) & 1 == 1).map(|j| c[j]).sum();
                dot - shift
            })
            .collect();
        Self::new(d, values)
    }

    /// Zero at the all-zeros and all-ones vertices, `barrier` elsewhere.
    pub fn two_well(d: usize, barrier: f64) -> Result<Self, HypercubeError> {
        let top = (1usize << d) - 1;
        let values = (0..=top)
            .map(|x| if x == 0 || x == top { 0.0 } else { barrier })
            .collect();
        Self::new(d, values)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_vertices(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, x: u32) -> f64 {
        self.values[x as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// One `bitmask value` line per vertex.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, v) in self.values.iter().enumerate() {
            writeln!(out, "{x} {v}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, HypercubeError> {
        let mut pairs = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("subset") {
                continue;
            }
            let mut toks = line.split_whitespace();
            let x: usize = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| HypercubeError::Parse(format!("line {}: bad bitmask", ln + 1)))?;
            let v: f64 = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| HypercubeError::Parse(format!("line {}: bad value", ln + 1)))?;
            pairs.push((x, v));
        }
        let n = pairs.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(HypercubeError::Parse(format!(
                "expected a power-of-two number of vertex lines, got {n}"
            )));
        }
        let d = n.trailing_zeros() as usize;
        let mut values = vec![f64::NAN; n];
        for (x, v) in pairs {
            if x >= n {
                return Err(HypercubeError::Parse(format!("bitmask {x} out of range for d = {d}")));
            }
            values[x] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(HypercubeError::Parse("missing vertex line".into()));
        }
        Self::new(d, values)
    }

    pub fn load(path: &Path) -> Result<Self, HypercubeError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), HypercubeError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Writes a reproducible case: the energy table plus a `subset <hex>` line
/// encoding the membership bitset (vertex `v` is bit `v`, LSB first).
pub fn write_case_file(path: &Path, f: &EnergyFunction, s: &Subset) -> Result<(), HypercubeError> {
    let mut text = f.to_text();
    let n = f.n_vertices();
    let mut nibbles = vec![0u8; n.div_ceil(4)];
    for v in s.vertices() {
        nibbles[v as usize / 4] |= 1 << (v % 4);
    }
    text.push_str("subset ");
    for nib in nibbles.iter().rev() {
        write!(text, "{nib:x}").unwrap();
    }
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_case_file(path: &Path) -> Result<(EnergyFunction, Subset), HypercubeError> {
    let text = fs::read_to_string(path)?;
    let f = EnergyFunction::parse(&text)?;
    let hex = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("subset"))
        .ok_or_else(|| HypercubeError::Parse("missing subset line".into()))?
        .trim();
    let mut members = Vec::new();
    for (pos, ch) in hex.chars().rev().enumerate() {
        let nib = ch
            .to_digit(16)
            .ok_or_else(|| HypercubeError::Parse(format!("bad hex digit {ch:?}")))?;
        for b in 0..4 {
            if nib >> b & 1 == 1 {
                members.push((pos * 4 + b) as u32);
            }
        }
    }
    let s = Subset::from_members(f.d(), members, "case")?;
    Ok((f, s))
}
