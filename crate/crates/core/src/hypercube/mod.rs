//! Exact finite-state analysis of lazy Gibbs sampling on `{0,1}^d`.
//!
//! Vertices are bitmasks; edges join masks at Hamming distance one. The
//! lazy Gibbs kernel for an energy `f` (target `pi ∝ exp(-f)`) moves to a
//! neighbor `y` with probability `pi(y) / (2d (pi(x) + pi(y)))` and stays
//! put otherwise, so every diagonal entry is at least 1/2 and the spectrum
//! of the kernel is nonnegative. Everything here is computed exactly
//! (dense symmetric eigensolves, exhaustive conductance, full distribution
//! evolution), which caps the workable dimension at `d <= 14` with
//! `d <= 10` the tested envelope.

mod chain;
mod energy;
mod quasiconvex;
pub mod sweep;
mod theorems;

pub use chain::{
    build_lazy_gibbs, condition_kernel, conductance, dirichlet_form, evolve_distribution,
    spectral_gap, spectral_report, GibbsChain, SpectralReport,
};
pub use energy::{read_case_file, write_case_file, EnergyFunction};
pub use quasiconvex::{quasiconvex_radius, Quasiconvexity};
pub use theorems::{
    theorem51_check, theorem52_check, Theorem51Report, Theorem51SubsetReport, Theorem52Report,
};

use thiserror::Error;

/// Hard cap on the cube dimension for the exact solvers.
pub const MAX_DIM: usize = 14;

/// Largest conditioned support for which exhaustive conductance is run.
pub const MAX_CONDUCTANCE_STATES: usize = 20;

#[derive(Debug, Error)]
pub enum HypercubeError {
    #[error("invalid energy function: {0}")]
    InvalidEnergy(String),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("chain is reducible: a component of {component_size} states around vertex {example_vertex:#b} is disconnected")]
    Reducible {
        component_size: usize,
        example_vertex: u32,
    },
    #[error("support of {states} states exceeds the exhaustive-conductance cap of {max}")]
    SupportTooLarge { states: usize, max: usize },
    #[error("Dirichlet-form formulas disagree (edge {edge_form} vs inner {inner_form}): kernel corrupted")]
    KernelCorruption { edge_form: f64, inner_form: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("energy is not quasi-convex on the subset: {0}")]
    NotQuasiconvex(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("case file I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("case file parse error: {0}")]
    Parse(String),
}

/// A nonempty set of cube vertices.
#[derive(Debug, Clone)]
pub struct Subset {
    d: usize,
    members: Vec<bool>,
    count: usize,
    label: String,
}

impl Subset {
    pub fn from_members<I: IntoIterator<Item = u32>>(
        d: usize,
        members: I,
        label: impl Into<String>,
    ) -> Result<Self, HypercubeError> {
        let mut mask = vec![false; 1usize << d];
        let mut count = 0;
        for v in members {
            let idx = v as usize;
            if idx >= mask.len() {
                return Err(HypercubeError::InvalidSubset(format!(
                    "vertex {v} outside a {d}-cube"
                )));
            }
            if !mask[idx] {
                mask[idx] = true;
                count += 1;
            }
        }
        if count == 0 {
            return Err(HypercubeError::InvalidSubset("subset must be nonempty".into()));
        }
        Ok(Self { d, members: mask, count, label: label.into() })
    }

    pub fn full(d: usize, label: impl Into<String>) -> Self {
        Self {
            d,
            members: vec![true; 1usize << d],
            count: 1usize << d,
            label: label.into(),
        }
    }

    /// All vertices whose bit `bit` equals `value`.
    pub fn half_cube(d: usize, bit: usize, value: bool) -> Self {
        let mut members = vec![false; 1usize << d];
        let mut count = 0;
        for (v, m) in members.iter_mut().enumerate() {
            if ((v >> bit) & 1 == 1) == value {
                *m = true;
                count += 1;
            }
        }
        Self { d, members, count, label: format!("bit{bit}={}", u8::from(value)) }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn contains(&self, v: u32) -> bool {
        self.members.get(v as usize).copied().unwrap_or(false)
    }

    /// Member vertices in increasing bitmask order.
    pub fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(v, _)| v as u32)
    }
}
