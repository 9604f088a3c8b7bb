//! # condmix-core
//!
//! Building blocks for studying *conditional* mixing of MCMC samplers:
//! how fast the law of the iterates, restricted to a subset of state space,
//! approaches the restricted target — even when global mixing is slow.
//!
//! The crate is organized around five subsystems:
//!
//! - [`potentials`]: target distributions `pi ∝ exp(-V)` as evaluatable
//!   potentials with analytic gradients (Gaussian mixtures with shared
//!   covariance, tempered symmetric-mixture posteriors, test quadratics).
//! - [`lmc`]: the unadjusted Langevin sampler over particle ensembles,
//!   trajectory averaging, and single-particle restart runs. Noise streams
//!   are counter-based per particle, so runs are bit-reproducible across
//!   thread counts.
//! - [`regions`]: conditioning sets (Voronoi cells of mixture components,
//!   slab/box decompositions) and restriction of ensembles to regions.
//! - [`divergences`]: grid-based estimators of KL, total variation,
//!   chi-square variance, Fisher information and its un-logged analogue,
//!   a numerical Poincaré-constant oracle, and the two mass-vs-closeness
//!   dichotomy checks they feed.
//! - [`hypercube`]: exact finite-state machinery for lazy Gibbs sampling on
//!   `{0,1}^d` — conditioned kernels, Dirichlet forms, spectral gaps,
//!   conductance, quasi-convexity certificates, and exact verification of
//!   the conditional-mixing and spectral-gap bounds.
//!
//! Data-parallel inner loops (particle updates, ensemble restriction,
//! instance sweeps) run on rayon when the default `parallel` feature is
//! enabled and fall back to sequential execution otherwise; results are
//! identical either way.

pub mod config;
pub mod divergences;
pub mod exec;
pub mod hypercube;
pub mod lmc;
pub mod potentials;
pub mod regions;

pub use exec::Exec;
