//! `condmix`: experiments and verification sweeps for conditional mixing
//! of MCMC samplers.
//!
//! Exit codes: 0 when every check passes, 1 on verification failure or
//! runtime error, 2 on configuration errors.

mod args;
mod experiments;
mod pipeline;
mod presets;
mod report;
mod verify;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command, VerifyWhat};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<condmix_core::config::ConfigError> for CliError {
    fn from(e: condmix_core::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<condmix_core::lmc::LmcError> for CliError {
    fn from(e: condmix_core::lmc::LmcError) -> Self {
        use condmix_core::lmc::LmcError::*;
        match e {
            InvalidConfig(_) | DimensionMismatch { .. } => CliError::Config(e.to_string()),
            Diverged { .. } | EmptyTrajectory => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<condmix_core::divergences::DivergenceError> for CliError {
    fn from(e: condmix_core::divergences::DivergenceError) -> Self {
        use condmix_core::divergences::DivergenceError::*;
        match e {
            InvalidGrid(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<condmix_core::hypercube::HypercubeError> for CliError {
    fn from(e: condmix_core::hypercube::HypercubeError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::ExperimentGmm(a) => experiments::experiment_gmm(&a),
        Command::ExperimentRestart(a) => experiments::experiment_restart(&a),
        Command::VerifyHypercube(a) => verify::verify_hypercube(&a),
        Command::VerifyMomentBound(a) => verify::verify_moment_bound(&a),
        Command::VerifyHessianBound(a) => verify::verify_hessian_bound(&a),
        Command::VerifyDichotomy(a) => verify::verify_dichotomy(&a),
        Command::VerifyPoincare(a) => verify::verify_poincare(&a),
        Command::Verify(v) => match v.what {
            VerifyWhat::Hypercube(a) => verify::verify_hypercube(&a),
            VerifyWhat::MomentBound(a) => verify::verify_moment_bound(&a),
            VerifyWhat::HessianBound(a) => verify::verify_hessian_bound(&a),
            VerifyWhat::Dichotomy(a) => verify::verify_dichotomy(&a),
            VerifyWhat::Poincare(a) => verify::verify_poincare(&a),
        },
    };
    match outcome {
        Ok((_, true)) => ExitCode::SUCCESS,
        Ok((_, false)) => ExitCode::from(1),
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
