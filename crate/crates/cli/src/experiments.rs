//! The sampling experiments: divergence traces for mixture targets and
//! the multi-restart occupancy study.

use condmix_core::lmc::{
    restart_run_exec, run_lmc_observed, InitialDistribution, LmcConfig, PositionSet,
};
use condmix_core::potentials::Potential;
use condmix_core::regions::voronoi_cell_index;
use condmix_core::Exec;

use crate::args::{GmmArgs, RestartArgs};
use crate::pipeline::GridPipeline;
use crate::presets::{mixture_from_config, mixture_preset, MixtureSetup};
use crate::report::{OutDir, RunReport, TRACE_HEADER};
use crate::CliError;

pub const DEFAULT_SMOOTHING_EPS: f64 = 1e-12;

fn resolve_setup(
    preset: &Option<String>,
    config: &Option<std::path::PathBuf>,
) -> Result<MixtureSetup, CliError> {
    match (preset, config) {
        (Some(name), None) => mixture_preset(name),
        (None, Some(path)) => mixture_from_config(path),
        (Some(_), Some(_)) => Err(CliError::Config(
            "--preset and --config are mutually exclusive".into(),
        )),
        (None, None) => Err(CliError::Config("need --preset or --config".into())),
    }
}

/// Runs the sampler on a mixture target and traces global and
/// per-Voronoi-cell conditional divergences at every checkpoint, plus the
/// final-ensemble histogram. On divergence the partial trace is flushed
/// before the error propagates.
pub fn experiment_gmm(args: &GmmArgs) -> Result<(RunReport, bool), CliError> {
    let mut setup = resolve_setup(&args.preset, &args.config)?;
    let h = args.h.unwrap_or(0.01);
    let iterations = args.iterations.unwrap_or(setup.default_iterations);
    let particles = args.particles.unwrap_or(100_000);
    let mut cfg = LmcConfig::new(h, iterations, particles, args.seed)?;
    if let Some(r) = args.record_every {
        cfg = cfg.with_record_every(r)?;
    }
    let grid = match &args.grid {
        Some(spec) => condmix_core::divergences::Grid::parse(spec)
            .map_err(|e| CliError::Config(e.to_string()))?,
        None => setup.default_grid.clone(),
    };
    let init = match &args.init {
        Some(spec) => InitialDistribution::parse(spec)?,
        None => setup.default_init.clone(),
    };
    let out = OutDir::create(args.out_dir("experiment-gmm", &setup.name, args.seed).as_path())?;
    if let Some(w) = cfg.step_size_warning(setup.target.lipschitz_hint()) {
        eprintln!("warning: {w}");
    }

    let mut report = RunReport::new("experiment-gmm", args.seed);
    report.param("target", setup.name.clone());
    report.param("h", h);
    report.param("T", iterations as u64);
    report.param("particles", particles as u64);
    report.param("record_every", cfg.record_every as u64);
    report.param("smoothing_eps", DEFAULT_SMOOTHING_EPS);
    report.param("divergences_of", "per-checkpoint ensembles");
    report.param(
        "note",
        "histogram estimators reconstruct the divergence curves; plateaus reflect \
         the smoothing floor recorded in smoothing_eps",
    );
    out.echo_config(&[
        ("command", "experiment-gmm".into()),
        ("target", setup.name.clone()),
        ("h", format!("{h}")),
        ("T", format!("{iterations}")),
        ("particles", format!("{particles}")),
        ("seed", format!("{}", args.seed)),
        ("record_every", format!("{}", cfg.record_every)),
        ("init", format!("{init:?}")),
    ])?;

    let regions = setup.take_regions();
    let pipeline = GridPipeline::new(&setup.target, &regions, &grid, DEFAULT_SMOOTHING_EPS, false)?;

    let mut rows: Vec<String> = Vec::new();
    let mut counts = vec![0.0f64; grid.n_cells()];
    let mut last_counts = vec![0.0f64; grid.n_cells()];
    let mut checkpoint_err: Option<CliError> = None;
    let run_result = run_lmc_observed(&cfg, &setup.target, &init, Exec::default(), |ensemble| {
        if checkpoint_err.is_some() {
            return;
        }
        counts.fill(0.0);
        pipeline.bin(&mut counts, ensemble);
        match pipeline.checkpoint(&counts) {
            Ok(stats) => {
                pipeline.trace_rows(ensemble.time_index(), &stats, &mut rows);
                last_counts.copy_from_slice(&counts);
            }
            Err(e) => checkpoint_err = Some(e),
        }
    });
    // Partial results are still written when the sampler diverges.
    let trace_path = out.write_csv("trace.csv", TRACE_HEADER, &rows)?;
    report.artifacts.push(trace_path.display().to_string());
    run_result?;
    if let Some(e) = checkpoint_err {
        return Err(e);
    }

    let emp = condmix_core::divergences::empirical_density_from_counts(
        &grid,
        &last_counts,
        DEFAULT_SMOOTHING_EPS,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut hist_rows = Vec::with_capacity(grid.n_cells());
    let mut center = vec![0.0; grid.dim()];
    for flat in 0..grid.n_cells() {
        grid.center_into(flat, &mut center);
        let coords: Vec<String> = center.iter().map(|c| format!("{c}")).collect();
        hist_rows.push(format!(
            "{},{},{}",
            coords.join(","),
            emp.values()[flat],
            pipeline.target_global.values()[flat]
        ));
    }
    let hist_header = if grid.dim() == 1 {
        "x1,empirical,target"
    } else {
        "x1,x2,empirical,target"
    };
    let hist_path = out.write_csv("histogram.csv", hist_header, &hist_rows)?;
    report.artifacts.push(hist_path.display().to_string());

    let pass = report.finalize(&out)?;
    Ok((report, pass))
}

/// Runs independent single-particle chains for each configured restart
/// count and bins the terminal points by Voronoi cell.
pub fn experiment_restart(args: &RestartArgs) -> Result<(RunReport, bool), CliError> {
    let setup = resolve_setup(&args.preset, &args.config)?;
    let h = args.h.unwrap_or(0.01);
    let iterations = args.iterations.unwrap_or(1000);
    let cfg = LmcConfig::new(h, iterations, 1, args.seed)?;
    let init = match &args.init {
        Some(spec) => InitialDistribution::parse(spec)?,
        None => setup.default_init.clone(),
    };
    let restarts: Vec<usize> = args
        .restarts
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad restart count {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    if restarts.is_empty() {
        return Err(CliError::Config("need at least one restart count".into()));
    }
    let out = OutDir::create(args.out_dir("experiment-restart", &setup.name, args.seed).as_path())?;

    let mut report = RunReport::new("experiment-restart", args.seed);
    report.param("target", setup.name.clone());
    report.param("h", h);
    report.param("T", iterations as u64);
    report.param(
        "restarts",
        serde_json::Value::from(restarts.iter().map(|&n| n as u64).collect::<Vec<_>>()),
    );
    out.echo_config(&[
        ("command", "experiment-restart".into()),
        ("target", setup.name.clone()),
        ("h", format!("{h}")),
        ("T", format!("{iterations}")),
        ("seed", format!("{}", args.seed)),
        ("restarts", args.restarts.clone()),
        ("init", format!("{init:?}")),
    ])?;

    let n_cells = setup.target.n_components();
    let max_n = restarts.iter().copied().max().unwrap();
    let mut rows = Vec::new();
    for &n in &restarts {
        let outcome = restart_run_exec(&cfg, &setup.target, n, &init, Exec::default())?;
        if !outcome.diverged_chains.is_empty() {
            eprintln!(
                "warning: {} of {n} chains diverged and were dropped",
                outcome.diverged_chains.len()
            );
        }
        let mut cell_counts = vec![0usize; n_cells];
        let d = outcome.dim();
        for x in outcome.flat().chunks_exact(d) {
            cell_counts[voronoi_cell_index(&setup.target, x)] += 1;
        }
        let survivors = outcome.n_points().max(1);
        for (cell, &count) in cell_counts.iter().enumerate() {
            rows.push(format!("{n},{cell},{count},{}", count as f64 / survivors as f64));
        }
        let occupied = cell_counts.iter().filter(|&&c| c > 0).count();
        if n == 1 {
            report.check(
                "single_chain_occupies_one_cell(n=1)",
                occupied as f64,
                1.0,
                occupied == 1,
            );
        } else if n == max_n && n >= 100 {
            report.check(
                format!("all_cells_occupied(n={n})"),
                occupied as f64,
                n_cells as f64,
                occupied == n_cells,
            );
            let min_frac = cell_counts
                .iter()
                .map(|&c| c as f64 / survivors as f64)
                .fold(f64::INFINITY, f64::min);
            report.check(
                format!("min_cell_fraction(n={n})"),
                min_frac,
                0.02,
                min_frac >= 0.02,
            );
        } else {
            // intermediate counts are reported, not asserted
            report.check(
                format!("cells_occupied(n={n})"),
                occupied as f64,
                n_cells as f64,
                true,
            );
        }
    }
    let occ = out.write_csv("occupancy.csv", "n,cell,count,fraction", &rows)?;
    report.artifacts.push(occ.display().to_string());
    let pass = report.finalize(&out)?;
    Ok((report, pass))
}
