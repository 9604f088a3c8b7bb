//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL verdict line (visible with `--nocapture`).
//!
//! Expensive sampler runs are shared through on-demand fixtures; the
//! determinism criterion re-runs them with identical seeds and compares
//! artifact bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use condmix_core::divergences::{
    dichotomy_check_lsi, dichotomy_check_pi, poincare_constant_grid, target_conditional_density,
    Grid,
};
use condmix_core::hypercube::sweep::{
    instance_rng, random_connected_subset, random_cone_energy, random_distribution,
    random_integer_energy, random_linear_energy, random_subcube_partition,
};
use condmix_core::hypercube::{
    build_lazy_gibbs, condition_kernel, conductance, spectral_gap, theorem51_check,
    theorem52_check, GibbsChain, Quasiconvexity, Subset,
};
use condmix_core::potentials::GaussianMixtureTarget;
use condmix_core::regions::{Region, VoronoiPartition};

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {n} {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn base_dir() -> &'static PathBuf {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let d = std::env::temp_dir().join(format!("condmix-acceptance-{}", std::process::id()));
        fs::create_dir_all(&d).expect("create acceptance dir");
        d
    })
}

fn condmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condmix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, args: &[&str]) {
    let mut full: Vec<&str> = args.to_vec();
    let dir_str = dir.to_str().unwrap();
    full.extend_from_slice(&["--out", dir_str]);
    let out = condmix(&full);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn nu1_dir() -> &'static PathBuf {
    static D: OnceLock<PathBuf> = OnceLock::new();
    D.get_or_init(|| {
        let dir = base_dir().join("nu1");
        run_to(&dir, &["experiment-gmm", "--preset", "nu1", "--seed", "7"]);
        dir
    })
}

fn nu2_dir() -> &'static PathBuf {
    static D: OnceLock<PathBuf> = OnceLock::new();
    D.get_or_init(|| {
        let dir = base_dir().join("nu2");
        run_to(&dir, &["experiment-gmm", "--preset", "nu2", "--seed", "7"]);
        dir
    })
}

fn restart_dir() -> &'static PathBuf {
    static D: OnceLock<PathBuf> = OnceLock::new();
    D.get_or_init(|| {
        let dir = base_dir().join("restart");
        run_to(&dir, &["experiment-restart", "--preset", "nu3", "--seed", "7"]);
        dir
    })
}

fn moment_dir() -> &'static PathBuf {
    static D: OnceLock<PathBuf> = OnceLock::new();
    D.get_or_init(|| {
        let dir = base_dir().join("moment");
        run_to(&dir, &["verify-moment-bound", "--seed", "7"]);
        dir
    })
}

struct TraceRow {
    t: usize,
    global_kl: f64,
    region: String,
    mass: f64,
    cond_kl: f64,
    cond_chi2: f64,
    fi: f64,
    pfi: f64,
}

fn parse_trace(dir: &Path) -> Vec<TraceRow> {
    let text = fs::read_to_string(dir.join("trace.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            TraceRow {
                t: c[0].parse().unwrap(),
                global_kl: c[1].parse().unwrap(),
                region: c[3].to_string(),
                mass: c[4].parse().unwrap(),
                cond_kl: c[5].parse().unwrap(),
                cond_chi2: c[7].parse().unwrap(),
                fi: c[8].parse().unwrap(),
                pfi: c[9].parse().unwrap(),
            }
        })
        .collect()
}

fn report_checks(dir: &Path) -> Vec<(String, f64, f64, bool)> {
    let text = fs::read_to_string(dir.join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c["name"].as_str().unwrap().to_string(),
                c["value"].as_f64().unwrap_or(f64::NAN),
                c["bound"].as_f64().unwrap_or(f64::NAN),
                c["pass"].as_bool().unwrap(),
            )
        })
        .collect()
}

/// Worst laziness/row-sum/detailed-balance violation of a chain.
fn kernel_violation(chain: &GibbsChain) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..chain.n_states() {
        let mut row = chain.diagonal(i);
        worst = worst.max(0.5 - chain.diagonal(i));
        for j in 0..chain.d() {
            let p = chain.neighbor_prob(i, j);
            row += p;
            if p > 0.0 {
                let k = chain.neighbor(i, j).unwrap();
                let balance =
                    chain.stationary()[i] * p - chain.stationary()[k] * chain.neighbor_prob(k, j);
                worst = worst.max(balance.abs());
            }
        }
        worst = worst.max((row - 1.0).abs());
    }
    worst
}

#[test]
fn criterion_01_kernel_laziness_and_reversibility() {
    let start = std::time::Instant::now();
    let mut worst = 0.0f64;
    for d in 2..=8usize {
        for i in 0..50u64 {
            let f = random_integer_energy(d, 6, &mut instance_rng(100 + d as u64, i));
            worst = worst.max(kernel_violation(&build_lazy_gibbs(&f)));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        1,
        "kernel laziness and reversibility",
        worst <= 1e-12 && elapsed < 10.0,
        &format!("max violation {worst:.3e} over 350 chains in {elapsed:.2}s"),
    );
}

/// Quasi-convex instance used by criteria 2: linear and cone energies on
/// the full cube plus cones on grown connected subsets (falling back to
/// the full cube if the subset fails certification).
fn quasiconvex_instance(d: usize, i: u64) -> (condmix_core::hypercube::EnergyFunction, Subset) {
    let mut rng = instance_rng(200 + d as u64, i);
    match i % 3 {
        0 => (random_linear_energy(d, &mut rng), Subset::full(d, "all")),
        1 => (random_cone_energy(d, &mut rng), Subset::full(d, "all")),
        _ => {
            use rand::Rng;
            let size = rng.random_range((1usize << d) / 4..=(3usize << d) / 4);
            let s = random_connected_subset(d, size, &mut rng);
            let f = random_cone_energy(d, &mut rng);
            match condmix_core::hypercube::quasiconvex_radius(&f, &s) {
                Quasiconvexity::Certified { .. } => (f, s),
                _ => (f, Subset::full(d, "all")),
            }
        }
    }
}

#[test]
fn criterion_02_quasiconvex_gap_bound() {
    let start = std::time::Instant::now();
    let mut checked = 0;
    let mut min_ratio = f64::INFINITY;
    for d in [3usize, 4, 5] {
        for i in 0..100u64 {
            let (f, s) = quasiconvex_instance(d, i);
            let rep = theorem52_check(&f, &s).expect("instance certifies");
            assert!(rep.pass, "d={d} i={i}: gap {} < bound {}", rep.gap, rep.bound);
            min_ratio = min_ratio.min(rep.ratio);
            checked += 1;
        }
    }
    for d in 2..=8usize {
        let f = random_linear_energy(d, &mut instance_rng(290, d as u64));
        let rep = theorem52_check(&f, &Subset::full(d, "all")).unwrap();
        assert!(rep.pass, "linear d={d}");
        min_ratio = min_ratio.min(rep.ratio);
        checked += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        2,
        "conditioned spectral gap >= 1/(16 d^2 D^2)",
        checked == 307 && elapsed < 120.0,
        &format!("{checked} instances, min gap/bound ratio {min_ratio:.2}, {elapsed:.2}s"),
    );
}

/// Criterion-3 instance family: random integer energies, random subcube
/// partitions, random full-support initial distributions.
fn mixing_instance(i: u64) -> (GibbsChain, Vec<Subset>, Vec<f64>) {
    use rand::Rng;
    let d = 5;
    let mut rng = instance_rng(300, i);
    let f = random_integer_energy(d, 6, &mut rng);
    let chain = build_lazy_gibbs(&f);
    let k = rng.random_range(1..=2usize);
    let partition = random_subcube_partition(d, k, &mut rng);
    let mu0 = random_distribution(chain.n_states(), &mut rng);
    (chain, partition, mu0)
}

#[test]
fn criterion_03_conditional_mixing_and_telescoping() {
    // Gated: the exact telescoping bound and the mass-weighted conditional
    // chi-square chain (the inequality the Dirichlet-form argument
    // derives), plus both dichotomy readings. The variance-over-mass^2
    // display does not follow from that argument and fails on ~1% of
    // honest random subsets (checked exactly); its violations are counted
    // and reported here, not asserted.
    let start = std::time::Instant::now();
    let mut min_weighted = f64::INFINITY;
    let mut min_telescoping = f64::INFINITY;
    let mut min_printed = f64::INFINITY;
    let mut printed_violations = 0usize;
    let mut subsets_checked = 0usize;
    for i in 0..100u64 {
        let (chain, partition, mu0) = mixing_instance(i);
        let rep = theorem51_check(&chain, &partition, &mu0, 256).unwrap();
        min_telescoping = min_telescoping.min(rep.telescoping_slack);
        assert!(rep.telescoping_slack >= -1e-9, "instance {i}: telescoping");
        assert!(rep.min_contraction_slack >= -1e-12, "instance {i}: contraction");
        for s in &rep.subsets {
            subsets_checked += 1;
            min_weighted = min_weighted.min(s.mass_weighted_slack);
            min_printed = min_printed.min(s.appendix_slack);
            printed_violations += usize::from(s.appendix_slack < -1e-9);
            assert!(
                s.mass_weighted_slack >= -1e-9,
                "instance {i} subset {}: derivable-chain slack {}",
                s.label,
                s.mass_weighted_slack
            );
            assert!(s.statement_dichotomy_pass, "instance {i} subset {}", s.label);
            assert!(s.appendix_dichotomy_pass, "instance {i} subset {}", s.label);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        3,
        "conditional chi-square chain and telescoping (exact)",
        min_weighted >= -1e-9 && min_telescoping >= -1e-9 && elapsed < 120.0,
        &format!(
            "derivable chain min slack {min_weighted:.3e}, telescoping min slack {min_telescoping:.3e} \
             over {subsets_checked} subsets; printed variance-over-mass^2 display violated on \
             {printed_violations} subsets (min slack {min_printed:.3e}; underivable as printed, \
             reported not gated), {elapsed:.2}s"
        ),
    );
}

#[test]
fn criterion_04_cheeger_sandwich() {
    let mut checked = 0;
    let mut check = |chain: &GibbsChain, what: &str| {
        let gap = spectral_gap(chain).unwrap();
        let phi = conductance(chain).unwrap();
        assert!(
            phi * phi / 2.0 <= gap + 1e-9 && gap <= 2.0 * phi + 1e-9,
            "{what}: gap {gap}, conductance {phi}"
        );
        checked += 1;
    };
    // criterion-1 instances small enough to enumerate exhaustively
    for d in 2..=3usize {
        for i in 0..50u64 {
            let f = random_integer_energy(d, 6, &mut instance_rng(100 + d as u64, i));
            check(&build_lazy_gibbs(&f), &format!("full d={d} i={i}"));
        }
    }
    // criterion-3 partitions: conditioned cells with at most 10 states
    for i in 0..100u64 {
        let (chain, partition, _) = mixing_instance(i);
        for s in &partition {
            if (2..=10).contains(&s.len()) {
                check(&condition_kernel(&chain, s).unwrap(), &format!("cell i={i}"));
            }
        }
    }
    // dedicated small conditioned instances at d = 5
    for i in 0..50u64 {
        use rand::Rng;
        let mut rng = instance_rng(400, i);
        let f = random_integer_energy(5, 6, &mut rng);
        let chain = build_lazy_gibbs(&f);
        let size = rng.random_range(2..=10usize);
        let s = random_connected_subset(5, size, &mut rng);
        check(&condition_kernel(&chain, &s).unwrap(), &format!("grown i={i}"));
    }
    verdict(
        4,
        "Cheeger sandwich Phi^2/2 <= gap <= 2 Phi",
        checked > 200,
        &format!("{checked} chains checked within 1e-9"),
    );
}

#[test]
fn criterion_05_hessian_bound() {
    let start = std::time::Instant::now();
    let dir = base_dir().join("hessian");
    run_to(
        &dir,
        &["verify-hessian-bound", "--instances", "50", "--points", "100", "--seed", "7"],
    );
    let checks = report_checks(&dir);
    let all = checks.iter().all(|(_, _, _, p)| *p);
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        5,
        "curvature bound dominates finite-difference Hessians",
        all && checks.len() == 50 && elapsed < 30.0,
        &format!("{} instances, {elapsed:.2}s", checks.len()),
    );
}

#[test]
fn criterion_06_poincare_oracle_calibration() {
    let start = std::time::Instant::now();
    let dir = base_dir().join("poincare");
    run_to(&dir, &["verify-poincare", "--seed", "7"]);
    let checks = report_checks(&dir);
    let get = |name: &str| -> (f64, f64, bool) {
        checks
            .iter()
            .find(|(n, _, _, _)| n == name)
            .map(|(_, v, b, p)| (*v, *b, *p))
            .unwrap_or_else(|| panic!("missing check {name}"))
    };
    let (u_rel, u_bound, u_pass) = get("poincare_uniform_unit_interval_rel_err");
    assert_eq!(u_bound, 0.01);
    let mut all = u_pass;
    for sigma in ["0.5", "1", "2"] {
        let (_, b, p) = get(&format!("poincare_gaussian_sigma_{sigma}_rel_err"));
        assert_eq!(b, 0.02);
        all &= p;
    }
    let (cell_rho, cell_bound, cell_pass) = get("poincare_nu1_left_cell_lower_bound");
    assert!((cell_bound - 1.0 / 9.0).abs() < 1e-12);
    all &= cell_pass;
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        6,
        "Poincaré oracle calibration",
        all && elapsed < 60.0,
        &format!(
            "uniform rel err {u_rel:.2e} (<=1%), gaussians <=2%, dominant-cell rho {cell_rho:.4} >= 1/9, {elapsed:.2}s"
        ),
    );
}

#[test]
fn criterion_07_figure_signature() {
    let start = std::time::Instant::now();
    let nu1 = parse_trace(nu1_dir());
    let final_t = nu1.iter().map(|r| r.t).max().unwrap();
    assert_eq!(final_t, 500);
    let finals: Vec<&TraceRow> = nu1.iter().filter(|r| r.t == final_t).collect();
    assert_eq!(finals.len(), 2, "two Voronoi cells");
    let max_cond = finals.iter().map(|r| r.cond_kl).fold(0.0f64, f64::max);
    let global = finals[0].global_kl;

    let nu2 = parse_trace(nu2_dir());
    let nu2_final = nu2.iter().map(|r| r.t).max().unwrap();
    assert_eq!(nu2_final, 5000);
    let nu2_global = nu2.iter().find(|r| r.t == nu2_final).unwrap().global_kl;

    let elapsed = start.elapsed().as_secs_f64();
    let pass = max_cond < 0.05 && global > 0.1 && nu2_global < 0.05 && elapsed < 300.0;
    verdict(
        7,
        "slow global / fast conditional divergence signature",
        pass,
        &format!(
            "nu1: cond KL {max_cond:.4} < 0.05, global KL {global:.3} > 0.1; nu2: global KL {nu2_global:.5} < 0.05; {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_08_restart_occupancy() {
    let start = std::time::Instant::now();
    let text = fs::read_to_string(restart_dir().join("occupancy.csv")).unwrap();
    let mut n2000_fracs = Vec::new();
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        if c[0] == "2000" {
            n2000_fracs.push(c[3].parse::<f64>().unwrap());
        }
    }
    assert_eq!(n2000_fracs.len(), 4);
    let min_frac = n2000_fracs.iter().cloned().fold(f64::INFINITY, f64::min);

    // 20 single-chain runs end in exactly one cell each
    let mut distinct_cells = std::collections::BTreeSet::new();
    for k in 0..20u64 {
        let dir = base_dir().join(format!("restart1-{k}"));
        run_to(
            &dir,
            &[
                "experiment-restart",
                "--preset",
                "nu3",
                "--restarts",
                "1",
                "--seed",
                &format!("{}", 100 + k),
            ],
        );
        let text = fs::read_to_string(dir.join("occupancy.csv")).unwrap();
        let mut occupied = Vec::new();
        for line in text.lines().skip(1) {
            let c: Vec<&str> = line.split(',').collect();
            if c[2].parse::<usize>().unwrap() > 0 {
                occupied.push(c[1].to_string());
            }
        }
        assert_eq!(occupied.len(), 1, "seed {k}: one terminal cell");
        distinct_cells.insert(occupied[0].clone());
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        8,
        "restart occupancy",
        min_frac >= 0.02 && distinct_cells.len() >= 2 && elapsed < 120.0,
        &format!(
            "n=2000 min cell fraction {min_frac:.3} >= 0.02; n=1 trapped per run across {} distinct cells; {elapsed:.1}s",
            distinct_cells.len()
        ),
    );
}

#[test]
fn criterion_09_exponential_moment_bound() {
    let start = std::time::Instant::now();
    let checks = report_checks(moment_dir());
    let mut all = true;
    for d in [1usize, 2, 4] {
        let name = format!("moment_bound(d={d})");
        let (value, bound, pass) = checks
            .iter()
            .find(|(n, _, _, _)| *n == name)
            .map(|(_, v, b, p)| (*v, *b, *p))
            .unwrap_or_else(|| panic!("missing {name}"));
        let expected_bound = 32.0 * (16.0 * d as f64).exp();
        assert!(
            (bound / expected_bound - 1.0).abs() < 1e-12,
            "bound for d={d} is {bound}, expected 32 e^(16 d) = {expected_bound}"
        );
        assert!(value >= 1.0, "estimate should be nontrivial, got {value}");
        all &= pass;
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        9,
        "long-run exponential moment bound",
        all && elapsed < 60.0,
        &format!("d in {{1,2,4}} all below 32 e^(16 d); {elapsed:.1}s"),
    );
}

#[test]
fn criterion_10_dichotomy_suites() {
    // (a) every checkpoint of the criterion-7 run, with constants from
    // the Poincaré oracle (as surrogates for the restricted log-Sobolev
    // constants).
    let nu1 = GaussianMixtureTarget::univariate(&[0.9, 0.1], &[-10.0, 10.0], 1.0).unwrap();
    let grid = Grid::line(-15.0, 15.0, 300).unwrap();
    let part = std::sync::Arc::new(VoronoiPartition::new(&nu1));
    let global = target_conditional_density(&nu1, &condmix_core::regions::WholeSpace, &grid).unwrap();
    let vol = grid.cell_volume();
    let mut alphas = std::collections::BTreeMap::new();
    let mut target_masses = std::collections::BTreeMap::new();
    for cell in part.cells() {
        let cond = target_conditional_density(&nu1, &cell, &grid).unwrap();
        let alpha = poincare_constant_grid(&cond).unwrap();
        let mut mass = 0.0;
        let mut center = vec![0.0];
        for (flat, &v) in global.values().iter().enumerate() {
            grid.center_into(flat, &mut center);
            if cell.contains(&center) {
                mass += v * vol;
            }
        }
        alphas.insert(cell.label().to_string(), alpha);
        target_masses.insert(cell.label().to_string(), mass);
    }
    let rows = parse_trace(nu1_dir());
    let mut lsi_fail = 0usize;
    let mut pi_fail = 0usize;
    let mut branch_mass = 0usize;
    let mut branch_entropy = 0usize;
    for r in &rows {
        let alpha = alphas[&r.region];
        let lsi = dichotomy_check_lsi(r.fi, alpha, r.mass, r.cond_kl);
        if !lsi.passed() {
            lsi_fail += 1;
        }
        if lsi.mass_branch {
            branch_mass += 1;
        }
        if lsi.entropy_branch {
            branch_entropy += 1;
        }
        let pi = dichotomy_check_pi(r.pfi, alpha, r.mass, target_masses[&r.region], r.cond_chi2);
        if !pi.passed() {
            pi_fail += 1;
        }
    }
    assert!(!rows.is_empty());

    // (b) the two-well target through the dichotomy command.
    let dir = base_dir().join("dichotomy-twowell");
    run_to(&dir, &["verify-dichotomy", "--preset", "twowell", "--seed", "7"]);
    let checks = report_checks(&dir);
    let twowell_ok = checks.iter().all(|(_, _, _, p)| *p);
    let dicho = fs::read_to_string(dir.join("dichotomy.csv")).unwrap();
    let branches_recorded = dicho
        .lines()
        .skip(1)
        .all(|l| ["mass", "entropy", "both"].iter().any(|b| l.contains(b)));

    verdict(
        10,
        "entropy and variance dichotomies",
        lsi_fail == 0 && pi_fail == 0 && twowell_ok && branches_recorded,
        &format!(
            "nu1 run: {} checkpoints x 2 regions, 0 failures (branches: mass {branch_mass}, entropy {branch_entropy}); two-well command all pass with branches recorded",
            rows.len() / 2
        ),
    );
}

#[test]
fn criterion_11_byte_identical_reruns() {
    let start = std::time::Instant::now();
    let compare = |a: &Path, b: &Path, files: &[&str]| {
        for f in files {
            let fa = fs::read(a.join(f)).unwrap_or_else(|_| panic!("{a:?}/{f}"));
            let fb = fs::read(b.join(f)).unwrap_or_else(|_| panic!("{b:?}/{f}"));
            assert_eq!(fa, fb, "{f} differs between runs");
        }
    };
    let nu1_again = base_dir().join("nu1-again");
    run_to(&nu1_again, &["experiment-gmm", "--preset", "nu1", "--seed", "7"]);
    compare(nu1_dir(), &nu1_again, &["trace.csv", "histogram.csv", "config.echo"]);

    let nu2_again = base_dir().join("nu2-again");
    run_to(&nu2_again, &["experiment-gmm", "--preset", "nu2", "--seed", "7"]);
    compare(nu2_dir(), &nu2_again, &["trace.csv", "histogram.csv"]);

    let restart_again = base_dir().join("restart-again");
    run_to(&restart_again, &["experiment-restart", "--preset", "nu3", "--seed", "7"]);
    compare(restart_dir(), &restart_again, &["occupancy.csv"]);

    let moment_again = base_dir().join("moment-again");
    run_to(&moment_again, &["verify-moment-bound", "--seed", "7"]);
    compare(moment_dir(), &moment_again, &["trace.csv"]);

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        11,
        "byte-identical CSVs under fixed seeds",
        true,
        &format!("nu1, nu2, restart, and moment artifacts identical; {elapsed:.1}s"),
    );
}
