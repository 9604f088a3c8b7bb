//! Sampler behavior against closed-form oracles.

use condmix_core::lmc::{
    averaged_measure, lmc_step, run_lmc, run_lmc_observed, InitialDistribution, LmcConfig,
    PositionSet,
};
use condmix_core::potentials::{
    GaussianMixtureTarget, Potential, PowerPosteriorTarget, Quadratic, RippledQuadratic,
};
use condmix_core::Exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The 1D quadratic chain is the autoregression `x' = (1-h)x + sqrt(2h) xi`
/// with stationary variance `2h / (1 - (1-h)^2) = 1/(1 - h/2)`.
#[test]
fn quadratic_chain_reaches_exact_stationary_variance() {
    let h = 0.1;
    let cfg = LmcConfig::new(h, 10_000, 10_000, 2024)
        .unwrap()
        .with_record_every(10)
        .unwrap();
    let q = Quadratic { dim: 1 };
    let init = InitialDistribution::PointMass(vec![0.0]);
    let mut tail_sum = 0.0;
    let mut tail_count = 0usize;
    run_lmc_observed(&cfg, &q, &init, Exec::default(), |e| {
        if e.time_index() >= 8000 {
            tail_sum += e.flat().iter().map(|v| v * v).sum::<f64>();
            tail_count += e.flat().len();
        }
    })
    .unwrap();
    let second_moment = tail_sum / tail_count as f64;
    let exact = 1.052_631_578_947_368_4; // 1/(1 - h/2)
    assert!(
        (second_moment - exact).abs() < 0.03,
        "second moment {second_moment} vs {exact}"
    );
}

#[test]
fn pooled_moment_lies_between_initial_and_stationary() {
    // Relaxation from a wide start is monotone for the quadratic target,
    // so the pooled second moment sits between the endpoints.
    let h = 0.1;
    let cfg = LmcConfig::new(h, 2000, 4000, 3).unwrap().with_record_every(20).unwrap();
    let q = Quadratic { dim: 1 };
    let init = InitialDistribution::IsotropicGaussian { sigma: 2.0 };
    let traj = run_lmc(&cfg, &q, &init).unwrap();
    let moment = |flat: &[f64]| flat.iter().map(|v| v * v).sum::<f64>() / flat.len() as f64;
    let m0 = moment(traj[0].flat());
    let pooled = averaged_measure(&traj, h).unwrap();
    let mp = moment(pooled.flat());
    let stationary = 1.0 / (1.0 - h / 2.0);
    assert!(m0 > 3.5, "wide start, got {m0}");
    assert!(mp < m0 && mp > stationary, "pooled {mp} outside ({stationary}, {m0})");
}

/// Moment bound for strongly dissipative targets: running the sampler with
/// `h < 1/(16L)` and `h <= 8m/(4b + 32d)` keeps the long-run mean of
/// `exp(|x|^2/(4m))` below `32 exp((8b + 64d)/(4m))`.
#[test]
fn exponential_moment_bound_holds_for_quadratic() {
    let d = 2;
    let (m, b, l) = (1.0, 0.0, 1.0);
    let h = 0.05;
    assert!(h < 1.0 / (16.0 * l));
    assert!(h <= 8.0 * m / (4.0 * b + 32.0 * d as f64));
    let cfg = LmcConfig::new(h, 3000, 2000, 11).unwrap().with_record_every(50).unwrap();
    let q = Quadratic { dim: d };
    let init = InitialDistribution::IsotropicGaussian { sigma: 1.0 };
    let mut per_particle = vec![0.0f64; cfg.n_particles];
    let mut snapshots = 0usize;
    run_lmc_observed(&cfg, &q, &init, Exec::default(), |e| {
        if e.time_index() >= 1000 {
            snapshots += 1;
            for (acc, x) in per_particle.iter_mut().zip(e.flat().chunks_exact(d)) {
                let norm_sq: f64 = x.iter().map(|v| v * v).sum();
                *acc += (norm_sq / (4.0 * m)).exp();
            }
        }
    })
    .unwrap();
    let n = per_particle.len() as f64;
    for v in &mut per_particle {
        *v /= snapshots as f64;
    }
    let mean: f64 = per_particle.iter().sum::<f64>() / n;
    let var: f64 = per_particle.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let bound = 32.0 * ((8.0 * b + 64.0 * d as f64) / (4.0 * m)).exp();
    assert!(
        mean + 3.0 * se <= bound,
        "mean {mean} + 3se {se} exceeds bound {bound}"
    );
    // sanity: the estimate itself is near the Gaussian value ~ (1 - var/2)^{-d/2}
    assert!(mean > 1.5 && mean < 3.0, "mean {mean}");
}

#[test]
fn noiseless_step_descends_below_critical_step_size() {
    let nu1 = GaussianMixtureTarget::univariate(&[0.9, 0.1], &[-10.0, 10.0], 1.0).unwrap();
    let posterior = PowerPosteriorTarget::new(&[vec![1.5, 0.2], vec![-0.7, 1.1]], 1.0, 1.0).unwrap();
    let rippled = RippledQuadratic { dim: 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut check = |p: &dyn Potential, span: f64| {
        let l = p.lipschitz_hint().expect("test potentials provide a bound");
        let h = 0.5 / l;
        let zero = vec![0.0; p.dim()];
        let mut tried = 0;
        while tried < 50 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-span..span)).collect();
            let g = p.grad(&x);
            if g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-6 {
                continue;
            }
            tried += 1;
            let y = lmc_step(&x, p, h, &zero);
            assert!(p.eval(&y) < p.eval(&x), "no descent at {x:?}");
        }
    };
    check(&nu1, 14.0);
    check(&posterior, 4.0);
    check(&rippled, 5.0);
}

#[test]
fn gradients_match_finite_differences_at_random_points() {
    let nu1 = GaussianMixtureTarget::univariate(&[0.9, 0.1], &[-10.0, 10.0], 1.0).unwrap();
    let nu3 = GaussianMixtureTarget::new(
        &[0.4, 0.4, 0.1, 0.1],
        &[vec![-5.0, -5.0], vec![5.0, 5.0], vec![-5.0, 5.0], vec![5.0, -5.0]],
        nalgebra::DMatrix::identity(2, 2),
        None,
    )
    .unwrap();
    let posterior =
        PowerPosteriorTarget::new(&[vec![0.8, -0.9], vec![1.2, 0.4], vec![-2.0, 1.0]], 1.3, 1.0)
            .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let fd_step = 1e-5;
    let mut check = |p: &dyn Potential, span: f64| {
        for _ in 0..100 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-span..span)).collect();
            let g = p.grad(&x);
            for j in 0..p.dim() {
                let mut hi = x.clone();
                let mut lo = x.clone();
                hi[j] += fd_step;
                lo[j] -= fd_step;
                let fd = (p.eval(&hi) - p.eval(&lo)) / (2.0 * fd_step);
                let tol = 1e-4 * g[j].abs().max(1.0);
                assert!((fd - g[j]).abs() <= tol, "coord {j} at {x:?}: fd {fd} vs {g:?}");
            }
        }
    };
    check(&nu1, 13.0);
    check(&nu3, 8.0);
    check(&posterior, 3.0);
}

#[test]
fn restart_chains_on_nu3_get_trapped_per_quadrant() {
    // A single chain initialized at a mode stays in that mode's cell.
    let nu3 = GaussianMixtureTarget::new(
        &[0.4, 0.4, 0.1, 0.1],
        &[vec![-5.0, -5.0], vec![5.0, 5.0], vec![-5.0, 5.0], vec![5.0, -5.0]],
        nalgebra::DMatrix::identity(2, 2),
        None,
    )
    .unwrap();
    for seed in 0..20 {
        let cfg = LmcConfig::new(0.01, 1000, 1, 400 + seed).unwrap();
        let out = condmix_core::lmc::restart_run(
            &cfg,
            &nu3,
            1,
            &InitialDistribution::PointMass(vec![5.0, 5.0]),
        )
        .unwrap();
        assert!(out.diverged_chains.is_empty());
        let x = &out.terminal;
        assert_eq!(condmix_core::regions::voronoi_cell_index(&nu3, x), 1, "seed {seed}: {x:?}");
    }
}
