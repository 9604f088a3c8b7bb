//! Exact spectral facts for lazy Gibbs chains.

use condmix_core::hypercube::sweep::{instance_rng, random_cone_energy, random_linear_energy};
use condmix_core::hypercube::{
    build_lazy_gibbs, condition_kernel, spectral_gap, spectral_report, theorem52_check,
    EnergyFunction, Subset,
};

#[test]
fn uniform_lazy_gibbs_gap_is_one_over_2d() {
    // Character analysis of the uniform kernel gives eigenvalues
    // 3/4 + (d - 2|S|)/(4d); the top nontrivial one is 1 - 1/(2d).
    for d in 2..=7usize {
        let f = EnergyFunction::constant(d, 0.0).unwrap();
        let gap = spectral_gap(&build_lazy_gibbs(&f)).unwrap();
        assert!((gap - 1.0 / (2.0 * d as f64)).abs() < 1e-10, "d={d}: {gap}");
    }
}

#[test]
fn two_well_contrast_slow_global_fast_conditional() {
    // Wells at the antipodes with a height-10 plateau between them: the
    // global chain crosses at rate ~ e^{-10} while each half-cube relaxes
    // at the downhill rate. Thresholds follow the exact eigensolves
    // (global 1.419e-5, conditioned 8.980e-3).
    let d = 6;
    let f = EnergyFunction::two_well(d, 10.0).unwrap();
    let chain = build_lazy_gibbs(&f);
    let global = spectral_gap(&chain).unwrap();
    assert!(global < 1e-3, "global gap {global}");
    for value in [false, true] {
        let cond = condition_kernel(&chain, &Subset::half_cube(d, 0, value)).unwrap();
        let alpha = spectral_gap(&cond).unwrap();
        assert!(alpha > 5e-3, "conditioned gap {alpha}");
        assert!(alpha / global > 100.0, "contrast {}", alpha / global);
    }
}

#[test]
fn quasiconvex_gap_bound_on_random_instances() {
    // Linear energies on the full cube and cones on grown subsets: the
    // certificate implies gap >= 1/(16 d^2 D^2) with no violations.
    let mut checked = 0;
    for d in [3usize, 4, 5] {
        for i in 0..30u64 {
            let mut rng = instance_rng(900 + d as u64, i);
            let f = if i % 2 == 0 {
                random_linear_energy(d, &mut rng)
            } else {
                random_cone_energy(d, &mut rng)
            };
            let s = Subset::full(d, "all");
            let rep = theorem52_check(&f, &s).unwrap();
            assert!(rep.pass, "d={d} i={i}: gap {} < bound {}", rep.gap, rep.bound);
            checked += 1;
        }
    }
    assert_eq!(checked, 90);
}

#[test]
fn spectral_report_is_cheeger_consistent_on_small_chains() {
    for i in 0..10u64 {
        let mut rng = instance_rng(55, i);
        let f = condmix_core::hypercube::sweep::random_integer_energy(3, 5, &mut rng);
        let rep = spectral_report(&f, &Subset::full(3, "all")).unwrap();
        assert!(rep.cheeger_consistent(1e-9), "{rep:?}");
        assert!(rep.quasiconvex_radius.is_none() || rep.bound_5_2.is_some());
    }
}
