//! Exact verification of the conditional-mixing and spectral-gap bounds
//! for lazy Gibbs chains.

use super::chain::{condition_kernel, dirichlet_form, evolve_distribution, spectral_gap};
use super::quasiconvex::{quasiconvex_radius, Quasiconvexity};
use super::{build_lazy_gibbs, EnergyFunction, GibbsChain, HypercubeError, Subset};

/// Per-subset outcome of the conditional-mixing check.
#[derive(Debug, Clone)]
pub struct Theorem51SubsetReport {
    pub label: String,
    /// `pi(X_i)`.
    pub target_mass: f64,
    /// Spectral gap `alpha` of the conditioned kernel.
    pub conditioned_gap: f64,
    /// Whether `mu_t(X_i) <= pi(X_i) T^{-1/4}` for some / for all `t`.
    pub small_mass_some_t: bool,
    pub small_mass_all_t: bool,
    /// Steps at which `mu_t(X_i) = 0` (conditional undefined, term skipped).
    pub undefined_t: usize,
    /// `(1/T) sum_t Var_{pi_i}[mu_t|X_i / pi|X_i]`.
    pub avg_conditional_var: f64,
    /// Same sum with each term divided by `mu_t(X_i)^2`.
    pub avg_var_over_mass_sq: f64,
    /// Same sum with each term multiplied by `mu_t(X_i)^2`.
    pub avg_var_times_mass_sq: f64,
    /// `2 Var_pi[mu_0/pi] / (pi(X_i)^2 alpha T)`.
    pub rhs_appendix: f64,
    /// `pi(X_i) Var_pi[mu_0/pi] / (alpha T)`: the bound obtained by
    /// telescoping the Dirichlet sums with mass-squared weights.
    pub rhs_mass_weighted: f64,
    /// `Var_pi[mu_0/pi] / (alpha sqrt(T))`.
    pub rhs_headline: f64,
    /// `rhs_appendix - avg_var_over_mass_sq`.
    pub appendix_slack: f64,
    /// `rhs_mass_weighted - avg_var_times_mass_sq`.
    pub mass_weighted_slack: f64,
    /// "Either the mass is small for some t, or the averaged conditional
    /// variance meets the headline bound."
    pub statement_dichotomy_pass: bool,
    /// "If the mass is small for all t, the averaged conditional variance
    /// meets the headline bound" (vacuously true otherwise).
    pub appendix_dichotomy_pass: bool,
}

/// Exact verification transcript for one `(chain, partition, mu_0, T)`
/// instance.
#[derive(Debug, Clone)]
pub struct Theorem51Report {
    pub t_steps: usize,
    /// `Var_pi[mu_0/pi]`.
    pub initial_variance: f64,
    /// `sum_{t<T} E_P(mu_t/pi)`.
    pub dirichlet_sum: f64,
    /// `initial_variance - dirichlet_sum` (nonnegative up to round-off).
    pub telescoping_slack: f64,
    /// `min_t (Var_t - E_t - Var_{t+1})`: per-step variance contraction.
    pub min_contraction_slack: f64,
    pub subsets: Vec<Theorem51SubsetReport>,
}

fn variance_wrt(pi: &[f64], ratio: impl Fn(usize) -> f64) -> f64 {
    let mean: f64 = pi.iter().enumerate().map(|(i, &p)| p * ratio(i)).sum();
    pi.iter()
        .enumerate()
        .map(|(i, &p)| {
            let r = ratio(i) - mean;
            p * r * r
        })
        .sum()
}

/// Evolves `mu_0` for `t_steps` steps and checks, per partition cell, the
/// conditional chi-square mixing bounds with the conditioned spectral gap
/// computed exactly, plus the global telescoping and per-step variance
/// contraction.
pub fn theorem51_check(
    chain: &GibbsChain,
    partition: &[Subset],
    mu0: &[f64],
    t_steps: usize,
) -> Result<Theorem51Report, HypercubeError> {
    if t_steps == 0 {
        return Err(HypercubeError::InvalidDistribution("need at least one step".into()));
    }
    // Disjoint cover of the support.
    let mut covered = vec![0usize; chain.n_states()];
    for s in partition {
        for v in s.vertices() {
            let idx = chain.index_of(v).ok_or_else(|| {
                HypercubeError::InvalidPartition(format!("vertex {v:#b} outside chain support"))
            })?;
            covered[idx] += 1;
        }
    }
    if covered.iter().any(|&c| c != 1) {
        return Err(HypercubeError::InvalidPartition(
            "subsets must cover the support exactly once".into(),
        ));
    }

    let pi = chain.stationary();
    let traj = evolve_distribution(chain, mu0, t_steps)?;
    let ratios: Vec<Vec<f64>> = traj
        .iter()
        .map(|mu| mu.iter().zip(pi).map(|(m, p)| m / p).collect())
        .collect();
    let initial_variance = variance_wrt(pi, |i| ratios[0][i]);

    let mut dirichlet_sum = 0.0;
    let mut min_contraction_slack = f64::INFINITY;
    let mut var_prev = initial_variance;
    for t in 0..t_steps {
        let e_t = dirichlet_form(chain, &ratios[t])?;
        dirichlet_sum += e_t;
        let var_next = variance_wrt(pi, |i| ratios[t + 1][i]);
        min_contraction_slack = min_contraction_slack.min(var_prev - e_t - var_next);
        var_prev = var_next;
    }
    let telescoping_slack = initial_variance - dirichlet_sum;

    let t_f = t_steps as f64;
    let mass_cut = t_f.powf(-0.25);
    let mut subsets = Vec::with_capacity(partition.len());
    for s in partition {
        let cond = condition_kernel(chain, s)?;
        let alpha = spectral_gap(&cond)?;
        let indices: Vec<usize> = s.vertices().map(|v| chain.index_of(v).unwrap()).collect();
        let target_mass: f64 = indices.iter().map(|&i| pi[i]).sum();
        let pi_cond: Vec<f64> = indices.iter().map(|&i| pi[i] / target_mass).collect();

        let mut small_all = true;
        let mut small_some = false;
        let mut undefined_t = 0;
        let mut sum_var = 0.0;
        let mut sum_var_over = 0.0;
        let mut sum_var_times = 0.0;
        for ratio_t in ratios.iter().take(t_steps) {
            let mass: f64 = indices.iter().map(|&i| ratio_t[i] * pi[i]).sum();
            let small = mass <= target_mass * mass_cut;
            small_all &= small;
            small_some |= small;
            if mass == 0.0 {
                undefined_t += 1;
                continue;
            }
            // conditional ratio (mu_t|X)/(pi|X) = ratio * pi(X)/mu_t(X)
            let scale = target_mass / mass;
            let var = variance_wrt(&pi_cond, |k| ratio_t[indices[k]] * scale);
            sum_var += var;
            sum_var_over += var / (mass * mass);
            sum_var_times += var * mass * mass;
        }
        let avg_conditional_var = sum_var / t_f;
        let avg_var_over_mass_sq = sum_var_over / t_f;
        let avg_var_times_mass_sq = sum_var_times / t_f;
        let rhs_appendix = 2.0 * initial_variance / (target_mass * target_mass * alpha * t_f);
        let rhs_mass_weighted = target_mass * initial_variance / (alpha * t_f);
        let rhs_headline = initial_variance / (alpha * t_f.sqrt());
        subsets.push(Theorem51SubsetReport {
            label: s.label().to_string(),
            target_mass,
            conditioned_gap: alpha,
            small_mass_some_t: small_some,
            small_mass_all_t: small_all,
            undefined_t,
            avg_conditional_var,
            avg_var_over_mass_sq,
            avg_var_times_mass_sq,
            rhs_appendix,
            rhs_mass_weighted,
            rhs_headline,
            appendix_slack: rhs_appendix - avg_var_over_mass_sq,
            mass_weighted_slack: rhs_mass_weighted - avg_var_times_mass_sq,
            statement_dichotomy_pass: small_some
                || avg_conditional_var <= rhs_headline * (1.0 + 1e-12) + 1e-15,
            appendix_dichotomy_pass: !small_all
                || avg_conditional_var <= 2.0 * initial_variance / (alpha * t_f.sqrt()),
        });
    }

    Ok(Theorem51Report {
        t_steps,
        initial_variance,
        dirichlet_sum,
        telescoping_slack,
        min_contraction_slack,
        subsets,
    })
}

/// Outcome of the quasi-convex spectral-gap bound on one `(f, subset)`.
#[derive(Debug, Clone)]
pub struct Theorem52Report {
    /// Certifying local minimum.
    pub vertex: u32,
    /// Certified radius `D`.
    pub radius: usize,
    /// Exact spectral gap of the conditioned kernel.
    pub gap: f64,
    /// `1 / (16 d^2 D^2)`.
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Certifies quasi-convexity of `f` on `s`, then checks that the
/// conditioned kernel's exact spectral gap dominates `1/(16 d^2 D^2)`.
pub fn theorem52_check(
    f: &EnergyFunction,
    s: &Subset,
) -> Result<Theorem52Report, HypercubeError> {
    let (vertex, radius) = match quasiconvex_radius(f, s) {
        Quasiconvexity::Certified { vertex, radius } => (vertex, radius),
        Quasiconvexity::NotQuasiconvex => {
            return Err(HypercubeError::NotQuasiconvex(
                "no local minimum certifies descending shortest paths".into(),
            ))
        }
        Quasiconvexity::Disconnected => {
            return Err(HypercubeError::NotQuasiconvex("induced subgraph is disconnected".into()))
        }
    };
    let chain = build_lazy_gibbs(f);
    let cond = condition_kernel(&chain, s)?;
    let gap = spectral_gap(&cond)?;
    let d = f.d() as f64;
    let radius_f = radius.max(1) as f64;
    let bound = 1.0 / (16.0 * d * d * radius_f * radius_f);
    Ok(Theorem52Report {
        vertex,
        radius,
        gap,
        bound,
        ratio: gap / bound,
        pass: gap + 1e-12 >= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_start_passes_trivially() {
        let f = EnergyFunction::from_integers(3, &[0, 1, 2, 1, 0, 2, 1, 1]).unwrap();
        let chain = build_lazy_gibbs(&f);
        let partition = vec![Subset::half_cube(3, 0, false), Subset::half_cube(3, 0, true)];
        let mu0 = chain.stationary().to_vec();
        let rep = theorem51_check(&chain, &partition, &mu0, 16).unwrap();
        assert!(rep.initial_variance < 1e-24);
        assert!(rep.dirichlet_sum < 1e-24);
        for s in &rep.subsets {
            assert!(s.avg_conditional_var < 1e-20);
            assert!(s.appendix_slack >= -1e-15);
            assert!(s.statement_dichotomy_pass);
        }
    }

    #[test]
    fn two_well_point_start_satisfies_derivable_bounds() {
        // A point mass in one well starves the opposite half-cube of mass
        // for many steps, which breaks the variance-over-mass^2 form of
        // the bound; the mass-weighted chain and both dichotomy readings
        // still hold.
        let f = EnergyFunction::two_well(5, 4.0).unwrap();
        let chain = build_lazy_gibbs(&f);
        let partition = vec![Subset::half_cube(5, 0, false), Subset::half_cube(5, 0, true)];
        let mut mu0 = vec![0.0; 32];
        mu0[0] = 1.0; // in the first well
        let rep = theorem51_check(&chain, &partition, &mu0, 256).unwrap();
        assert!(rep.telescoping_slack >= -1e-9);
        assert!(rep.min_contraction_slack >= -1e-12);
        for s in &rep.subsets {
            assert!(s.mass_weighted_slack > 0.0, "{s:?}");
            assert!(s.statement_dichotomy_pass, "{s:?}");
            assert!(s.appendix_dichotomy_pass, "{s:?}");
        }
    }

    #[test]
    fn diffuse_start_satisfies_every_reported_bound() {
        use crate::hypercube::sweep::{instance_rng, random_distribution};
        let f = EnergyFunction::two_well(5, 4.0).unwrap();
        let chain = build_lazy_gibbs(&f);
        let partition = vec![Subset::half_cube(5, 0, false), Subset::half_cube(5, 0, true)];
        let mu0 = random_distribution(32, &mut instance_rng(5, 0));
        let rep = theorem51_check(&chain, &partition, &mu0, 256).unwrap();
        for s in &rep.subsets {
            assert!(s.appendix_slack > 0.0, "{s:?}");
            assert!(s.mass_weighted_slack > 0.0, "{s:?}");
            assert_eq!(s.undefined_t, 0);
        }
    }

    #[test]
    fn conditional_ratio_identities_hold_exactly() {
        // The scale factor between the conditioned Dirichlet form of the
        // conditional ratio and the restricted edge sum of the global
        // ratio is pi(X)/mu(X)^2; the conditioned gap bounds Var by E/alpha.
        use crate::hypercube::sweep::{
            instance_rng, random_distribution, random_integer_energy, random_subcube_partition,
        };
        use crate::hypercube::{dirichlet_form, evolve_distribution, spectral_gap};
        let mut worst_identity = 0.0f64;
        let mut min_variational = f64::INFINITY;
        for inst in 0..20u64 {
            let mut rng = instance_rng(77, inst);
            let f = random_integer_energy(4, 5, &mut rng);
            let chain = build_lazy_gibbs(&f);
            let part = random_subcube_partition(4, 1, &mut rng);
            let mu0 = random_distribution(16, &mut rng);
            let traj = evolve_distribution(&chain, &mu0, 10).unwrap();
            let pi = chain.stationary();
            for s in &part {
                let cond = condition_kernel(&chain, s).unwrap();
                let alpha = spectral_gap(&cond).unwrap();
                let idx: Vec<usize> =
                    s.vertices().map(|v| chain.index_of(v).unwrap()).collect();
                let w: f64 = idx.iter().map(|&i| pi[i]).sum();
                for mu in &traj {
                    let mass: f64 = idx.iter().map(|&i| mu[i]).sum();
                    let phi: Vec<f64> = mu.iter().zip(pi).map(|(m, p)| m / p).collect();
                    let phi_i: Vec<f64> = idx.iter().map(|&i| phi[i] * w / mass).collect();
                    let e_cond = dirichlet_form(&cond, &phi_i).unwrap();
                    let mut restricted = 0.0;
                    for (a, &i) in idx.iter().enumerate() {
                        for (b, &j) in idx.iter().enumerate() {
                            if a != b {
                                restricted +=
                                    0.5 * pi[i] * chain.prob(i, j) * (phi[i] - phi[j]).powi(2);
                            }
                        }
                    }
                    let predicted = w / (mass * mass) * restricted;
                    if e_cond > 1e-300 {
                        worst_identity =
                            worst_identity.max(((e_cond - predicted) / e_cond).abs());
                    }
                    let pi_i: Vec<f64> = idx.iter().map(|&i| pi[i] / w).collect();
                    let mean: f64 = pi_i.iter().zip(&phi_i).map(|(p, f)| p * f).sum();
                    let var: f64 = pi_i
                        .iter()
                        .zip(&phi_i)
                        .map(|(p, f)| p * (f - mean) * (f - mean))
                        .sum();
                    if var > 1e-12 {
                        min_variational = min_variational.min(e_cond / (alpha * var));
                    }
                }
            }
        }
        assert!(worst_identity < 1e-12, "identity error {worst_identity:e}");
        assert!(min_variational >= 1.0 - 1e-10, "Var > E/alpha: {min_variational}");
    }

    #[test]
    fn partition_must_cover_exactly() {
        let f = EnergyFunction::constant(2, 0.0).unwrap();
        let chain = build_lazy_gibbs(&f);
        let mu0 = vec![0.25; 4];
        let missing = vec![Subset::from_members(2, [0u32, 1], "half").unwrap()];
        assert!(theorem51_check(&chain, &missing, &mu0, 4).is_err());
        let overlapping = vec![
            Subset::from_members(2, [0u32, 1, 2], "a").unwrap(),
            Subset::from_members(2, [2u32, 3], "b").unwrap(),
        ];
        assert!(theorem51_check(&chain, &overlapping, &mu0, 4).is_err());
    }

    #[test]
    fn linear_energy_full_cube_meets_gap_bound() {
        // d = 2: the certified radius is 2, so the bound is 1/256.
        let f = EnergyFunction::linear(2, &[1.0, 0.5]).unwrap();
        let rep = theorem52_check(&f, &Subset::full(2, "all")).unwrap();
        assert_eq!(rep.radius, 2);
        assert!((rep.bound - 1.0 / 256.0).abs() < 1e-18);
        assert!(rep.pass, "gap {} below bound {}", rep.gap, rep.bound);
    }

    #[test]
    fn constant_energy_gap_dominates_loose_bound() {
        for d in 2..=6usize {
            let f = EnergyFunction::constant(d, 1.0).unwrap();
            let rep = theorem52_check(&f, &Subset::full(d, "all")).unwrap();
            assert_eq!(rep.radius, d);
            assert!(rep.pass, "d={d}: gap {} bound {}", rep.gap, rep.bound);
        }
    }

    #[test]
    fn non_quasiconvex_energy_is_rejected() {
        let f = EnergyFunction::new(2, vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        assert!(matches!(
            theorem52_check(&f, &Subset::full(2, "all")),
            Err(HypercubeError::NotQuasiconvex(_))
        ));
    }
}
