//! Random instance generators for the verification sweeps, plus a batched
//! gap solver for benchmarking.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_lazy_gibbs, spectral_gap, EnergyFunction, Subset};
use crate::exec::{map_range, Exec};

/// Uniform integer levels in `0..=max_level`.
pub fn random_integer_energy(d: usize, max_level: u32, rng: &mut ChaCha8Rng) -> EnergyFunction {
    let values: Vec<f64> = (0..1usize << d)
        .map(|_| rng.random_range(0..=max_level) as f64)
        .collect();
    EnergyFunction::new(d, values).expect("generated values are valid")
}

/// Linear energy with coefficients in `[-2, 2]` (quasi-convex on the full
/// cube for any sign pattern).
pub fn random_linear_energy(d: usize, rng: &mut ChaCha8Rng) -> EnergyFunction {
    let c: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    EnergyFunction::linear(d, &c).expect("linear energy is valid")
}

/// Cone energy `a * dist(x, center)` for a random center and slope.
pub fn random_cone_energy(d: usize, rng: &mut ChaCha8Rng) -> EnergyFunction {
    let center: u32 = rng.random_range(0..1u32 << d);
    let a: f64 = rng.random_range(0.2..2.0);
    let values: Vec<f64> = (0..1u32 << d)
        .map(|x| a * (x ^ center).count_ones() as f64)
        .collect();
    EnergyFunction::new(d, values).expect("cone energy is valid")
}

/// A connected random subset grown by BFS from a random seed vertex.
pub fn random_connected_subset(
    d: usize,
    target_size: usize,
    rng: &mut ChaCha8Rng,
) -> Subset {
    let n = 1usize << d;
    let target = target_size.clamp(1, n);
    let start: u32 = rng.random_range(0..n as u32);
    let mut chosen = vec![false; n];
    chosen[start as usize] = true;
    let mut members = vec![start];
    let mut frontier: Vec<u32> = (0..d as u32)
        .map(|j| start ^ (1 << j))
        .filter(|&v| !chosen[v as usize])
        .collect();
    while members.len() < target && !frontier.is_empty() {
        let pick = rng.random_range(0..frontier.len());
        let v = frontier.swap_remove(pick);
        if chosen[v as usize] {
            continue;
        }
        chosen[v as usize] = true;
        members.push(v);
        for j in 0..d {
            let u = v ^ (1 << j);
            if !chosen[u as usize] {
                frontier.push(u);
            }
        }
    }
    Subset::from_members(d, members, "grown").expect("nonempty by construction")
}

/// Partition of the cube into `2^k` subcubes by fixing `k` random
/// coordinates (each cell is connected).
pub fn random_subcube_partition(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Subset> {
    let k = k.min(d);
    let mut coords: Vec<usize> = (0..d).collect();
    coords.shuffle(rng);
    let fixed = &coords[..k];
    (0..1usize << k)
        .map(|pattern| {
            let members = (0..1u32 << d).filter(|&v| {
                fixed
                    .iter()
                    .enumerate()
                    .all(|(b, &coord)| ((v >> coord) & 1) as usize == (pattern >> b) & 1)
            });
            Subset::from_members(d, members, format!("cube{pattern}"))
                .expect("subcube is nonempty")
        })
        .collect()
}

/// A random distribution with full support (normalized exponentials).
pub fn random_distribution(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// Point mass at state `idx`.
pub fn point_mass(n: usize, idx: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[idx] = 1.0;
    v
}

/// Spectral gaps of the full-cube chains of a batch of energies; the
/// per-instance eigensolves are independent and parallelize across the
/// batch.
pub fn spectral_gaps_batch(energies: &[EnergyFunction], exec: Exec) -> Vec<f64> {
    map_range(exec, energies.len(), |i| {
        spectral_gap(&build_lazy_gibbs(&energies[i])).expect("full cube is connected")
    })
}

/// Deterministic per-instance generator stream.
pub fn instance_rng(seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}
