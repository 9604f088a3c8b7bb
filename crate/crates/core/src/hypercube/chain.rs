//! Lazy Gibbs kernels, conditioning, Dirichlet forms, spectral gaps, and
//! conductance.

use nalgebra::DMatrix;

use super::{EnergyFunction, HypercubeError, Subset, MAX_CONDUCTANCE_STATES};

/// A reversible lazy kernel supported on a subset of cube vertices.
///
/// Transitions exist only between Hamming-1 neighbors inside the support
/// and on the diagonal; `neighbor_prob[i * d + j]` is the probability of
/// flipping bit `j` from the `i`-th support state (zero when the flip
/// leaves the support).
#[derive(Debug, Clone)]
pub struct GibbsChain {
    d: usize,
    states: Vec<u32>,
    /// Global bitmask -> support index, `u32::MAX` when absent.
    index_of: Vec<u32>,
    stationary: Vec<f64>,
    neighbor_prob: Vec<f64>,
    diag: Vec<f64>,
}

impl GibbsChain {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Support vertices in increasing bitmask order.
    pub fn states(&self) -> &[u32] {
        &self.states
    }

    /// Stationary distribution over [`Self::states`].
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn index_of(&self, vertex: u32) -> Option<usize> {
        let idx = self.index_of[vertex as usize];
        (idx != u32::MAX).then_some(idx as usize)
    }

    /// Support index of the neighbor across bit `axis`, if present.
    pub fn neighbor(&self, i: usize, axis: usize) -> Option<usize> {
        self.index_of(self.states[i] ^ (1 << axis))
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn neighbor_prob(&self, i: usize, axis: usize) -> f64 {
        self.neighbor_prob[i * self.d + axis]
    }

    /// Full transition probability `p(states[i], states[j])`.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let diff = self.states[i] ^ self.states[j];
        if diff.count_ones() == 1 {
            self.neighbor_prob(i, diff.trailing_zeros() as usize)
        } else {
            0.0
        }
    }

    fn finalize_diagonal(&mut self) {
        for i in 0..self.n_states() {
            let out: f64 = self.neighbor_prob[i * self.d..(i + 1) * self.d].iter().sum();
            self.diag[i] = 1.0 - out;
        }
    }
}

/// Builds the lazy Gibbs kernel for `pi ∝ exp(-f)` on the full cube:
/// `p(x, y) = pi(y) / (2d (pi(x) + pi(y)))` for `y ~ x`, remainder on the
/// diagonal. The ratio is computed from energy differences, so widely
/// spread energies cannot overflow.
pub fn build_lazy_gibbs(f: &EnergyFunction) -> GibbsChain {
    let d = f.d();
    let n = f.n_vertices();
    let min_f = f.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut stationary: Vec<f64> = f.values().iter().map(|&v| (-(v - min_f)).exp()).collect();
    let z: f64 = stationary.iter().sum();
    for p in &mut stationary {
        *p /= z;
    }
    let mut chain = GibbsChain {
        d,
        states: (0..n as u32).collect(),
        index_of: (0..n as u32).collect(),
        stationary,
        neighbor_prob: vec![0.0; n * d],
        diag: vec![0.0; n],
    };
    let inv_2d = 1.0 / (2.0 * d as f64);
    for x in 0..n {
        for j in 0..d {
            let y = x ^ (1usize << j);
            // pi(y) / (pi(x) + pi(y)) = 1 / (1 + e^{f(y) - f(x)})
            let delta = f.value(y as u32) - f.value(x as u32);
            chain.neighbor_prob[x * d + j] = inv_2d / (1.0 + delta.exp());
        }
    }
    chain.finalize_diagonal();
    chain
}

/// Restricts a chain to `s`, folding every rejected outgoing move into the
/// diagonal; the stationary law is the renormalized restriction, and
/// reversibility is inherited edge by edge.
pub fn condition_kernel(chain: &GibbsChain, s: &Subset) -> Result<GibbsChain, HypercubeError> {
    if s.d() != chain.d {
        return Err(HypercubeError::InvalidSubset(format!(
            "subset lives on a {}-cube, chain on a {}-cube",
            s.d(),
            chain.d
        )));
    }
    let d = chain.d;
    let mut states = Vec::with_capacity(s.len());
    let mut index_of = vec![u32::MAX; chain.index_of.len()];
    let mut stationary = Vec::with_capacity(s.len());
    for v in s.vertices() {
        let parent = chain.index_of(v).ok_or_else(|| {
            HypercubeError::InvalidSubset(format!(
                "vertex {v:#b} is not in the chain's support"
            ))
        })?;
        index_of[v as usize] = states.len() as u32;
        states.push(v);
        stationary.push(chain.stationary[parent]);
    }
    let mass: f64 = stationary.iter().sum();
    for p in &mut stationary {
        *p /= mass;
    }
    let n = states.len();
    let mut out = GibbsChain {
        d,
        states,
        index_of,
        stationary,
        neighbor_prob: vec![0.0; n * d],
        diag: vec![0.0; n],
    };
    for i in 0..n {
        let v = out.states[i];
        let parent = chain.index_of(v).expect("checked above");
        for j in 0..d {
            if out.index_of[(v ^ (1 << j)) as usize] != u32::MAX {
                out.neighbor_prob[i * d + j] = chain.neighbor_prob(parent, j);
            }
        }
    }
    out.finalize_diagonal();
    Ok(out)
}

/// The Dirichlet energy of `phi` under the chain, computed two ways — the
/// edge form `1/2 sum pi(x) p(x,y) (phi(x)-phi(y))^2` and the inner
/// product `<phi, (I-P) phi>_pi` — and cross-checked. Returns the edge
/// form; disagreement signals a corrupted kernel.
pub fn dirichlet_form(chain: &GibbsChain, phi: &[f64]) -> Result<f64, HypercubeError> {
    let n = chain.n_states();
    if phi.len() != n {
        return Err(HypercubeError::InvalidDistribution(format!(
            "phi has {} entries for {} states",
            phi.len(),
            n
        )));
    }
    let d = chain.d;
    let mut edge_form = 0.0;
    let mut inner_form = 0.0;
    for i in 0..n {
        let mut p_phi = chain.diag[i] * phi[i];
        for j in 0..d {
            let p = chain.neighbor_prob[i * d + j];
            if p > 0.0 {
                let k = chain.neighbor(i, j).expect("positive prob implies neighbor in support");
                let diff = phi[i] - phi[k];
                edge_form += 0.5 * chain.stationary[i] * p * diff * diff;
                p_phi += p * phi[k];
            }
        }
        inner_form += chain.stationary[i] * phi[i] * (phi[i] - p_phi);
    }
    let scale = 1.0 + edge_form.abs() + inner_form.abs();
    if (edge_form - inner_form).abs() > 1e-10 * scale {
        return Err(HypercubeError::KernelCorruption { edge_form, inner_form });
    }
    Ok(edge_form)
}

fn connected_component(chain: &GibbsChain, start: usize) -> Vec<bool> {
    let n = chain.n_states();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for j in 0..chain.d {
            if chain.neighbor_prob(i, j) > 0.0 {
                let k = chain.neighbor(i, j).expect("in support");
                if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
    }
    seen
}

fn check_irreducible(chain: &GibbsChain) -> Result<(), HypercubeError> {
    let seen = connected_component(chain, 0);
    if let Some(missing) = seen.iter().position(|&s| !s) {
        let component_size = seen.iter().filter(|&&s| s).count();
        return Err(HypercubeError::Reducible {
            component_size,
            example_vertex: chain.states[missing],
        });
    }
    Ok(())
}

/// `1 - lambda_2` of the kernel, from a dense eigensolve of the
/// similarity-symmetrized matrix `D^{1/2} P D^{-1/2}`. A single-state
/// chain mixes instantly; its gap is reported as 1.
pub fn spectral_gap(chain: &GibbsChain) -> Result<f64, HypercubeError> {
    check_irreducible(chain)?;
    let n = chain.n_states();
    if n == 1 {
        return Ok(1.0);
    }
    let mut sym = DMatrix::zeros(n, n);
    for i in 0..n {
        sym[(i, i)] = chain.diag[i];
        for j in 0..chain.d {
            let p = chain.neighbor_prob(i, j);
            if p > 0.0 {
                let k = chain.neighbor(i, j).expect("in support");
                // sqrt(p(x,y) p(y,x)) by reversibility
                let back = chain.neighbor_prob(k, j);
                sym[(i, k)] = (p * back).sqrt();
            }
        }
    }
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    debug_assert!((eigs[0] - 1.0).abs() < 1e-8, "top eigenvalue {}", eigs[0]);
    Ok(1.0 - eigs[1])
}

/// Exact conductance
/// `min over proper nonempty V1 of flux(V1) / min(pi(V1), 1 - pi(V1))`
/// by exhaustive enumeration; feasible only for small supports.
pub fn conductance(chain: &GibbsChain) -> Result<f64, HypercubeError> {
    let n = chain.n_states();
    if n > MAX_CONDUCTANCE_STATES {
        return Err(HypercubeError::SupportTooLarge {
            states: n,
            max: MAX_CONDUCTANCE_STATES,
        });
    }
    if n < 2 {
        return Err(HypercubeError::InvalidSubset(
            "conductance needs at least two states".into(),
        ));
    }
    // Undirected edge fluxes pi(x) p(x,y) (= pi(y) p(y,x)).
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..chain.d {
            let p = chain.neighbor_prob(i, j);
            if p > 0.0 {
                let k = chain.neighbor(i, j).expect("in support");
                if i < k {
                    edges.push((i, k, chain.stationary[i] * p));
                }
            }
        }
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = f64::INFINITY;
    for mask in 1..full {
        let mut pi_mass = 0.0;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                pi_mass += chain.stationary[i];
            }
        }
        let mut flux = 0.0;
        for &(a, b, q) in &edges {
            if (mask >> a & 1) != (mask >> b & 1) {
                flux += q;
            }
        }
        let denom = pi_mass.min(1.0 - pi_mass);
        if denom > 0.0 {
            best = best.min(flux / denom);
        }
    }
    Ok(best)
}

/// Spectral and isoperimetric summary of one conditioned chain.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub gap: f64,
    pub conductance: f64,
    pub cheeger_lo: f64,
    pub cheeger_hi: f64,
    pub quasiconvex_radius: Option<usize>,
    /// `1/(16 d^2 D^2)` when a quasi-convexity certificate exists.
    pub bound_5_2: Option<f64>,
}

impl SpectralReport {
    /// Cheeger sandwich `Phi^2 / 2 <= gap <= 2 Phi` within `tol`.
    pub fn cheeger_consistent(&self, tol: f64) -> bool {
        self.cheeger_lo <= self.gap + tol && self.gap <= self.cheeger_hi + tol
    }
}

/// Builds the conditioned chain for `(f, s)` and assembles the full
/// spectral report (requires a support small enough for exhaustive
/// conductance).
pub fn spectral_report(f: &EnergyFunction, s: &Subset) -> Result<SpectralReport, HypercubeError> {
    let chain = build_lazy_gibbs(f);
    let cond = condition_kernel(&chain, s)?;
    let gap = spectral_gap(&cond)?;
    let phi = conductance(&cond)?;
    let qc = super::quasiconvex_radius(f, s);
    let radius = match qc {
        super::Quasiconvexity::Certified { radius, .. } => Some(radius),
        _ => None,
    };
    let bound = radius.map(|r| 1.0 / (16.0 * (f.d() * f.d()) as f64 * (r * r) as f64));
    Ok(SpectralReport {
        gap,
        conductance: phi,
        cheeger_lo: phi * phi / 2.0,
        cheeger_hi: 2.0 * phi,
        quasiconvex_radius: radius,
        bound_5_2: bound,
    })
}

/// Exact evolution `mu_{t+1} = mu_t P`; returns `T + 1` distributions
/// starting with `mu_0`.
pub fn evolve_distribution(
    chain: &GibbsChain,
    mu0: &[f64],
    t_steps: usize,
) -> Result<Vec<Vec<f64>>, HypercubeError> {
    let n = chain.n_states();
    if mu0.len() != n {
        return Err(HypercubeError::InvalidDistribution(format!(
            "mu0 has {} entries for {} states",
            mu0.len(),
            n
        )));
    }
    if mu0.iter().any(|&v| !(v >= 0.0)) {
        return Err(HypercubeError::InvalidDistribution("mu0 must be nonnegative".into()));
    }
    let total: f64 = mu0.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(HypercubeError::InvalidDistribution(format!(
            "mu0 sums to {total}, expected 1"
        )));
    }
    let d = chain.d;
    let mut out = Vec::with_capacity(t_steps + 1);
    out.push(mu0.to_vec());
    let mut cur = mu0.to_vec();
    for _ in 0..t_steps {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let m = cur[i];
            if m == 0.0 {
                continue;
            }
            next[i] += m * chain.diag[i];
            for j in 0..d {
                let p = chain.neighbor_prob(i, j);
                if p > 0.0 {
                    let k = chain.neighbor(i, j).expect("in support");
                    next[k] += m * p;
                }
            }
        }
        debug_assert!((next.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        cur = next.clone();
        out.push(next);
    }
    Ok(out)
}
