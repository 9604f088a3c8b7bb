//! Numerical Poincaré-constant oracle.
//!
//! The constant of a density on a grid is the smallest nonzero eigenvalue
//! of the weighted diffusion generator `f -> -(1/pi) ∇·(pi ∇f)` with
//! reflecting (zero-flux) boundary on the density's support — the
//! restricted measure admits no flux through its boundary. Discretizing
//! with face-averaged weights gives the generalized pencil `A f = λ B f`
//! (`A` the weighted graph Laplacian, `B = diag(pi)`), symmetrized to
//! `C = B^{-1/2} A B^{-1/2}` whose null vector is `sqrt(pi)`.
//!
//! In 1D, `C` is tridiagonal and the second-smallest eigenvalue comes from
//! Sturm-count bisection. In 2D, `C` is applied matrix-free and inverse
//! iteration with conjugate-gradient solves, deflated against the known
//! null vector, converges to the spectral gap.

use super::grid::GridDensity;
use super::DivergenceError;

/// Smallest nonzero eigenvalue of the discretized generator of `pi`.
pub fn poincare_constant_grid(pi: &GridDensity) -> Result<f64, DivergenceError> {
    if !pi.is_normalized() {
        return Err(DivergenceError::InvalidDensity(
            "density must be normalized".into(),
        ));
    }
    match pi.grid().dim() {
        1 => poincare_1d(pi),
        2 => poincare_2d(pi),
        d => Err(DivergenceError::InvalidGrid(format!("unsupported dimension {d}"))),
    }
}

fn poincare_1d(pi: &GridDensity) -> Result<f64, DivergenceError> {
    let v = pi.values();
    let first = v.iter().position(|&x| x > 0.0);
    let last = v.iter().rposition(|&x| x > 0.0);
    let (s0, s1) = match (first, last) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(DivergenceError::InvalidDensity("density is identically zero".into())),
    };
    if v[s0..=s1].contains(&0.0) {
        return Err(DivergenceError::DisconnectedSupport);
    }
    let k = s1 - s0 + 1;
    if k < 2 {
        return Err(DivergenceError::InvalidDensity(
            "support must span at least two cells".into(),
        ));
    }
    let h = pi.grid().axis(0).width();
    let inv_h2 = 1.0 / (h * h);
    let p = &v[s0..=s1];
    let face: Vec<f64> = (0..k - 1).map(|i| 0.5 * (p[i] + p[i + 1])).collect();
    let mut diag = vec![0.0; k];
    let mut off = vec![0.0; k - 1];
    for i in 0..k {
        let wl = if i > 0 { face[i - 1] } else { 0.0 };
        let wr = if i < k - 1 { face[i] } else { 0.0 };
        diag[i] = (wl + wr) * inv_h2 / p[i];
    }
    for i in 0..k - 1 {
        off[i] = -face[i] * inv_h2 / (p[i] * p[i + 1]).sqrt();
    }
    Ok(tridiag_second_smallest(&diag, &off))
}

/// Second-smallest eigenvalue of a symmetric tridiagonal matrix via
/// Sturm-count bisection.
fn tridiag_second_smallest(diag: &[f64], off: &[f64]) -> f64 {
    let k = diag.len();
    // Gershgorin enclosure of the whole spectrum.
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i < k - 1 { off[i].abs() } else { 0.0 };
        hi = hi.max(diag[i] + r);
    }
    let mut lo = -hi;
    // Count of eigenvalues strictly below x, by the LDL^T sign recurrence.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..k {
            let o2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = diag[i] - x - o2 / d;
            if d == 0.0 {
                d = 1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let tol = 1e-13 * hi.abs().max(1.0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Matrix-free symmetrized generator on the 2D support.
struct Generator2d {
    diag: Vec<f64>,
    /// For each support cell, up to 4 `(neighbor, weight)` couplings.
    edges: Vec<Vec<(usize, f64)>>,
    /// Normalized null vector `sqrt(pi)`.
    null: Vec<f64>,
}

impl Generator2d {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for u in 0..x.len() {
            let mut acc = self.diag[u] * x[u];
            for &(v, w) in &self.edges[u] {
                acc += w * x[v];
            }
            out[u] = acc;
        }
    }

    fn project(&self, x: &mut [f64]) {
        let dot: f64 = x.iter().zip(&self.null).map(|(a, b)| a * b).sum();
        for (xi, ni) in x.iter_mut().zip(&self.null) {
            *xi -= dot * ni;
        }
    }
}

fn poincare_2d(pi: &GridDensity) -> Result<f64, DivergenceError> {
    let grid = pi.grid();
    let (nx, ny) = grid.shape();
    let v = pi.values();
    let mut local = vec![usize::MAX; v.len()];
    let mut cells = Vec::new();
    for (flat, &val) in v.iter().enumerate() {
        if val > 0.0 {
            local[flat] = cells.len();
            cells.push(flat);
        }
    }
    let k = cells.len();
    if k < 2 {
        return Err(DivergenceError::InvalidDensity(
            "support must span at least two cells".into(),
        ));
    }
    // 4-neighbor connectivity of the support.
    {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            let flat = cells[u];
            let (i, j) = (flat / ny, flat % ny);
            let mut push = |nf: usize| {
                let lu = local[nf];
                if lu != usize::MAX && !seen[lu] {
                    seen[lu] = true;
                    reached += 1;
                    stack.push(lu);
                }
            };
            if i > 0 {
                push(flat - ny);
            }
            if i + 1 < nx {
                push(flat + ny);
            }
            if j > 0 {
                push(flat - 1);
            }
            if j + 1 < ny {
                push(flat + 1);
            }
        }
        if reached != k {
            return Err(DivergenceError::DisconnectedSupport);
        }
    }

    let hx = grid.axis(0).width();
    let hy = grid.axis(1).width();
    let mut diag = vec![0.0; k];
    let mut edges = vec![Vec::with_capacity(4); k];
    let mut couple = |u: usize, flat_v: usize, inv_h2: f64| {
        let lv = local[flat_v];
        if lv == usize::MAX {
            return;
        }
        let pu = v[cells[u]];
        let pv = v[flat_v];
        let w = 0.5 * (pu + pv) * inv_h2;
        diag[u] += w / pu;
        edges[u].push((lv, -w / (pu * pv).sqrt()));
    };
    for (u, &flat) in cells.iter().enumerate() {
        let (i, j) = (flat / ny, flat % ny);
        if i > 0 {
            couple(u, flat - ny, 1.0 / (hx * hx));
        }
        if i + 1 < nx {
            couple(u, flat + ny, 1.0 / (hx * hx));
        }
        if j > 0 {
            couple(u, flat - 1, 1.0 / (hy * hy));
        }
        if j + 1 < ny {
            couple(u, flat + 1, 1.0 / (hy * hy));
        }
    }
    let mut null: Vec<f64> = cells.iter().map(|&flat| v[flat].sqrt()).collect();
    let norm = null.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut null {
        *x /= norm;
    }
    let gen = Generator2d { diag, edges, null };

    // Inverse iteration, deflated against the null vector.
    let mut x: Vec<f64> = (0..k).map(|u| ((u as f64 * 0.754_877).sin() * 10.0).fract()).collect();
    gen.project(&mut x);
    normalize(&mut x).ok_or_else(|| DivergenceError::InvalidDensity(
        "degenerate start vector".into(),
    ))?;
    const OUTER_CAP: usize = 300;
    let mut lambda_prev = f64::INFINITY;
    let mut buf = vec![0.0; k];
    for _ in 0..OUTER_CAP {
        let mut y = cg_solve(&gen, &x)?;
        gen.project(&mut y);
        normalize(&mut y).ok_or(DivergenceError::EigensolveFailed { iterations: OUTER_CAP })?;
        gen.apply(&y, &mut buf);
        let lambda: f64 = y.iter().zip(&buf).map(|(a, b)| a * b).sum();
        if (lambda - lambda_prev).abs() <= 1e-9 * lambda.abs().max(1e-300) {
            return Ok(lambda);
        }
        lambda_prev = lambda;
        x = y;
    }
    Err(DivergenceError::EigensolveFailed { iterations: OUTER_CAP })
}

fn normalize(x: &mut [f64]) -> Option<()> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    for v in x.iter_mut() {
        *v /= n;
    }
    Some(())
}

/// Conjugate gradients for `C y = b` on the orthogonal complement of the
/// null vector (`b` is already projected; `C` preserves the complement).
fn cg_solve(gen: &Generator2d, b: &[f64]) -> Result<Vec<f64>, DivergenceError> {
    let k = b.len();
    let mut y = vec![0.0; k];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; k];
    let b_norm2: f64 = b.iter().map(|v| v * v).sum();
    let mut r_norm2 = b_norm2;
    let cap = 40 * (k as f64).sqrt() as usize + 200;
    for _ in 0..cap {
        if r_norm2 <= 1e-24 * b_norm2 {
            return Ok(y);
        }
        gen.apply(&p, &mut ap);
        gen.project(&mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = r_norm2 / pap;
        for i in 0..k {
            y[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = r_new / r_norm2;
        r_norm2 = r_new;
        for i in 0..k {
            p[i] = r[i] + beta * p[i];
        }
    }
    if r_norm2 <= 1e-16 * b_norm2 {
        return Ok(y);
    }
    Err(DivergenceError::EigensolveFailed { iterations: cap })
}
