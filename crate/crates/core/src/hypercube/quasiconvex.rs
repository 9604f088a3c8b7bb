//! Quasi-convexity certificates on induced subgraphs.

use super::{EnergyFunction, Subset};

/// Result of the quasi-convexity search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quasiconvexity {
    /// `vertex` is a local minimum from which every member is reachable by
    /// descending shortest paths of length at most `radius`.
    Certified { vertex: u32, radius: usize },
    /// Connected, but no local minimum certifies.
    NotQuasiconvex,
    /// The induced subgraph is disconnected.
    Disconnected,
}

/// Searches for a vertex `v*` certifying quasi-convexity of `f` on the
/// induced subgraph of `s`: every in-subset shortest-path predecessor of
/// every vertex must not increase `f` (distances measured inside the
/// subgraph), and `radius` is the eccentricity of `v*`. Among certifying
/// vertices the smallest radius wins, ties to the smallest bitmask.
pub fn quasiconvex_radius(f: &EnergyFunction, s: &Subset) -> Quasiconvexity {
    let d = f.d();
    let members: Vec<u32> = s.vertices().collect();
    let local = {
        let mut map = vec![usize::MAX; f.n_vertices()];
        for (i, &v) in members.iter().enumerate() {
            map[v as usize] = i;
        }
        map
    };
    let k = members.len();
    let in_s_neighbors = |v: u32| -> Vec<usize> {
        (0..d)
            .filter_map(|j| {
                let u = (v ^ (1 << j)) as usize;
                (local[u] != usize::MAX).then_some(local[u])
            })
            .collect()
    };

    // Connectivity first.
    let mut dist = vec![usize::MAX; k];
    let reached = bfs(&members, &in_s_neighbors, 0, &mut dist);
    if reached != k {
        return Quasiconvexity::Disconnected;
    }

    // Candidate minima: no strictly smaller in-subset neighbor.
    let mut best: Option<(usize, u32)> = None;
    for (i, &v) in members.iter().enumerate() {
        let fv = f.value(v);
        if in_s_neighbors(v).iter().any(|&u| f.value(members[u]) < fv) {
            continue;
        }
        let radius = bfs_certify(f, &members, &in_s_neighbors, i);
        if let Some(radius) = radius {
            let cand = (radius, v);
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    match best {
        Some((radius, vertex)) => Quasiconvexity::Certified { vertex, radius },
        None => Quasiconvexity::NotQuasiconvex,
    }
}

fn bfs(
    members: &[u32],
    in_s_neighbors: &dyn Fn(u32) -> Vec<usize>,
    start: usize,
    dist: &mut [usize],
) -> usize {
    dist.fill(usize::MAX);
    dist[start] = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    let mut reached = 1;
    while let Some(i) = queue.pop_front() {
        for u in in_s_neighbors(members[i]) {
            if dist[u] == usize::MAX {
                dist[u] = dist[i] + 1;
                reached += 1;
                queue.push_back(u);
            }
        }
    }
    reached
}

/// BFS from a candidate minimum; certifies iff every non-root vertex has
/// all of its shortest-path predecessors (in-subset neighbors one step
/// closer to the root) at energy no larger than its own. Returns the
/// eccentricity on success.
fn bfs_certify(
    f: &EnergyFunction,
    members: &[u32],
    in_s_neighbors: &dyn Fn(u32) -> Vec<usize>,
    root: usize,
) -> Option<usize> {
    let k = members.len();
    let mut dist = vec![usize::MAX; k];
    bfs(members, in_s_neighbors, root, &mut dist);
    let mut radius = 0;
    for i in 0..k {
        radius = radius.max(dist[i]);
        if i == root {
            continue;
        }
        let fv = f.value(members[i]);
        let mut has_pred = false;
        for u in in_s_neighbors(members[i]) {
            if dist[u] + 1 == dist[i] {
                has_pred = true;
                if f.value(members[u]) > fv {
                    return None;
                }
            }
        }
        if !has_pred {
            return None;
        }
    }
    Some(radius)
}
