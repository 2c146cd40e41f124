//! Matching and transport restricted to a sparse set of profitable edges.
//!
//! Both solvers split the bipartite graph into connected components and solve
//! each component independently, which keeps large but mostly disjoint
//! instances (hundreds of well-separated boxes) cheap.

use super::flow::MinCostFlow;
use super::hungarian;

/// A candidate pair and its weight. Only negative weights are profitable.
pub type Edge = (usize, usize, f64);

struct Components {
    members: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)>,
}

// Union-find over rows `0..m` and columns `m..m+n`; components keep their
// rows, columns and edge indices in ascending order.
fn components(m: usize, n: usize, edges: &[Edge]) -> Components {
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(i, j, _) in edges {
        let a = find(&mut parent, i);
        let b = find(&mut parent, m + j);
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut slot = vec![usize::MAX; m + n];
    let mut members: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> = Vec::new();
    for (k, &(i, j, _)) in edges.iter().enumerate() {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = members.len();
            members.push((Vec::new(), Vec::new(), Vec::new()));
        }
        let c = &mut members[slot[root]];
        c.0.push(i);
        c.1.push(j);
        c.2.push(k);
    }
    for c in &mut members {
        c.0.sort_unstable();
        c.0.dedup();
        c.1.sort_unstable();
        c.1.dedup();
    }
    Components { members }
}

/// Matching that minimizes the summed weight of the edges it uses; vertices
/// may stay unmatched at zero cost. Returns `(row, col)` pairs sorted by row.
pub fn partial_matching(m: usize, n: usize, edges: &[Edge]) -> Vec<(usize, usize)> {
    let useful: Vec<Edge> = edges.iter().copied().filter(|e| e.2 < 0.0).collect();
    let comps = components(m, n, &useful);
    let mut pairs = Vec::new();
    for (rows, cols, ids) in comps.members {
        let (r, c) = (rows.len(), cols.len());
        let mut local = vec![0.0f64; r * c];
        for &k in &ids {
            let (i, j, w) = useful[k];
            let li = rows.binary_search(&i).unwrap();
            let lj = cols.binary_search(&j).unwrap();
            let cell = &mut local[li * c + lj];
            *cell = (*cell).min(w);
        }
        for (li, lj) in hungarian::min_cost_pairs(&local, r, c) {
            if local[li * c + lj] < 0.0 {
                pairs.push((rows[li], cols[lj]));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Partial transport between `m` rows of mass `1/m` and `n` columns of mass
/// `1/n` over the given edges, minimizing the summed `weight * mass`. Mass may
/// stay untransported at zero cost. Returns the optimal (non-positive) cost.
pub fn partial_transport(m: usize, n: usize, edges: &[Edge]) -> f64 {
    if m == 0 || n == 0 {
        return 0.0;
    }
    let useful: Vec<Edge> = edges.iter().copied().filter(|e| e.2 < 0.0).collect();
    let comps = components(m, n, &useful);
    let scale = (m * n) as f64;
    let mut total = 0.0;
    for (rows, cols, ids) in comps.members {
        let (r, c) = (rows.len(), cols.len());
        let source = r + c;
        let sink = source + 1;
        let mut g = MinCostFlow::new(r + c + 2);
        for li in 0..r {
            g.add_edge(source, li, n as i64, 0.0);
        }
        for lj in 0..c {
            g.add_edge(r + lj, sink, m as i64, 0.0);
        }
        for &k in &ids {
            let (i, j, w) = useful[k];
            let li = rows.binary_search(&i).unwrap();
            let lj = cols.binary_search(&j).unwrap();
            g.add_edge(li, r + lj, (m.min(n)) as i64 * n.max(m) as i64, w);
        }
        let (_, cost) = g.run(source, sink, i64::MAX, true);
        total += cost;
    }
    total / scale
}
