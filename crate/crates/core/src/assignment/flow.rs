//! Successive-shortest-path min-cost flow with integer capacities and real costs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct MinCostFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds an edge and returns its id (usable with [`MinCostFlow::flow_on`]).
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.adj[from].push(id);
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, edge: usize) -> i64 {
        self.edges[edge ^ 1].cap
    }

    // Bellman-Ford from the source; handles the negative edge costs of a fresh graph.
    fn initial_potentials(&self, source: usize) -> Vec<f64> {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for from in 0..n {
                if !dist[from].is_finite() {
                    continue;
                }
                for &e in &self.adj[from] {
                    let edge = &self.edges[e];
                    if edge.cap > 0 && dist[from] + edge.cost < dist[edge.to] {
                        dist[edge.to] = dist[from] + edge.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist.iter_mut()
            .filter(|d| !d.is_finite())
            .for_each(|d| *d = 0.0);
        dist
    }

    /// Pushes flow from `source` to `sink` along successive shortest paths,
    /// up to `limit` units. With `only_improving`, stops as soon as the next
    /// path would not lower the total cost (min-cost flow of free amount).
    /// Returns `(units pushed, total cost)`.
    pub fn run(
        &mut self,
        source: usize,
        sink: usize,
        limit: i64,
        only_improving: bool,
    ) -> (i64, f64) {
        let n = self.adj.len();
        let mut potential = self.initial_potentials(source);
        let mut pushed = 0i64;
        let mut total = 0.0;
        let mut dist = vec![f64::INFINITY; n];
        let mut prev_edge = vec![usize::MAX; n];

        while pushed < limit {
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            prev_edge.iter_mut().for_each(|p| *p = usize::MAX);
            dist[source] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(State {
                dist: 0.0,
                node: source,
            });
            while let Some(State { dist: d, node }) = heap.pop() {
                if d > dist[node] {
                    continue;
                }
                for &e in &self.adj[node] {
                    let edge = &self.edges[e];
                    if edge.cap <= 0 {
                        continue;
                    }
                    // Reduced costs are non-negative up to rounding noise.
                    let reduced = (edge.cost + potential[node] - potential[edge.to]).max(0.0);
                    let nd = d + reduced;
                    if nd < dist[edge.to] {
                        dist[edge.to] = nd;
                        prev_edge[edge.to] = e;
                        heap.push(State {
                            dist: nd,
                            node: edge.to,
                        });
                    }
                }
            }
            if !dist[sink].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }

            // Actual path cost and bottleneck.
            let mut bottleneck = limit - pushed;
            let mut path_cost = 0.0;
            let mut v = sink;
            while v != source {
                let e = prev_edge[v];
                bottleneck = bottleneck.min(self.edges[e].cap);
                path_cost += self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            if only_improving && path_cost >= 0.0 {
                break;
            }
            let mut v = sink;
            while v != source {
                let e = prev_edge[v];
                self.edges[e].cap -= bottleneck;
                self.edges[e ^ 1].cap += bottleneck;
                v = self.edges[e ^ 1].to;
            }
            pushed += bottleneck;
            total += path_cost * bottleneck as f64;
        }
        (pushed, total)
    }
}
