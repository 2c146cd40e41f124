//! Combinatorial solvers behind the set metrics and the matching-based
//! criteria: optimal rectangular assignment, score-ordered greedy matching,
//! and the transportation problem.

mod flow;
mod hungarian;
pub mod sparse;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::EPS;

pub use hungarian::min_cost_pairs;

/// Dense `rows x cols` matrix of costs in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        for (k, &value) in data.iter().enumerate() {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(Error::InvalidCost {
                    row: k / cols.max(1),
                    col: k % cols.max(1),
                    value,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// A set of disjoint row/column pairs plus whatever was left over.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl Matching {
    pub fn from_pairs(rows: usize, cols: usize, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let mut row_used = vec![false; rows];
        let mut col_used = vec![false; cols];
        for &(i, j) in &pairs {
            row_used[i] = true;
            col_used[j] = true;
        }
        Self {
            pairs,
            unmatched_rows: (0..rows).filter(|&i| !row_used[i]).collect(),
            unmatched_cols: (0..cols).filter(|&j| !col_used[j]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn cost(&self, c: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(i, j)| c.get(i, j)).sum()
    }
}

/// Uniform-marginal transportation plan (rows sum to `1/m`, columns to `1/n`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TransportPlan {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                self.entries[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .sum()
            })
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn cost(&self, c: &CostMatrix) -> f64 {
        self.entries
            .iter()
            .zip(c.as_slice())
            .map(|(f, d)| f * d)
            .sum()
    }
}

/// Minimum-cost matching of size `min(m, n)`.
pub fn solve_assignment(c: &CostMatrix) -> (Matching, f64) {
    let pairs = min_cost_pairs(c.as_slice(), c.rows, c.cols);
    let matching = Matching::from_pairs(c.rows, c.cols, pairs);
    let cost = matching.cost(c);
    (matching, cost)
}

/// Optimal transport between uniform masses on rows and columns.
///
/// Solved exactly as an integer transportation problem: every row supplies
/// `n` units, every column demands `m` units and costs are divided by `m n`.
pub fn solve_transport(c: &CostMatrix) -> Result<(TransportPlan, f64)> {
    let (m, n) = (c.rows, c.cols);
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(
            "transport needs at least one row and one column".into(),
        ));
    }
    let source = m + n;
    let sink = source + 1;
    let mut g = flow::MinCostFlow::new(m + n + 2);
    for i in 0..m {
        g.add_edge(source, i, n as i64, 0.0);
    }
    for j in 0..n {
        g.add_edge(m + j, sink, m as i64, 0.0);
    }
    let mut ids = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            ids.push(g.add_edge(i, m + j, n.min(m) as i64 * n.max(m) as i64, c.get(i, j)));
        }
    }
    let units = (m * n) as i64;
    let (pushed, _) = g.run(source, sink, units, false);
    debug_assert_eq!(pushed, units);
    let scale = units as f64;
    let entries: Vec<f64> = ids.iter().map(|&e| g.flow_on(e) as f64 / scale).collect();
    let plan = TransportPlan {
        rows: m,
        cols: n,
        entries,
    };
    let cost = plan.cost(c);
    Ok((plan, cost))
}

/// Score-ordered greedy matching: rows are visited by descending priority
/// (ties by index) and each takes its cheapest free column whose cost does not
/// exceed `threshold` (ties by column index).
pub fn greedy_match(c: &CostMatrix, row_priority: &[f64], threshold: f64) -> Result<Matching> {
    if row_priority.len() != c.rows {
        return Err(Error::LengthMismatch {
            expected: c.rows,
            actual: row_priority.len(),
        });
    }
    let mut order: Vec<usize> = (0..c.rows).collect();
    order.sort_by(|&a, &b| row_priority[b].total_cmp(&row_priority[a]).then(a.cmp(&b)));
    let mut taken = vec![false; c.cols];
    let mut pairs = Vec::new();
    for i in order {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..c.cols {
            let d = c.get(i, j);
            if taken[j] || d > threshold + EPS {
                continue;
            }
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            pairs.push((i, j));
        }
    }
    Ok(Matching::from_pairs(c.rows, c.cols, pairs))
}
