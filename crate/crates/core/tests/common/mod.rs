//! Brute-force reference implementations used as test oracles. They follow
//! the definitions directly (enumeration), sharing no code with the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// Every injective map from `0..small` into `0..large`.
pub fn injections(small: usize, large: usize) -> Vec<Vec<usize>> {
    fn rec(
        k: usize,
        small: usize,
        large: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == small {
            out.push(cur.clone());
            return;
        }
        for j in 0..large {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(k + 1, small, large, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(
        0,
        small,
        large,
        &mut vec![false; large],
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Row-major `m x n` matrix.
#[derive(Debug, Clone)]
pub struct Dense {
    pub m: usize,
    pub n: usize,
    pub v: Vec<f64>,
}

impl Dense {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.n + j]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Dense {
        Dense {
            m: self.m,
            n: self.n,
            v: self.v.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// Minimum total cost of an assignment covering the smaller side.
pub fn brute_assignment(d: &Dense) -> f64 {
    let (m, n) = (d.m, d.n);
    if m == 0 || n == 0 {
        return 0.0;
    }
    let get = |small: usize, large: usize| {
        if m <= n {
            d.at(small, large)
        } else {
            d.at(large, small)
        }
    };
    injections(m.min(n), m.max(n))
        .iter()
        .map(|f| f.iter().enumerate().map(|(a, &b)| get(a, b)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// OSPA from its definition: `((1/n)(min sum min(c, d)^p + c^p (n - m)))^(1/p)`.
pub fn brute_ospa(d: &Dense, p: f64, c: f64) -> f64 {
    let (small, large) = (d.m.min(d.n), d.m.max(d.n));
    if large == 0 {
        return 0.0;
    }
    let best = brute_assignment(&d.map(|v| v.min(c).powf(p)));
    ((best + c.powf(p) * (large - small) as f64) / large as f64).powf(1.0 / p)
}

/// Un-normalized OSPA: the same sum without the `1/n` factor.
pub fn brute_ospa_unnormalized(d: &Dense, p: f64, c: f64) -> f64 {
    let (small, large) = (d.m.min(d.n), d.m.max(d.n));
    let best = brute_assignment(&d.map(|v| v.min(c).powf(p)));
    (best + c.powf(p) * (large - small) as f64).powf(1.0 / p)
}

pub fn brute_hausdorff(d: &Dense) -> f64 {
    let (m, n) = (d.m, d.n);
    match (m, n) {
        (0, 0) => return 0.0,
        (0, _) | (_, 0) => return 1.0,
        _ => {}
    }
    let rows = (0..m)
        .map(|i| (0..n).map(|j| d.at(i, j)).fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    let cols = (0..n)
        .map(|j| (0..m).map(|i| d.at(i, j)).fold(f64::INFINITY, f64::min))
        .fold(0.0f64, f64::max);
    rows.max(cols)
}

/// IoU of axis-aligned boxes `[x0, y0, x1, y1]`.
pub fn box_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let w = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let h = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = w * h;
    let area = |r: [f64; 4]| (r[2] - r[0]) * (r[3] - r[1]);
    inter / (area(a) + area(b) - inter)
}

/// Track base distance from its definition: shared steps cost
/// `min(c, 1 - IoU)`, steps where only one track exists cost `c`, averaged
/// over the union of the two domains.
pub fn brute_track_distance(f: &[(i64, [f64; 4])], g: &[(i64, [f64; 4])], c: f64) -> f64 {
    let df: BTreeSet<i64> = f.iter().map(|s| s.0).collect();
    let dg: BTreeSet<i64> = g.iter().map(|s| s.0).collect();
    let union: BTreeSet<i64> = df.union(&dg).copied().collect();
    if union.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for t in &union {
        let a = f.iter().find(|s| s.0 == *t);
        let b = g.iter().find(|s| s.0 == *t);
        total += match (a, b) {
            (Some(a), Some(b)) => (1.0 - box_iou(a.1, b.1)).min(c),
            _ => c,
        };
    }
    total / union.len() as f64
}
