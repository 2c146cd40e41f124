//! Ranks, the normalized Kendall-tau distance between rankings, and the rank
//! reliability indicators (switches, distortion, sensitivity) over a
//! parameter grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// Ranks `1..=K` with rank 1 for the best score. Exact ties go to the lower
/// index first.
pub fn ranks_from_scores(scores: &[f64], direction: Direction) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::InvalidParameter("no scores to rank".into()));
    }
    if let Some(k) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore(k));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let c = match direction {
            Direction::HigherBetter => scores[b].total_cmp(&scores[a]),
            Direction::LowerBetter => scores[a].total_cmp(&scores[b]),
        };
        c.then(a.cmp(&b))
    });
    let mut ranks = vec![0; scores.len()];
    for (r, &k) in order.iter().enumerate() {
        ranks[k] = r + 1;
    }
    Ok(ranks)
}

/// Number of discordant pairs divided by `K (K - 1) / 2`.
pub fn kendall_tau_normalized(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let k = a.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "Kendall-tau needs at least two items".into(),
        ));
    }
    // Order items by `a` (ties by `b`), then count inversions of `b`.
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&i, &j| a[i].cmp(&a[j]).then(b[i].cmp(&b[j])));
    let mut seq: Vec<usize> = idx.iter().map(|&i| b[i]).collect();
    let mut buf = vec![0; k];
    let inversions = count_inversions(&mut seq, &mut buf);
    Ok(inversions as f64 / (k * (k - 1) / 2) as f64)
}

fn count_inversions(v: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(l, bl) + count_inversions(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Ranks of `K` algorithms at each of `m` parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    axis: Vec<f64>,
    /// `rows[i][j]`: rank of algorithm `i` at parameter `axis[j]`.
    rows: Vec<Vec<usize>>,
}

impl RankMatrix {
    /// Builds the matrix from per-parameter rank columns.
    pub fn from_columns(axis: Vec<f64>, columns: &[Vec<usize>]) -> Result<Self> {
        if columns.len() != axis.len() {
            return Err(Error::LengthMismatch {
                expected: axis.len(),
                actual: columns.len(),
            });
        }
        let k = columns.first().map_or(0, Vec::len);
        for col in columns {
            if col.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    actual: col.len(),
                });
            }
            let mut seen = vec![false; k + 1];
            for &r in col {
                if r == 0 || r > k || std::mem::replace(&mut seen[r], true) {
                    return Err(Error::InvalidParameter(format!(
                        "rank column {col:?} is not a permutation of 1..={k}"
                    )));
                }
            }
        }
        let rows = (0..k)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        Ok(Self { axis, rows })
    }

    pub fn algorithms(&self) -> usize {
        self.rows.len()
    }

    pub fn parameters(&self) -> usize {
        self.axis.len()
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn row(&self, algorithm: usize) -> &[usize] {
        &self.rows[algorithm]
    }

    pub fn column(&self, j: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Mean over algorithms of the number of distinct ranks held, minus one.
pub fn avg_rank_switches(r: &RankMatrix) -> f64 {
    mean_over_rows(r, |row| {
        let mut v = row.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len() as f64 - 1.0
    })
}

/// Mean over algorithms of the population standard deviation of the ranks.
pub fn avg_rank_distortion(r: &RankMatrix) -> f64 {
    mean_over_rows(r, |row| {
        let n = row.len() as f64;
        let mean = row.iter().map(|&x| x as f64).sum::<f64>() / n;
        (row.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n).sqrt()
    })
}

/// Sum over algorithms and consecutive parameters of
/// `|rank change| / ((t_{j+1} - t_j) (m - 1) K)`. With `evenly_spaced`, the
/// spacing factor is dropped.
pub fn avg_rank_sensitivity(r: &RankMatrix, evenly_spaced: bool) -> Result<f64> {
    let m = r.parameters();
    if m < 2 {
        return Err(Error::InvalidParameter(
            "rank sensitivity needs at least two parameter values".into(),
        ));
    }
    for j in 1..m {
        if !(r.axis[j] > r.axis[j - 1]) {
            return Err(Error::NonMonotoneAxis(j));
        }
    }
    let k = r.algorithms() as f64;
    let mut total = 0.0;
    for row in &r.rows {
        for j in 0..m - 1 {
            let step = if evenly_spaced {
                1.0
            } else {
                r.axis[j + 1] - r.axis[j]
            };
            let diff = (row[j] as f64 - row[j + 1] as f64).abs();
            total += diff / (step * (m - 1) as f64 * k);
        }
    }
    Ok(total)
}

fn mean_over_rows(r: &RankMatrix, f: impl Fn(&[usize]) -> f64) -> f64 {
    if r.rows.is_empty() || r.axis.is_empty() {
        return 0.0;
    }
    r.rows.iter().map(|row| f(row)).sum::<f64>() / r.rows.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_and_ties() {
        assert_eq!(
            ranks_from_scores(&[0.9, 0.1, 0.5], Direction::HigherBetter).unwrap(),
            vec![1, 3, 2]
        );
        assert_eq!(
            ranks_from_scores(&[0.9, 0.1, 0.5], Direction::LowerBetter).unwrap(),
            vec![3, 1, 2]
        );
        assert_eq!(
            ranks_from_scores(&[0.2; 4], Direction::LowerBetter).unwrap(),
            vec![1, 2, 3, 4]
        );
        assert!(matches!(
            ranks_from_scores(&[0.2, f64::NAN], Direction::LowerBetter),
            Err(Error::NonFiniteScore(1))
        ));
    }

    #[test]
    fn kendall_tau_extremes() {
        let a = [1, 2, 3, 4, 5];
        assert_eq!(kendall_tau_normalized(&a, &a).unwrap(), 0.0);
        assert_eq!(kendall_tau_normalized(&a, &[5, 4, 3, 2, 1]).unwrap(), 1.0);
        assert_eq!(kendall_tau_normalized(&a, &[2, 1, 3, 4, 5]).unwrap(), 0.1);
        assert!(kendall_tau_normalized(&a, &[1, 2]).is_err());
    }

    #[test]
    fn indicators() {
        let constant =
            RankMatrix::from_columns(vec![0.1, 0.2, 0.3], &[vec![1, 2], vec![1, 2], vec![1, 2]])
                .unwrap();
        assert_eq!(avg_rank_switches(&constant), 0.0);
        assert_eq!(avg_rank_distortion(&constant), 0.0);
        assert_eq!(avg_rank_sensitivity(&constant, true).unwrap(), 0.0);

        let swap = RankMatrix::from_columns(vec![0.5, 0.55], &[vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(avg_rank_sensitivity(&swap, true).unwrap(), 1.0);

        let alternating = RankMatrix::from_columns(
            vec![1.0, 2.0, 3.0, 4.0],
            &[vec![1, 3, 2], vec![3, 1, 2], vec![1, 3, 2], vec![3, 1, 2]],
        )
        .unwrap();
        assert_eq!(avg_rank_distortion(&alternating), 2.0 / 3.0);
        assert_eq!(avg_rank_switches(&alternating), 2.0 / 3.0);

        let bad = RankMatrix::from_columns(vec![0.2, 0.1], &[vec![1, 2], vec![2, 1]]).unwrap();
        assert!(matches!(
            avg_rank_sensitivity(&bad, false),
            Err(Error::NonMonotoneAxis(1))
        ));
        assert!(RankMatrix::from_columns(vec![0.1], &[vec![1, 1]]).is_err());
    }
}
