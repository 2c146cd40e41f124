//! Tracking criteria: MOTA, IDF1 and HOTA.

use serde::Serialize;

use super::{check_threshold, distance_limit, feasible, thresholded_matching};
use crate::assignment::{sparse, CostMatrix};
use crate::error::{Error, Result};
use crate::geometry::BaseDistance;
use crate::setmetrics::{TrackDistances, TrackSet};

/// Per-step error counts behind MOTA.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FrameCounts {
    pub steps: Vec<i64>,
    pub gt: Vec<usize>,
    pub fp: Vec<usize>,
    #[serde(rename = "fn")]
    pub fn_: Vec<usize>,
    pub idsw: Vec<usize>,
}

impl FrameCounts {
    pub fn total_gt(&self) -> usize {
        self.gt.iter().sum()
    }

    pub fn total_errors(&self) -> usize {
        self.fp.iter().chain(&self.fn_).chain(&self.idsw).sum()
    }
}

/// Identity-level counts behind IDF1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IdCounts {
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
}

impl IdCounts {
    pub fn idf1(&self) -> f64 {
        let denom = 2 * self.idtp + self.idfp + self.idfn;
        if denom == 0 {
            return 1.0;
        }
        2.0 * self.idtp as f64 / denom as f64
    }
}

/// MOTA from precomputed distances.
///
/// At each step, pairs matched at the previous step are kept while still
/// within the threshold; the remaining objects are matched to maximize the
/// number of pairs, then minimize their summed distance. An identity switch
/// is counted whenever a reference is matched to a different prediction than
/// the last time it was matched.
pub fn mota_from(d: &TrackDistances, base: BaseDistance, t: f64) -> Result<(f64, FrameCounts)> {
    check_threshold(base, t)?;
    let limit = distance_limit(base, t);
    let mut counts = FrameCounts::default();
    let mut previous: Vec<Option<usize>> = vec![None; d.rows()];
    let mut last_label: Vec<Option<usize>> = vec![None; d.rows()];
    let mut last_step: Option<i64> = None;

    for block in d.frames() {
        if last_step != Some(block.t - 1) {
            previous.iter_mut().for_each(|p| *p = None);
        }
        last_step = Some(block.t);
        let (r, c) = (block.refs.len(), block.preds.len());
        let mut row_done = vec![false; r];
        let mut col_done = vec![false; c];
        let mut pairs = Vec::new();
        for (li, &i) in block.refs.iter().enumerate() {
            if let Some(j) = previous[i] {
                if let Ok(lj) = block.preds.binary_search(&j) {
                    if feasible(block.costs.get(li, lj), limit) {
                        row_done[li] = true;
                        col_done[lj] = true;
                        pairs.push((li, lj));
                    }
                }
            }
        }
        let free_rows: Vec<usize> = (0..r).filter(|&k| !row_done[k]).collect();
        let free_cols: Vec<usize> = (0..c).filter(|&k| !col_done[k]).collect();
        let sub = CostMatrix::from_fn(free_rows.len(), free_cols.len(), |a, b| {
            block.costs.get(free_rows[a], free_cols[b])
        })?;
        for (a, b) in thresholded_matching(&sub, limit, |a, b| sub.get(a, b)) {
            pairs.push((free_rows[a], free_cols[b]));
        }

        previous.iter_mut().for_each(|p| *p = None);
        let mut idsw = 0;
        for &(li, lj) in &pairs {
            let (i, j) = (block.refs[li], block.preds[lj]);
            if matches!(last_label[i], Some(prev) if prev != j) {
                idsw += 1;
            }
            last_label[i] = Some(j);
            previous[i] = Some(j);
        }
        counts.steps.push(block.t);
        counts.gt.push(r);
        counts.fp.push(c - pairs.len());
        counts.fn_.push(r - pairs.len());
        counts.idsw.push(idsw);
    }
    let gt = counts.total_gt();
    if gt == 0 {
        return Err(Error::ZeroGroundTruth);
    }
    Ok((1.0 - counts.total_errors() as f64 / gt as f64, counts))
}

/// IDF1 from precomputed distances: references and predictions are paired
/// one-to-one to maximize the number of steps at which paired states lie
/// within the threshold.
pub fn idf1_from(d: &TrackDistances, base: BaseDistance, t: f64) -> Result<(f64, IdCounts)> {
    check_threshold(base, t)?;
    let limit = distance_limit(base, t);
    let mut edges = Vec::new();
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            let hits = d
                .shared(i, j)
                .iter()
                .filter(|&&v| feasible(v, limit))
                .count();
            if hits > 0 {
                edges.push((i, j, -(hits as f64)));
            }
        }
    }
    let idtp: usize = sparse::partial_matching(d.rows(), d.cols(), &edges)
        .into_iter()
        .map(|(i, j)| {
            d.shared(i, j)
                .iter()
                .filter(|&&v| feasible(v, limit))
                .count()
        })
        .sum();
    let gt: usize = (0..d.rows()).map(|i| d.ref_len(i)).sum();
    let pr: usize = (0..d.cols()).map(|j| d.pred_len(j)).sum();
    let c = IdCounts {
        idtp,
        idfp: pr - idtp,
        idfn: gt - idtp,
    };
    Ok((c.idf1(), c))
}

/// HOTA at one localization threshold, with its detection and association
/// components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HotaResult {
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Threshold-independent HOTA inputs: the global alignment between every
/// reference and predicted track.
#[derive(Debug, Clone)]
pub struct HotaData<'a> {
    d: &'a TrackDistances,
    base: BaseDistance,
    alignment: Vec<f64>,
}

impl<'a> HotaData<'a> {
    pub fn new(d: &'a TrackDistances, base: BaseDistance) -> Self {
        let (m, n) = (d.rows(), d.cols());
        let mut potential = vec![0.0; m * n];
        for block in d.frames() {
            let (r, c) = (block.refs.len(), block.preds.len());
            let sim = |a: usize, b: usize| 1.0 - block.costs.get(a, b);
            let row_sum: Vec<f64> = (0..r).map(|a| (0..c).map(|b| sim(a, b)).sum()).collect();
            let col_sum: Vec<f64> = (0..c).map(|b| (0..r).map(|a| sim(a, b)).sum()).collect();
            for a in 0..r {
                for b in 0..c {
                    let s = sim(a, b);
                    let denom = row_sum[a] + col_sum[b] - s;
                    if denom > f64::EPSILON {
                        potential[block.refs[a] * n + block.preds[b]] += s / denom;
                    }
                }
            }
        }
        let alignment = (0..m * n)
            .map(|k| {
                let (i, j) = (k / n.max(1), k % n.max(1));
                let p = potential[k];
                let denom = d.ref_len(i) as f64 + d.pred_len(j) as f64 - p;
                if denom > 0.0 {
                    p / denom
                } else {
                    0.0
                }
            })
            .collect();
        Self { d, base, alignment }
    }

    pub fn at(&self, alpha: f64) -> Result<HotaResult> {
        check_threshold(self.base, alpha)?;
        let limit = distance_limit(self.base, alpha);
        let (m, n) = (self.d.rows(), self.d.cols());
        let mut matches = vec![0usize; m * n];
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for block in self.d.frames() {
            let pairs = thresholded_matching(&block.costs, limit, |a, b| {
                let align = self.alignment[block.refs[a] * n + block.preds[b]];
                1.0 - align * (1.0 - block.costs.get(a, b))
            });
            for &(a, b) in &pairs {
                matches[block.refs[a] * n + block.preds[b]] += 1;
            }
            tp += pairs.len();
            fn_ += block.refs.len() - pairs.len();
            fp += block.preds.len() - pairs.len();
        }
        let mut assoc = 0.0;
        for i in 0..m {
            for j in 0..n {
                let k = matches[i * n + j];
                if k > 0 {
                    let a = k as f64 / (self.d.ref_len(i) + self.d.pred_len(j) - k) as f64;
                    assoc += k as f64 * a;
                }
            }
        }
        let all = tp + fp + fn_;
        if all == 0 {
            return Ok(HotaResult {
                hota: 1.0,
                det_a: 1.0,
                ass_a: 1.0,
                tp,
                fp,
                fn_,
            });
        }
        let det_a = tp as f64 / all as f64;
        let ass_a = if tp == 0 { 0.0 } else { assoc / tp as f64 };
        Ok(HotaResult {
            hota: (assoc / all as f64).sqrt(),
            det_a,
            ass_a,
            tp,
            fp,
            fn_,
        })
    }

    /// Mean HOTA over a threshold grid.
    pub fn marginal(&self, alphas: &[f64]) -> Result<f64> {
        if alphas.is_empty() {
            return Err(Error::InvalidParameter("empty threshold grid".into()));
        }
        let mut sum = 0.0;
        for &a in alphas {
            sum += self.at(a)?.hota;
        }
        Ok(sum / alphas.len() as f64)
    }
}

pub fn mota(
    reference: &TrackSet,
    prediction: &TrackSet,
    t: f64,
    base: BaseDistance,
) -> Result<(f64, FrameCounts)> {
    mota_from(&TrackDistances::new(reference, prediction, base)?, base, t)
}

pub fn idf1(
    reference: &TrackSet,
    prediction: &TrackSet,
    t: f64,
    base: BaseDistance,
) -> Result<(f64, IdCounts)> {
    idf1_from(&TrackDistances::new(reference, prediction, base)?, base, t)
}

pub fn hota(
    reference: &TrackSet,
    prediction: &TrackSet,
    alpha: f64,
    base: BaseDistance,
) -> Result<HotaResult> {
    let d = TrackDistances::new(reference, prediction, base)?;
    HotaData::new(&d, base).at(alpha)
}

pub fn hota_marginal(
    reference: &TrackSet,
    prediction: &TrackSet,
    base: BaseDistance,
    alphas: &[f64],
) -> Result<f64> {
    let d = TrackDistances::new(reference, prediction, base)?;
    HotaData::new(&d, base).marginal(alphas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::m_full_grid;
    use crate::geometry::Shape;
    use crate::setmetrics::Track;

    const IOU: BaseDistance = BaseDistance::Iou;

    fn sq(x: f64) -> Shape {
        Shape::bbox(x, 0.0, x + 10.0, 10.0).unwrap()
    }

    fn tracks(window: (i64, i64), layout: &[(u64, &[(i64, f64)])]) -> TrackSet {
        TrackSet::new(
            window,
            layout
                .iter()
                .map(|(l, s)| Track::new(*l, s.iter().map(|&(t, x)| (t, sq(x)))).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_tracking() {
        let f = tracks(
            (1, 3),
            &[(1, &[(1, 0.0), (2, 1.0), (3, 2.0)]), (2, &[(2, 50.0)])],
        );
        assert_eq!(mota(&f, &f, 0.5, IOU).unwrap().0, 1.0);
        assert_eq!(idf1(&f, &f, 0.5, IOU).unwrap().0, 1.0);
        assert!((hota(&f, &f, 0.5, IOU).unwrap().hota - 1.0).abs() < 1e-12);
        assert!((hota_marginal(&f, &f, IOU, &m_full_grid()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_prediction() {
        let f = tracks((1, 3), &[(1, &[(1, 0.0), (2, 1.0)])]);
        let g = TrackSet::empty((1, 3)).unwrap();
        assert_eq!(mota(&f, &g, 0.5, IOU).unwrap().0, 0.0);
        assert_eq!(idf1(&f, &g, 0.5, IOU).unwrap().0, 0.0);
        assert_eq!(hota(&f, &g, 0.5, IOU).unwrap().hota, 0.0);
        assert!(matches!(
            mota(&g, &f, 0.5, IOU),
            Err(Error::ZeroGroundTruth)
        ));
    }

    #[test]
    fn identity_switch_counted() {
        // Reference 1 is followed by prediction 10, then by prediction 11.
        let f = tracks((1, 4), &[(1, &[(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)])]);
        let g = tracks(
            (1, 4),
            &[(10, &[(1, 0.0), (2, 0.0)]), (11, &[(3, 0.0), (4, 0.0)])],
        );
        let (score, counts) = mota(&f, &g, 0.5, IOU).unwrap();
        assert_eq!(counts.idsw, vec![0, 0, 1, 0]);
        assert!((score - 0.75).abs() < 1e-12);
        let (id, c) = idf1(&f, &g, 0.5, IOU).unwrap();
        assert_eq!(
            c,
            IdCounts {
                idtp: 2,
                idfp: 2,
                idfn: 2
            }
        );
        assert!((id - 0.5).abs() < 1e-12);
        // Each prediction track is half of the reference: A = 2 / (4 + 2 - 2).
        let h = hota(&f, &g, 0.5, IOU).unwrap();
        assert!((h.hota - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn previous_correspondence_is_kept() {
        // At step 2 prediction 11 is closer, but 10 is still feasible.
        let f = tracks((1, 2), &[(1, &[(1, 0.0), (2, 0.0)])]);
        let g = tracks((1, 2), &[(10, &[(1, 0.0), (2, 2.0)]), (11, &[(2, 0.0)])]);
        let (_, counts) = mota(&f, &g, 0.5, IOU).unwrap();
        assert_eq!(counts.idsw, vec![0, 0]);
        assert_eq!(counts.fp, vec![0, 1]);
    }

    #[test]
    fn cascaded_unit_tracks() {
        let x = tracks((1, 1), &[(1, &[(1, 0.0)])]);
        let y = tracks((1, 1), &[(1, &[(1, 3.0)])]);
        let z = tracks((1, 1), &[(1, &[(1, 6.0)])]);
        assert_eq!(1.0 - mota(&x, &y, 0.5, IOU).unwrap().0, 0.0);
        assert_eq!(1.0 - mota(&x, &z, 0.5, IOU).unwrap().0, 2.0);
        assert_eq!(1.0 - idf1(&x, &z, 0.5, IOU).unwrap().0, 1.0);
        assert_eq!(1.0 - hota(&x, &y, 0.5, IOU).unwrap().hota, 0.0);
        assert_eq!(1.0 - hota(&x, &z, 0.5, IOU).unwrap().hota, 1.0);
    }

    #[test]
    fn idf1_crossed_identities_oracle() {
        // Two references and two predictions that swap halfway; brute force
        // over both pairings (with dummies the unpaired option is dominated).
        let f = tracks(
            (1, 4),
            &[
                (1, &[(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)]),
                (2, &[(1, 50.0), (2, 50.0), (3, 50.0), (4, 50.0)]),
            ],
        );
        let g = tracks(
            (1, 4),
            &[
                (5, &[(1, 0.0), (2, 0.0), (3, 50.0), (4, 50.0)]),
                (6, &[(1, 50.0), (2, 50.0), (3, 0.0), (4, 0.0)]),
            ],
        );
        let (v, c) = idf1(&f, &g, 0.5, IOU).unwrap();
        assert_eq!(c.idtp, 4);
        assert!((v - 0.5).abs() < 1e-12);
    }
}
