//! Detection criteria over one or more images: F1, AP/mAP and log-AMR.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    check_threshold, distance_limit, thresholded_matching, ConfusionCounts, MISS_RATE_FLOOR,
};
use crate::assignment::{greedy_match, CostMatrix};
use crate::error::{Error, Result};
use crate::geometry::{BaseDistance, Shape};
use crate::setmetrics::{pairwise, ShapeSet};

/// How predictions are matched to references before the confidence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignMode {
    /// Highest-score prediction first, each taking its closest free reference.
    Greedy,
    /// Maximum number of feasible pairs, ties resolved by the score-augmented
    /// distance.
    Optimal,
}

impl std::str::FromStr for AssignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(AssignMode::Greedy),
            "optimal" => Ok(AssignMode::Optimal),
            other => Err(Error::Usage(format!("unknown assignment mode '{other}'"))),
        }
    }
}

/// Precision envelope sampling for AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Area under the envelope at every distinct recall.
    AllPoint,
    /// Mean of the envelope over a fixed recall grid.
    Grid(Vec<f64>),
}

impl Interpolation {
    /// The 101-point recall grid `0:0.01:1`.
    pub fn coco() -> Self {
        Interpolation::Grid((0..=100).map(|k| k as f64 / 100.0).collect())
    }
}

/// Precision/recall after each prediction of the confidence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
}

#[derive(Debug, Clone)]
struct ImageData {
    n_ref: usize,
    scores: Option<Vec<f64>>,
    // Rows are predictions, columns references.
    plain: CostMatrix,
    augmented: Option<CostMatrix>,
}

/// Pairwise distances for a collection of images of a single class,
/// prepared once and reused across thresholds and criteria.
#[derive(Debug, Clone)]
pub struct DetectionData {
    base: BaseDistance,
    images: Vec<ImageData>,
}

impl DetectionData {
    /// `pairs` holds `(reference, prediction)` per image. Distances use the
    /// plain (non-augmented) form of `base`; the augmented form is prepared
    /// as well when every prediction carries a score.
    pub fn new<'a>(
        pairs: impl IntoIterator<Item = (&'a ShapeSet, &'a ShapeSet)>,
        base: BaseDistance,
    ) -> Result<Self> {
        let plain_base = base.with_augmentation(false);
        let aug_base = base.with_augmentation(true);
        let mut images = Vec::new();
        for (reference, prediction) in pairs {
            let plain = pairwise(prediction, reference, plain_base)?;
            let scores: Option<Vec<f64>> = prediction.shapes().iter().map(|s| s.score).collect();
            let augmented = match scores {
                Some(_) => {
                    let refs =
                        ShapeSet::new(reference.shapes().iter().map(unit_score_default).collect())?;
                    Some(pairwise(prediction, &refs, aug_base)?)
                }
                None => None,
            };
            images.push(ImageData {
                n_ref: reference.len(),
                scores,
                plain,
                augmented,
            });
        }
        Ok(Self { base, images })
    }

    pub fn base(&self) -> BaseDistance {
        self.base
    }

    pub fn image_count(&self) -> usize {
        self.images.len()
    }

    pub fn reference_count(&self) -> usize {
        self.images.iter().map(|im| im.n_ref).sum()
    }

    pub fn prediction_count(&self) -> usize {
        self.images.iter().map(|im| im.plain.rows()).sum()
    }

    /// Prediction-by-reference distances of one image; `None` for the
    /// augmented form when some prediction is unscored.
    pub fn costs(&self, image: usize, augmented: bool) -> Option<&CostMatrix> {
        let im = self.images.get(image)?;
        if augmented {
            im.augmented.as_ref()
        } else {
            Some(&im.plain)
        }
    }

    /// Pooled counts with a maximum-cardinality matching per image.
    pub fn confusion(&self, t: f64) -> Result<ConfusionCounts> {
        check_threshold(self.base, t)?;
        let limit = distance_limit(self.base, t);
        let mut total = ConfusionCounts::default();
        for im in &self.images {
            let tp = thresholded_matching(&im.plain, limit, |i, j| im.plain.get(i, j)).len();
            total = total
                + ConfusionCounts {
                    tp,
                    fp: im.plain.rows() - tp,
                    fn_: im.n_ref - tp,
                };
        }
        Ok(total)
    }

    pub fn f1(&self, t: f64) -> Result<(f64, ConfusionCounts)> {
        let c = self.confusion(t)?;
        Ok((c.f1(), c))
    }

    // (score, is true positive) for every prediction, in sweep order.
    fn sweep(&self, t: f64, mode: AssignMode) -> Result<Vec<bool>> {
        check_threshold(self.base, t)?;
        let limit = distance_limit(self.base, t);
        let mut flagged: Vec<(f64, usize, usize, bool)> = Vec::new();
        for (k, im) in self.images.iter().enumerate() {
            let scores = im.scores.as_ref().ok_or(Error::MissingScore)?;
            let mut tp = vec![false; scores.len()];
            match mode {
                AssignMode::Greedy => {
                    let m = greedy_match(&im.plain, scores, limit)?;
                    for (i, _) in m.pairs {
                        tp[i] = true;
                    }
                }
                AssignMode::Optimal => {
                    let aug = im.augmented.as_ref().ok_or(Error::MissingScore)?;
                    for (i, _) in thresholded_matching(&im.plain, limit, |i, j| aug.get(i, j)) {
                        tp[i] = true;
                    }
                }
            }
            for (i, (&s, &hit)) in scores.iter().zip(&tp).enumerate() {
                flagged.push((s, k, i, hit));
            }
        }
        flagged.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        Ok(flagged.into_iter().map(|f| f.3).collect())
    }

    pub fn pr_curve(&self, t: f64, mode: AssignMode) -> Result<PrCurve> {
        let flags = self.sweep(t, mode)?;
        let n_ref = self.reference_count();
        let mut curve = PrCurve {
            recall: Vec::with_capacity(flags.len()),
            precision: Vec::with_capacity(flags.len()),
        };
        let mut tp = 0usize;
        for (k, hit) in flags.into_iter().enumerate() {
            tp += hit as usize;
            curve.recall.push(if n_ref == 0 {
                0.0
            } else {
                tp as f64 / n_ref as f64
            });
            curve.precision.push(tp as f64 / (k + 1) as f64);
        }
        Ok(curve)
    }

    /// Average precision. With no references the score is 1 if there are
    /// no predictions either and 0 otherwise.
    pub fn average_precision(
        &self,
        t: f64,
        mode: AssignMode,
        interp: &Interpolation,
    ) -> Result<f64> {
        let curve = self.pr_curve(t, mode)?;
        if self.reference_count() == 0 {
            return Ok(if curve.recall.is_empty() { 1.0 } else { 0.0 });
        }
        let n = curve.precision.len();
        let mut envelope = curve.precision.clone();
        for k in (0..n.saturating_sub(1)).rev() {
            envelope[k] = envelope[k].max(envelope[k + 1]);
        }
        Ok(match interp {
            Interpolation::AllPoint => {
                let mut ap = 0.0;
                let mut prev = 0.0;
                for (r, p) in curve.recall.iter().zip(&envelope) {
                    if *r > prev {
                        ap += (r - prev) * p;
                        prev = *r;
                    }
                }
                ap
            }
            Interpolation::Grid(grid) => {
                if grid.is_empty() {
                    return Err(Error::InvalidParameter("empty recall grid".into()));
                }
                let mut sum = 0.0;
                for &r in grid {
                    // Recall is non-decreasing along the sweep.
                    let k = curve.recall.partition_point(|&x| x < r);
                    if k < n {
                        sum += envelope[k];
                    }
                }
                sum / grid.len() as f64
            }
        })
    }

    /// Geometric mean of the miss rate sampled at the given false positives
    /// per image; each miss rate is floored before the logarithm.
    pub fn log_amr(&self, t: f64, mode: AssignMode, fppi_grid: &[f64]) -> Result<f64> {
        if fppi_grid.is_empty() {
            return Err(Error::InvalidParameter("empty FPPI grid".into()));
        }
        let flags = self.sweep(t, mode)?;
        let n_ref = self.reference_count();
        let images = self.image_count().max(1) as f64;
        let miss = |tp: usize| {
            if n_ref == 0 {
                0.0
            } else {
                1.0 - tp as f64 / n_ref as f64
            }
        };
        // Curve points (fppi, miss rate), starting before any prediction.
        let mut points = vec![(0.0, miss(0))];
        let (mut tp, mut fp) = (0usize, 0usize);
        for hit in flags {
            if hit {
                tp += 1;
            } else {
                fp += 1;
            }
            points.push((fp as f64 / images, miss(tp)));
        }
        let rates: Vec<f64> = fppi_grid
            .iter()
            .map(|&f| {
                let k = points.partition_point(|p| p.0 <= f);
                let mr = if k == 0 { 1.0 } else { points[k - 1].1 };
                mr.max(MISS_RATE_FLOOR)
            })
            .collect();
        // A constant curve is returned as is, avoiding exp/ln round-off.
        if rates.iter().all(|&r| r == rates[0]) {
            return Ok(rates[0]);
        }
        let log_sum: f64 = rates.iter().map(|r| r.ln()).sum();
        Ok((log_sum / rates.len() as f64).exp())
    }
}

fn unit_score_default(s: &Shape) -> Shape {
    let mut s = s.clone();
    if s.score.is_none() {
        s.score = Some(1.0);
    }
    s
}

/// F1 score of one prediction set against one reference set.
pub fn f1_score(
    reference: &ShapeSet,
    prediction: &ShapeSet,
    t: f64,
    base: BaseDistance,
) -> Result<(f64, ConfusionCounts)> {
    DetectionData::new([(reference, prediction)], base)?.f1(t)
}

pub fn average_precision(
    reference: &ShapeSet,
    prediction: &ShapeSet,
    t: f64,
    base: BaseDistance,
    mode: AssignMode,
    interp: &Interpolation,
) -> Result<f64> {
    DetectionData::new([(reference, prediction)], base)?.average_precision(t, mode, interp)
}

pub fn log_amr(
    reference: &ShapeSet,
    prediction: &ShapeSet,
    t: f64,
    base: BaseDistance,
    mode: AssignMode,
    fppi_grid: &[f64],
) -> Result<f64> {
    DetectionData::new([(reference, prediction)], base)?.log_amr(t, mode, fppi_grid)
}

/// Per-class `(reference, prediction)` image pairs for every class label
/// present in some reference set. Unlabeled shapes form their own class.
pub fn split_by_class(
    pairs: &[(ShapeSet, ShapeSet)],
) -> BTreeMap<Option<u32>, Vec<(ShapeSet, ShapeSet)>> {
    let classes: BTreeSet<Option<u32>> = pairs
        .iter()
        .flat_map(|(r, _)| r.shapes().iter().map(|s| s.class_id))
        .collect();
    let filter = |set: &ShapeSet, c: Option<u32>| {
        ShapeSet::new(
            set.shapes()
                .iter()
                .filter(|s| s.class_id == c)
                .cloned()
                .collect(),
        )
        .expect("subset of a valid set")
        .with_id(set.id)
    };
    classes
        .into_iter()
        .map(|c| {
            let per_image = pairs
                .iter()
                .map(|(r, p)| (filter(r, c), filter(p, c)))
                .collect();
            (c, per_image)
        })
        .collect()
}

fn class_mean(
    pairs: &[(ShapeSet, ShapeSet)],
    thresholds: &[f64],
    base: BaseDistance,
    f: impl Fn(&DetectionData, f64) -> Result<f64>,
) -> Result<f64> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("empty threshold list".into()));
    }
    let classes = split_by_class(pairs);
    if classes.is_empty() {
        return Err(Error::EmptyClassList);
    }
    let mut sum = 0.0;
    for class_pairs in classes.values() {
        let data = DetectionData::new(class_pairs.iter().map(|(r, p)| (r, p)), base)?;
        for &t in thresholds {
            sum += f(&data, t)?;
        }
    }
    Ok(sum / (classes.len() * thresholds.len()) as f64)
}

/// AP averaged over the classes present in the references and over the
/// given thresholds.
pub fn mean_ap(
    pairs: &[(ShapeSet, ShapeSet)],
    thresholds: &[f64],
    base: BaseDistance,
    mode: AssignMode,
    interp: &Interpolation,
) -> Result<f64> {
    class_mean(pairs, thresholds, base, |d, t| {
        d.average_precision(t, mode, interp)
    })
}

/// Log-AMR averaged over classes and thresholds like [`mean_ap`].
pub fn mean_log_amr(
    pairs: &[(ShapeSet, ShapeSet)],
    thresholds: &[f64],
    base: BaseDistance,
    mode: AssignMode,
    fppi_grid: &[f64],
) -> Result<f64> {
    class_mean(pairs, thresholds, base, |d, t| {
        d.log_amr(t, mode, fppi_grid)
    })
}
