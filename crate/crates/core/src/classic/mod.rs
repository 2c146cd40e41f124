//! Threshold-based criteria: F1, AP/mAP, log-AMR for detection and MOTA,
//! IDF1, HOTA for tracking.
//!
//! An "IoU threshold" `t` accepts a pair when its IoU is at least `t`, i.e.
//! when the IoU distance is at most `1 - t`. With a GIoU base the threshold
//! applies to GIoU on its `[-1, 1]` scale, i.e. the GIoU distance must be at
//! most `(1 - t) / 2`.

mod detection;
mod tracking;

use serde::Serialize;

use crate::assignment::{sparse, CostMatrix};
use crate::error::{Error, Result};
use crate::geometry::{BaseDistance, OverlapKind, EPS};

pub use detection::{
    average_precision, f1_score, log_amr, mean_ap, mean_log_amr, split_by_class, AssignMode,
    DetectionData, Interpolation, PrCurve,
};
pub use tracking::{
    hota, hota_marginal, idf1, idf1_from, mota, mota_from, FrameCounts, HotaData, HotaResult,
    IdCounts,
};

/// True/false positive and false negative counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall. Both sets empty counts as a
    /// perfect score; otherwise a vanishing denominator gives 0.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            return 1.0;
        }
        2.0 * self.tp as f64 / denom as f64
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Largest base distance accepted at overlap threshold `t`.
pub fn distance_limit(base: BaseDistance, t: f64) -> f64 {
    match base.overlap() {
        OverlapKind::Iou => 1.0 - t,
        OverlapKind::Giou => 0.5 * (1.0 - t),
    }
}

pub(crate) fn check_threshold(base: BaseDistance, t: f64) -> Result<()> {
    let ok = match base.overlap() {
        OverlapKind::Iou => (0.0..=1.0).contains(&t),
        OverlapKind::Giou => (-1.0..=1.0).contains(&t),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold {t} outside the range of the {} index",
            base.name()
        )))
    }
}

#[inline]
pub(crate) fn feasible(d: f64, limit: f64) -> bool {
    d <= limit + EPS
}

/// Matching over threshold-feasible pairs with the largest possible number
/// of pairs; among those, the smallest total `tie(i, j)` (values in `[0, 1]`).
pub(crate) fn thresholded_matching(
    costs: &CostMatrix,
    limit: f64,
    tie: impl Fn(usize, usize) -> f64,
) -> Vec<(usize, usize)> {
    let big = costs.rows().min(costs.cols()) as f64 + 1.0;
    let mut edges = Vec::new();
    for i in 0..costs.rows() {
        for j in 0..costs.cols() {
            if feasible(costs.get(i, j), limit) {
                edges.push((i, j, tie(i, j) - big));
            }
        }
    }
    sparse::partial_matching(costs.rows(), costs.cols(), &edges)
}

/// Threshold grid `0.5:0.05:0.95`.
pub fn m_partial_grid() -> Vec<f64> {
    step_grid(10, 19)
}

/// Threshold grid `0.05:0.05:0.95`.
pub fn m_full_grid() -> Vec<f64> {
    step_grid(1, 19)
}

// Multiples of 0.05 computed from integers so that grid values are exact
// decimal roundings.
fn step_grid(first: u32, last: u32) -> Vec<f64> {
    (first..=last).map(|k| k as f64 / 20.0).collect()
}

/// `n` log-spaced points between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Default FPPI sampling grid: 9 log-spaced points in `[1e-2, 1]`.
pub fn default_fppi_grid() -> Vec<f64> {
    log_grid(1e-2, 1.0, 9)
}

/// Floor applied to miss rates before taking logarithms.
pub const MISS_RATE_FLOOR: f64 = 1e-4;
