//! Metrics between finite sets of shapes (Hausdorff, EMD, OSPA) and between
//! finite sets of tracks (the same metrics over the time-averaged track
//! distance, OSPA² being the OSPA variant).
//!
//! Every metric is available in two forms: on shape or track sets, and on a
//! precomputed [`CostMatrix`] of pairwise base distances so that callers
//! evaluating many criteria on the same pair of sets compute distances once.

mod tracks;

use serde::{Deserialize, Serialize};

use crate::assignment::{sparse, CostMatrix};
use crate::error::{Error, Result};
use crate::geometry::{BaseDistance, Shape, ShapeKind};

pub use tracks::{
    emd_tracks, hausdorff_tracks, ospa2, track_base_distance, FrameBlock, Track, TrackDistances,
    TrackSet,
};

/// Shapes of one frame or image. All members share one kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ShapeSet {
    pub id: u64,
    shapes: Vec<Shape>,
}

impl ShapeSet {
    pub fn new(shapes: Vec<Shape>) -> Result<Self> {
        if let Some(first) = shapes.first() {
            let kind = first.kind();
            if let Some(other) = shapes.iter().find(|s| s.kind() != kind) {
                return Err(Error::KindMismatch(kind, other.kind()));
            }
        }
        Ok(Self { id: 0, shapes })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.id = id;
        self
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn into_shapes(self) -> Vec<Shape> {
        self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn kind(&self) -> Option<ShapeKind> {
        self.shapes.first().map(Shape::kind)
    }

    /// Members carrying the given class label.
    pub fn of_class(&self, class_id: u32) -> Self {
        Self {
            id: self.id,
            shapes: self
                .shapes
                .iter()
                .filter(|s| s.class_id == Some(class_id))
                .cloned()
                .collect(),
        }
    }
}

/// Base distance, order `p >= 1` and cut-off `c` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub base: BaseDistance,
    pub order: f64,
    pub cutoff: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            base: BaseDistance::Iou,
            order: 1.0,
            cutoff: 1.0,
        }
    }
}

impl MetricConfig {
    pub fn new(base: BaseDistance, order: f64, cutoff: f64) -> Result<Self> {
        let cfg = Self {
            base,
            order,
            cutoff,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_base(base: BaseDistance) -> Self {
        Self {
            base,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.order.is_finite() && self.order >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "order must be a finite value >= 1, got {}",
                self.order
            )));
        }
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cut-off must lie in (0, 1], got {}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

/// Pairwise base distances, rows indexing `x` and columns indexing `y`.
pub fn pairwise(x: &ShapeSet, y: &ShapeSet, base: BaseDistance) -> Result<CostMatrix> {
    if let (Some(a), Some(b)) = (x.kind(), y.kind()) {
        if a != b {
            return Err(Error::KindMismatch(a, b));
        }
    }
    let mut data = Vec::with_capacity(x.len() * y.len());
    for a in x.shapes() {
        for b in y.shapes() {
            data.push(base.distance(a, b)?);
        }
    }
    CostMatrix::new(x.len(), y.len(), data)
}

pub fn hausdorff(x: &ShapeSet, y: &ShapeSet, cfg: &MetricConfig) -> Result<f64> {
    Ok(hausdorff_from(&pairwise(x, y, cfg.base)?))
}

pub fn emd(x: &ShapeSet, y: &ShapeSet, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(emd_from(&pairwise(x, y, cfg.base)?, cfg.order))
}

pub fn ospa(x: &ShapeSet, y: &ShapeSet, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(ospa_from(&pairwise(x, y, cfg.base)?, cfg.order, cfg.cutoff))
}

/// OSPA without the per-object normalization.
pub fn ospa_unnormalized(x: &ShapeSet, y: &ShapeSet, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(ospa_unnormalized_from(
        &pairwise(x, y, cfg.base)?,
        cfg.order,
        cfg.cutoff,
    ))
}

/// Larger of the two directed max-min distances; 1 if exactly one side is
/// empty and 0 if both are.
pub fn hausdorff_from(d: &CostMatrix) -> f64 {
    let (m, n) = (d.rows(), d.cols());
    match (m, n) {
        (0, 0) => return 0.0,
        (0, _) | (_, 0) => return 1.0,
        _ => {}
    }
    let mut col_min = vec![f64::INFINITY; n];
    let mut worst_row = 0.0f64;
    for i in 0..m {
        let mut row_min = f64::INFINITY;
        for (j, cm) in col_min.iter_mut().enumerate() {
            let v = d.get(i, j);
            row_min = row_min.min(v);
            *cm = cm.min(v);
        }
        worst_row = worst_row.max(row_min);
    }
    col_min.into_iter().fold(worst_row, f64::max)
}

/// Wasserstein distance of order `p` between uniform distributions on the
/// rows and on the columns; 1 if exactly one side is empty and 0 if both are.
pub fn emd_from(d: &CostMatrix, p: f64) -> f64 {
    let (m, n) = (d.rows(), d.cols());
    match (m, n) {
        (0, 0) => return 0.0,
        (0, _) | (_, 0) => return 1.0,
        _ => {}
    }
    // Costs are bounded by 1, so the optimal plan only needs to route mass
    // explicitly over pairs closer than 1; the rest is priced at exactly 1.
    let edges = profitable_edges(d, p, 1.0);
    let saving = sparse::partial_transport(m, n, &edges);
    (1.0 + saving).clamp(0.0, 1.0).powf(1.0 / p)
}

/// OSPA with order `p` and cut-off `c`, normalized by the larger cardinality.
pub fn ospa_from(d: &CostMatrix, p: f64, c: f64) -> f64 {
    let n = d.rows().max(d.cols());
    if n == 0 {
        return 0.0;
    }
    (ospa_total(d, p, c) / n as f64).max(0.0).powf(1.0 / p)
}

pub fn ospa_unnormalized_from(d: &CostMatrix, p: f64, c: f64) -> f64 {
    ospa_total(d, p, c).max(0.0).powf(1.0 / p)
}

// min over assignments of sum min(c, d)^p + c^p (n - m). Pairs at or beyond
// the cut-off cost the same as leaving both ends unassigned, so only pairs
// closer than `c` need to enter the matching.
fn ospa_total(d: &CostMatrix, p: f64, c: f64) -> f64 {
    let n = d.rows().max(d.cols());
    let cp = c.powf(p);
    let edges = profitable_edges(d, p, c);
    let pairs = sparse::partial_matching(d.rows(), d.cols(), &edges);
    let matched: f64 = pairs.iter().map(|&(i, j)| d.get(i, j).powf(p)).sum();
    matched + (n - pairs.len()) as f64 * cp
}

fn profitable_edges(d: &CostMatrix, p: f64, c: f64) -> Vec<sparse::Edge> {
    let cp = c.powf(p);
    let mut edges = Vec::new();
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            let v = d.get(i, j);
            if v < c {
                edges.push((i, j, v.powf(p) - cp));
            }
        }
    }
    edges
}
