//! Shapes and the IoU/GIoU family of base distances.
//!
//! Two shape kinds are supported: axis-aligned boxes and raster masks. Both
//! may carry a confidence score in `(0, 1]` and a class label. The
//! score-augmented distances treat a scored box as a 3-D box extruded over
//! `(0, s]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for all floating point comparisons.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Box,
    Mask,
}

/// Axis-aligned box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.validate()?;
        Ok(b)
    }

    /// Box from a top-left corner plus width and height (COCO / MOT layout).
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidShape(format!(
                "width and height must be positive, got {w} x {h}"
            )));
        }
        Self::new(x, y, x + w, y + h)
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidShape(format!(
                "box ({}, {}, {}, {}) has zero or negative area",
                self.x_min, self.y_min, self.x_max, self.y_max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    pub fn intersection_area(&self, other: &Self) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Smallest axis-aligned box containing both.
    pub fn enclosing(&self, other: &Self) -> Self {
        Self {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }
}

/// Binary occupancy grid. Cell `(col, row)` covers the unit square
/// `[x0 + col, x0 + col + 1] x [y0 + row, y0 + row + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    x0: i64,
    y0: i64,
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl Mask {
    pub fn new(x0: i64, y0: i64, width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::InvalidShape(format!(
                "mask of {width}x{height} needs {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        if !cells.iter().any(|&c| c) {
            return Err(Error::InvalidShape("mask has no occupied cell".into()));
        }
        Ok(Self {
            x0,
            y0,
            width,
            height,
            cells,
        })
        .map(Self::cropped)
    }

    /// Mask from a list of occupied global cell coordinates `(x, y)`.
    pub fn from_cells(occupied: &[(i64, i64)]) -> Result<Self> {
        if occupied.is_empty() {
            return Err(Error::InvalidShape("mask has no occupied cell".into()));
        }
        let x0 = occupied.iter().map(|c| c.0).min().unwrap();
        let y0 = occupied.iter().map(|c| c.1).min().unwrap();
        let x1 = occupied.iter().map(|c| c.0).max().unwrap();
        let y1 = occupied.iter().map(|c| c.1).max().unwrap();
        let width = (x1 - x0 + 1) as usize;
        let height = (y1 - y0 + 1) as usize;
        let mut cells = vec![false; width * height];
        for &(x, y) in occupied {
            cells[(y - y0) as usize * width + (x - x0) as usize] = true;
        }
        Self::new(x0, y0, width, height, cells)
    }

    // Shrinks the grid to the bounding rectangle of its occupied cells.
    fn cropped(self) -> Self {
        let mut rows = (usize::MAX, 0usize);
        let mut cols = (usize::MAX, 0usize);
        for r in 0..self.height {
            for c in 0..self.width {
                if self.cells[r * self.width + c] {
                    rows = (rows.0.min(r), rows.1.max(r));
                    cols = (cols.0.min(c), cols.1.max(c));
                }
            }
        }
        if rows.0 == 0 && cols.0 == 0 && rows.1 + 1 == self.height && cols.1 + 1 == self.width {
            return self;
        }
        let width = cols.1 - cols.0 + 1;
        let height = rows.1 - rows.0 + 1;
        let mut cells = Vec::with_capacity(width * height);
        for r in rows.0..=rows.1 {
            let start = r * self.width + cols.0;
            cells.extend_from_slice(&self.cells[start..start + width]);
        }
        Self {
            x0: self.x0 + cols.0 as i64,
            y0: self.y0 + rows.0 as i64,
            width,
            height,
            cells,
        }
    }

    pub fn origin(&self) -> (i64, i64) {
        (self.x0, self.y0)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: i64, y: i64) -> bool {
        let (c, r) = (x - self.x0, y - self.y0);
        if c < 0 || r < 0 || c as usize >= self.width || r as usize >= self.height {
            return false;
        }
        self.cells[r as usize * self.width + c as usize]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Occupied cells as global `(x, y)` coordinates, row-major.
    pub fn occupied(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.height).flat_map(move |r| {
            (0..self.width).filter_map(move |c| {
                self.cells[r * self.width + c].then_some((self.x0 + c as i64, self.y0 + r as i64))
            })
        })
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        Self {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            ..self.clone()
        }
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        let x_lo = self.x0.max(other.x0);
        let y_lo = self.y0.max(other.y0);
        let x_hi = (self.x0 + self.width as i64).min(other.x0 + other.width as i64);
        let y_hi = (self.y0 + self.height as i64).min(other.y0 + other.height as i64);
        let mut n = 0;
        for y in y_lo..y_hi {
            for x in x_lo..x_hi {
                if self.get(x, y) && other.get(x, y) {
                    n += 1;
                }
            }
        }
        n
    }

    // Leftmost and rightmost occupied cell of every non-empty row.
    fn row_extents(&self) -> impl Iterator<Item = (i64, i64, i64)> + '_ {
        (0..self.height).filter_map(move |r| {
            let row = &self.cells[r * self.width..(r + 1) * self.width];
            let first = row.iter().position(|&c| c)?;
            let last = row.iter().rposition(|&c| c)?;
            Some((
                self.y0 + r as i64,
                self.x0 + first as i64,
                self.x0 + last as i64,
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Box(BoundingBox),
    Mask(Mask),
}

/// A box or mask with optional confidence score and class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub geometry: Geometry,
    pub score: Option<f64>,
    pub class_id: Option<u32>,
}

impl Shape {
    pub fn from_box(b: BoundingBox) -> Self {
        Self {
            geometry: Geometry::Box(b),
            score: None,
            class_id: None,
        }
    }

    pub fn bbox(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        BoundingBox::new(x_min, y_min, x_max, y_max).map(Self::from_box)
    }

    pub fn from_mask(m: Mask) -> Self {
        Self {
            geometry: Geometry::Mask(m),
            score: None,
            class_id: None,
        }
    }

    pub fn with_score(mut self, score: f64) -> Result<Self> {
        if !(score > 0.0 && score <= 1.0) {
            return Err(Error::ScoreOutOfRange(score));
        }
        self.score = Some(score);
        Ok(self)
    }

    pub fn with_class(mut self, class_id: u32) -> Self {
        self.class_id = Some(class_id);
        self
    }

    pub fn kind(&self) -> ShapeKind {
        match self.geometry {
            Geometry::Box(_) => ShapeKind::Box,
            Geometry::Mask(_) => ShapeKind::Mask,
        }
    }

    pub fn as_box(&self) -> Option<&BoundingBox> {
        match &self.geometry {
            Geometry::Box(b) => Some(b),
            Geometry::Mask(_) => None,
        }
    }
}

/// Area of a box or occupied-cell count of a mask.
pub fn volume(s: &Shape) -> f64 {
    match &s.geometry {
        Geometry::Box(b) => b.area(),
        Geometry::Mask(m) => m.count() as f64,
    }
}

pub fn intersection_volume(a: &Shape, b: &Shape) -> Result<f64> {
    match (&a.geometry, &b.geometry) {
        (Geometry::Box(x), Geometry::Box(y)) => Ok(x.intersection_area(y)),
        (Geometry::Mask(x), Geometry::Mask(y)) => Ok(x.intersection_count(y) as f64),
        _ => Err(Error::KindMismatch(a.kind(), b.kind())),
    }
}

pub fn iou(a: &Shape, b: &Shape) -> Result<f64> {
    let inter = intersection_volume(a, b)?;
    let union = volume(a) + volume(b) - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Generalized IoU on the `[-1, 1]` scale.
pub fn giou(a: &Shape, b: &Shape) -> Result<f64> {
    match (&a.geometry, &b.geometry) {
        (Geometry::Box(x), Geometry::Box(y)) => Ok(box_giou(x, y, 1.0, 1.0)),
        (Geometry::Mask(x), Geometry::Mask(y)) => {
            let inter = x.intersection_count(y) as f64;
            let union = x.count() as f64 + y.count() as f64 - inter;
            let hull = mask_hull_area(x, y).max(union);
            Ok((inter / union - (hull - union) / hull).clamp(-1.0, 1.0))
        }
        _ => Err(Error::KindMismatch(a.kind(), b.kind())),
    }
}

/// `1 - IoU`.
pub fn iou_distance(a: &Shape, b: &Shape) -> Result<f64> {
    Ok((1.0 - iou(a, b)?).clamp(0.0, 1.0))
}

/// `(1 - GIoU) / 2`.
pub fn giou_distance(a: &Shape, b: &Shape) -> Result<f64> {
    Ok(((1.0 - giou(a, b)?) * 0.5).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapKind {
    Iou,
    Giou,
}

/// IoU or GIoU distance between two scored boxes, each extruded over `(0, s]`.
///
/// Masks fall back to the plain 2-D distance; their scores are ignored.
pub fn augmented_distance(a: &Shape, b: &Shape, kind: OverlapKind) -> Result<f64> {
    let sa = a.score.ok_or(Error::MissingScore)?;
    let sb = b.score.ok_or(Error::MissingScore)?;
    match (&a.geometry, &b.geometry) {
        (Geometry::Box(x), Geometry::Box(y)) => {
            let d = match kind {
                OverlapKind::Iou => 1.0 - box_iou(x, y, sa, sb),
                OverlapKind::Giou => 0.5 * (1.0 - box_giou(x, y, sa, sb)),
            };
            Ok(d.clamp(0.0, 1.0))
        }
        (Geometry::Mask(_), Geometry::Mask(_)) => match kind {
            OverlapKind::Iou => iou_distance(a, b),
            OverlapKind::Giou => giou_distance(a, b),
        },
        _ => Err(Error::KindMismatch(a.kind(), b.kind())),
    }
}

// IoU of boxes extruded to depths `sa` and `sb`; depth 1 gives the plain 2-D IoU.
fn box_iou(x: &BoundingBox, y: &BoundingBox, sa: f64, sb: f64) -> f64 {
    let inter = x.intersection_area(y) * sa.min(sb);
    let union = x.area() * sa + y.area() * sb - inter;
    (inter / union).clamp(0.0, 1.0)
}

fn box_giou(x: &BoundingBox, y: &BoundingBox, sa: f64, sb: f64) -> f64 {
    let inter = x.intersection_area(y) * sa.min(sb);
    let union = x.area() * sa + y.area() * sb - inter;
    let hull = (x.enclosing(y).area() * sa.max(sb)).max(union);
    (inter / union - (hull - union) / hull).clamp(-1.0, 1.0)
}

/// Selects the base distance used between two shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseDistance {
    Iou,
    Giou,
    AugmentedIou,
    AugmentedGiou,
}

impl BaseDistance {
    pub fn distance(self, a: &Shape, b: &Shape) -> Result<f64> {
        match self {
            BaseDistance::Iou => iou_distance(a, b),
            BaseDistance::Giou => giou_distance(a, b),
            BaseDistance::AugmentedIou => augmented_distance(a, b, OverlapKind::Iou),
            BaseDistance::AugmentedGiou => augmented_distance(a, b, OverlapKind::Giou),
        }
    }

    pub fn overlap(self) -> OverlapKind {
        match self {
            BaseDistance::Iou | BaseDistance::AugmentedIou => OverlapKind::Iou,
            BaseDistance::Giou | BaseDistance::AugmentedGiou => OverlapKind::Giou,
        }
    }

    pub fn is_augmented(self) -> bool {
        matches!(
            self,
            BaseDistance::AugmentedIou | BaseDistance::AugmentedGiou
        )
    }

    /// The same overlap family, with or without score augmentation.
    pub fn with_augmentation(self, augmented: bool) -> Self {
        match (self.overlap(), augmented) {
            (OverlapKind::Iou, false) => BaseDistance::Iou,
            (OverlapKind::Giou, false) => BaseDistance::Giou,
            (OverlapKind::Iou, true) => BaseDistance::AugmentedIou,
            (OverlapKind::Giou, true) => BaseDistance::AugmentedGiou,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseDistance::Iou => "iou",
            BaseDistance::Giou => "giou",
            BaseDistance::AugmentedIou => "augmented-iou",
            BaseDistance::AugmentedGiou => "augmented-giou",
        }
    }
}

impl std::str::FromStr for BaseDistance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iou" => Ok(BaseDistance::Iou),
            "giou" => Ok(BaseDistance::Giou),
            "augmented-iou" => Ok(BaseDistance::AugmentedIou),
            "augmented-giou" => Ok(BaseDistance::AugmentedGiou),
            other => Err(Error::Usage(format!("unknown base distance '{other}'"))),
        }
    }
}

// Area of the union's convex hull, measured as the number of whole cells the
// hull contains. Every occupied cell lies inside the hull, so the result is
// never below the union count.
fn mask_hull_area(a: &Mask, b: &Mask) -> f64 {
    let mut points = Vec::new();
    for m in [a, b] {
        for (y, x_first, x_last) in m.row_extents() {
            points.push((x_first, y));
            points.push((x_first, y + 1));
            points.push((x_last + 1, y));
            points.push((x_last + 1, y + 1));
        }
    }
    let hull = convex_hull(points);
    let y_lo = hull.iter().map(|p| p.1).min().unwrap_or(0);
    let y_hi = hull.iter().map(|p| p.1).max().unwrap_or(0);
    let mut cells = 0i64;
    for y in y_lo..y_hi {
        let (Some(bottom), Some(top)) =
            (hull_span(&hull, y as f64), hull_span(&hull, (y + 1) as f64))
        else {
            continue;
        };
        let left = bottom.0.max(top.0);
        let right = bottom.1.min(top.1);
        let first = (left - EPS).ceil() as i64;
        let last = (right + EPS).floor() as i64;
        cells += (last - first).max(0);
    }
    cells as f64
}

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

// Horizontal extent of a convex polygon at height `y`.
fn hull_span(hull: &[(i64, i64)], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = hull.len();
    for i in 0..n {
        let (x1, y1) = (hull[i].0 as f64, hull[i].1 as f64);
        let (x2, y2) = (hull[(i + 1) % n].0 as f64, hull[(i + 1) % n].1 as f64);
        if (y1 - y).abs() < EPS {
            lo = lo.min(x1);
            hi = hi.max(x1);
        }
        if (y1 < y && y < y2) || (y2 < y && y < y1) {
            let x = x1 + (y - y1) * (x2 - x1) / (y2 - y1);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}
