//! Seeded scenario generators with a known ordering of prediction quality.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{iou, BoundingBox, Geometry, Shape};
use crate::setmetrics::{ShapeSet, Track, TrackSet};

/// Single-class or multi-class (scored, labeled) detection scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassMode {
    Single,
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSanityConfig {
    /// Inclusive range of the number of reference boxes.
    pub count_range: (usize, usize),
    /// Range of both centroid coordinates.
    pub centroid_range: (f64, f64),
    /// Range of box width and height.
    pub size_range: (f64, f64),
    /// Number of prediction sets.
    pub predictions: usize,
    /// End points of the evenly spaced dislocation constants.
    pub dislocation_range: (f64, f64),
    /// End points of the evenly spaced score reduction constants.
    pub score_drop_range: (f64, f64),
    /// Half-width of the multiplicative size noise `U[1 - e, 1 + e]`.
    pub size_noise: f64,
    pub detection_prob_range: (f64, f64),
    pub class_prob_range: (f64, f64),
    pub state_false_range: (f64, f64),
    pub classes: u32,
    /// First (1-based) prediction set with misses and false positives;
    /// `None` disables them.
    pub errors_from: Option<usize>,
}

impl Default for DetectionSanityConfig {
    fn default() -> Self {
        Self {
            count_range: (5, 40),
            centroid_range: (-200.0, 200.0),
            size_range: (20.0, 40.0),
            predictions: 20,
            dislocation_range: (10.0, 20.0),
            score_drop_range: (0.2, 0.8),
            size_noise: 0.05,
            detection_prob_range: (0.5, 0.95),
            class_prob_range: (0.5, 0.95),
            state_false_range: (0.05, 0.5),
            classes: 5,
            errors_from: Some(11),
        }
    }
}

impl DetectionSanityConfig {
    /// Every prediction set equals the reference.
    pub fn unperturbed() -> Self {
        Self {
            dislocation_range: (0.0, 0.0),
            score_drop_range: (0.0, 0.0),
            size_noise: 0.0,
            errors_from: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_range(
            "count_range",
            self.count_range.0 as f64,
            self.count_range.1 as f64,
        )?;
        if self.count_range.0 == 0 {
            return Err(Error::InvalidParameter(
                "count_range must start at 1 or more".into(),
            ));
        }
        check_range(
            "centroid_range",
            self.centroid_range.0,
            self.centroid_range.1,
        )?;
        check_positive_range("size_range", self.size_range)?;
        check_range(
            "dislocation_range",
            self.dislocation_range.0,
            self.dislocation_range.1,
        )?;
        check_unit("score_drop_range", self.score_drop_range)?;
        if self.score_drop_range.1 >= 1.0 {
            return Err(Error::InvalidParameter(
                "score_drop_range must stay below 1".into(),
            ));
        }
        check_unit("detection_prob_range", self.detection_prob_range)?;
        check_unit("class_prob_range", self.class_prob_range)?;
        check_unit("state_false_range", self.state_false_range)?;
        check_noise(self.size_noise)?;
        check_counts(self.predictions, self.errors_from)?;
        if self.classes == 0 {
            return Err(Error::InvalidParameter("classes must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSanityConfig {
    pub window: (i64, i64),
    pub count_range: (usize, usize),
    pub length_range: (usize, usize),
    pub centroid_range: (f64, f64),
    pub height_range: (f64, f64),
    pub aspect_range: (f64, f64),
    pub speed_range: (f64, f64),
    pub predictions: usize,
    pub dislocation_range: (f64, f64),
    pub size_noise: f64,
    /// Range of the miss, state-dependent false track and identity swap
    /// probabilities.
    pub prob_range: (f64, f64),
    pub false_track_length: usize,
    /// Mutual IoU (percent) below which identities never swap.
    pub swap_floor: f64,
    pub errors_from: Option<usize>,
}

impl Default for TrackingSanityConfig {
    fn default() -> Self {
        Self {
            window: (1, 100),
            count_range: (5, 30),
            length_range: (50, 100),
            centroid_range: (-200.0, 200.0),
            height_range: (20.0, 40.0),
            aspect_range: (0.5, 1.5),
            speed_range: (1.0, 5.0),
            predictions: 20,
            dislocation_range: (20.0, 40.0),
            size_noise: 0.05,
            prob_range: (0.05, 1.0),
            false_track_length: 10,
            swap_floor: 15.0,
            errors_from: Some(11),
        }
    }
}

impl TrackingSanityConfig {
    pub fn unperturbed() -> Self {
        Self {
            dislocation_range: (0.0, 0.0),
            size_noise: 0.0,
            errors_from: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let span = self.window.1 - self.window.0 + 1;
        if span < 1 {
            return Err(Error::InvalidParameter("empty tracking window".into()));
        }
        check_range(
            "count_range",
            self.count_range.0 as f64,
            self.count_range.1 as f64,
        )?;
        if self.count_range.0 == 0 {
            return Err(Error::InvalidParameter(
                "count_range must start at 1 or more".into(),
            ));
        }
        check_range(
            "length_range",
            self.length_range.0 as f64,
            self.length_range.1 as f64,
        )?;
        if self.length_range.0 == 0 || self.length_range.1 as i64 > span {
            return Err(Error::InvalidParameter(
                "track lengths must fit the window".into(),
            ));
        }
        if self.false_track_length == 0 || self.false_track_length as i64 > span {
            return Err(Error::InvalidParameter(
                "false track length must fit the window".into(),
            ));
        }
        check_range(
            "centroid_range",
            self.centroid_range.0,
            self.centroid_range.1,
        )?;
        check_positive_range("height_range", self.height_range)?;
        check_positive_range("aspect_range", self.aspect_range)?;
        check_range("speed_range", self.speed_range.0, self.speed_range.1)?;
        check_range(
            "dislocation_range",
            self.dislocation_range.0,
            self.dislocation_range.1,
        )?;
        check_unit("prob_range", self.prob_range)?;
        check_noise(self.size_noise)?;
        check_counts(self.predictions, self.errors_from)
    }
}

fn check_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name}: invalid range ({lo}, {hi})"
        )))
    }
}

fn check_positive_range(name: &str, r: (f64, f64)) -> Result<()> {
    check_range(name, r.0, r.1)?;
    if r.0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be positive")));
    }
    Ok(())
}

fn check_unit(name: &str, r: (f64, f64)) -> Result<()> {
    check_range(name, r.0, r.1)?;
    if r.0 < 0.0 || r.1 > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1]"
        )));
    }
    Ok(())
}

fn check_noise(e: f64) -> Result<()> {
    if (0.0..1.0).contains(&e) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "size noise {e} must lie in [0, 1)"
        )))
    }
}

fn check_counts(predictions: usize, errors_from: Option<usize>) -> Result<()> {
    if predictions < 2 {
        return Err(Error::InvalidParameter(
            "at least two prediction sets are needed".into(),
        ));
    }
    if let Some(f) = errors_from {
        if f == 0 || f > predictions {
            return Err(Error::InvalidParameter(format!(
                "errors_from must lie in 1..={predictions}"
            )));
        }
    }
    Ok(())
}

/// Perturbation parameters of one prediction set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionParams {
    /// 1-based index, equal to the pre-determined rank.
    pub index: usize,
    /// Dislocation magnitude per unit of object label.
    pub dislocation_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_slope: Option<f64>,
    pub state_false: usize,
    pub missed: usize,
    pub random_false: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub misclassified: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub miss_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_threshold: Option<f64>,
}

/// A reference and prediction sets ordered from best to worst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityScenario<T> {
    pub reference: T,
    pub predictions: Vec<T>,
    pub params: Vec<PredictionParams>,
}

impl<T> SanityScenario<T> {
    /// Pre-determined ranks `1..=K` of the prediction sets.
    pub fn ranks(&self) -> Vec<usize> {
        (1..=self.predictions.len()).collect()
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: (f64, f64)) -> f64 {
    if r.0 == r.1 {
        r.0
    } else {
        rng.random_range(r.0..=r.1)
    }
}

fn sorted_uniform<R: Rng + ?Sized>(
    rng: &mut R,
    r: (f64, f64),
    n: usize,
    descending: bool,
) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| uniform(rng, r)).collect();
    v.sort_by(f64::total_cmp);
    if descending {
        v.reverse();
    }
    v
}

// Poisson draws with rates 1..=n, sorted ascending.
fn sorted_poisson<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=n)
        .map(|rate| {
            Poisson::new(rate as f64)
                .expect("positive rate")
                .sample(rng) as usize
        })
        .collect();
    v.sort_unstable();
    v
}

/// Dislocation of magnitude `d`: horizontal part `u d` with `u ~ U[0, 1]`,
/// vertical part completing the magnitude, then independent sign flips.
fn dislocation<R: Rng + ?Sized>(rng: &mut R, d: f64) -> (f64, f64) {
    let u: f64 = rng.random();
    let mut dx = u * d;
    let mut dy = (d * d - dx * dx).max(0.0).sqrt();
    if rng.random::<f64>() < 0.5 {
        dx = -dx;
    }
    if rng.random::<f64>() < 0.5 {
        dy = -dy;
    }
    (dx, dy)
}

fn size_factor<R: Rng + ?Sized>(rng: &mut R, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        rng.random_range(1.0 - e..=1.0 + e)
    }
}

// Moves a box by a dislocation of magnitude `d` and jitters its size.
fn perturb_box<R: Rng + ?Sized>(rng: &mut R, b: &BoundingBox, d: f64, noise: f64) -> BoundingBox {
    let (dx, dy) = dislocation(rng, d);
    let (fw, fh) = (size_factor(rng, noise), size_factor(rng, noise));
    if fw == 1.0 && fh == 1.0 {
        return b.translated(dx, dy);
    }
    let (cx, cy) = b.center();
    BoundingBox::from_center(cx + dx, cy + dy, b.width() * fw, b.height() * fh)
        .expect("positive size")
}

fn random_box<R: Rng + ?Sized>(rng: &mut R, centroid: (f64, f64), size: (f64, f64)) -> BoundingBox {
    let cx = uniform(rng, centroid);
    let cy = uniform(rng, centroid);
    let w = uniform(rng, size);
    let h = uniform(rng, size);
    BoundingBox::from_center(cx, cy, w, h).expect("positive size")
}

fn with_meta(b: BoundingBox, score: Option<f64>, class_id: Option<u32>) -> Shape {
    Shape {
        geometry: Geometry::Box(b),
        score,
        class_id,
    }
}

fn round_count(x: f64) -> usize {
    x.max(0.0).round() as usize
}

/// Detection scenario: a random reference and `cfg.predictions` perturbed
/// copies, each worse than the previous.
pub fn gen_detection_scenario<R: Rng + ?Sized>(
    cfg: &DetectionSanityConfig,
    mode: ClassMode,
    rng: &mut R,
) -> Result<SanityScenario<ShapeSet>> {
    cfg.validate()?;
    let multi = mode == ClassMode::Multi;
    let n_d = rng.random_range(cfg.count_range.0..=cfg.count_range.1);
    let reference: Vec<(BoundingBox, Option<u32>)> = (0..n_d)
        .map(|_| {
            let b = random_box(rng, cfg.centroid_range, cfg.size_range);
            let class = multi.then(|| rng.random_range(1..=cfg.classes));
            (b, class)
        })
        .collect();

    let k_total = cfg.predictions;
    let d_vec = linspace(cfg.dislocation_range.0, cfg.dislocation_range.1, k_total);
    let s_vec = linspace(cfg.score_drop_range.0, cfg.score_drop_range.1, k_total);
    let n_err = cfg.errors_from.map_or(0, |f| k_total + 1 - f);
    let p_d = sorted_uniform(rng, cfg.detection_prob_range, n_err, true);
    let p_c = sorted_uniform(rng, cfg.class_prob_range, n_err, true);
    let f_s = sorted_uniform(rng, cfg.state_false_range, n_err, false);
    let f_r = sorted_poisson(rng, n_err);

    let mut predictions = Vec::with_capacity(k_total);
    let mut params = Vec::with_capacity(k_total);
    for k in 0..k_total {
        let a = d_vec[k] / n_d as f64;
        let b = s_vec[k] / n_d as f64;
        let score_of = |n: usize| multi.then(|| 1.0 - b * n as f64);
        let mut moved: Vec<Shape> = reference
            .iter()
            .enumerate()
            .map(|(idx, (bx, class))| {
                let nb = perturb_box(rng, bx, a * (idx + 1) as f64, cfg.size_noise);
                with_meta(nb, score_of(idx + 1), *class)
            })
            .collect();
        let mut p = PredictionParams {
            index: k + 1,
            dislocation_scale: a,
            score_slope: multi.then_some(b),
            misclassified: multi.then_some(0),
            ..PredictionParams::default()
        };

        let mut extras = Vec::new();
        if let Some(j) = cfg.errors_from.and_then(|f| (k + 1).checked_sub(f)) {
            let n_fr = round_count(n_d as f64 * f_s[j]).min(n_d);
            let mut chosen = sample(rng, n_d, n_fr).into_vec();
            chosen.sort_unstable();
            for &c in &chosen {
                let nb = perturb_box(rng, &reference[c].0, a * (c + 1) as f64, cfg.size_noise);
                extras.push(with_meta(nb, moved[c].score, moved[c].class_id));
            }
            let mut is_chosen = vec![false; n_d];
            chosen.iter().for_each(|&c| is_chosen[c] = true);
            let remaining: Vec<usize> = (0..n_d).filter(|&c| !is_chosen[c]).collect();
            let n_m = round_count((n_d - n_fr) as f64 * (1.0 - p_d[j])).min(remaining.len());
            let kept_len = remaining.len() - n_m;
            let mut dropped = vec![false; n_d];
            remaining[kept_len..]
                .iter()
                .for_each(|&c| dropped[c] = true);
            if multi {
                let n_c = round_count((n_d - n_fr - n_m) as f64 * (1.0 - p_c[j])).min(kept_len);
                for &c in &remaining[kept_len - n_c..kept_len] {
                    let true_class = moved[c].class_id.unwrap_or(1);
                    moved[c].class_id = Some(other_class(rng, true_class, cfg.classes));
                }
                p.misclassified = Some(n_c);
            }
            for _ in 0..f_r[j] {
                let nb = random_box(rng, cfg.centroid_range, cfg.size_range);
                let class = multi.then(|| rng.random_range(1..=cfg.classes));
                let score = multi.then(|| 1.0 - rng.random::<f64>());
                extras.push(with_meta(nb, score, class));
            }
            moved = moved
                .into_iter()
                .enumerate()
                .filter(|(c, _)| !dropped[*c])
                .map(|(_, s)| s)
                .collect();
            p.state_false = n_fr;
            p.missed = n_m;
            p.random_false = f_r[j];
        }
        moved.extend(extras);
        predictions.push(ShapeSet::new(moved)?.with_id(k as u64 + 1));
        params.push(p);
    }
    let reference = ShapeSet::new(
        reference
            .into_iter()
            .map(|(b, class)| with_meta(b, multi.then_some(1.0), class))
            .collect(),
    )?;
    Ok(SanityScenario {
        reference,
        predictions,
        params,
    })
}

fn other_class<R: Rng + ?Sized>(rng: &mut R, current: u32, classes: u32) -> u32 {
    if classes < 2 {
        return current;
    }
    let pick = rng.random_range(1..classes);
    if pick >= current {
        pick + 1
    } else {
        pick
    }
}

/// Likelihood that two track instances with mutual IoU `iou_pct` (percent)
/// swap identities, for swap threshold `theta_pct` (percent). A smoothstep
/// rising from 0 at `floor` to 1 at `theta`; a step at `floor` when
/// `theta <= floor`.
pub fn swap_likelihood(iou_pct: f64, theta_pct: f64, floor: f64) -> f64 {
    if iou_pct <= floor {
        return 0.0;
    }
    if theta_pct <= floor || iou_pct >= theta_pct {
        return 1.0;
    }
    let span = theta_pct - floor;
    if iou_pct <= 0.5 * (floor + theta_pct) {
        2.0 * ((iou_pct - floor) / span).powi(2)
    } else {
        1.0 - 2.0 * ((iou_pct - theta_pct) / span).powi(2)
    }
}

#[derive(Debug, Clone)]
struct TruthTrack {
    start: i64,
    len: usize,
    x0: f64,
    y0: f64,
    vx: f64,
    vy: f64,
    h0: f64,
    w: f64,
}

impl TruthTrack {
    fn steps(&self) -> impl Iterator<Item = i64> + '_ {
        self.start..self.start + self.len as i64
    }

    fn at(&self, t: i64, cfg: &TrackingSanityConfig) -> BoundingBox {
        let s = (t - self.start) as f64;
        let y = self.y0 + self.vy * s;
        let h = (self.h0 - height_slope(cfg) * self.vy * s).max(cfg.height_range.0);
        BoundingBox::from_center(self.x0 + self.vx * s, y, self.w, h).expect("positive size")
    }
}

// Height lost per unit of upward motion: the initial height spans the
// height range across the centroid range, higher y giving smaller boxes.
fn height_slope(cfg: &TrackingSanityConfig) -> f64 {
    let span = cfg.centroid_range.1 - cfg.centroid_range.0;
    if span == 0.0 {
        0.0
    } else {
        (cfg.height_range.1 - cfg.height_range.0) / span
    }
}

/// Tracking scenario: random constant-velocity reference tracks and
/// `cfg.predictions` perturbed track sets, each worse than the previous.
pub fn gen_tracking_scenario<R: Rng + ?Sized>(
    cfg: &TrackingSanityConfig,
    rng: &mut R,
) -> Result<SanityScenario<TrackSet>> {
    cfg.validate()?;
    let (w0, w1) = cfg.window;
    let n_t = rng.random_range(cfg.count_range.0..=cfg.count_range.1);
    let truth: Vec<TruthTrack> = (0..n_t)
        .map(|_| {
            let len = rng.random_range(cfg.length_range.0..=cfg.length_range.1);
            let start = rng.random_range(w0..=w1 + 1 - len as i64);
            let x0 = uniform(rng, cfg.centroid_range);
            let y0 = uniform(rng, cfg.centroid_range);
            let h0 = cfg.height_range.1 - height_slope(cfg) * (y0 - cfg.centroid_range.0);
            let w = h0 * uniform(rng, cfg.aspect_range);
            let course = uniform(rng, (0.0, 360.0)).to_radians();
            let speed = uniform(rng, cfg.speed_range);
            TruthTrack {
                start,
                len,
                x0,
                y0,
                vx: speed * course.cos(),
                vy: speed * course.sin(),
                h0,
                w,
            }
        })
        .collect();

    let k_total = cfg.predictions;
    let t_vec = linspace(cfg.dislocation_range.0, cfg.dislocation_range.1, k_total);
    let n_err = cfg.errors_from.map_or(0, |f| k_total + 1 - f);
    let p_fr = sorted_uniform(rng, cfg.prob_range, n_err, false);
    let p_sft = sorted_uniform(rng, cfg.prob_range, n_err, false);
    let p_rft = sorted_poisson(rng, n_err);
    let p_id = sorted_uniform(rng, cfg.prob_range, n_err, true);

    let mut predictions = Vec::with_capacity(k_total);
    let mut params = Vec::with_capacity(k_total);
    for k in 0..k_total {
        let alpha = t_vec[k] / n_t as f64;
        let mut frames: BTreeMap<i64, Vec<(u64, BoundingBox)>> = BTreeMap::new();
        for (idx, tr) in truth.iter().enumerate() {
            let d = alpha * (idx + 1) as f64;
            for t in tr.steps() {
                let b = perturb_box(rng, &tr.at(t, cfg), d, cfg.size_noise);
                frames.entry(t).or_default().push((idx as u64 + 1, b));
            }
        }
        let mut p = PredictionParams {
            index: k + 1,
            dislocation_scale: alpha,
            ..PredictionParams::default()
        };

        if let Some(j) = cfg.errors_from.and_then(|f| (k + 1).checked_sub(f)) {
            let mut next_label = n_t as u64 + 1;
            let mut missed = 0;
            for entries in frames.values_mut() {
                let n = entries.len();
                let drop = round_count(n as f64 * p_fr[j]).min(n);
                // Entries are in label order; the highest labels go first.
                entries.truncate(n - drop);
                missed += drop;
            }
            let n_sft = round_count(n_t as f64 * p_sft[j]).min(n_t);
            let mut chosen = sample(rng, n_t, n_sft).into_vec();
            chosen.sort_unstable();
            for &c in &chosen {
                let d = alpha * (c + 1) as f64;
                for t in truth[c].steps() {
                    let b = perturb_box(rng, &truth[c].at(t, cfg), d, cfg.size_noise);
                    frames.entry(t).or_default().push((next_label, b));
                }
                next_label += 1;
            }
            for _ in 0..p_rft[j] {
                let len = cfg.false_track_length as i64;
                let start = rng.random_range(w0..=w1 + 1 - len);
                for t in start..start + len {
                    let b = random_box(rng, cfg.centroid_range, cfg.height_range);
                    frames.entry(t).or_default().push((next_label, b));
                }
                next_label += 1;
            }
            let theta = 100.0 * p_id[j];
            for entries in frames.values_mut() {
                apply_swaps(entries, theta, cfg.swap_floor);
            }
            p.state_false = n_sft;
            p.missed = missed;
            p.random_false = p_rft[j];
            p.miss_fraction = Some(p_fr[j]);
            p.swap_threshold = Some(theta);
        }

        let mut by_label: BTreeMap<u64, Vec<(i64, Shape)>> = BTreeMap::new();
        for (t, entries) in frames {
            for (label, b) in entries {
                by_label
                    .entry(label)
                    .or_default()
                    .push((t, Shape::from_box(b)));
            }
        }
        let tracks = by_label
            .into_iter()
            .map(|(label, states)| Track::new(label, states))
            .collect::<Result<Vec<_>>>()?;
        predictions.push(TrackSet::new(cfg.window, tracks)?);
        params.push(p);
    }

    let reference = TrackSet::new(
        cfg.window,
        truth
            .iter()
            .enumerate()
            .map(|(idx, tr)| {
                Track::new(
                    idx as u64 + 1,
                    tr.steps().map(|t| (t, Shape::from_box(tr.at(t, cfg)))),
                )
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    Ok(SanityScenario {
        reference,
        predictions,
        params,
    })
}

// Swaps labels of instance pairs whose swap likelihood exceeds one half, from
// the most to the least overlapping pair, each instance swapping at most once.
fn apply_swaps(entries: &mut [(u64, BoundingBox)], theta: f64, floor: f64) {
    let mut candidates = Vec::new();
    for a in 0..entries.len() {
        for b in a + 1..entries.len() {
            let o = iou(
                &Shape::from_box(entries[a].1),
                &Shape::from_box(entries[b].1),
            )
            .expect("boxes");
            if swap_likelihood(100.0 * o, theta, floor) > 0.5 {
                candidates.push((o, a, b));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut used = vec![false; entries.len()];
    for (_, a, b) in candidates {
        if used[a] || used[b] {
            continue;
        }
        used[a] = true;
        used[b] = true;
        let la = entries[a].0;
        entries[a].0 = entries[b].0;
        entries[b].0 = la;
    }
}

/// Shifts every box by `U[-0.1 w, 0.1 w] x U[-0.1 h, 0.1 h]`, redrawing
/// until its IoU with the original reaches `min_iou`. Masks are kept as is.
pub fn perturb_to_approximate_truth<R: Rng + ?Sized>(
    reference: &ShapeSet,
    min_iou: f64,
    rng: &mut R,
) -> Result<ShapeSet> {
    if !(0.0..=1.0).contains(&min_iou) {
        return Err(Error::InvalidParameter(format!(
            "minimum IoU {min_iou} outside [0, 1]"
        )));
    }
    let shapes = reference
        .shapes()
        .iter()
        .map(|s| approximate_shape(s, min_iou, rng))
        .collect();
    Ok(ShapeSet::new(shapes)?.with_id(reference.id))
}

/// Track version of [`perturb_to_approximate_truth`], applied per state.
pub fn perturb_tracks_to_approximate_truth<R: Rng + ?Sized>(
    reference: &TrackSet,
    min_iou: f64,
    rng: &mut R,
) -> Result<TrackSet> {
    if !(0.0..=1.0).contains(&min_iou) {
        return Err(Error::InvalidParameter(format!(
            "minimum IoU {min_iou} outside [0, 1]"
        )));
    }
    let tracks = reference
        .tracks()
        .iter()
        .map(|tr| {
            Track::new(
                tr.label,
                tr.states()
                    .iter()
                    .map(|(&t, s)| (t, approximate_shape(s, min_iou, rng)))
                    .collect::<Vec<_>>(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    TrackSet::new(reference.window(), tracks)
}

fn approximate_shape<R: Rng + ?Sized>(s: &Shape, min_iou: f64, rng: &mut R) -> Shape {
    let Some(b) = s.as_box() else {
        return s.clone();
    };
    if min_iou >= 1.0 {
        return s.clone();
    }
    loop {
        let dx = rng.random_range(-0.1..=0.1) * b.width();
        let dy = rng.random_range(-0.1..=0.1) * b.height();
        let moved = Shape {
            geometry: Geometry::Box(b.translated(dx, dy)),
            ..s.clone()
        };
        if iou(s, &moved).expect("boxes") >= min_iou {
            return moved;
        }
    }
}

/// Square grid scenario with `2^k` objects, each prediction shifted left by
/// `2^(-k/2)` pixels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedSquares {
    pub k: u32,
    pub objects: usize,
    pub shift: f64,
    pub reference: ShapeSet,
    pub prediction: ShapeSet,
}

impl ShiftedSquares {
    /// IoU distance of every reference/prediction pair.
    pub fn pair_distance(&self) -> f64 {
        2.0 * self.shift / (10.0 + self.shift)
    }
}

pub fn shifted_squares_scenario(k: u32) -> Result<ShiftedSquares> {
    if !(1..=10).contains(&k) {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..=10")));
    }
    let objects = 1usize << k;
    let shift = 2f64.powf(-0.5 * k as f64);
    let side = (objects as f64).sqrt().ceil() as usize;
    let spacing = 30.0;
    let mut reference = Vec::with_capacity(objects);
    let mut prediction = Vec::with_capacity(objects);
    for idx in 0..objects {
        let x = (idx % side) as f64 * spacing;
        let y = (idx / side) as f64 * spacing;
        reference.push(Shape::bbox(x, y, x + 10.0, y + 10.0)?);
        prediction.push(Shape::bbox(x - shift, y, x + 10.0 - shift, y + 10.0)?);
    }
    Ok(ShiftedSquares {
        k,
        objects,
        shift,
        reference: ShapeSet::new(reference)?,
        prediction: ShapeSet::new(prediction)?,
    })
}
