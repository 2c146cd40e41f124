//! Tracks, track sets and the time-averaged track distance.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{emd_from, hausdorff_from, ospa_from, MetricConfig};
use crate::assignment::CostMatrix;
use crate::error::{Error, Result};
use crate::geometry::{BaseDistance, Shape};

/// A labeled map from time steps to shapes. The domain may have gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub label: u64,
    states: BTreeMap<i64, Shape>,
}

impl Track {
    pub fn new(label: u64, states: impl IntoIterator<Item = (i64, Shape)>) -> Result<Self> {
        let states: BTreeMap<i64, Shape> = states.into_iter().collect();
        if states.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "track {label} has an empty domain"
            )));
        }
        Ok(Self { label, states })
    }

    pub fn get(&self, t: i64) -> Option<&Shape> {
        self.states.get(&t)
    }

    pub fn states(&self) -> &BTreeMap<i64, Shape> {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first_step(&self) -> i64 {
        *self.states.keys().next().unwrap()
    }

    pub fn last_step(&self) -> i64 {
        *self.states.keys().next_back().unwrap()
    }
}

/// Tracks with unique labels over a shared, inclusive time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSet {
    window: (i64, i64),
    tracks: Vec<Track>,
}

impl TrackSet {
    pub fn new(window: (i64, i64), tracks: Vec<Track>) -> Result<Self> {
        if window.0 > window.1 {
            return Err(Error::InvalidParameter(format!(
                "empty window {}..={}",
                window.0, window.1
            )));
        }
        let mut seen = HashSet::new();
        for t in &tracks {
            if !seen.insert(t.label) {
                return Err(Error::DuplicateLabel(t.label));
            }
            if t.first_step() < window.0 || t.last_step() > window.1 {
                return Err(Error::InvalidParameter(format!(
                    "track {} spans {}..={}, outside the window {}..={}",
                    t.label,
                    t.first_step(),
                    t.last_step(),
                    window.0,
                    window.1
                )));
            }
        }
        Ok(Self { window, tracks })
    }

    /// Track set whose window is the range of observed time steps.
    pub fn from_tracks(tracks: Vec<Track>) -> Result<Self> {
        let window = observed_range(&tracks).unwrap_or((0, 0));
        Self::new(window, tracks)
    }

    pub fn empty(window: (i64, i64)) -> Result<Self> {
        Self::new(window, Vec::new())
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn into_tracks(self) -> Vec<Track> {
        self.tracks
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// Range of time steps actually occupied by some track.
    pub fn observed_range(&self) -> Option<(i64, i64)> {
        observed_range(&self.tracks)
    }

    pub fn with_window(self, window: (i64, i64)) -> Result<Self> {
        Self::new(window, self.tracks)
    }

    /// Number of states at each time step of the window.
    pub fn counts_per_step(&self) -> Vec<usize> {
        let (lo, hi) = self.window;
        let mut counts = vec![0; (hi - lo + 1) as usize];
        for t in &self.tracks {
            for &s in t.states.keys() {
                counts[(s - lo) as usize] += 1;
            }
        }
        counts
    }
}

fn observed_range(tracks: &[Track]) -> Option<(i64, i64)> {
    let lo = tracks.iter().map(Track::first_step).min()?;
    let hi = tracks.iter().map(Track::last_step).max()?;
    Some((lo, hi))
}

/// Base distances between the states present at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBlock {
    pub t: i64,
    /// Indices of reference tracks present at `t`.
    pub refs: Vec<usize>,
    /// Indices of predicted tracks present at `t`.
    pub preds: Vec<usize>,
    /// Distances, rows following `refs` and columns following `preds`.
    pub costs: CostMatrix,
}

/// All per-step base distances between two track sets, computed once and
/// shared by the track metrics and the frame-based criteria.
#[derive(Debug, Clone)]
pub struct TrackDistances {
    rows: usize,
    cols: usize,
    ref_len: Vec<usize>,
    pred_len: Vec<usize>,
    shared: Vec<Vec<f64>>,
    frames: Vec<FrameBlock>,
}

impl TrackDistances {
    pub fn new(reference: &TrackSet, prediction: &TrackSet, base: BaseDistance) -> Result<Self> {
        if reference.window != prediction.window {
            return Err(Error::WindowMismatch(reference.window, prediction.window));
        }
        let (m, n) = (reference.len(), prediction.len());
        let mut steps: BTreeMap<i64, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for (i, t) in reference.tracks.iter().enumerate() {
            for &s in t.states.keys() {
                steps.entry(s).or_default().0.push(i);
            }
        }
        for (j, t) in prediction.tracks.iter().enumerate() {
            for &s in t.states.keys() {
                steps.entry(s).or_default().1.push(j);
            }
        }
        let mut shared = vec![Vec::new(); m * n];
        let mut frames = Vec::with_capacity(steps.len());
        for (t, (refs, preds)) in steps {
            let mut data = Vec::with_capacity(refs.len() * preds.len());
            for &i in &refs {
                let a = &reference.tracks[i].states[&t];
                for &j in &preds {
                    let d = base.distance(a, &prediction.tracks[j].states[&t])?;
                    shared[i * n + j].push(d);
                    data.push(d);
                }
            }
            let costs = CostMatrix::new(refs.len(), preds.len(), data)?;
            frames.push(FrameBlock {
                t,
                refs,
                preds,
                costs,
            });
        }
        Ok(Self {
            rows: m,
            cols: n,
            ref_len: reference.tracks.iter().map(Track::len).collect(),
            pred_len: prediction.tracks.iter().map(Track::len).collect(),
            shared,
            frames,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Time steps at which at least one track of either set is present.
    pub fn frames(&self) -> &[FrameBlock] {
        &self.frames
    }

    pub fn ref_len(&self, i: usize) -> usize {
        self.ref_len[i]
    }

    pub fn pred_len(&self, j: usize) -> usize {
        self.pred_len[j]
    }

    /// Distances at the time steps shared by reference `i` and prediction `j`.
    pub fn shared(&self, i: usize, j: usize) -> &[f64] {
        &self.shared[i * self.cols + j]
    }

    /// Time-averaged track distance for every reference/prediction pair.
    pub fn base_matrix(&self, cutoff: f64) -> CostMatrix {
        CostMatrix::from_fn(self.rows, self.cols, |i, j| {
            averaged(self.shared(i, j), self.ref_len[i], self.pred_len[j], cutoff)
        })
        .expect("averaged distances lie in [0, cutoff]")
    }
}

// Mean over the union of both domains of the single-state OSPA: the clipped
// distance where both tracks exist and the cut-off where only one does.
fn averaged(shared: &[f64], len_f: usize, len_g: usize, c: f64) -> f64 {
    let both = shared.len();
    let union = len_f + len_g - both;
    if union == 0 {
        return 0.0;
    }
    let clipped: f64 = shared.iter().map(|&d| d.min(c)).sum();
    let single = (len_f + len_g - 2 * both) as f64 * c;
    ((clipped + single) / union as f64).clamp(0.0, c)
}

pub fn track_base_distance(f: &Track, g: &Track, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    let mut shared = Vec::new();
    for (t, a) in &f.states {
        if let Some(b) = g.states.get(t) {
            shared.push(cfg.base.distance(a, b)?);
        }
    }
    Ok(averaged(&shared, f.len(), g.len(), cfg.cutoff))
}

/// OSPA over sets of tracks with the time-averaged track distance.
pub fn ospa2(f: &TrackSet, g: &TrackSet, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    let d = TrackDistances::new(f, g, cfg.base)?;
    Ok(ospa_from(&d.base_matrix(cfg.cutoff), cfg.order, cfg.cutoff))
}

pub fn hausdorff_tracks(f: &TrackSet, g: &TrackSet, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    let d = TrackDistances::new(f, g, cfg.base)?;
    Ok(hausdorff_from(&d.base_matrix(cfg.cutoff)))
}

pub fn emd_tracks(f: &TrackSet, g: &TrackSet, cfg: &MetricConfig) -> Result<f64> {
    cfg.validate()?;
    let d = TrackDistances::new(f, g, cfg.base)?;
    Ok(emd_from(&d.base_matrix(cfg.cutoff), cfg.order))
}
