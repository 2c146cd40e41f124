//! Monte Carlo harness: ranking errors of criteria on sanity scenarios.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{
    gen_detection_scenario, gen_tracking_scenario, perturb_to_approximate_truth,
    perturb_tracks_to_approximate_truth, ClassMode, DetectionSanityConfig, SanityScenario,
    TrackingSanityConfig,
};
use crate::classic::{default_fppi_grid, m_full_grid, Interpolation};
use crate::error::{Error, Result};
pub use crate::evaluate::Criterion;
pub use crate::evaluate::SeriesKey;
use crate::evaluate::{
    detection_scores, series_keys, tracking_scores, with_averages, ScoringSettings,
};
use crate::geometry::{BaseDistance, OverlapKind};
use crate::ranking::{
    avg_rank_distortion, avg_rank_sensitivity, avg_rank_switches, kendall_tau_normalized,
    ranks_from_scores, RankMatrix,
};
use crate::setmetrics::{ShapeSet, TrackSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    DetectSingle,
    DetectMulti,
    Track,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::DetectSingle => "detect-single",
            Task::DetectMulti => "detect-multi",
            Task::Track => "track",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detect-single" => Ok(Task::DetectSingle),
            "detect-multi" => Ok(Task::DetectMulti),
            "track" => Ok(Task::Track),
            other => Err(Error::Usage(format!("unknown sanity task '{other}'"))),
        }
    }
}

/// Whether a criterion applies to a sanity task.
pub fn supports(task: Task, c: Criterion) -> bool {
    match task {
        Task::DetectSingle => c.for_detection() && !c.needs_scores(),
        Task::DetectMulti => c.for_detection(),
        Task::Track => c.for_tracking(),
    }
}

/// Criteria evaluated by default for a task.
pub fn default_criteria(task: Task) -> Vec<Criterion> {
    Criterion::ALL
        .into_iter()
        .filter(|&c| supports(task, c))
        .collect()
}

/// Default threshold grid: `0.05:0.05:0.95` on the IoU scale, mapped to
/// `-0.9:0.1:0.9` on the GIoU scale.
pub fn default_grid(base: BaseDistance) -> Vec<f64> {
    let grid = m_full_grid();
    match base.overlap() {
        OverlapKind::Iou => grid,
        OverlapKind::Giou => (1..=19).map(|k| (k as f64 - 10.0) / 10.0).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Plain base distance; multi-class metric criteria use its
    /// score-augmented form.
    pub base: BaseDistance,
    pub criteria: Vec<Criterion>,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Order `p` of the set metrics.
    pub order: f64,
    /// Cut-off of the parameter-free OSPA and of the track base distance.
    pub cutoff: f64,
    pub interpolation: Interpolation,
    pub fppi_grid: Vec<f64>,
    pub approx_min_iou: f64,
    /// Present the prediction sets to the criteria in a random order per
    /// trial, so that index-based tie breaking carries no information about
    /// the pre-determined ranks.
    pub shuffle: bool,
    pub detection: DetectionSanityConfig,
    pub tracking: TrackingSanityConfig,
}

impl ExperimentConfig {
    pub fn new(task: Task, base: BaseDistance) -> Self {
        let base = base.with_augmentation(false);
        Self {
            task,
            base,
            criteria: default_criteria(task),
            grid: default_grid(base),
            trials: 100,
            seed: 0,
            order: 1.0,
            cutoff: 1.0,
            interpolation: Interpolation::coco(),
            fppi_grid: default_fppi_grid(),
            approx_min_iou: 0.9,
            shuffle: true,
            detection: DetectionSanityConfig::default(),
            tracking: TrackingSanityConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::InvalidParameter("no criteria selected".into()));
        }
        if let Some(c) = self.criteria.iter().find(|&&c| !supports(self.task, c)) {
            return Err(Error::Usage(format!(
                "criterion '{}' does not apply to task '{}'",
                c.name(),
                self.task.name()
            )));
        }
        if self.base.is_augmented() {
            return Err(Error::InvalidParameter(
                "the experiment base must be a plain base distance".into(),
            ));
        }
        validate_grid(self.base, &self.grid)?;
        if !(self.order >= 1.0 && self.order.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "order {} below 1",
                self.order
            )));
        }
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cut-off {} outside (0, 1]",
                self.cutoff
            )));
        }
        if !(0.0..=1.0).contains(&self.approx_min_iou) {
            return Err(Error::InvalidParameter(format!(
                "minimum IoU {} outside [0, 1]",
                self.approx_min_iou
            )));
        }
        match self.task {
            Task::Track => self.tracking.validate(),
            _ => self.detection.validate(),
        }
    }

    fn predictions(&self) -> usize {
        match self.task {
            Task::Track => self.tracking.predictions,
            _ => self.detection.predictions,
        }
    }
}

/// Checks that a threshold grid is non-empty, strictly increasing and inside
/// the open range of the overlap index.
pub fn validate_grid(base: BaseDistance, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty threshold grid".into()));
    }
    let lo = match base.overlap() {
        OverlapKind::Iou => 0.0,
        OverlapKind::Giou => -1.0,
    };
    for (j, &t) in grid.iter().enumerate() {
        if !(t >= lo && t < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold {t} outside [{lo}, 1)"
            )));
        }
        if j > 0 && !(t > grid[j - 1]) {
            return Err(Error::NonMonotoneAxis(j));
        }
    }
    Ok(())
}

fn settings<'a>(cfg: &'a ExperimentConfig) -> ScoringSettings<'a> {
    ScoringSettings {
        base: cfg.base,
        metric_base: cfg.base.with_augmentation(cfg.task == Task::DetectMulti),
        grid: &cfg.grid,
        order: cfg.order,
        cutoff: cfg.cutoff,
        interpolation: &cfg.interpolation,
        fppi_grid: &cfg.fppi_grid,
    }
}

/// Scores `[criterion][threshold or 0][prediction]`.
fn collect_scores(
    cfg: &ExperimentConfig,
    per_prediction: impl Iterator<Item = Result<Vec<Vec<f64>>>>,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut out: Vec<Vec<Vec<f64>>> = cfg
        .criteria
        .iter()
        .map(|c| vec![Vec::new(); if c.thresholded() { cfg.grid.len() } else { 1 }])
        .collect();
    for scores in per_prediction {
        for (ci, per_t) in scores?.into_iter().enumerate() {
            for (j, v) in per_t.into_iter().enumerate() {
                out[ci][j].push(v);
            }
        }
    }
    Ok(out)
}

fn score_detection(
    cfg: &ExperimentConfig,
    reference: &ShapeSet,
    predictions: &[ShapeSet],
) -> Result<Vec<Vec<Vec<f64>>>> {
    let s = settings(cfg);
    collect_scores(
        cfg,
        predictions
            .iter()
            .map(|p| detection_scores(&s, &cfg.criteria, &[(reference.clone(), p.clone())])),
    )
}

fn score_tracking(
    cfg: &ExperimentConfig,
    reference: &TrackSet,
    predictions: &[TrackSet],
) -> Result<Vec<Vec<Vec<f64>>>> {
    let s = settings(cfg);
    collect_scores(
        cfg,
        predictions
            .iter()
            .map(|p| tracking_scores(&s, &cfg.criteria, reference, p)),
    )
}

/// Per-trial outcome for one criterion.
#[derive(Debug, Clone)]
struct CriterionTrial {
    // Scores and ranks in prediction-set order.
    scores: Vec<Vec<f64>>,
    ranks: Vec<Vec<usize>>,
    errors: Vec<f64>,
    reliability: Option<[f64; 3]>,
}

// `order[i]` is the prediction set presented at position `i`.
fn evaluate(
    cfg: &ExperimentConfig,
    raw: Vec<Vec<Vec<f64>>>,
    order: &[usize],
) -> Result<Vec<CriterionTrial>> {
    let truth: Vec<usize> = order.iter().map(|&k| k + 1).collect();
    cfg.criteria
        .iter()
        .zip(raw)
        .map(|(&c, per_t)| {
            let reliability = if c.thresholded() && cfg.grid.len() >= 2 {
                let cols = per_t
                    .iter()
                    .map(|s| ranks_from_scores(s, c.direction()))
                    .collect::<Result<Vec<_>>>()?;
                let r = RankMatrix::from_columns(cfg.grid.clone(), &cols)?;
                Some([
                    avg_rank_switches(&r),
                    avg_rank_distortion(&r),
                    avg_rank_sensitivity(&r, true)?,
                ])
            } else {
                None
            };
            let scores = with_averages(cfg.base, &cfg.grid, c, per_t);
            let mut errors = Vec::with_capacity(scores.len());
            let mut ranks = Vec::with_capacity(scores.len());
            for s in &scores {
                let r = ranks_from_scores(s, c.direction())?;
                errors.push(kendall_tau_normalized(&r, &truth)?);
                ranks.push(unpermute(&r, order));
            }
            Ok(CriterionTrial {
                scores: scores.iter().map(|s| unpermute(s, order)).collect(),
                ranks,
                errors,
                reliability,
            })
        })
        .collect()
}

fn unpermute<T: Copy + Default>(v: &[T], order: &[usize]) -> Vec<T> {
    let mut out = vec![T::default(); v.len()];
    for (i, &k) in order.iter().enumerate() {
        out[k] = v[i];
    }
    out
}

/// Random generator of trial `trial`: one stream per trial of the base seed.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Scenario generated for one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialScenario {
    Detection(SanityScenario<ShapeSet>),
    Tracking(SanityScenario<TrackSet>),
}

/// The scenario the harness evaluates in trial `trial`.
pub fn trial_scenario(cfg: &ExperimentConfig, trial: usize) -> Result<TrialScenario> {
    cfg.validate()?;
    generate(cfg, &mut trial_rng(cfg.seed, trial))
}

fn generate(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<TrialScenario> {
    Ok(match cfg.task {
        Task::DetectSingle => TrialScenario::Detection(gen_detection_scenario(
            &cfg.detection,
            ClassMode::Single,
            rng,
        )?),
        Task::DetectMulti => TrialScenario::Detection(gen_detection_scenario(
            &cfg.detection,
            ClassMode::Multi,
            rng,
        )?),
        Task::Track => TrialScenario::Tracking(gen_tracking_scenario(&cfg.tracking, rng)?),
    })
}

/// Ground-truth outcome and, when requested, approximate-truth outcome.
fn run_trial(
    cfg: &ExperimentConfig,
    trial: usize,
    approximate: bool,
) -> Result<(Vec<CriterionTrial>, Option<Vec<CriterionTrial>>)> {
    let mut rng = trial_rng(cfg.seed, trial);
    let scenario = generate(cfg, &mut rng)?;
    let mut order: Vec<usize> = (0..cfg.predictions()).collect();
    if cfg.shuffle {
        order.shuffle(&mut rng);
    }
    let (truth, approx) = match &scenario {
        TrialScenario::Detection(s) => {
            let preds: Vec<ShapeSet> = order.iter().map(|&k| s.predictions[k].clone()).collect();
            let truth = score_detection(cfg, &s.reference, &preds)?;
            let approx = if approximate {
                let r = perturb_to_approximate_truth(&s.reference, cfg.approx_min_iou, &mut rng)?;
                Some(score_detection(cfg, &r, &preds)?)
            } else {
                None
            };
            (truth, approx)
        }
        TrialScenario::Tracking(s) => {
            let preds: Vec<TrackSet> = order.iter().map(|&k| s.predictions[k].clone()).collect();
            let truth = score_tracking(cfg, &s.reference, &preds)?;
            let approx = if approximate {
                let r = perturb_tracks_to_approximate_truth(
                    &s.reference,
                    cfg.approx_min_iou,
                    &mut rng,
                )?;
                Some(score_tracking(cfg, &r, &preds)?)
            } else {
                None
            };
            (truth, approx)
        }
    };
    Ok((
        evaluate(cfg, truth, &order)?,
        approx.map(|a| evaluate(cfg, a, &order)).transpose()?,
    ))
}

/// Monte Carlo mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    #[serde(flatten)]
    pub key: SeriesKey,
    pub error: Stat,
}

/// Mean reliability indicators over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    pub rank_switches: f64,
    pub rank_distortion: f64,
    pub rank_sensitivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub criterion: Criterion,
    pub series: Vec<SeriesSummary>,
    /// Threshold series with the lowest mean error.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal: Option<SeriesSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reliability: Option<Reliability>,
}

impl CriterionSummary {
    /// Series with the given label (`"all"` for parameter-free criteria).
    pub fn series(&self, label: &str) -> Option<&SeriesSummary> {
        self.series.iter().find(|s| s.key.label == label)
    }

    /// Series at threshold `t`.
    pub fn at(&self, t: f64) -> Option<&SeriesSummary> {
        self.series
            .iter()
            .find(|s| s.key.threshold.is_some_and(|x| (x - t).abs() < 1e-9))
    }
}

/// Scores and ranks of the first trial, for plotting rank-vs-threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSeries {
    pub criterion: Criterion,
    pub key: SeriesKey,
    pub scores: Vec<f64>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityReport {
    pub config: ExperimentConfig,
    pub tie_rule: String,
    pub criteria: Vec<CriterionSummary>,
    pub sample: Vec<SampleSeries>,
}

impl SanityReport {
    pub fn criterion(&self, c: Criterion) -> Option<&CriterionSummary> {
        self.criteria.iter().find(|s| s.criterion == c)
    }
}

pub const TIE_RULE: &str = "equal scores are ranked by prediction index";

fn summarize(cfg: &ExperimentConfig, trials: &[Vec<CriterionTrial>]) -> Vec<CriterionSummary> {
    cfg.criteria
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let keys = series_keys(cfg.base, &cfg.grid, c);
            let series: Vec<SeriesSummary> = keys
                .into_iter()
                .enumerate()
                .map(|(si, key)| {
                    let v: Vec<f64> = trials.iter().map(|t| t[ci].errors[si]).collect();
                    SeriesSummary {
                        key,
                        error: Stat::of(&v),
                    }
                })
                .collect();
            let optimal = if c.thresholded() {
                series
                    .iter()
                    .filter(|s| s.key.threshold.is_some())
                    .fold(None::<&SeriesSummary>, |best, s| match best {
                        Some(b) if b.error.mean <= s.error.mean => Some(b),
                        _ => Some(s),
                    })
                    .cloned()
            } else {
                None
            };
            let rel: Vec<[f64; 3]> = trials.iter().filter_map(|t| t[ci].reliability).collect();
            let reliability = (!rel.is_empty()).then(|| {
                let n = rel.len() as f64;
                Reliability {
                    rank_switches: rel.iter().map(|r| r[0]).sum::<f64>() / n,
                    rank_distortion: rel.iter().map(|r| r[1]).sum::<f64>() / n,
                    rank_sensitivity: rel.iter().map(|r| r[2]).sum::<f64>() / n,
                }
            });
            CriterionSummary {
                criterion: c,
                series,
                optimal,
                reliability,
            }
        })
        .collect()
}

fn sample(cfg: &ExperimentConfig, first: &[CriterionTrial]) -> Vec<SampleSeries> {
    let mut out = Vec::new();
    for (&c, t) in cfg.criteria.iter().zip(first) {
        for ((key, scores), ranks) in series_keys(cfg.base, &cfg.grid, c)
            .into_iter()
            .zip(&t.scores)
            .zip(&t.ranks)
        {
            out.push(SampleSeries {
                criterion: c,
                key,
                scores: scores.clone(),
                ranks: ranks.clone(),
            });
        }
    }
    out
}

fn run_all(
    cfg: &ExperimentConfig,
    approximate: bool,
) -> Result<Vec<(Vec<CriterionTrial>, Option<Vec<CriterionTrial>>)>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial, approximate))
        .collect()
}

/// Ranking errors of every selected criterion against the pre-determined
/// ranks, over `cfg.trials` independent scenarios.
pub fn run_sanity_experiment(cfg: &ExperimentConfig) -> Result<SanityReport> {
    let trials: Vec<Vec<CriterionTrial>> =
        run_all(cfg, false)?.into_iter().map(|(t, _)| t).collect();
    Ok(SanityReport {
        config: cfg.clone(),
        tie_rule: TIE_RULE.into(),
        criteria: summarize(cfg, &trials),
        sample: sample(cfg, &trials[0]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencySeries {
    #[serde(flatten)]
    pub key: SeriesKey,
    pub truth: Stat,
    pub approximate: Stat,
    /// Approximate-truth mean error minus ground-truth mean error.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub criterion: Criterion,
    pub series: Vec<ConsistencySeries>,
}

impl ConsistencyRow {
    pub fn series(&self, label: &str) -> Option<&ConsistencySeries> {
        self.series.iter().find(|s| s.key.label == label)
    }

    pub fn at(&self, t: f64) -> Option<&ConsistencySeries> {
        self.series
            .iter()
            .find(|s| s.key.threshold.is_some_and(|x| (x - t).abs() < 1e-9))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub config: ExperimentConfig,
    pub tie_rule: String,
    pub criteria: Vec<ConsistencyRow>,
}

impl ConsistencyReport {
    pub fn criterion(&self, c: Criterion) -> Option<&ConsistencyRow> {
        self.criteria.iter().find(|s| s.criterion == c)
    }
}

/// Ranking errors against the pre-determined ranks with the predictions
/// evaluated once against the ground truth and once against an approximate
/// truth obtained by perturbing it.
pub fn run_consistency_experiment(cfg: &ExperimentConfig) -> Result<ConsistencyReport> {
    let (truth, approx): (Vec<_>, Vec<_>) = run_all(cfg, true)?
        .into_iter()
        .map(|(t, a)| (t, a.expect("approximate outcome requested")))
        .unzip();
    let t_sum = summarize(cfg, &truth);
    let a_sum = summarize(cfg, &approx);
    let criteria = t_sum
        .into_iter()
        .zip(a_sum)
        .map(|(t, a)| ConsistencyRow {
            criterion: t.criterion,
            series: t
                .series
                .into_iter()
                .zip(a.series)
                .map(|(ts, as_)| ConsistencySeries {
                    gap: as_.error.mean - ts.error.mean,
                    key: ts.key,
                    truth: ts.error,
                    approximate: as_.error,
                })
                .collect(),
        })
        .collect();
    Ok(ConsistencyReport {
        config: cfg.clone(),
        tie_rule: TIE_RULE.into(),
        criteria,
    })
}
