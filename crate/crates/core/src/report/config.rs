//! Run configuration from flat `key = value` files and command-line values.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classic::{m_full_grid, m_partial_grid, AssignMode, Interpolation};
use crate::error::{Error, Result};
use crate::evaluate::Criterion;
use crate::geometry::{BaseDistance, OverlapKind, ShapeKind};
use crate::sanity::{default_criteria, default_grid, validate_grid, ExperimentConfig, Task};

/// Configuration keys with their values, later entries overriding earlier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Values(BTreeMap<String, String>);

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Values {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, label: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Record {
                path: label.to_string(),
                index: n + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            map.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(
            &std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?,
            &path.display().to_string(),
        )
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Usage(format!("unknown configuration key '{k}'"))),
            None => Ok(()),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Usage(format!("invalid value '{v}' for '{key}'")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| {
            v.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }
}

/// Parses a threshold grid: `default`, `m-full`, `m-partial`,
/// `start:step:end`, or a comma-separated list.
pub fn parse_grid(s: &str, base: BaseDistance) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("invalid threshold grid '{s}'"));
    let grid = match s.trim() {
        "default" => default_grid(base),
        "m-full" => match base.overlap() {
            OverlapKind::Iou => m_full_grid(),
            OverlapKind::Giou => default_grid(base),
        },
        "m-partial" => match base.overlap() {
            OverlapKind::Iou => m_partial_grid(),
            OverlapKind::Giou => default_grid(base)
                .into_iter()
                .filter(|&t| t >= 0.0)
                .collect(),
        },
        r if r.contains(':') => {
            let parts: Vec<f64> = r
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let [start, step, end] = parts[..] else {
                return Err(bad());
            };
            if !(step > 0.0) || end < start {
                return Err(bad());
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        list => list
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?,
    };
    validate_grid(base, &grid)?;
    Ok(grid)
}

pub fn parse_interpolation(s: &str) -> Result<Interpolation> {
    match s {
        "all-point" => Ok(Interpolation::AllPoint),
        "coco" | "101-point" => Ok(Interpolation::coco()),
        "11-point" => Ok(Interpolation::Grid(
            (0..=10).map(|k| k as f64 / 10.0).collect(),
        )),
        other => Err(Error::Usage(format!("unknown interpolation '{other}'"))),
    }
}

fn parse_criteria(names: &[String], mode: AssignMode) -> Result<Vec<Criterion>> {
    let mut out: Vec<Criterion> = Vec::new();
    for n in names {
        let c = Criterion::parse(n, mode)?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

/// What the evaluated files hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalTask {
    /// Boxes from COCO-style JSON.
    Detect,
    /// Masks from COCO-style JSON.
    Segment,
    /// Boxes tracked over time from MOT-style CSV.
    Track,
}

impl EvalTask {
    pub fn shape_kind(self) -> ShapeKind {
        match self {
            EvalTask::Segment => ShapeKind::Mask,
            _ => ShapeKind::Box,
        }
    }

    pub fn supports(self, c: Criterion) -> bool {
        match self {
            EvalTask::Track => c.for_tracking(),
            _ => c.for_detection(),
        }
    }

    /// Default criteria; score-based ones only when the predictions carry
    /// scores.
    pub fn default_criteria(self, mode: AssignMode, scored: bool) -> Vec<Criterion> {
        Criterion::ALL
            .into_iter()
            .filter(|&c| self.supports(c) && (scored || !c.needs_scores()))
            .filter(|&c| match c {
                Criterion::MapGreedy | Criterion::LogAmrGreedy => mode == AssignMode::Greedy,
                Criterion::MapOptimal | Criterion::LogAmrOptimal => mode == AssignMode::Optimal,
                _ => true,
            })
            .collect()
    }
}

impl std::str::FromStr for EvalTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detect" => Ok(EvalTask::Detect),
            "segment" => Ok(EvalTask::Segment),
            "track" => Ok(EvalTask::Track),
            other => Err(Error::Usage(format!("unknown task '{other}'"))),
        }
    }
}

/// Configuration of a file evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: EvalTask,
    pub base: BaseDistance,
    pub grid: Vec<f64>,
    /// Empty until resolved against the inputs.
    pub criteria: Vec<Criterion>,
    pub assignment: AssignMode,
    pub interpolation: Interpolation,
    pub order: f64,
    pub cutoff: f64,
    pub reference: String,
    pub predictions: Vec<String>,
}

pub const RUN_KEYS: &[&str] = &[
    "task",
    "base",
    "grid",
    "criteria",
    "assignment",
    "interpolation",
    "order",
    "cutoff",
    "reference",
    "predictions",
    "out",
];

impl RunConfig {
    pub fn from_values(v: &Values) -> Result<Self> {
        v.check_keys(RUN_KEYS)?;
        let task: EvalTask = v
            .parsed("task")?
            .ok_or_else(|| Error::Usage("missing 'task'".into()))?;
        let base: BaseDistance = v.parsed("base")?.unwrap_or(BaseDistance::Iou);
        let assignment: AssignMode = v.parsed("assignment")?.unwrap_or(AssignMode::Optimal);
        let grid = match v.get("grid") {
            Some(g) => parse_grid(g, base)?,
            None => default_grid(base),
        };
        let criteria = match v.list("criteria") {
            Some(names) if !(names.len() == 1 && names[0] == "default") => {
                parse_criteria(&names, assignment)?
            }
            _ => Vec::new(),
        };
        let interpolation = match v.get("interpolation") {
            Some(s) => parse_interpolation(s)?,
            None => Interpolation::coco(),
        };
        let reference = v
            .get("reference")
            .ok_or_else(|| Error::Usage("missing 'reference'".into()))?
            .to_string();
        let predictions = v.list("predictions").unwrap_or_default();
        if predictions.is_empty() {
            return Err(Error::Usage(
                "at least one prediction file is needed".into(),
            ));
        }
        let cfg = Self {
            task,
            base,
            grid,
            criteria,
            assignment,
            interpolation,
            order: v.parsed("order")?.unwrap_or(1.0),
            cutoff: v.parsed("cutoff")?.unwrap_or(1.0),
            reference,
            predictions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(self.base, &self.grid)?;
        if let Some(c) = self.criteria.iter().find(|&&c| !self.task.supports(c)) {
            return Err(Error::Usage(format!(
                "criterion '{c}' does not apply to task '{:?}'",
                self.task
            )));
        }
        if self.task == EvalTask::Track && self.base.is_augmented() {
            return Err(Error::Usage(
                "track files carry no scores; use a plain base".into(),
            ));
        }
        if !(self.order >= 1.0 && self.order.is_finite()) {
            return Err(Error::Usage(format!("order {} below 1", self.order)));
        }
        if !(self.cutoff > 0.0 && self.cutoff <= 1.0) {
            return Err(Error::Usage(format!(
                "cut-off {} outside (0, 1]",
                self.cutoff
            )));
        }
        Ok(())
    }
}

pub const EXPERIMENT_KEYS: &[&str] = &[
    "task",
    "base",
    "grid",
    "criteria",
    "assignment",
    "interpolation",
    "order",
    "cutoff",
    "trials",
    "seed",
    "min-iou",
    "shuffle",
    "out",
];

/// Sanity or consistency experiment configuration; `seed` falls back to
/// `default_seed`.
pub fn experiment_from_values(v: &Values, default_seed: u64) -> Result<ExperimentConfig> {
    v.check_keys(EXPERIMENT_KEYS)?;
    let task: Task = v
        .parsed("task")?
        .ok_or_else(|| Error::Usage("missing 'task'".into()))?;
    let base: BaseDistance = v.parsed("base")?.unwrap_or(BaseDistance::Iou);
    if base.is_augmented() {
        return Err(Error::Usage(
            "experiments take a plain base; multi-class metrics augment it".into(),
        ));
    }
    let mut cfg = ExperimentConfig::new(task, base);
    let mode: AssignMode = v.parsed("assignment")?.unwrap_or(AssignMode::Optimal);
    if let Some(g) = v.get("grid") {
        cfg.grid = parse_grid(g, base)?;
    }
    cfg.criteria = match v.list("criteria") {
        Some(names) if !(names.len() == 1 && names[0] == "default") => {
            parse_criteria(&names, mode)?
        }
        _ => default_criteria(task),
    };
    if let Some(s) = v.get("interpolation") {
        cfg.interpolation = parse_interpolation(s)?;
    }
    cfg.trials = v.parsed("trials")?.unwrap_or(cfg.trials);
    cfg.seed = v.parsed("seed")?.unwrap_or(default_seed);
    cfg.order = v.parsed("order")?.unwrap_or(cfg.order);
    cfg.cutoff = v.parsed("cutoff")?.unwrap_or(cfg.cutoff);
    cfg.approx_min_iou = v.parsed("min-iou")?.unwrap_or(cfg.approx_min_iou);
    cfg.shuffle = v.parsed("shuffle")?.unwrap_or(cfg.shuffle);
    cfg.validate()?;
    Ok(cfg)
}
