//! Writes a generated sanity scenario as ordinary input files plus a JSON
//! sidecar holding the seed and the per-prediction perturbation parameters.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::coco::{coco_reference_json, coco_results_json, load_coco};
use super::mot::{load_mot, write_mot};
use crate::error::{Error, Result};
use crate::geometry::ShapeKind;
use crate::sanity::{
    trial_scenario, ExperimentConfig, PredictionParams, SanityScenario, Task, TrialScenario,
};
use crate::setmetrics::{ShapeSet, TrackSet};

pub const SIDECAR: &str = "scenario.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSidecar {
    pub task: Task,
    pub seed: u64,
    pub trial: usize,
    /// Generator configuration.
    pub generator: serde_json::Value,
    pub reference: String,
    pub predictions: Vec<String>,
    pub params: Vec<PredictionParams>,
}

/// Image id used for the single image of a detection scenario.
const IMAGE_ID: u64 = 1;

/// Generates the scenario of trial `trial` and writes it into `dir`.
pub fn dump_scenario(dir: &Path, cfg: &ExperimentConfig, trial: usize) -> Result<ScenarioSidecar> {
    std::fs::create_dir_all(dir)?;
    let write_json = |name: &str, v: &serde_json::Value| -> Result<()> {
        let f = BufWriter::new(File::create(dir.join(name))?);
        serde_json::to_writer_pretty(f, v)?;
        Ok(())
    };
    let (reference, predictions, params, generator) = match trial_scenario(cfg, trial)? {
        TrialScenario::Detection(s) => {
            let reference = "reference.json".to_string();
            write_json(
                &reference,
                &coco_reference_json(&[(IMAGE_ID, &s.reference)]),
            )?;
            let mut names = Vec::new();
            for (k, p) in s.predictions.iter().enumerate() {
                let name = format!("prediction_{:02}.json", k + 1);
                write_json(&name, &coco_results_json(&[(IMAGE_ID, p)]))?;
                names.push(name);
            }
            (
                reference,
                names,
                s.params,
                serde_json::to_value(&cfg.detection)?,
            )
        }
        TrialScenario::Tracking(s) => {
            let reference = "reference.csv".to_string();
            write_mot(&s.reference, File::create(dir.join(&reference))?)?;
            let mut names = Vec::new();
            for (k, p) in s.predictions.iter().enumerate() {
                let name = format!("prediction_{:02}.csv", k + 1);
                write_mot(p, File::create(dir.join(&name))?)?;
                names.push(name);
            }
            (
                reference,
                names,
                s.params,
                serde_json::to_value(&cfg.tracking)?,
            )
        }
    };
    let sidecar = ScenarioSidecar {
        task: cfg.task,
        seed: cfg.seed,
        trial,
        generator,
        reference,
        predictions,
        params,
    };
    write_json(SIDECAR, &serde_json::to_value(&sidecar)?)?;
    Ok(sidecar)
}

fn read_sidecar(dir: &Path) -> Result<ScenarioSidecar> {
    let path = dir.join(SIDECAR);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::file(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn single_image(dir: &Path, name: &str) -> Result<ShapeSet> {
    let c = load_coco(&dir.join(name), ShapeKind::Box)?;
    Ok(c.sets.into_values().next().unwrap_or_else(ShapeSet::empty))
}

pub fn load_dumped_detection(dir: &Path) -> Result<(ScenarioSidecar, SanityScenario<ShapeSet>)> {
    let sc = read_sidecar(dir)?;
    if sc.task == Task::Track {
        return Err(Error::Usage("the dumped scenario holds tracks".into()));
    }
    let reference = single_image(dir, &sc.reference)?;
    let predictions = sc
        .predictions
        .iter()
        .map(|n| single_image(dir, n))
        .collect::<Result<Vec<_>>>()?;
    let params = sc.params.clone();
    Ok((
        sc,
        SanityScenario {
            reference,
            predictions,
            params,
        },
    ))
}

pub fn load_dumped_tracking(dir: &Path) -> Result<(ScenarioSidecar, SanityScenario<TrackSet>)> {
    let sc = read_sidecar(dir)?;
    if sc.task != Task::Track {
        return Err(Error::Usage("the dumped scenario holds shape sets".into()));
    }
    let window = sc
        .generator
        .get("window")
        .and_then(|w| serde_json::from_value::<(i64, i64)>(w.clone()).ok())
        .ok_or_else(|| Error::Format {
            path: dir.join(SIDECAR).display().to_string(),
            message: "generator has no window".into(),
        })?;
    let load = |n: &str| -> Result<TrackSet> { load_mot(&dir.join(n))?.tracks.with_window(window) };
    let reference = load(&sc.reference)?;
    let predictions = sc
        .predictions
        .iter()
        .map(|n| load(n))
        .collect::<Result<Vec<_>>>()?;
    let params = sc.params.clone();
    Ok((
        sc,
        SanityScenario {
            reference,
            predictions,
            params,
        },
    ))
}
