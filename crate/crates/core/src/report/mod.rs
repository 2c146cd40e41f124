//! Evaluation reports: criterion scores and ranks over files, metadata with
//! a configuration hash, and JSON/CSV output of every report type.

mod config;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    experiment_from_values, parse_grid, parse_interpolation, EvalTask, RunConfig, Values,
    EXPERIMENT_KEYS, RUN_KEYS,
};

use crate::classic::f1_score;
use crate::error::{Error, Result};
use crate::evaluate::{
    detection_scores, series_keys, tracking_scores, with_averages, Criterion, ScoringSettings,
    SeriesKey,
};
use crate::geometry::BaseDistance;
use crate::io::{align_windows, load_coco, load_mot, pair_images};
use crate::ranking::{
    avg_rank_distortion, avg_rank_sensitivity, avg_rank_switches, kendall_tau_normalized,
    ranks_from_scores, RankMatrix,
};
use crate::sanity::{shifted_squares_scenario, ConsistencyReport, SanityReport, TIE_RULE};
use crate::setmetrics::{emd, hausdorff, ospa, ospa_unnormalized, MetricConfig};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the compact JSON form of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub path: String,
    /// Records (annotations or rows) read from the file.
    pub records: usize,
    /// Shapes or track states held after loading.
    pub shapes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tie_rule: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputSummary>,
}

impl Metadata {
    pub fn new<T: Serialize>(config: &T, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_hash: config_hash(config)?,
            seed,
            tie_rule: TIE_RULE.into(),
            inputs: Vec::new(),
        })
    }
}

/// A report body with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub metadata: Metadata,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    #[serde(flatten)]
    pub key: SeriesKey,
    /// One score per algorithm.
    pub scores: Vec<f64>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionScores {
    pub criterion: Criterion,
    pub series: Vec<ScoreSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KendallMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityRow {
    pub criterion: Criterion,
    pub rank_switches: f64,
    pub rank_distortion: f64,
    pub rank_sensitivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub algorithms: Vec<String>,
    pub criteria: Vec<CriterionScores>,
    /// Ranking distance between criteria, over their parameter-free and
    /// averaged series; present with two or more algorithms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kendall: Option<KendallMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reliability: Vec<ReliabilityRow>,
}

fn settings(cfg: &RunConfig) -> ScoringSettings<'_> {
    ScoringSettings {
        base: cfg.base.with_augmentation(false),
        metric_base: cfg.base,
        grid: &cfg.grid,
        order: cfg.order,
        cutoff: cfg.cutoff,
        interpolation: &cfg.interpolation,
        fppi_grid: DEFAULT_FPPI.get_or_init(crate::classic::default_fppi_grid),
    }
}

static DEFAULT_FPPI: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();

fn algorithm_name(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

/// Loads the configured files, resolves the default criteria and scores
/// every prediction file against the reference.
pub fn evaluate_files(mut cfg: RunConfig) -> Result<Document<EvaluationReport>> {
    cfg.validate()?;
    let mut inputs = Vec::new();
    // [algorithm][criterion][threshold or 0]
    let mut raw: Vec<Vec<Vec<f64>>> = Vec::new();
    match cfg.task {
        EvalTask::Detect | EvalTask::Segment => {
            let kind = cfg.task.shape_kind();
            let reference = load_coco(Path::new(&cfg.reference), kind)?;
            inputs.push(InputSummary {
                path: cfg.reference.clone(),
                records: reference.records,
                shapes: reference.shape_count(),
            });
            let preds = cfg
                .predictions
                .iter()
                .map(|p| load_coco(Path::new(p), kind))
                .collect::<Result<Vec<_>>>()?;
            for (p, c) in cfg.predictions.iter().zip(&preds) {
                inputs.push(InputSummary {
                    path: p.clone(),
                    records: c.records,
                    shapes: c.shape_count(),
                });
            }
            if cfg.criteria.is_empty() {
                let scored = preds.iter().all(|c| {
                    c.sets
                        .values()
                        .all(|s| s.shapes().iter().all(|x| x.score.is_some()))
                });
                cfg.criteria = cfg.task.default_criteria(cfg.assignment, scored);
            }
            let s = settings(&cfg);
            for pred in &preds {
                let images: Vec<_> = pair_images(&reference, pred)
                    .into_iter()
                    .map(|(_, r, p)| (r, p))
                    .collect();
                raw.push(detection_scores(&s, &cfg.criteria, &images)?);
            }
        }
        EvalTask::Track => {
            let reference = load_mot(Path::new(&cfg.reference))?;
            inputs.push(InputSummary {
                path: cfg.reference.clone(),
                records: reference.rows,
                shapes: reference.tracks.counts_per_step().iter().sum(),
            });
            if cfg.criteria.is_empty() {
                cfg.criteria = cfg.task.default_criteria(cfg.assignment, false);
            }
            let s = settings(&cfg);
            for p in &cfg.predictions {
                let pred = load_mot(Path::new(p))?;
                inputs.push(InputSummary {
                    path: p.clone(),
                    records: pred.rows,
                    shapes: pred.tracks.counts_per_step().iter().sum(),
                });
                let (r, q) = align_windows(reference.tracks.clone(), pred.tracks)?;
                raw.push(tracking_scores(&s, &cfg.criteria, &r, &q)?);
            }
        }
    }
    for i in &inputs {
        if i.records != i.shapes {
            return Err(Error::Format {
                path: i.path.clone(),
                message: format!("read {} records but hold {} shapes", i.records, i.shapes),
            });
        }
    }
    let algorithms: Vec<String> = cfg.predictions.iter().map(|p| algorithm_name(p)).collect();
    let body = build_report(cfg, algorithms, raw)?;
    let mut metadata = Metadata::new(&body.config, None)?;
    metadata.inputs = inputs;
    Ok(Document { metadata, body })
}

/// Assembles a report from raw scores `[algorithm][criterion][threshold]`.
pub fn build_report(
    cfg: RunConfig,
    algorithms: Vec<String>,
    raw: Vec<Vec<Vec<f64>>>,
) -> Result<EvaluationReport> {
    let mut criteria = Vec::new();
    let mut reliability = Vec::new();
    for (ci, &c) in cfg.criteria.iter().enumerate() {
        let n_t = raw.first().map_or(0, |a| a[ci].len());
        let per_t: Vec<Vec<f64>> = (0..n_t)
            .map(|j| raw.iter().map(|a| a[ci][j]).collect())
            .collect();
        if c.thresholded() && cfg.grid.len() >= 2 {
            let cols = per_t
                .iter()
                .map(|s| ranks_from_scores(s, c.direction()))
                .collect::<Result<Vec<_>>>()?;
            let r = RankMatrix::from_columns(cfg.grid.clone(), &cols)?;
            reliability.push(ReliabilityRow {
                criterion: c,
                rank_switches: avg_rank_switches(&r),
                rank_distortion: avg_rank_distortion(&r),
                rank_sensitivity: avg_rank_sensitivity(&r, false)?,
            });
        }
        let all = with_averages(cfg.base, &cfg.grid, c, per_t);
        let series = series_keys(cfg.base, &cfg.grid, c)
            .into_iter()
            .zip(all)
            .map(|(key, scores)| {
                Ok(ScoreSeries {
                    key,
                    ranks: ranks_from_scores(&scores, c.direction())?,
                    scores,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        criteria.push(CriterionScores {
            criterion: c,
            series,
        });
    }
    let kendall = if algorithms.len() >= 2 {
        let picked: Vec<(String, &Vec<usize>)> = criteria
            .iter()
            .flat_map(|c| {
                c.series
                    .iter()
                    .filter(|s| s.key.threshold.is_none())
                    .map(move |s| (format!("{}@{}", c.criterion, s.key.label), &s.ranks))
            })
            .collect();
        let values = picked
            .iter()
            .map(|(_, a)| {
                picked
                    .iter()
                    .map(|(_, b)| kendall_tau_normalized(a, b))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Some(KendallMatrix {
            labels: picked.into_iter().map(|(l, _)| l).collect(),
            values,
        })
    } else {
        None
    };
    Ok(EvaluationReport {
        config: cfg,
        algorithms,
        criteria,
        kendall,
        reliability,
    })
}

/// One row of the closed-form scenario table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedSquaresRow {
    pub k: u32,
    pub objects: usize,
    pub shift: f64,
    pub closed_form: f64,
    pub ospa: f64,
    pub emd: f64,
    pub hausdorff: f64,
    pub ospa_unnormalized: f64,
    pub unnormalized_closed_form: f64,
    /// `1 - F1` at IoU threshold 0.5.
    pub f1_dissimilarity: f64,
}

pub fn shifted_squares_table() -> Result<Vec<ShiftedSquaresRow>> {
    let cfg = MetricConfig::with_base(BaseDistance::Iou);
    (1..=10)
        .map(|k| {
            let s = shifted_squares_scenario(k)?;
            let d = s.pair_distance();
            Ok(ShiftedSquaresRow {
                k,
                objects: s.objects,
                shift: s.shift,
                closed_form: d,
                ospa: ospa(&s.reference, &s.prediction, &cfg)?,
                emd: emd(&s.reference, &s.prediction, &cfg)?,
                hausdorff: hausdorff(&s.reference, &s.prediction, &cfg)?,
                ospa_unnormalized: ospa_unnormalized(&s.reference, &s.prediction, &cfg)?,
                unnormalized_closed_form: s.objects as f64 * d,
                f1_dissimilarity: 1.0
                    - f1_score(&s.reference, &s.prediction, 0.5, BaseDistance::Iou)?.0,
            })
        })
        .collect()
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Writes CSV rows to a string.
pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

/// Pretty JSON with a trailing newline.
pub fn json_string<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Tidy rows `criterion, series, threshold, algorithm, score, rank`.
pub const SERIES_HEADER: [&str; 6] = [
    "criterion",
    "series",
    "threshold",
    "algorithm",
    "score",
    "rank",
];

pub fn evaluation_series_csv(r: &EvaluationReport) -> Result<String> {
    let mut rows = Vec::new();
    for c in &r.criteria {
        for s in &c.series {
            for (a, name) in r.algorithms.iter().enumerate() {
                rows.push(vec![
                    c.criterion.to_string(),
                    s.key.label.clone(),
                    opt_num(s.key.threshold),
                    name.clone(),
                    fmt_num(s.scores[a]),
                    s.ranks[a].to_string(),
                ]);
            }
        }
    }
    csv_string(&SERIES_HEADER, rows)
}

/// Rank-vs-threshold series of the first trial of a sanity report; the
/// algorithms are the prediction sets, named by their pre-determined rank.
pub fn sanity_series_csv(r: &SanityReport) -> Result<String> {
    let mut rows = Vec::new();
    for s in &r.sample {
        for (a, (score, rank)) in s.scores.iter().zip(&s.ranks).enumerate() {
            rows.push(vec![
                s.criterion.to_string(),
                s.key.label.clone(),
                opt_num(s.key.threshold),
                format!("{}", a + 1),
                fmt_num(*score),
                rank.to_string(),
            ]);
        }
    }
    csv_string(&SERIES_HEADER, rows)
}

pub fn kendall_csv(m: &KendallMatrix) -> Result<String> {
    let mut header = vec![""];
    header.extend(m.labels.iter().map(String::as_str));
    csv_string(
        &header,
        m.labels.iter().zip(&m.values).map(|(l, row)| {
            std::iter::once(l.clone())
                .chain(row.iter().map(|&v| fmt_num(v)))
                .collect()
        }),
    )
}

const RELIABILITY_HEADER: [&str; 4] = [
    "criterion",
    "rank_switches",
    "rank_distortion",
    "rank_sensitivity",
];

pub fn evaluation_reliability_csv(r: &EvaluationReport) -> Result<String> {
    csv_string(
        &RELIABILITY_HEADER,
        r.reliability.iter().map(|x| {
            vec![
                x.criterion.to_string(),
                fmt_num(x.rank_switches),
                fmt_num(x.rank_distortion),
                fmt_num(x.rank_sensitivity),
            ]
        }),
    )
}

/// Ranking error table: one row per criterion and series, plus an
/// `optimal` row naming the best threshold.
pub fn sanity_errors_csv(r: &SanityReport) -> Result<String> {
    let mut rows = Vec::new();
    for c in &r.criteria {
        for s in c.series.iter().chain(&c.optimal) {
            let label = if c.optimal.as_ref().is_some_and(|o| std::ptr::eq(o, s)) {
                "optimal".to_string()
            } else {
                s.key.label.clone()
            };
            rows.push(vec![
                c.criterion.to_string(),
                label,
                opt_num(s.key.threshold),
                fmt_num(s.error.mean),
                fmt_num(s.error.std),
            ]);
        }
    }
    csv_string(&["criterion", "series", "threshold", "mean", "std"], rows)
}

pub fn sanity_reliability_csv(r: &SanityReport) -> Result<String> {
    csv_string(
        &RELIABILITY_HEADER,
        r.criteria.iter().filter_map(|c| {
            c.reliability.map(|x| {
                vec![
                    c.criterion.to_string(),
                    fmt_num(x.rank_switches),
                    fmt_num(x.rank_distortion),
                    fmt_num(x.rank_sensitivity),
                ]
            })
        }),
    )
}

pub fn consistency_csv(r: &ConsistencyReport) -> Result<String> {
    let mut rows = Vec::new();
    for c in &r.criteria {
        for s in &c.series {
            rows.push(vec![
                c.criterion.to_string(),
                s.key.label.clone(),
                opt_num(s.key.threshold),
                fmt_num(s.truth.mean),
                fmt_num(s.truth.std),
                fmt_num(s.approximate.mean),
                fmt_num(s.approximate.std),
                fmt_num(s.gap),
            ]);
        }
    }
    csv_string(
        &[
            "criterion",
            "series",
            "threshold",
            "truth_mean",
            "truth_std",
            "approximate_mean",
            "approximate_std",
            "gap",
        ],
        rows,
    )
}

pub fn shifted_squares_csv(rows: &[ShiftedSquaresRow]) -> Result<String> {
    csv_string(
        &[
            "k",
            "objects",
            "shift",
            "closed_form",
            "ospa",
            "emd",
            "hausdorff",
            "ospa_unnormalized",
            "unnormalized_closed_form",
            "f1_dissimilarity",
        ],
        rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                r.objects.to_string(),
                fmt_num(r.shift),
                fmt_num(r.closed_form),
                fmt_num(r.ospa),
                fmt_num(r.emd),
                fmt_num(r.hausdorff),
                fmt_num(r.ospa_unnormalized),
                fmt_num(r.unnormalized_closed_form),
                fmt_num(r.f1_dissimilarity),
            ]
        }),
    )
}

/// Rank-vs-threshold series from a saved evaluation or sanity report.
pub fn series_csv_from_json(text: &str, label: &str) -> Result<String> {
    let fmt = |message: String| Error::Format {
        path: label.to_string(),
        message,
    };
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| fmt(format!("invalid JSON: {e}")))?;
    if v.get("algorithms").is_some() {
        let r: EvaluationReport = serde_json::from_value(v).map_err(|e| fmt(e.to_string()))?;
        evaluation_series_csv(&r)
    } else if v.get("sample").is_some() {
        let r: SanityReport = serde_json::from_value(v).map_err(|e| fmt(e.to_string()))?;
        sanity_series_csv(&r)
    } else {
        Err(fmt("neither an evaluation nor a sanity report".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::AssignMode;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&vec![1, 2]).unwrap();
        assert_eq!(a, config_hash(&vec![1, 2]).unwrap());
        assert_ne!(a, config_hash(&vec![2, 1]).unwrap());
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn shifted_squares_match_closed_form() {
        for r in shifted_squares_table().unwrap() {
            assert!((r.ospa - r.closed_form).abs() < 1e-9);
            assert!((r.ospa_unnormalized - r.unnormalized_closed_form).abs() < 1e-9);
            assert_eq!(r.f1_dissimilarity, 0.0);
        }
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        let v = 0.1 + 0.2;
        assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn report_from_raw_scores() {
        let cfg = RunConfig {
            task: EvalTask::Detect,
            base: BaseDistance::Iou,
            grid: vec![0.5, 0.75],
            criteria: vec![Criterion::F1, Criterion::Ospa],
            assignment: AssignMode::Optimal,
            interpolation: crate::classic::Interpolation::AllPoint,
            order: 1.0,
            cutoff: 1.0,
            reference: "r".into(),
            predictions: vec!["a".into(), "b".into()],
        };
        let raw = vec![
            vec![vec![0.9, 0.5], vec![0.1]],
            vec![vec![0.8, 0.6], vec![0.2]],
        ];
        let r = build_report(cfg, vec!["a".into(), "b".into()], raw).unwrap();
        let f1 = &r.criteria[0];
        assert_eq!(f1.series.len(), 4);
        assert_eq!(f1.series[0].ranks, vec![1, 2]);
        assert_eq!(f1.series[1].ranks, vec![2, 1]);
        assert_eq!(r.reliability[0].rank_switches, 1.0);
        let k = r.kendall.unwrap();
        assert_eq!(k.labels, vec!["f1@m-partial", "f1@m-full", "ospa@all"]);
        assert_eq!(k.values[0][0], 0.0);
    }
}
