//! Criterion selection and scoring of prediction sets against a reference,
//! shared by file evaluation and the sanity harness.

use serde::{Deserialize, Serialize};

use crate::classic::{
    distance_limit, idf1_from, mota_from, split_by_class, AssignMode, DetectionData, HotaData,
    Interpolation,
};
use crate::error::{Error, Result};
use crate::geometry::{BaseDistance, OverlapKind};
use crate::ranking::Direction;
use crate::setmetrics::{emd_from, hausdorff_from, ospa_from, ShapeSet, TrackDistances, TrackSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    F1,
    MapGreedy,
    MapOptimal,
    LogAmrGreedy,
    LogAmrOptimal,
    Mota,
    Idf1,
    Hota,
    Hausdorff,
    Emd,
    Ospa,
    /// OSPA with the cut-off set to the distance limit of each threshold.
    OspaC,
}

impl Criterion {
    pub const ALL: [Criterion; 12] = [
        Criterion::F1,
        Criterion::MapGreedy,
        Criterion::MapOptimal,
        Criterion::LogAmrGreedy,
        Criterion::LogAmrOptimal,
        Criterion::Mota,
        Criterion::Idf1,
        Criterion::Hota,
        Criterion::Hausdorff,
        Criterion::Emd,
        Criterion::Ospa,
        Criterion::OspaC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::F1 => "f1",
            Criterion::MapGreedy => "map-greedy",
            Criterion::MapOptimal => "map-optimal",
            Criterion::LogAmrGreedy => "log-amr-greedy",
            Criterion::LogAmrOptimal => "log-amr-optimal",
            Criterion::Mota => "mota",
            Criterion::Idf1 => "idf1",
            Criterion::Hota => "hota",
            Criterion::Hausdorff => "hausdorff",
            Criterion::Emd => "emd",
            Criterion::Ospa => "ospa",
            Criterion::OspaC => "ospa-c",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Criterion::F1
            | Criterion::MapGreedy
            | Criterion::MapOptimal
            | Criterion::Mota
            | Criterion::Idf1
            | Criterion::Hota => Direction::HigherBetter,
            _ => Direction::LowerBetter,
        }
    }

    /// Whether the criterion depends on an overlap threshold.
    pub fn thresholded(self) -> bool {
        !matches!(
            self,
            Criterion::Hausdorff | Criterion::Emd | Criterion::Ospa
        )
    }

    /// Whether the criterion applies to single-frame shape sets.
    pub fn for_detection(self) -> bool {
        !matches!(self, Criterion::Mota | Criterion::Idf1 | Criterion::Hota)
    }

    /// Whether the criterion applies to track sets.
    pub fn for_tracking(self) -> bool {
        !matches!(
            self,
            Criterion::F1
                | Criterion::MapGreedy
                | Criterion::MapOptimal
                | Criterion::LogAmrGreedy
                | Criterion::LogAmrOptimal
        )
    }

    /// Whether the criterion needs confidence scores on the predictions.
    pub fn needs_scores(self) -> bool {
        matches!(
            self,
            Criterion::MapGreedy
                | Criterion::MapOptimal
                | Criterion::LogAmrGreedy
                | Criterion::LogAmrOptimal
        )
    }

    /// Parses a criterion name; `map` and `log-amr` pick the variant of the
    /// given assignment mode.
    pub fn parse(s: &str, mode: AssignMode) -> Result<Self> {
        match (s, mode) {
            ("map", AssignMode::Greedy) => Ok(Criterion::MapGreedy),
            ("map", AssignMode::Optimal) => Ok(Criterion::MapOptimal),
            ("log-amr", AssignMode::Greedy) => Ok(Criterion::LogAmrGreedy),
            ("log-amr", AssignMode::Optimal) => Ok(Criterion::LogAmrOptimal),
            _ => s.parse(),
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown criterion '{s}'")))
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything besides the data that determines criterion values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringSettings<'a> {
    /// Base distance of the threshold criteria; its plain form decides
    /// feasibility.
    pub base: BaseDistance,
    /// Base distance of the set metrics.
    pub metric_base: BaseDistance,
    pub grid: &'a [f64],
    pub order: f64,
    pub cutoff: f64,
    pub interpolation: &'a Interpolation,
    pub fppi_grid: &'a [f64],
}

fn mean_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyClassList);
    }
    Ok(sum / n as f64)
}

fn slots(criteria: &[Criterion], grid: &[f64]) -> Vec<Vec<f64>> {
    criteria
        .iter()
        .map(|c| Vec::with_capacity(if c.thresholded() { grid.len() } else { 1 }))
        .collect()
}

/// Scores `[criterion][threshold index, or 0 if parameter-free]` of one
/// prediction over a list of `(reference, prediction)` images.
///
/// Every criterion is evaluated per class and averaged over the classes of
/// the references. Threshold criteria pool their counts over images; set
/// metrics are averaged over the images where the class occurs in the
/// reference or the prediction.
pub fn detection_scores(
    s: &ScoringSettings<'_>,
    criteria: &[Criterion],
    images: &[(ShapeSet, ShapeSet)],
) -> Result<Vec<Vec<f64>>> {
    if let Some(c) = criteria.iter().find(|c| !c.for_detection()) {
        return Err(Error::Usage(format!("criterion '{c}' needs track sets")));
    }
    let classes: Vec<Vec<(ShapeSet, ShapeSet)>> = split_by_class(images).into_values().collect();
    if classes.is_empty() {
        return Err(Error::EmptyClassList);
    }
    let data = classes
        .iter()
        .map(|per| DetectionData::new(per.iter().map(|(r, q)| (r, q)), s.base))
        .collect::<Result<Vec<_>>>()?;
    let metric_sets: Vec<Vec<(usize, &(ShapeSet, ShapeSet))>> = classes
        .iter()
        .map(|per| {
            per.iter()
                .enumerate()
                .filter(|(_, (r, q))| !r.is_empty() || !q.is_empty())
                .collect()
        })
        .collect();
    // Reuses the prepared distances when the metric base is one of them.
    let metric_costs = |class: usize, image: usize, pair: &(ShapeSet, ShapeSet)| {
        let d = &data[class];
        if s.metric_base == s.base.with_augmentation(false) {
            Ok(d.costs(image, false).expect("image index").clone())
        } else if s.metric_base == s.base.with_augmentation(true) {
            d.costs(image, true).cloned().ok_or(Error::MissingScore)
        } else {
            crate::setmetrics::pairwise(&pair.1, &pair.0, s.metric_base)
        }
    };
    let metric_mean = |f: &dyn Fn(&crate::assignment::CostMatrix) -> f64| -> Result<f64> {
        let per_class = metric_sets
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_empty());
        let vals: Vec<Result<f64>> = per_class
            .map(|(ci, v)| {
                mean_of(
                    v.iter()
                        .map(|&(im, pair)| Ok(f(&metric_costs(ci, im, pair)?))),
                )
            })
            .collect();
        if vals.is_empty() {
            Ok(0.0)
        } else {
            mean_of(vals)
        }
    };

    let p = s.order;
    let mut out = slots(criteria, s.grid);
    for (ci, &c) in criteria.iter().enumerate() {
        if c.thresholded() {
            for &t in s.grid {
                let v = match c {
                    Criterion::F1 => mean_of(data.iter().map(|d| Ok(d.f1(t)?.0)))?,
                    Criterion::MapGreedy => mean_of(
                        data.iter()
                            .map(|d| d.average_precision(t, AssignMode::Greedy, s.interpolation)),
                    )?,
                    Criterion::MapOptimal => mean_of(
                        data.iter()
                            .map(|d| d.average_precision(t, AssignMode::Optimal, s.interpolation)),
                    )?,
                    Criterion::LogAmrGreedy => mean_of(
                        data.iter()
                            .map(|d| d.log_amr(t, AssignMode::Greedy, s.fppi_grid)),
                    )?,
                    Criterion::LogAmrOptimal => mean_of(
                        data.iter()
                            .map(|d| d.log_amr(t, AssignMode::Optimal, s.fppi_grid)),
                    )?,
                    Criterion::OspaC => {
                        let cut = distance_limit(s.base, t);
                        metric_mean(&|m| ospa_from(m, p, cut))?
                    }
                    _ => unreachable!("checked above"),
                };
                out[ci].push(v);
            }
        } else {
            let v = match c {
                Criterion::Hausdorff => metric_mean(&hausdorff_from)?,
                Criterion::Emd => metric_mean(&|m| emd_from(m, p))?,
                Criterion::Ospa => metric_mean(&|m| ospa_from(m, p, s.cutoff))?,
                _ => unreachable!("parameter-free criteria are metrics"),
            };
            out[ci].push(v);
        }
    }
    Ok(out)
}

/// Scores `[criterion][threshold index, or 0 if parameter-free]` of one
/// predicted track set. Set metrics use the track base distance with the
/// metric base; the threshold criteria use the plain base.
pub fn tracking_scores(
    s: &ScoringSettings<'_>,
    criteria: &[Criterion],
    reference: &TrackSet,
    prediction: &TrackSet,
) -> Result<Vec<Vec<f64>>> {
    if let Some(c) = criteria.iter().find(|c| !c.for_tracking()) {
        return Err(Error::Usage(format!(
            "criterion '{c}' needs single-frame sets"
        )));
    }
    let plain = s.base.with_augmentation(false);
    let d = TrackDistances::new(reference, prediction, plain)?;
    let md = if s.metric_base == plain {
        None
    } else {
        Some(TrackDistances::new(reference, prediction, s.metric_base)?)
    };
    let md = md.as_ref().unwrap_or(&d);
    let hota = criteria
        .contains(&Criterion::Hota)
        .then(|| HotaData::new(&d, plain));
    let fixed = md.base_matrix(s.cutoff);
    let p = s.order;
    let mut out = slots(criteria, s.grid);
    for (ci, &c) in criteria.iter().enumerate() {
        if c.thresholded() {
            for &t in s.grid {
                let v = match c {
                    Criterion::Mota => mota_from(&d, plain, t)?.0,
                    Criterion::Idf1 => idf1_from(&d, plain, t)?.0,
                    Criterion::Hota => hota.as_ref().expect("prepared").at(t)?.hota,
                    Criterion::OspaC => {
                        let cut = distance_limit(plain, t);
                        ospa_from(&md.base_matrix(cut), p, cut)
                    }
                    _ => unreachable!("checked above"),
                };
                out[ci].push(v);
            }
        } else {
            let v = match c {
                Criterion::Hausdorff => hausdorff_from(&fixed),
                Criterion::Emd => emd_from(&fixed, p),
                Criterion::Ospa => ospa_from(&fixed, p, s.cutoff),
                _ => unreachable!("parameter-free criteria are metrics"),
            };
            out[ci].push(v);
        }
    }
    Ok(out)
}

/// Label and threshold of one evaluated series of a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesKey {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

// Lower end of the partial threshold range (IoU 0.5 or GIoU 0).
fn partial_start(base: BaseDistance) -> f64 {
    match base.overlap() {
        OverlapKind::Iou => 0.5,
        OverlapKind::Giou => 0.0,
    }
}

fn partial_indices(base: BaseDistance, grid: &[f64]) -> Vec<usize> {
    let start = partial_start(base);
    (0..grid.len())
        .filter(|&j| grid[j] >= start - 1e-12)
        .collect()
}

/// Series of a criterion: `all` for a parameter-free criterion; otherwise one
/// per threshold, then `m-partial` (mean over the upper half of the overlap
/// range, when the grid reaches it) and `m-full` (mean over the grid).
pub fn series_keys(base: BaseDistance, grid: &[f64], c: Criterion) -> Vec<SeriesKey> {
    if !c.thresholded() {
        return vec![SeriesKey {
            label: "all".into(),
            threshold: None,
        }];
    }
    let mut keys: Vec<SeriesKey> = grid
        .iter()
        .map(|&t| SeriesKey {
            label: format!("{t}"),
            threshold: Some(t),
        })
        .collect();
    if !partial_indices(base, grid).is_empty() {
        keys.push(SeriesKey {
            label: "m-partial".into(),
            threshold: None,
        });
    }
    keys.push(SeriesKey {
        label: "m-full".into(),
        threshold: None,
    });
    keys
}

/// Appends the averaged series to per-threshold scores `[threshold][item]`,
/// matching [`series_keys`].
pub fn with_averages(
    base: BaseDistance,
    grid: &[f64],
    c: Criterion,
    mut per_t: Vec<Vec<f64>>,
) -> Vec<Vec<f64>> {
    if !c.thresholded() {
        return per_t;
    }
    let k = per_t[0].len();
    let mean_of = |idx: &[usize], per_t: &[Vec<f64>]| -> Vec<f64> {
        (0..k)
            .map(|a| idx.iter().map(|&j| per_t[j][a]).sum::<f64>() / idx.len() as f64)
            .collect()
    };
    let partial = partial_indices(base, grid);
    let full: Vec<usize> = (0..grid.len()).collect();
    let full_mean = mean_of(&full, &per_t);
    if !partial.is_empty() {
        let p = mean_of(&partial, &per_t);
        per_t.push(p);
    }
    per_t.push(full_mean);
    per_t
}
