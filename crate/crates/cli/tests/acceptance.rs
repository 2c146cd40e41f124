//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapeset_eval::assignment::{solve_assignment, CostMatrix};
use shapeset_eval::classic::{
    average_precision, default_fppi_grid, f1_score, hota, idf1, log_amr, mota, AssignMode,
    Interpolation,
};
use shapeset_eval::evaluate::Criterion;
use shapeset_eval::geometry::{BaseDistance, Shape};
use shapeset_eval::report::shifted_squares_table;
use shapeset_eval::sanity::{
    run_consistency_experiment, run_sanity_experiment, ConsistencyReport, ExperimentConfig,
    SanityReport, Task,
};
use shapeset_eval::setmetrics::{
    emd, emd_from, hausdorff, ospa, ospa2, ospa_from, MetricConfig, ShapeSet, Track, TrackSet,
};

use common::{brute_assignment, brute_ospa, Dense};

const SEED: u64 = 7;
const TRIALS: usize = 100;

const EXACT_TOL: f64 = 1e-9;
const AXIOM_TRIPLES: usize = 1000;
const AXIOM_MAX_CARD: usize = 6;
const AXIOM_WINDOW: i64 = 10;
const AXIOM_TIME_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_INSTANCES: usize = 1000;
const ORACLE_MAX_SIZE: usize = 6;
const OSPA_ERROR_BAND: (f64, f64) = (0.5e-2, 4.0e-2);
const CONSISTENCY_GAP: f64 = 1e-2;
const HIGH_THRESHOLDS: [f64; 3] = [0.85, 0.9, 0.95];
const GREEDY_SLACK: f64 = 0.5e-2;

type Check = Result<String, String>;

fn main() {
    let checks: [(u32, &str, fn() -> Check); 9] = [
        (1, "metric axioms", axioms),
        (2, "counterexample regression", counterexamples),
        (3, "oracle equivalence", oracles),
        (4, "shifted-square scenario", shifted_squares),
        (5, "sanity-test trends", sanity_trends),
        (6, "consistency experiment", consistency),
        (7, "optimal vs greedy assignment", optimal_vs_greedy),
        (8, "reliability indicators", reliability),
        (9, "CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (n, name, check) in checks {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Random inputs

fn random_box(rng: &mut impl Rng) -> Shape {
    // Half-pixel grid coordinates produce exact ties and shared edges.
    let x = rng.random_range(0..60) as f64 * 0.5;
    let y = rng.random_range(0..60) as f64 * 0.5;
    let w = rng.random_range(2..30) as f64 * 0.5;
    let h = rng.random_range(2..30) as f64 * 0.5;
    Shape::bbox(x, y, x + w, y + h).unwrap()
}

fn random_set(rng: &mut impl Rng) -> ShapeSet {
    let n = rng.random_range(0..=AXIOM_MAX_CARD);
    ShapeSet::new(
        (0..n)
            .map(|_| {
                random_box(rng)
                    .with_score(rng.random_range(0.0..=1.0))
                    .unwrap()
            })
            .collect(),
    )
    .unwrap()
}

fn random_tracks(rng: &mut impl Rng) -> TrackSet {
    let n = rng.random_range(0..=AXIOM_MAX_CARD);
    let tracks = (0..n)
        .map(|label| {
            let start = rng.random_range(0..AXIOM_WINDOW);
            let len = rng.random_range(1..=AXIOM_WINDOW - start);
            let states: Vec<(i64, Shape)> =
                (start..start + len).map(|t| (t, random_box(rng))).collect();
            Track::new(label as u64, states).unwrap()
        })
        .collect();
    TrackSet::new((0, AXIOM_WINDOW - 1), tracks).unwrap()
}

fn random_dense(rng: &mut impl Rng, m: usize, n: usize) -> Dense {
    Dense {
        m,
        n,
        v: (0..m * n).map(|_| rng.random_range(0.0..=1.0)).collect(),
    }
}

fn to_cost(d: &Dense) -> CostMatrix {
    CostMatrix::from_fn(d.m, d.n, |i, j| d.at(i, j)).unwrap()
}

// Criterion 1

fn axiom_triple<T>(x: &T, y: &T, z: &T, d: &dyn Fn(&T, &T) -> f64) -> Result<(), String> {
    let xx = d(x, x);
    ensure(xx.abs() <= EXACT_TOL, || format!("d(x, x) = {xx}"))?;
    let (xy, yx, yz, xz) = (d(x, y), d(y, x), d(y, z), d(x, z));
    ensure(xy >= -EXACT_TOL, || format!("negative distance {xy}"))?;
    ensure((xy - yx).abs() <= EXACT_TOL, || {
        format!("asymmetric {xy} vs {yx}")
    })?;
    ensure(xz <= xy + yz + EXACT_TOL, || {
        format!("triangle {xz} > {xy} + {yz}")
    })
}

fn axioms() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut configs = Vec::new();
    for base in [
        BaseDistance::Iou,
        BaseDistance::Giou,
        BaseDistance::AugmentedIou,
    ] {
        for c in [1.0, 0.5] {
            configs.push(MetricConfig::new(base, 1.0, c).unwrap());
        }
    }
    let mut checked = 0usize;
    for _ in 0..AXIOM_TRIPLES {
        let (x, y, z) = (
            random_set(&mut rng),
            random_set(&mut rng),
            random_set(&mut rng),
        );
        for cfg in &configs {
            axiom_triple(&x, &y, &z, &|a, b| hausdorff(a, b, cfg).unwrap())
                .map_err(|e| format!("Hausdorff ({}): {e}", cfg.base.name()))?;
            axiom_triple(&x, &y, &z, &|a, b| emd(a, b, cfg).unwrap())
                .map_err(|e| format!("EMD ({}): {e}", cfg.base.name()))?;
            axiom_triple(&x, &y, &z, &|a, b| ospa(a, b, cfg).unwrap())
                .map_err(|e| format!("OSPA ({}, c={}): {e}", cfg.base.name(), cfg.cutoff))?;
            checked += 3;
        }
    }
    for _ in 0..AXIOM_TRIPLES {
        let (x, y, z) = (
            random_tracks(&mut rng),
            random_tracks(&mut rng),
            random_tracks(&mut rng),
        );
        for c in [1.0, 0.5] {
            let cfg = MetricConfig::new(BaseDistance::Iou, 1.0, c).unwrap();
            axiom_triple(&x, &y, &z, &|a, b| ospa2(a, b, &cfg).unwrap())
                .map_err(|e| format!("OSPA2 (c={c}): {e}"))?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < AXIOM_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{checked} metric/triple combinations from {AXIOM_TRIPLES} set and {AXIOM_TRIPLES} track triples"
    ))
}

// Criterion 2

fn counterexamples() -> Check {
    const T: f64 = 0.5;
    let boxes = [0.0, 3.0, 6.0].map(|x| Shape::bbox(x, 0.0, x + 10.0, 10.0).unwrap());
    let sets = boxes.clone().map(|s| ShapeSet::new(vec![s]).unwrap());
    let scored = boxes
        .clone()
        .map(|s| ShapeSet::new(vec![s.with_score(1.0).unwrap()]).unwrap());
    let tracks =
        boxes.map(|s| TrackSet::new((0, 0), vec![Track::new(1, [(0, s)]).unwrap()]).unwrap());
    let triple = |d: &dyn Fn(usize, usize) -> f64| [d(0, 1), d(1, 2), d(0, 2)];
    let iou = BaseDistance::Iou;
    let interp = Interpolation::coco();
    let fppi = default_fppi_grid();

    let mut rows: Vec<(&str, [f64; 3], [f64; 3])> = vec![
        (
            "F1",
            triple(&|a, b| 1.0 - f1_score(&sets[a], &sets[b], T, iou).unwrap().0),
            [0.0, 0.0, 1.0],
        ),
        (
            "MOTA",
            triple(&|a, b| 1.0 - mota(&tracks[a], &tracks[b], T, iou).unwrap().0),
            [0.0, 0.0, 2.0],
        ),
        (
            "IDF1",
            triple(&|a, b| 1.0 - idf1(&tracks[a], &tracks[b], T, iou).unwrap().0),
            [0.0, 0.0, 1.0],
        ),
        (
            "HOTA",
            triple(&|a, b| 1.0 - hota(&tracks[a], &tracks[b], T, iou).unwrap().hota),
            [0.0, 0.0, 1.0],
        ),
    ];
    for (name, mode) in [
        ("greedy", AssignMode::Greedy),
        ("optimal", AssignMode::Optimal),
    ] {
        rows.push((
            if name == "greedy" {
                "AP (greedy)"
            } else {
                "AP (optimal)"
            },
            triple(&|a, b| {
                1.0 - average_precision(&sets[a], &scored[b], T, iou, mode, &interp).unwrap()
            }),
            [0.0, 0.0, 1.0],
        ));
        rows.push((
            if name == "greedy" {
                "log-AMR (greedy)"
            } else {
                "log-AMR (optimal)"
            },
            triple(&|a, b| log_amr(&sets[a], &scored[b], T, iou, mode, &fppi).unwrap()),
            [1e-4, 1e-4, 1.0],
        ));
    }
    for (name, got, want) in &rows {
        ensure(got == want, || {
            format!("{name}: got {got:?}, expected {want:?}")
        })?;
        ensure(got[2] > got[0] + got[1], || {
            format!("{name}: triangle inequality holds")
        })?;
    }
    let (_, counts) = mota(&tracks[0], &tracks[2], T, iou).unwrap();
    ensure(counts.fp == [1] && counts.fn_ == [1], || {
        format!("MOTA counts {counts:?}")
    })?;
    Ok(format!(
        "{} criteria violate the triangle inequality exactly as derived",
        rows.len()
    ))
}

// Criterion 3

fn oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x0a5a);
    let mut worst = [0.0f64; 3];
    for _ in 0..ORACLE_INSTANCES {
        let m = rng.random_range(0..=ORACLE_MAX_SIZE);
        let n = rng.random_range(0..=ORACLE_MAX_SIZE);
        let d = random_dense(&mut rng, m, n);
        let c = [1.0, 0.8, 0.5][rng.random_range(0..3)];
        let p = [1.0, 2.0][rng.random_range(0..2)];
        let err = (ospa_from(&to_cost(&d), p, c) - brute_ospa(&d, p, c)).abs();
        worst[0] = worst[0].max(err);

        let k = rng.random_range(1..=ORACLE_MAX_SIZE);
        let sq = random_dense(&mut rng, k, k);
        let err = (emd_from(&to_cost(&sq), 1.0) - brute_assignment(&sq) / k as f64).abs();
        worst[1] = worst[1].max(err);

        let cost = to_cost(&d);
        let (matching, total) = solve_assignment(&cost);
        ensure(matching.len() == m.min(n), || {
            format!("assignment of size {} for {m}x{n}", matching.len())
        })?;
        let err = (total - brute_assignment(&d))
            .abs()
            .max((matching.cost(&cost) - total).abs());
        worst[2] = worst[2].max(err);
    }
    ensure(worst.iter().all(|&w| w <= EXACT_TOL), || {
        format!(
            "max deviations OSPA {:.2e}, EMD {:.2e}, assignment {:.2e}",
            worst[0], worst[1], worst[2]
        )
    })?;
    Ok(format!(
        "{ORACLE_INSTANCES} instances each; max deviations OSPA {:.1e}, EMD {:.1e}, assignment {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

// Criterion 4

fn shifted_squares() -> Check {
    let rows = shifted_squares_table().map_err(|e| e.to_string())?;
    ensure(rows.len() == 10, || format!("{} rows", rows.len()))?;
    for r in &rows {
        let delta = 2f64.powf(-(r.k as f64) / 2.0);
        let closed = 2.0 * delta / (10.0 + delta);
        let unnormalized = 2f64.powi(r.k as i32) * closed;
        for (name, v, want) in [
            ("OSPA", r.ospa, closed),
            ("EMD", r.emd, closed),
            ("Hausdorff", r.hausdorff, closed),
            ("un-normalized OSPA", r.ospa_unnormalized, unnormalized),
        ] {
            ensure((v - want).abs() <= EXACT_TOL, || {
                format!("k={} {name} = {v}, expected {want}", r.k)
            })?;
        }
        ensure(r.f1_dissimilarity == 0.0, || {
            format!("k={} F1 dissimilarity {}", r.k, r.f1_dissimilarity)
        })?;
    }
    Ok("k = 1..10 match the closed forms; F1 dissimilarity 0 throughout".into())
}

// Criteria 5 to 8

fn experiment(task: Task, criteria: &[Criterion]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(task, BaseDistance::Iou);
    cfg.trials = TRIALS;
    cfg.seed = SEED;
    cfg.criteria = criteria.to_vec();
    cfg
}

fn error_of(r: &SanityReport, c: Criterion, threshold: Option<f64>) -> f64 {
    let row = r
        .criterion(c)
        .unwrap_or_else(|| panic!("{c} missing from the report"));
    let s = match threshold {
        Some(t) => row.at(t),
        None => row.series("all"),
    };
    s.unwrap_or_else(|| panic!("{c} has no series for {threshold:?}"))
        .error
        .mean
}

fn ordered(pairs: &[(&str, f64, &str, f64)]) -> Result<(), String> {
    for (a, x, b, y) in pairs {
        ensure(x < y, || format!("{a} {x:.4} is not below {b} {y:.4}"))?;
    }
    Ok(())
}

fn sanity_trends() -> Check {
    use Criterion::*;
    let single =
        run_sanity_experiment(&experiment(Task::DetectSingle, &[Ospa, Emd, Hausdorff, F1]))
            .map_err(|e| e.to_string())?;
    let (o, e, h, f) = (
        error_of(&single, Ospa, None),
        error_of(&single, Emd, None),
        error_of(&single, Hausdorff, None),
        error_of(&single, F1, Some(0.5)),
    );
    ordered(&[
        ("OSPA", o, "EMD", e),
        ("EMD", e, "Hausdorff", h),
        ("OSPA", o, "F1@0.5", f),
    ])?;
    ensure(o >= OSPA_ERROR_BAND.0 && o <= OSPA_ERROR_BAND.1, || {
        format!("OSPA error {o:.4} outside {OSPA_ERROR_BAND:?}")
    })?;

    let track = run_sanity_experiment(&experiment(
        Task::Track,
        &[Ospa, Emd, Hausdorff, Mota, Idf1, Hota],
    ))
    .map_err(|e| e.to_string())?;
    let (to, te, th) = (
        error_of(&track, Ospa, None),
        error_of(&track, Emd, None),
        error_of(&track, Hausdorff, None),
    );
    let (tm, ti, tho) = (
        error_of(&track, Mota, Some(0.5)),
        error_of(&track, Idf1, Some(0.5)),
        error_of(&track, Hota, Some(0.5)),
    );
    ordered(&[
        ("OSPA2", to, "EMD", te),
        ("EMD", te, "Hausdorff", th),
        ("OSPA2", to, "MOTA@0.5", tm),
        ("OSPA2", to, "IDF1@0.5", ti),
        ("OSPA2", to, "HOTA@0.5", tho),
    ])?;
    Ok(format!(
        "detection x1e-2: OSPA {:.2} < EMD {:.2} < Hausdorff {:.2}, F1@0.5 {:.2}; tracking x1e-2: OSPA2 {:.2} < EMD {:.2} < Hausdorff {:.2}, MOTA {:.2}, IDF1 {:.2}, HOTA {:.2}",
        o * 100.0, e * 100.0, h * 100.0, f * 100.0,
        to * 100.0, te * 100.0, th * 100.0, tm * 100.0, ti * 100.0, tho * 100.0
    ))
}

fn consistency() -> Check {
    use Criterion::*;
    let metric = [Hausdorff, Emd, Ospa];
    let runs: [(Task, Vec<Criterion>, Vec<Criterion>); 3] = [
        (Task::DetectSingle, vec![Hausdorff, Emd, Ospa, F1], vec![F1]),
        (
            Task::DetectMulti,
            vec![Hausdorff, Emd, Ospa, F1, MapGreedy],
            vec![F1, MapGreedy],
        ),
        (Task::Track, metric.to_vec(), vec![]),
    ];
    let mut worst_gap: f64 = 0.0;
    let mut high = 0;
    for (task, criteria, thresholded) in runs {
        let r: ConsistencyReport =
            run_consistency_experiment(&experiment(task, &criteria)).map_err(|e| e.to_string())?;
        for c in metric {
            let s = r
                .criterion(c)
                .and_then(|row| row.series("all"))
                .ok_or(format!("{c} missing"))?;
            let gap = (s.approximate.mean - s.truth.mean).abs();
            worst_gap = worst_gap.max(gap);
            ensure(gap < CONSISTENCY_GAP, || {
                format!("{} {c}: gap {gap:.4}", task.name())
            })?;
        }
        for c in thresholded {
            for t in HIGH_THRESHOLDS {
                let s = r
                    .criterion(c)
                    .and_then(|row| row.at(t))
                    .ok_or(format!("{c}@{t} missing"))?;
                ensure(s.approximate.mean > s.truth.mean, || {
                    format!(
                        "{} {c}@{t}: approximate {:.4} not above truth {:.4}",
                        task.name(),
                        s.approximate.mean,
                        s.truth.mean
                    )
                })?;
                high += 1;
            }
        }
    }
    Ok(format!(
        "largest metric gap {worst_gap:.4}; approximate error higher for all {high} F1/mAP series at t >= 0.85"
    ))
}

fn optimal_vs_greedy() -> Check {
    let r = run_sanity_experiment(&experiment(
        Task::DetectMulti,
        &[Criterion::MapGreedy, Criterion::MapOptimal],
    ))
    .map_err(|e| e.to_string())?;
    let g = error_of(&r, Criterion::MapGreedy, Some(0.5));
    let o = error_of(&r, Criterion::MapOptimal, Some(0.5));
    ensure(o <= g + GREEDY_SLACK, || {
        format!("optimal {o:.4} > greedy {g:.4} + {GREEDY_SLACK}")
    })?;
    Ok(format!(
        "mAP@0.5 error x1e-2: optimal {:.2}, greedy {:.2}",
        o * 100.0,
        g * 100.0
    ))
}

fn reliability() -> Check {
    use Criterion::*;
    let mut lines = Vec::new();
    for (task, rivals) in [
        (Task::DetectSingle, vec![F1]),
        (Task::DetectMulti, vec![F1, MapGreedy, MapOptimal]),
    ] {
        let mut criteria = vec![OspaC];
        criteria.extend(&rivals);
        let r = run_sanity_experiment(&experiment(task, &criteria)).map_err(|e| e.to_string())?;
        let rel = |c: Criterion| {
            let x = r
                .criterion(c)
                .and_then(|row| row.reliability)
                .unwrap_or_else(|| panic!("{c} has no reliability"));
            [x.rank_switches, x.rank_distortion, x.rank_sensitivity]
        };
        let ours = rel(OspaC);
        for c in rivals {
            let theirs = rel(c);
            for (k, name) in ["R_S", "R_std", "R_Sen"].iter().enumerate() {
                ensure(ours[k] < theirs[k], || {
                    format!(
                        "{}: OSPA_c {name} {:.3} not below {c} {:.3}",
                        task.name(),
                        ours[k],
                        theirs[k]
                    )
                })?;
            }
            lines.push(format!(
                "{} {c} ({:.2}, {:.2}, {:.2})",
                task.name(),
                theirs[0],
                theirs[1],
                theirs[2]
            ));
        }
        lines.push(format!(
            "{} ospa-c ({:.2}, {:.2}, {:.2})",
            task.name(),
            ours[0],
            ours[1],
            ours[2]
        ));
    }
    Ok(format!("(R_S, R_std, R_Sen): {}", lines.join("; ")))
}

// Criterion 9

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_shapeset-eval"))
        .args(args)
        .env_remove("SHAPESET_EVAL_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p.strip_prefix(dir).unwrap().to_path_buf(), bytes)
        })
        .collect()
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let p = |name: &str| root.join(name).display().to_string();
    let mut compared = 0;

    // Each command runs twice; the second run writes under a different name.
    let run_twice = |make: &dyn Fn(&str) -> Vec<String>, label: &str| -> Result<usize, String> {
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let args = make(run);
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            let stdout = cli(&refs)?;
            let dir = root.join(format!("{label}_{run}"));
            let files = if dir.is_dir() {
                snapshot(&dir)
            } else {
                Vec::new()
            };
            outputs.push((stdout, files));
        }
        ensure(outputs[0] == outputs[1], || {
            format!("{label}: outputs differ between runs")
        })?;
        ensure(!outputs[0].0.is_empty() || !outputs[0].1.is_empty(), || {
            format!("{label}: no output")
        })?;
        Ok(1 + outputs[0].1.len())
    };

    compared += run_twice(
        &|_| vec!["shifted-squares".into()],
        "shifted-squares-stdout",
    )?;
    compared += run_twice(
        &|r| {
            vec![
                "shifted-squares".into(),
                "--out".into(),
                p(&format!("shifted-squares_{r}")),
            ]
        },
        "shifted-squares",
    )?;
    compared += run_twice(
        &|r| {
            let mut v: Vec<String> = [
                "sanity",
                "--task",
                "detect-multi",
                "--trials",
                "4",
                "--seed",
                "7",
                "--out",
            ]
            .map(String::from)
            .to_vec();
            v.push(p(&format!("sanity_{r}")));
            v.push("--dump".into());
            v.push(p(&format!("dumpdet_{r}")));
            v
        },
        "sanity",
    )?;
    compared += run_twice(
        &|r| {
            let mut v: Vec<String> = [
                "consistency",
                "--task",
                "track",
                "--trials",
                "2",
                "--seed",
                "7",
                "--out",
            ]
            .map(String::from)
            .to_vec();
            v.push(p(&format!("consistency_{r}")));
            v.push("--dump".into());
            v.push(p(&format!("dumptrk_{r}")));
            v
        },
        "consistency",
    )?;
    // Dumps from both runs must agree as well.
    ensure(
        snapshot(&root.join("dumpdet_a")) == snapshot(&root.join("dumpdet_b")),
        || "detection dumps differ".into(),
    )?;
    ensure(
        snapshot(&root.join("dumptrk_a")) == snapshot(&root.join("dumptrk_b")),
        || "tracking dumps differ".into(),
    )?;

    let with_inputs = |cmd: &str, task: &str, dump: &str, ext: &str, r: &str| {
        let mut v: Vec<String> = vec![
            cmd.into(),
            "--task".into(),
            task.into(),
            "--reference".into(),
        ];
        v.push(p(&format!("{dump}/reference.{ext}")));
        for k in 1..=5 {
            v.push("--prediction".into());
            v.push(p(&format!("{dump}/prediction_{k:02}.{ext}")));
        }
        v.push("--out".into());
        v.push(p(&format!("{cmd}_{r}")));
        v
    };
    compared += run_twice(
        &|r| with_inputs("eval-detect", "detect", "dumpdet_a", "json", r),
        "eval-detect",
    )?;
    compared += run_twice(
        &|r| with_inputs("eval-track", "track", "dumptrk_a", "csv", r),
        "eval-track",
    )?;
    compared += run_twice(
        &|_| vec!["report".into(), "--input".into(), p("sanity_a/report.json")],
        "report-sanity",
    )?;
    compared += run_twice(
        &|_| {
            vec![
                "report".into(),
                "--input".into(),
                p("eval-detect_a/report.json"),
            ]
        },
        "report-eval",
    )?;
    Ok(format!(
        "{compared} outputs byte-identical across repeated runs of every subcommand"
    ))
}
