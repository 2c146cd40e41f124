//! Full-scale sanity runs (10^4 trials). Ignored by default; run with
//! `cargo test -p shapeset-eval --test full_scale -- --ignored --nocapture`.
//! `FULL_SCALE_TRIALS` overrides the trial count.

use shapeset_eval::evaluate::Criterion;
use shapeset_eval::geometry::BaseDistance;
use shapeset_eval::sanity::{run_sanity_experiment, ExperimentConfig, SanityReport, Task};

fn trials() -> usize {
    std::env::var("FULL_SCALE_TRIALS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(10_000)
}

fn run(task: Task) -> SanityReport {
    let mut cfg = ExperimentConfig::new(task, BaseDistance::Iou);
    cfg.trials = trials();
    cfg.seed = 7;
    let r = run_sanity_experiment(&cfg).unwrap();
    println!("{}: {} trials", task.name(), cfg.trials);
    for c in &r.criteria {
        for s in &c.series {
            println!(
                "  {:<12} {:<10} {:>8.3} +- {:.3} (x1e-2)",
                c.criterion.to_string(),
                s.key.label,
                s.error.mean * 100.0,
                s.error.std * 100.0
            );
        }
    }
    r
}

fn mean(r: &SanityReport, c: Criterion, label: &str) -> f64 {
    r.criterion(c).unwrap().series(label).unwrap().error.mean
}

#[test]
#[ignore]
fn detection_single_class() {
    let r = run(Task::DetectSingle);
    let o = mean(&r, Criterion::Ospa, "all");
    assert!(o < mean(&r, Criterion::Emd, "all"));
    assert!(mean(&r, Criterion::Emd, "all") < mean(&r, Criterion::Hausdorff, "all"));
    assert!(o < mean(&r, Criterion::F1, "0.5"));
}

#[test]
#[ignore]
fn detection_multi_class() {
    let r = run(Task::DetectMulti);
    assert!(
        mean(&r, Criterion::MapOptimal, "0.5") <= mean(&r, Criterion::MapGreedy, "0.5") + 0.5e-2
    );
}

#[test]
#[ignore]
fn tracking() {
    let r = run(Task::Track);
    let o = mean(&r, Criterion::Ospa, "all");
    assert!(o < mean(&r, Criterion::Emd, "all"));
    for c in [Criterion::Mota, Criterion::Idf1, Criterion::Hota] {
        assert!(o < mean(&r, c, "0.5"));
    }
}
