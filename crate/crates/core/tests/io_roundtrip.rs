//! Dumped scenarios reload to the same sets and the same metric values.

use shapeset_eval::classic::{f1_score, mota};
use shapeset_eval::geometry::BaseDistance;
use shapeset_eval::io::{dump_scenario, load_dumped_detection, load_dumped_tracking};
use shapeset_eval::sanity::{trial_scenario, ExperimentConfig, Task, TrialScenario};
use shapeset_eval::setmetrics::{emd, hausdorff, ospa, ospa2, MetricConfig};

const TOL: f64 = 1e-9;

#[test]
fn detection_scenario_roundtrip() {
    for task in [Task::DetectSingle, Task::DetectMulti] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(task, BaseDistance::Iou);
        cfg.seed = 11;
        let sidecar = dump_scenario(dir.path(), &cfg, 3).unwrap();
        let TrialScenario::Detection(orig) = trial_scenario(&cfg, 3).unwrap() else {
            panic!("detection task produced tracks");
        };
        let (loaded_sidecar, back) = load_dumped_detection(dir.path()).unwrap();
        assert_eq!(sidecar, loaded_sidecar);
        assert_eq!(back.params, orig.params);
        assert_eq!(back.reference.len(), orig.reference.len());
        for base in [BaseDistance::Iou, BaseDistance::Giou] {
            let m = MetricConfig::with_base(base);
            for (a, b) in orig.predictions.iter().zip(&back.predictions) {
                for f in [ospa, emd, hausdorff] {
                    let x = f(&orig.reference, a, &m).unwrap();
                    let y = f(&back.reference, b, &m).unwrap();
                    assert!((x - y).abs() < TOL, "{x} vs {y}");
                }
            }
        }
        for (a, b) in orig.predictions.iter().zip(&back.predictions) {
            let x = f1_score(&orig.reference, a, 0.5, BaseDistance::Iou)
                .unwrap()
                .1;
            let y = f1_score(&back.reference, b, 0.5, BaseDistance::Iou)
                .unwrap()
                .1;
            assert_eq!(x, y);
        }
    }
}

#[test]
fn tracking_scenario_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(Task::Track, BaseDistance::Iou);
    cfg.seed = 5;
    cfg.tracking.predictions = 4;
    cfg.tracking.errors_from = Some(2);
    dump_scenario(dir.path(), &cfg, 0).unwrap();
    let TrialScenario::Tracking(orig) = trial_scenario(&cfg, 0).unwrap() else {
        panic!("tracking task produced shape sets");
    };
    let (_, back) = load_dumped_tracking(dir.path()).unwrap();
    assert_eq!(back.reference.window(), orig.reference.window());
    assert_eq!(back.reference.len(), orig.reference.len());
    let m = MetricConfig::with_base(BaseDistance::Iou);
    for (a, b) in orig.predictions.iter().zip(&back.predictions) {
        let x = ospa2(&orig.reference, a, &m).unwrap();
        let y = ospa2(&back.reference, b, &m).unwrap();
        assert!((x - y).abs() < TOL, "{x} vs {y}");
        let x = mota(&orig.reference, a, 0.5, BaseDistance::Iou).unwrap().0;
        let y = mota(&back.reference, b, 0.5, BaseDistance::Iou).unwrap().0;
        assert!((x - y).abs() < TOL);
    }
}
