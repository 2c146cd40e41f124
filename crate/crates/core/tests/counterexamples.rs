//! Cascaded boxes x, y, z with IoU(x, y) = IoU(y, z) = 7/13 and
//! IoU(x, z) = 1/4: every threshold criterion at 0.5 calls x ~ y and y ~ z
//! but x and z entirely different, breaking the triangle inequality.

use shapeset_eval::classic::{
    average_precision, default_fppi_grid, f1_score, hota, idf1, log_amr, mota, AssignMode,
    Interpolation,
};
use shapeset_eval::geometry::{BaseDistance, Shape};
use shapeset_eval::setmetrics::{ospa, ospa2, MetricConfig, ShapeSet, Track, TrackSet};

const T: f64 = 0.5;

fn cascade() -> [Shape; 3] {
    [0.0, 3.0, 6.0].map(|x| Shape::bbox(x, 0.0, x + 10.0, 10.0).unwrap())
}

fn sets() -> [ShapeSet; 3] {
    cascade().map(|s| ShapeSet::new(vec![s]).unwrap())
}

// Same sets with confidence 1, for the score-based criteria.
fn scored() -> [ShapeSet; 3] {
    cascade().map(|s| ShapeSet::new(vec![s.with_score(1.0).unwrap()]).unwrap())
}

fn tracks() -> [TrackSet; 3] {
    cascade().map(|s| TrackSet::new((0, 0), vec![Track::new(1, [(0, s)]).unwrap()]).unwrap())
}

fn triple(d: impl Fn(usize, usize) -> f64) -> [f64; 3] {
    [d(0, 1), d(1, 2), d(0, 2)]
}

#[test]
fn f1() {
    let s = sets();
    let d = triple(|a, b| 1.0 - f1_score(&s[a], &s[b], T, BaseDistance::Iou).unwrap().0);
    assert_eq!(d, [0.0, 0.0, 1.0]);
}

#[test]
fn average_precision_both_modes() {
    let (s, p) = (sets(), scored());
    for mode in [AssignMode::Greedy, AssignMode::Optimal] {
        for interp in [Interpolation::coco(), Interpolation::AllPoint] {
            let d = triple(|a, b| {
                1.0 - average_precision(&s[a], &p[b], T, BaseDistance::Iou, mode, &interp).unwrap()
            });
            assert_eq!(d, [0.0, 0.0, 1.0]);
        }
    }
}

#[test]
fn log_average_miss_rate() {
    let (s, p) = (sets(), scored());
    let fppi = default_fppi_grid();
    for mode in [AssignMode::Greedy, AssignMode::Optimal] {
        let d = triple(|a, b| log_amr(&s[a], &p[b], T, BaseDistance::Iou, mode, &fppi).unwrap());
        assert_eq!(d, [1e-4, 1e-4, 1.0]);
        assert!(d[2] > d[0] + d[1]);
    }
}

#[test]
fn mota_one_false_positive_and_false_negative() {
    let t = tracks();
    let d = triple(|a, b| 1.0 - mota(&t[a], &t[b], T, BaseDistance::Iou).unwrap().0);
    assert_eq!(d, [0.0, 0.0, 2.0]);
    let (_, counts) = mota(&t[0], &t[2], T, BaseDistance::Iou).unwrap();
    assert_eq!(
        (counts.fp, counts.fn_, counts.idsw),
        (vec![1], vec![1], vec![0])
    );
}

#[test]
fn idf1_and_hota() {
    let t = tracks();
    let d = triple(|a, b| 1.0 - idf1(&t[a], &t[b], T, BaseDistance::Iou).unwrap().0);
    assert_eq!(d, [0.0, 0.0, 1.0]);
    let d = triple(|a, b| 1.0 - hota(&t[a], &t[b], T, BaseDistance::Iou).unwrap().hota);
    assert_eq!(d, [0.0, 0.0, 1.0]);
}

#[test]
fn set_metrics_respect_the_triangle() {
    let s = sets();
    let cfg = MetricConfig::with_base(BaseDistance::Iou);
    let d = triple(|a, b| ospa(&s[a], &s[b], &cfg).unwrap());
    assert!(d[2] <= d[0] + d[1]);
    assert_eq!(d[0], 6.0 / 13.0);
    let t = tracks();
    let d = triple(|a, b| ospa2(&t[a], &t[b], &cfg).unwrap());
    assert!(d[2] <= d[0] + d[1]);
}
