//! End-to-end behaviour of the binary: outputs on known inputs, precedence
//! of configuration sources and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shapeset-eval"));
    c.env_remove("SHAPESET_EVAL_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// `(criterion, series, algorithm, score, rank)` rows of a scores table.
fn score_rows(text: &str) -> Vec<(String, String, String, f64, usize)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].into(),
                f[1].into(),
                f[3].into(),
                f[4].parse().unwrap(),
                f[5].parse().unwrap(),
            )
        })
        .collect()
}

fn is_distance(criterion: &str) -> bool {
    matches!(criterion, "hausdorff" | "emd" | "ospa" | "ospa-c")
}

#[test]
fn identical_tracks_score_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let dump = tmp.path().join("dump");
    let out = tmp.path().join("out");
    ok(&[
        "sanity",
        "--task",
        "track",
        "--trials",
        "1",
        "--seed",
        "3",
        "--dump",
        s(&dump),
    ]);
    let reference = dump.join("reference.csv");
    ok(&[
        "eval-track",
        "--task",
        "track",
        "--reference",
        s(&reference),
        "--prediction",
        s(&dump.join("prediction_10.csv")),
        "--prediction",
        s(&reference),
        "--out",
        s(&out),
    ]);
    let rows = score_rows(&std::fs::read_to_string(out.join("scores.csv")).unwrap());
    let mut seen = 0;
    for (criterion, series, algorithm, score, rank) in rows {
        if algorithm != "reference" {
            continue;
        }
        let want = if is_distance(&criterion) { 0.0 } else { 1.0 };
        assert_eq!(score, want, "{criterion} {series}");
        assert_eq!(rank, 1, "{criterion} {series}");
        seen += 1;
    }
    assert!(seen > 10);
}

#[test]
fn identical_boxes_score_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let dump = tmp.path().join("dump");
    ok(&[
        "sanity",
        "--task",
        "detect-single",
        "--trials",
        "1",
        "--dump",
        s(&dump),
    ]);
    let reference = dump.join("reference.json");
    let table = ok(&[
        "eval-detect",
        "--task",
        "detect",
        "--reference",
        s(&reference),
        "--prediction",
        s(&reference),
        "--grid",
        "m-partial",
    ]);
    assert!(table.starts_with('{') && table.contains("\"config_hash\""));
    let out = tmp.path().join("out");
    ok(&[
        "eval-detect",
        "--task",
        "detect",
        "--reference",
        s(&reference),
        "--prediction",
        s(&reference),
        "--out",
        s(&out),
    ]);
    for (criterion, series, _, score, _) in
        score_rows(&std::fs::read_to_string(out.join("scores.csv")).unwrap())
    {
        let want = if is_distance(&criterion) { 0.0 } else { 1.0 };
        assert_eq!(score, want, "{criterion} {series}");
    }
}

#[test]
fn seed_sources_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.conf");
    std::fs::write(
        &config,
        "# sanity settings\ntask = detect-single\ntrials = 3\nseed = 4\n",
    )
    .unwrap();
    let from_file = ok(&["sanity", "--config", s(&config)]);
    let from_flag = ok(&[
        "sanity",
        "--task",
        "detect-single",
        "--trials",
        "3",
        "--seed",
        "4",
    ]);
    let env = bin()
        .args(["sanity", "--task", "detect-single", "--trials", "3"])
        .env("SHAPESET_EVAL_SEED", "4")
        .output()
        .unwrap();
    assert_eq!(from_file, from_flag);
    assert_eq!(from_flag.as_bytes(), env.stdout.as_slice());
    let overridden = ok(&["sanity", "--config", s(&config), "--seed", "5"]);
    assert_ne!(overridden, from_file);
}

fn code(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json");
    let (c, err) = code(&[
        "eval-detect",
        "--task",
        "detect",
        "--reference",
        s(&missing),
        "--prediction",
        s(&missing),
    ]);
    assert_eq!(c, 1);
    assert!(err.contains("missing.json"), "{err}");

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"[{"image_id": 1, "bbox": [0, 0, -3, 4]}]"#).unwrap();
    let (c, err) = code(&[
        "eval-detect",
        "--task",
        "detect",
        "--reference",
        s(&bad),
        "--prediction",
        s(&bad),
    ]);
    assert_eq!(c, 1);
    assert!(err.contains("bad.json"), "{err}");

    assert_eq!(
        code(&["sanity", "--task", "detect-single", "--criteria", "mota"]).0,
        1
    );
    assert_eq!(
        code(&["sanity", "--task", "detect-single", "--grid", "0.9,0.5"]).0,
        1
    );
    assert_eq!(code(&["sanity", "--task", "juggling"]).0, 1);
    assert_eq!(code(&["sanity", "--no-such-flag"]).0, 1);
    assert_eq!(code(&["frobnicate"]).0, 1);
    assert_eq!(code(&["--help"]).0, 0);
    assert_eq!(code(&["--version"]).0, 0);

    // An output directory that cannot be created is an environment failure.
    let file = tmp.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    assert_eq!(code(&["shifted-squares", "--out", s(&file)]).0, 2);
}
