//! `shapeset-eval` command line: file evaluation, sanity and consistency
//! experiments, the closed-form shift scenario, and plotting series.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shapeset_eval::io::dump_scenario;
use shapeset_eval::report::{
    consistency_csv, evaluate_files, evaluation_reliability_csv, evaluation_series_csv,
    experiment_from_values, json_string, kendall_csv, sanity_errors_csv, sanity_reliability_csv,
    sanity_series_csv, series_csv_from_json, shifted_squares_csv, shifted_squares_table, Document,
    Metadata, RunConfig, Values,
};
use shapeset_eval::sanity::{run_consistency_experiment, run_sanity_experiment};
use shapeset_eval::{Error, Result};

#[derive(Parser)]
#[command(
    name = "shapeset-eval",
    version,
    about = "Evaluate shape and track sets with set metrics and classical criteria"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score COCO-style detection or segmentation files against a reference.
    EvalDetect(EvalArgs),
    /// Score MOT-style track files against a reference.
    EvalTrack(EvalArgs),
    /// Ranking errors of criteria on generated scenarios.
    Sanity(ExperimentArgs),
    /// Ranking errors against ground truth and against an approximate truth.
    Consistency(ExperimentArgs),
    /// Distances on grids of slightly shifted squares, with closed forms.
    ShiftedSquares(OutArgs),
    /// Rank-vs-threshold series (CSV) from a saved report.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base distance: iou, giou, augmented-iou, augmented-giou.
    #[arg(long)]
    base: Option<String>,
    /// Threshold grid: default, m-full, m-partial, start:step:end or a list.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated criteria, or `default`.
    #[arg(long)]
    criteria: Option<String>,
    /// Assignment for AP and log-AMR: greedy or optimal.
    #[arg(long)]
    assignment: Option<String>,
    /// AP interpolation: all-point, coco, 11-point.
    #[arg(long)]
    interpolation: Option<String>,
    /// Order of the set metrics.
    #[arg(long)]
    order: Option<f64>,
    /// Cut-off of OSPA and of the track base distance.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Output directory; without it the main table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn values(&self) -> Result<Values> {
        let mut v = match &self.config {
            Some(p) => Values::load(p)?,
            None => Values::default(),
        };
        let pairs = [
            ("base", &self.base),
            ("grid", &self.grid),
            ("criteria", &self.criteria),
            ("assignment", &self.assignment),
            ("interpolation", &self.interpolation),
        ];
        for (k, x) in pairs {
            if let Some(x) = x {
                v.set(k, x.clone());
            }
        }
        if let Some(x) = self.order {
            v.set("order", x.to_string());
        }
        if let Some(x) = self.cutoff {
            v.set("cutoff", x.to_string());
        }
        if let Some(x) = &self.out {
            v.set("out", x.display().to_string());
        }
        Ok(v)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// detect or segment for eval-detect; ignored by eval-track.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Prediction file; repeat for several algorithms.
    #[arg(long = "prediction")]
    predictions: Vec<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    /// detect-single, detect-multi or track.
    #[arg(long)]
    task: Option<String>,
    /// Number of Monte Carlo trials (default 100).
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; each trial uses its own stream of it.
    #[arg(long, env = "SHAPESET_EVAL_SEED")]
    seed: Option<u64>,
    /// Minimum IoU between ground truth and approximate truth.
    #[arg(long)]
    min_iou: Option<f64>,
    /// Present predictions in a random order per trial (true/false).
    #[arg(long)]
    shuffle: Option<bool>,
    /// Also write the scenario of the first trial to this directory.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Saved evaluation or sanity report (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Output CSV file; stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn eval(args: EvalArgs, track: bool) -> Result<()> {
    let mut v = args.common.values()?;
    if track {
        v.set("task", "track");
    } else {
        let task = args
            .task
            .clone()
            .or_else(|| v.get("task").map(String::from));
        let task = task.unwrap_or_else(|| "detect".into());
        if task == "track" {
            return Err(Error::Usage("use eval-track for track files".into()));
        }
        v.set("task", task);
    }
    if let Some(r) = &args.reference {
        v.set("reference", r.display().to_string());
    }
    if !args.predictions.is_empty() {
        let list: Vec<String> = args
            .predictions
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        v.set("predictions", list.join(","));
    }
    let cfg = RunConfig::from_values(&v)?;
    let doc = evaluate_files(cfg)?;
    match v.get("out") {
        Some(out) => {
            let dir = Path::new(out);
            write_file(dir, "report.json", &json_string(&doc)?)?;
            write_file(dir, "scores.csv", &evaluation_series_csv(&doc.body)?)?;
            write_file(
                dir,
                "reliability.csv",
                &evaluation_reliability_csv(&doc.body)?,
            )?;
            if let Some(k) = &doc.body.kendall {
                write_file(dir, "kendall.csv", &kendall_csv(k)?)?;
            }
        }
        None => print!("{}", json_string(&doc)?),
    }
    Ok(())
}

fn experiment(args: ExperimentArgs, consistency: bool) -> Result<()> {
    let mut v = args.common.values()?;
    if let Some(t) = &args.task {
        v.set("task", t.clone());
    }
    if let Some(x) = args.trials {
        v.set("trials", x.to_string());
    }
    if let Some(x) = args.seed {
        v.set("seed", x.to_string());
    }
    if let Some(x) = args.min_iou {
        v.set("min-iou", x.to_string());
    }
    if let Some(x) = args.shuffle {
        v.set("shuffle", x.to_string());
    }
    let cfg = experiment_from_values(&v, 0)?;
    if let Some(dir) = &args.dump {
        dump_scenario(dir, &cfg, 0)?;
    }
    let metadata = Metadata::new(&cfg, Some(cfg.seed))?;
    let out = v.get("out").map(PathBuf::from);
    if consistency {
        let body = run_consistency_experiment(&cfg)?;
        let table = consistency_csv(&body)?;
        match out {
            Some(dir) => {
                write_file(
                    &dir,
                    "report.json",
                    &json_string(&Document { metadata, body })?,
                )?;
                write_file(&dir, "consistency.csv", &table)?;
            }
            None => print!("{table}"),
        }
    } else {
        let body = run_sanity_experiment(&cfg)?;
        let table = sanity_errors_csv(&body)?;
        match out {
            Some(dir) => {
                write_file(&dir, "errors.csv", &table)?;
                write_file(&dir, "reliability.csv", &sanity_reliability_csv(&body)?)?;
                write_file(&dir, "series.csv", &sanity_series_csv(&body)?)?;
                write_file(
                    &dir,
                    "report.json",
                    &json_string(&Document { metadata, body })?,
                )?;
            }
            None => print!("{table}"),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::EvalDetect(a) => eval(a, false),
        Command::EvalTrack(a) => eval(a, true),
        Command::Sanity(a) => experiment(a, false),
        Command::Consistency(a) => experiment(a, true),
        Command::ShiftedSquares(a) => {
            let table = shifted_squares_csv(&shifted_squares_table()?)?;
            match a.out {
                Some(dir) => write_file(&dir, "shifted_squares.csv", &table),
                None => {
                    print!("{table}");
                    Ok(())
                }
            }
        }
        Command::Report(a) => {
            let text = std::fs::read_to_string(&a.input).map_err(|e| Error::file(&a.input, e))?;
            let csv = series_csv_from_json(&text, &a.input.display().to_string())?;
            match a.out {
                Some(p) => Ok(std::fs::write(p, csv)?),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
