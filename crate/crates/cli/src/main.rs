//! `lfwa-fs`: reduction-rate, selection and ablation experiments.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use lfwa_fs::harness::{
    emit_report, known_dataset, run_comparison, run_experiment, ExperimentConfig, Format, Mode,
    RunReport,
};
use lfwa_fs::lfwa::write_history;
use lfwa_fs::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "lfwa-fs", version, about = "Fractal-dimension constrained fireworks feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fractal dimension, ceiling and reduction rate per dataset.
    Reduce(Common),
    /// FD-constrained fireworks search, repeated over seeds.
    Select(Common),
    /// Full-feature, unconstrained and random-subset comparisons.
    Ablate(Common),
}

#[derive(Args)]
struct Common {
    /// Dataset file; repeat for several datasets.
    #[arg(long = "dataset", value_name = "PATH")]
    datasets: Vec<PathBuf>,
    /// first, last, or a column name (applies to every --dataset).
    #[arg(long)]
    label_column: Option<String>,
    /// Method to run (ablate: full_features_m1, lfwa_unconstrained_m2,
    /// random_subset_baseline or all).
    #[arg(long)]
    mode: Option<String>,
    /// Seed of the first trial; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Use this cardinality instead of the fractal-dimension ceiling.
    #[arg(long)]
    fd_override: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// table or records.
    #[arg(long, default_value = "table")]
    format: String,
    /// Flat key = value config file, applied before the flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Extra key=value override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write one convergence log per search trial into this directory.
    #[arg(long, value_name = "DIR")]
    history_dir: Option<PathBuf>,
    /// Record per-trial wall time (makes records output run-dependent).
    #[arg(long)]
    timings: bool,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

/// An error paired with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.category() {
            "config" => EXIT_CONFIG,
            "data" => EXIT_DATA,
            _ => EXIT_RUNTIME,
        };
        Failure { code, error: e.into() }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        error: anyhow::anyhow!(msg.into()),
    }
}

fn build_config(args: &Common, mode: Mode) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_kv(&text)?;
    }
    if !args.datasets.is_empty() {
        cfg.datasets = args
            .datasets
            .iter()
            .map(|p| known_dataset(&p.to_string_lossy()))
            .collect();
    }
    if let Some(label) = &args.label_column {
        let column: lfwa_fs::dataio::LabelColumn = label.parse()?;
        for spec in &mut cfg.datasets {
            spec.label_column = column.clone();
        }
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| config_error(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    cfg.mode = mode;
    if let Some(v) = args.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = args.repeats {
        cfg.repeats = v;
    }
    if let Some(v) = args.knn_k {
        cfg.classifier.k = v;
    }
    if let Some(v) = args.train_fraction {
        cfg.split.train_fraction = v;
    }
    if args.fd_override.is_some() {
        cfg.fd_override = args.fd_override;
    }
    if args.timings {
        cfg.record_timings = true;
    }
    if args.sequential {
        cfg.execution = lfwa_fs::Execution::Sequential;
        cfg.lfwa.execution = lfwa_fs::Execution::Sequential;
        cfg.classifier.execution = lfwa_fs::Execution::Sequential;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_mode(args: &Common, allowed: &[Mode], default: Mode) -> Result<Mode, Failure> {
    let Some(text) = &args.mode else {
        return Ok(default);
    };
    let mode: Mode = text.parse()?;
    if !allowed.contains(&mode) {
        return Err(config_error(format!("mode {mode} is not available for this subcommand")));
    }
    Ok(mode)
}

fn write_histories(dir: &PathBuf, report: &RunReport) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for t in report.trials.iter().filter(|t| !t.history.is_empty()) {
        let name: String = t
            .dataset
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let path = dir.join(format!("{name}-{}-seed{}.txt", t.method, t.seed));
        fs::write(&path, write_history(&t.history))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<RunReport, Failure> {
    let args = match &cli.command {
        Command::Reduce(a) | Command::Select(a) | Command::Ablate(a) => a,
    };
    let format: Format = args.format.parse()?;
    let report = match &cli.command {
        Command::Reduce(args) => {
            parse_mode(args, &[Mode::FdReduction], Mode::FdReduction)?;
            run_experiment(&build_config(args, Mode::FdReduction)?)?
        }
        Command::Select(args) => {
            parse_mode(args, &[Mode::LfwaFd], Mode::LfwaFd)?;
            run_experiment(&build_config(args, Mode::LfwaFd)?)?
        }
        Command::Ablate(args) => {
            let comparisons = [
                Mode::FullFeaturesM1,
                Mode::LfwaUnconstrainedM2,
                Mode::RandomSubsetBaseline,
            ];
            if args.mode.as_deref() == Some("all") || args.mode.is_none() {
                let cfg = build_config(args, Mode::FullFeaturesM1)?;
                run_comparison(&cfg, &comparisons)?
            } else {
                let mode = parse_mode(args, &comparisons, Mode::FullFeaturesM1)?;
                run_experiment(&build_config(args, mode)?)?
            }
        }
    };
    let text = emit_report(&report, format);
    let io = |error: anyhow::Error| Failure { code: EXIT_RUNTIME, error };
    match &args.out {
        Some(path) => fs::write(path, &text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(io)?,
        None => print!("{text}"),
    }
    if let Some(dir) = &args.history_dir {
        write_histories(dir, &report).map_err(io)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) if report.is_success() => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!("error: {} trial(s) failed", report.failures.len());
            for f in &report.failures {
                eprintln!("  {} {} seed {}: {}", f.dataset, f.method, f.seed, f.message);
            }
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
