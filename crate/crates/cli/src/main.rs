//! `hif`: simulate feeder data, train a detector, run it and score the run.
//!
//! Exit status: 0 on success, 1 for numerical or domain failures, 2 for
//! file, parse and configuration problems.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hif_core::dataio::{read_csv, write_csv};
use hif_core::eval::{DetectionReport, REFERENCE_TABLE};
use hif_core::pipeline::{self, RunConfig, TrainedModel};
use hif_core::{Error, Result};

#[derive(Parser)]
#[command(name = "hif", version, about = "High-impedance fault simulation and detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Existing directory for inputs and outputs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the labeled feature dataset and scenario waveforms.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Split the dataset and fit the configured detector.
    Train {
        #[command(flatten)]
        common: Common,
        /// Dataset to train from [default: <out>/dataset.csv]
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Run a trained model over test rows and write the report.
    Detect {
        #[command(flatten)]
        common: Common,
        /// Model file [default: <out>/model.json]
        #[arg(long)]
        model: Option<PathBuf>,
        /// Labeled test rows [default: <out>/test.csv]
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Print security, dependability and location accuracy of a report.
    Evaluate {
        /// Directory holding report.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Report file [default: <out>/report.json]
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also print published figures for other detection approaches.
        #[arg(long)]
        reference: bool,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn require_dir(dir: &Path) -> Result<()> {
    if !dir.is_dir() {
        return Err(Error::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        });
    }
    Ok(())
}

fn simulate(common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    require_dir(&common.out)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = write_simulation(&cfg, &common.out, &mut written);
    if result.is_err() {
        for path in written.iter().rev() {
            if path.is_dir() {
                let _ = fs::remove_dir(path);
            } else {
                let _ = fs::remove_file(path);
            }
        }
    }
    result
}

fn write_simulation(cfg: &RunConfig, out: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let data = pipeline::simulate(cfg)?;
    let path = out.join("dataset.csv");
    written.push(path.clone());
    write_csv(&data, &path)?;

    let cycles = cfg.simulate.waveform_cycles;
    if cycles > 0 {
        let dir = out.join("waveforms");
        if !dir.is_dir() {
            fs::create_dir(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            written.push(dir.clone());
        }
        for (i, w) in pipeline::scenario_waveforms(cfg)?.iter().enumerate() {
            let path = dir.join(format!("scenario_{i:02}.csv"));
            written.push(path.clone());
            pipeline::write_waveform_csv(w, cycles, &path)?;
        }
    }

    let counts = data
        .class_counts()
        .iter()
        .map(|(c, n)| format!("{c}={n}"))
        .collect::<Vec<_>>()
        .join(" ");
    println!(
        "simulate: {} rows x {} channels ({counts}), seed {}, wrote {}",
        data.n_rows(),
        data.n_cols(),
        cfg.seed,
        path.display()
    );
    Ok(())
}

fn train(common: &Common, dataset: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(common)?;
    require_dir(&common.out)?;
    let data = read_csv(&dataset.unwrap_or_else(|| common.out.join("dataset.csv")))?;
    let (train, test) = pipeline::split_dataset(&cfg, &data)?;
    let model = pipeline::train(&cfg, &train)?;
    write_csv(&train, &common.out.join("train.csv"))?;
    write_csv(&test, &common.out.join("test.csv"))?;
    let path = common.out.join("model.json");
    model.write_json(&path)?;
    println!("{}", model.summary());
    if let TrainedModel::Svm { cv: Some(cv), .. } = &model {
        println!("cv: best C = {} ({} folds, {} grid values)", cv.best_c, cv.folds, cv.curve.len());
    }
    println!(
        "train: {} training rows, {} test rows, wrote {}",
        train.n_rows(),
        test.n_rows(),
        path.display()
    );
    Ok(())
}

fn detect(common: &Common, model: Option<PathBuf>, test: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(common)?;
    require_dir(&common.out)?;
    let model = TrainedModel::read_json(&model.unwrap_or_else(|| common.out.join("model.json")))?;
    let test = read_csv(&test.unwrap_or_else(|| common.out.join("test.csv")))?;
    let report = pipeline::detect(&cfg, &model, &test)?;
    let path = common.out.join("report.json");
    report.write_json(&path)?;
    report.write_samples_csv(&common.out.join("samples.csv"))?;
    report.write_plot_files(&common.out)?;
    println!(
        "detect: {} rows scored with {}, wrote {}",
        report.per_sample.len(),
        report.detector,
        path.display()
    );
    Ok(())
}

fn percent(v: Option<f64>) -> String {
    v.map(|v| format!("{:.2}%", 100.0 * v)).unwrap_or_else(|| "n/a".into())
}

fn evaluate(out: &Path, report: Option<PathBuf>, reference: bool) -> Result<()> {
    let report = DetectionReport::read_json(&report.unwrap_or_else(|| out.join("report.json")))?;
    println!("detector:          {}", report.detector);
    println!("samples:           {}", report.per_sample.len());
    println!("security:          {}", percent(report.security));
    println!("dependability:     {}", percent(report.dependability));
    println!("location accuracy: {}", percent(report.location_accuracy));
    if reference {
        println!();
        println!("{:<26} {:>9} {:>14}", "published method", "security", "dependability");
        for (name, sec, dep) in REFERENCE_TABLE {
            println!("{name:<26} {sec:>8.1}% {dep:>13.1}%");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common } => simulate(&common),
        Command::Train { common, dataset } => train(&common, dataset),
        Command::Detect { common, model, test } => detect(&common, model, test),
        Command::Evaluate { out, report, reference } => evaluate(&out, report, reference),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io_or_config() { 2 } else { 1 })
        }
    }
}
