//! Thin command-line front end; all behavior lives in the library.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use uwb_aoa::commands::{
    cmd_evaluate, cmd_import, cmd_report, cmd_simulate, cmd_train, CommandError,
};
use uwb_aoa::config::{ModelKind, RunConfig, TrainTask};

#[derive(Parser)]
#[command(
    name = "uwb-aoa",
    about = "Dual-antenna UWB angle-of-arrival toolkit: simulate, import, train, evaluate, report",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a rotation-sweep dataset.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Angle step in degrees (must divide 360).
        #[arg(long)]
        angle_step: Option<f64>,
        /// Comma-separated distances in meters.
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
        /// Records per (distance, angle) pose.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Convert an external CSV capture into the canonical format.
    Import {
        #[command(flatten)]
        common: Common,
        /// Source CSV file.
        #[arg(long)]
        source: PathBuf,
        /// Column-mapping TOML file.
        #[arg(long)]
        mapping: PathBuf,
    },
    /// Train a correction or zone-classification model.
    Train {
        #[command(flatten)]
        common: Common,
        /// Canonical dataset to train on.
        #[arg(long)]
        dataset: PathBuf,
        /// regression | zone-classify
        #[arg(long)]
        task: Option<String>,
        /// mlp | gbt | poly
        #[arg(long)]
        model: Option<String>,
        /// Boosted-tree count override.
        #[arg(long)]
        n_estimators: Option<usize>,
        /// Epoch count override.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate the naive estimator or a trained model.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Canonical dataset to evaluate on.
        #[arg(long)]
        dataset: PathBuf,
        /// Trained model container; omit to evaluate the naive estimator.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Print a saved metrics report.
    Report {
        /// report.json produced by evaluate.
        #[arg(long)]
        report: PathBuf,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, CommandError> {
    let mut config = RunConfig::load(common.config.as_deref())
        .map_err(|e| CommandError::Config(e.to_string()))?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn parse_task(raw: &str) -> Result<TrainTask, CommandError> {
    match raw {
        "regression" => Ok(TrainTask::Regression),
        "zone-classify" | "zone_classify" => Ok(TrainTask::ZoneClassify),
        other => Err(CommandError::Config(format!(
            "unknown task '{other}' (expected regression | zone-classify)"
        ))),
    }
}

fn parse_model(raw: &str) -> Result<ModelKind, CommandError> {
    match raw {
        "mlp" => Ok(ModelKind::Mlp),
        "gbt" => Ok(ModelKind::Gbt),
        "poly" => Ok(ModelKind::Poly),
        other => Err(CommandError::Config(format!(
            "unknown model '{other}' (expected mlp | gbt | poly)"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Simulate {
            common,
            angle_step,
            distances,
            reps,
        } => {
            let mut config = load_config(&common)?;
            if let Some(step) = angle_step {
                config.sweep.angle_step_deg = step;
            }
            if let Some(d) = distances {
                config.sweep.distances_m = d;
            }
            if let Some(r) = reps {
                config.sweep.records_per_pose = r;
            }
            let summary = cmd_simulate(&config, &common.out)?;
            println!(
                "simulated {} records ({} kept) -> {}",
                summary.synthesized,
                summary.kept,
                summary.dataset_path.display()
            );
            Ok(())
        }
        Command::Import {
            common,
            source,
            mapping,
        } => {
            let config = load_config(&common)?;
            let summary = cmd_import(&config, &source, &mapping, &common.out)?;
            println!(
                "imported {} records ({} kept) -> {}",
                summary.imported,
                summary.kept,
                summary.dataset_path.display()
            );
            Ok(())
        }
        Command::Train {
            common,
            dataset,
            task,
            model,
            n_estimators,
            epochs,
        } => {
            let mut config = load_config(&common)?;
            if let Some(t) = task.as_deref() {
                config.train.task = parse_task(t)?;
            }
            if let Some(m) = model.as_deref() {
                config.train.model = parse_model(m)?;
            }
            if let Some(n) = n_estimators {
                config.train.n_estimators = n;
            }
            if let Some(e) = epochs {
                config.train.epochs = e;
            }
            let summary = cmd_train(&config, &dataset, &common.out)?;
            println!(
                "trained on {} records ({} skipped), model {} bytes -> {}",
                summary.train_records,
                summary.skipped_records,
                summary.model_bytes,
                summary.model_path.display()
            );
            if let Some(loss) = summary.final_epoch_loss {
                println!("final epoch loss: {loss:.6}");
            }
            Ok(())
        }
        Command::Evaluate {
            common,
            dataset,
            model,
        } => {
            let config = load_config(&common)?;
            let summary = cmd_evaluate(&config, &dataset, model.as_deref(), &common.out)?;
            println!("report -> {}", summary.report_path.display());
            print!("{}", cmd_report(&summary.report_path)?);
            Ok(())
        }
        Command::Report { report } => {
            print!("{}", cmd_report(&report)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
