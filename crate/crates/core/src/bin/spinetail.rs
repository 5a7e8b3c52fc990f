use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinetail::experiment::commands::{self, CommandOutput, ExitStatus, RunOptions};
use spinetail::experiment::{preset, ExperimentConfig};
use spinetail::replication::default_parallelism;
use spinetail::Error;

#[derive(Parser)]
#[command(
    name = "spinetail",
    version,
    about = "Tail estimation for high-order Lindley equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in experiment: mm1, simplex, nonbranching or discrete.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: number of cores).
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// CSV destination; the pool file for run-popdyn.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for alpha and the drift and check the efficiency condition.
    SolveAlpha,
    /// Importance-sampling estimates over the grid.
    RunIs,
    /// Depth-truncated naive tree estimates over the grid.
    RunNaive,
    /// Population-dynamics pool and its tail estimates.
    RunPopdyn,
    /// Estimate the tail constant and the decay slope.
    EstimateH,
    /// Rerun a reference table (mm1 or simplex) and compare row by row.
    ReproduceTable { name: String },
    /// Fast invariant suite.
    Validate {
        /// Run the estimator checks at this alpha instead of the root.
        #[arg(long)]
        alpha_override: Option<f64>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    match (&common.config, &common.preset) {
        (Some(path), None) => ExperimentConfig::from_path(path),
        (None, Some(name)) => preset(name),
        (Some(_), Some(_)) => Err(Error::Config("give --config or --preset, not both".into())),
        (None, None) => Err(Error::Config(
            "one of --config or --preset is required".into(),
        )),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: CommandOutput, csv_path: Option<&Path>, report_path: Option<&Path>) -> ExitCode {
    let mut status = out.status;
    match (&out.csv, csv_path) {
        (Some(csv), Some(path)) => {
            if let Err(e) = write_file(path, csv) {
                eprintln!("error: {e}");
                status = ExitStatus::Usage;
            }
            print!("{}", out.report);
        }
        (Some(csv), None) => {
            print!("{csv}");
            eprint!("{}", out.report);
        }
        (None, _) => print!("{}", out.report),
    }
    if let Some(path) = report_path {
        if let Err(e) = write_file(path, &out.report) {
            eprintln!("error: {e}");
            status = ExitStatus::Usage;
        }
    }
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = &cli.common;
    let opts = RunOptions {
        seed: common.seed,
        parallelism: common
            .parallelism
            .unwrap_or_else(default_parallelism)
            .max(1),
    };
    let out_path = common.out.as_deref();

    let cfg = match &cli.command {
        Command::ReproduceTable { .. } | Command::Validate { .. } => None,
        _ => match load_config(common) {
            Ok(cfg) => Some(cfg),
            Err(e) => return emit(CommandOutput::from_error(&e), None, None),
        },
    };
    let report_path = cfg.as_ref().and_then(|c| c.output.report.clone());
    let csv_path = out_path
        .map(Path::to_path_buf)
        .or_else(|| cfg.as_ref().and_then(|c| c.output.csv.clone()));

    let out = match (&cli.command, &cfg) {
        (Command::SolveAlpha, Some(cfg)) => commands::solve_alpha(cfg, &opts),
        (Command::RunIs, Some(cfg)) => commands::run_is(cfg, &opts),
        (Command::RunNaive, Some(cfg)) => commands::run_naive(cfg, &opts),
        (Command::RunPopdyn, Some(cfg)) => {
            let out = commands::run_popdyn(cfg, &opts, out_path);
            return emit(out, cfg.output.csv.as_deref(), report_path.as_deref());
        }
        (Command::EstimateH, Some(cfg)) => commands::estimate_h(cfg, &opts),
        (Command::ReproduceTable { name }, _) => commands::reproduce_table(name, &opts),
        (Command::Validate { alpha_override }, _) => commands::validate(*alpha_override, &opts),
        _ => unreachable!("config loaded for every other command"),
    };
    emit(out, csv_path.as_deref(), report_path.as_deref())
}
