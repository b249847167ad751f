//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 bad spec or arguments,
//! 3 dataset failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chpo::harness::{run_ablation, run_experiment, run_sensitivity, Axis, ExperimentSpec, Report};
use chpo::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chpo", version, about = "Budget-constrained hyperparameter optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the configured algorithms.
    Run(RunArgs),
    /// Sweep p or m for ExperienceThinking.
    Sensitivity {
        #[command(flatten)]
        common: RunArgs,
        /// `p` or `m`; overrides the spec's [sensitivity] axis.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values; overrides the spec.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Full ExperienceThinking against its single-module variants.
    Ablate(RunArgs),
    /// Parse and check a spec, including its dataset, without running it.
    ValidateSpec {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Directory for summary.csv, runs.csv and timing.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `repetitions`.
    #[arg(long)]
    reps: Option<usize>,
    /// Overrides the base `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentSpec, Error> {
        let mut spec = ExperimentSpec::from_file(&self.spec)?;
        if let Some(r) = self.reps {
            if r == 0 {
                return Err(bad_arg(&self.spec, "--reps must be at least 1"));
            }
            spec.repetitions = r;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if self.workers == Some(0) {
            return Err(bad_arg(&self.spec, "--workers must be at least 1"));
        }
        Ok(spec)
    }

    fn emit(&self, spec: &ExperimentSpec, report: &Report) -> Result<(), Error> {
        if let Some(dir) = self.out.clone().or_else(|| spec.output_dir()) {
            report.write_to(&dir)?;
            eprintln!("wrote {}", dir.display());
        }
        print!("{}", report.summary_csv());
        Ok(())
    }
}

fn bad_arg(path: &Path, message: &str) -> Error {
    Error::Spec {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let spec = args.load()?;
            let report = run_experiment(&spec, args.workers)?;
            args.emit(&spec, &report)
        }
        Command::Sensitivity { common, axis, values } => {
            let spec = common.load()?;
            let section = spec.sensitivity.as_ref();
            let axis = match axis {
                Some(a) => Axis::parse(&a).ok_or_else(|| bad_arg(&common.spec, &format!("unknown axis `{a}`")))?,
                None => section
                    .map(|s| s.axis)
                    .ok_or_else(|| bad_arg(&common.spec, "no --axis and no [sensitivity] section"))?,
            };
            let values = match values {
                Some(v) => v,
                None => section
                    .map(|s| s.values.clone())
                    .ok_or_else(|| bad_arg(&common.spec, "no --values and no [sensitivity] section"))?,
            };
            let report = run_sensitivity(&spec, axis, &values, common.workers)?;
            common.emit(&spec, &report)
        }
        Command::Ablate(args) => {
            let spec = args.load()?;
            let report = run_ablation(&spec, args.workers)?;
            args.emit(&spec, &report)
        }
        Command::ValidateSpec { spec } => {
            let parsed = ExperimentSpec::from_file(&spec)?;
            let problem = parsed.build_problem()?;
            println!(
                "ok: {} parameters, budget {}, {} repetitions, {} algorithms",
                problem.space().dim(),
                problem.budget(),
                parsed.repetitions,
                parsed.algorithms.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
