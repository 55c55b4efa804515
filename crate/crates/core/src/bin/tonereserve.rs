use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tonereserve::cli::{execute, exit, CliError, Experiment, ExperimentConfig, Format, Params};
use tonereserve::systems::SystemTag;

/// Runs one registry experiment and writes its result table.
#[derive(Debug, Parser)]
#[command(name = "tonereserve", version)]
struct Args {
    /// Experiment id; may be omitted when --config supplies it.
    #[arg(value_enum)]
    experiment: Option<Experiment>,
    /// JSON configuration file; command-line flags are not merged into it.
    #[arg(long, conflicts_with_all = ["experiment", "out", "seed"])]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated list of sizes N.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Comma-separated progression lengths.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Comma-separated extension constants.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    sets: Option<usize>,
    #[arg(long, value_enum)]
    system: Option<SystemArg>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Record per-row runtime in milliseconds.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SystemArg {
    Walsh,
    Fourier,
}

fn config(args: Args) -> Result<ExperimentConfig, CliError> {
    if let Some(path) = args.config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        return ExperimentConfig::from_json(&text);
    }
    let experiment = args.experiment.ok_or_else(|| CliError::Invalid("missing experiment id".into()))?;
    let out = args.out.ok_or_else(|| CliError::Invalid("--out is required".into()))?;
    let seed = args.seed.ok_or_else(|| CliError::Invalid("--seed is required".into()))?;
    Ok(ExperimentConfig {
        experiment: experiment.id().to_owned(),
        params: Params {
            n: args.n,
            delta: args.delta,
            lambda: args.lambda,
            m: args.m,
            c: args.c,
            trials: args.trials,
            sets: args.sets,
            system: args.system.map(|s| match s {
                SystemArg::Walsh => SystemTag::Walsh,
                SystemArg::Fourier => SystemTag::Fourier,
            }),
            tolerance: args.tolerance,
        },
        out,
        format: args.format,
        seed,
        timing: args.timing,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INVALID } else { exit::PASS });
        }
    };
    match config(args).and_then(|c| execute(&c)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("tonereserve: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
