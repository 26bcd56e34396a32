use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use starsync_cli::commands::{execute, reproduce};
use starsync_cli::presets::{describe, PRESET_IDS};
use starsync_cli::spec::{ExperimentSpec, Format, Overrides};
use starsync_cli::{exit, CliError, CliResult, Status, WORKERS_ENV};

/// Steady states and phase synchronization of spin-1 star networks.
#[derive(Parser)]
#[command(name = "starsync", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the steady state and print populations and diagnostics.
    Steady(Common),
    /// Relative-phase distribution S2(φ) for one pair of sites.
    S2 {
        #[command(flatten)]
        common: Common,
        /// Pair of sites, e.g. `0,1` (hub and first leaf).
        #[arg(long, value_parser = parse_pair)]
        pair: Option<[usize; 2]>,
    },
    /// Evaluate the synchronization measures over a 1D or 2D parameter grid.
    Sweep(Common),
    /// Regenerate the data for a figure panel.
    Reproduce {
        /// Figure id, e.g. `fig2b`.
        #[arg(required_unless_present = "list")]
        figure: Option<String>,
        /// Output directory.
        #[arg(long, short, default_value = "results")]
        output: PathBuf,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: Format,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// List the available figure ids.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration field, e.g. `--set network.coupling=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Sweep worker threads.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Steady-state residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn overrides(self, pair: Option<[usize; 2]>) -> (Option<PathBuf>, Overrides) {
        let overrides = Overrides {
            set: self.set,
            output: self.output,
            format: self.format,
            workers: self.workers,
            tol: self.tol,
            pair,
        };
        (self.config, overrides)
    }
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_pair(s: &str) -> Result<[usize; 2], String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected `i,j`, got `{s}`"))?;
    let site = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid site index `{t}`"));
    Ok([site(i)?, site(j)?])
}

fn run_spec(command: &str, common: Common, pair: Option<[usize; 2]>) -> CliResult<Status> {
    let (config, overrides) = common.overrides(pair);
    let spec = ExperimentSpec::load(config.as_deref(), &overrides)?;
    execute(command, &spec)
}

fn run(cli: Cli) -> CliResult<Status> {
    match cli.command {
        Command::Steady(common) => run_spec("steady", common, None),
        Command::S2 { common, pair } => run_spec("s2", common, pair),
        Command::Sweep(common) => run_spec("sweep", common, None),
        Command::Reproduce { list: true, .. } => {
            for id in PRESET_IDS {
                println!("{id:<6} {}", describe(id).unwrap_or_default());
            }
            Ok(Status::Ok)
        }
        Command::Reproduce { figure, output, format, workers, .. } => {
            let figure = figure.unwrap_or_default();
            if workers == Some(0) {
                return Err(CliError::Input("--workers must be at least 1".into()));
            }
            let done = reproduce(&figure, &output, format, workers)?;
            for f in &done.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(done.status)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(Status::Ok) => exit::OK,
        Ok(Status::ToleranceUnmet(msg)) => {
            eprintln!("starsync: tolerance not met: {msg}");
            exit::TOLERANCE
        }
        Err(e) => {
            eprintln!("starsync: error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
