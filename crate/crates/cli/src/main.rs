//! `nrdicke`: batch front end for the non-reciprocal Dicke model toolkit.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use nrdicke::experiments::{AxisSpec, SweepParameter};
use serde::Serialize;

use crate::commands::{Context, Emitter};
use crate::config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("numerical failure: {message}")]
    Numerical { message: String, failed_cells: Vec<FailedCell> },
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Numerical { .. } | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedCell {
    pub row: usize,
    pub col: usize,
    pub coords: [f64; 2],
    pub error: String,
}

#[derive(Debug, Parser)]
#[command(name = "nrdicke", version, about = "Mean-field dynamics of the non-reciprocal two-species Dicke model")]
struct Cli {
    /// JSON run configuration; every block is optional.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `--set model.lambda=3`.
    #[arg(long = "set", global = true, value_name = "BLOCK.KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Format of series and grids (overrides `output.format`).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write gnuplot scripts next to the data.
    #[arg(long, global = true)]
    plot: bool,
    /// Worker threads for parallel sweeps; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the fully resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Integrate one trajectory.
    Simulate,
    /// Locate and classify stationary states.
    FixedPoints,
    /// Normal-phase eigenvalues along a parameter sweep.
    NpSpectrum {
        #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["PARAM", "MIN", "MAX", "COUNT"])]
        sweep: Option<Vec<String>>,
    },
    /// Exceptional points of the adiabatic normal phase and the coalescence scan.
    EpScan,
    /// Two-parameter phase diagram.
    PhaseDiagram {
        #[arg(
            long,
            num_args = 8,
            allow_negative_numbers = true,
            value_names = ["P1", "MIN1", "MAX1", "N1", "P2", "MIN2", "MAX2", "N2"]
        )]
        axes: Option<Vec<String>>,
    },
    /// Frequency spectra and regime of one trajectory.
    Spectrum,
    /// Relax, flip the coupling phase and compare the orbits.
    Quench,
    /// Cluster the attractors reached from random initial conditions.
    Census,
    /// Compare the adiabatic and full spectra.
    Consistency,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::FixedPoints => "fixed-points",
            Command::NpSpectrum { .. } => "np-spectrum",
            Command::EpScan => "ep-scan",
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::Spectrum => "spectrum",
            Command::Quench => "quench",
            Command::Census => "census",
            Command::Consistency => "consistency",
        }
    }
}

fn parse_axis(words: &[String], flag: &str) -> Result<AxisSpec, CliError> {
    let usage = |what: &str| CliError::Usage(format!("{flag}: {what}"));
    let name: SweepParameter = words[0].parse().map_err(|e: nrdicke::Error| usage(&e.to_string()))?;
    let number = |s: &str| s.parse::<f64>().map_err(|_| usage(&format!("`{s}` is not a number")));
    let count = words[3].parse().map_err(|_| usage(&format!("`{}` is not a point count", words[3])))?;
    Ok(AxisSpec::new(name, number(&words[1])?, number(&words[2])?, count))
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => "{}".to_string(),
    };
    let mut cfg = RunConfig::parse(&text, &cli.set)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    match &cli.command {
        Some(Command::NpSpectrum { sweep: Some(words) }) => {
            cfg.np_spectrum.sweep = parse_axis(words, "--sweep")?;
        }
        Some(Command::PhaseDiagram { axes: Some(words) }) => {
            cfg.phase_diagram.axes = [parse_axis(&words[..4], "--axes")?, parse_axis(&words[4..], "--axes")?];
        }
        _ => {}
    }
    cfg.validated()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    status: &'static str,
    error: Option<String>,
    failed_cells: &'a [FailedCell],
    outputs: &'a [String],
    config: &'a RunConfig,
    created_unix_seconds: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    if cli.print_config {
        let text = serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Io(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    let command = cli
        .command
        .clone()
        .ok_or_else(|| CliError::Usage("a subcommand is required; see `nrdicke --help`".into()))?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let mut em = Emitter::new(&cfg.output.dir)?;
    let ctx = Context { cfg: &cfg, format: cfg.output.format, plot: cli.plot };
    let result = match &command {
        Command::Simulate => commands::simulate(&ctx, &mut em),
        Command::FixedPoints => commands::fixed_points(&ctx, &mut em),
        Command::NpSpectrum { .. } => commands::np_spectrum_sweep(&ctx, &mut em),
        Command::EpScan => commands::ep_scan(&ctx, &mut em),
        Command::PhaseDiagram { .. } => commands::phase_diagram(&ctx, &mut em),
        Command::Spectrum => commands::spectrum(&ctx, &mut em),
        Command::Quench => commands::quench(&ctx, &mut em),
        Command::Census => commands::census(&ctx, &mut em),
        Command::Consistency => commands::consistency(&ctx, &mut em),
    };
    if matches!(result, Err(CliError::Config(_) | CliError::Usage(_))) {
        return result;
    }
    let failed_cells = match &result {
        Err(CliError::Numerical { failed_cells, .. }) => failed_cells.as_slice(),
        _ => &[],
    };
    let outputs = em.written.clone();
    let manifest = Manifest {
        tool: "nrdicke",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        status: if result.is_ok() { "ok" } else { "failed" },
        error: result.as_ref().err().map(ToString::to_string),
        failed_cells,
        outputs: &outputs,
        config: &cfg,
        created_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    em.json("manifest.json", &manifest)?;
    for name in &em.written {
        println!("{}", cfg.output.dir.join(name).display());
    }
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nrdicke: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
