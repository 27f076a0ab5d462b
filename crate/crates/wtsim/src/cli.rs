//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;
use wtsim_core::engine::{run_scenario, RunError, SimFault};
use wtsim_core::grid_side::ControlVariant;
use wtsim_core::log::TimeSeriesLog;
use wtsim_core::metrics::{compare_runs, CompareSpec, MetricError};
use wtsim_core::scenario::Scenario;

use crate::csv_log::{read_csv, write_csv, CsvError};
use crate::plot::line_plot;
use crate::scenario_file::{effective_parameters, load_scenario, LoadError};

/// Exit status for unreadable or invalid scenario and spec files.
pub const EXIT_CONFIG: u8 = 3;
/// Exit status when the simulation stops on a numerical fault.
pub const EXIT_FAULT: u8 = 4;
/// Exit status for I/O and other failures.
pub const EXIT_OTHER: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "wtsim", version, about = "Transient simulator for a 15 MW direct-drive wind turbine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Sequence,
    PositiveOnly,
}

impl From<VariantArg> for ControlVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Sequence => ControlVariant::Sequence,
            VariantArg::PositiveOnly => ControlVariant::PositiveOnly,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file (or a bundled scenario name) and write its log.
    Run {
        scenario: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write one SVG plot per channel.
        #[arg(long)]
        plot: bool,
        /// Override the grid-side control variant.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Compare two CSV logs and print a JSON report.
    Compare {
        log_a: PathBuf,
        log_b: PathBuf,
        /// TOML file with the comparison windows and channels.
        #[arg(long)]
        spec: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario and list every problem found.
    Validate { scenario: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("invalid compare spec {path}: {message}")]
    Spec { path: String, message: String },
    #[error("{0}")]
    Fault(Box<SimFault>),
    #[error("{path}: {source}")]
    Csv { path: String, source: CsvError },
    #[error("{0}")]
    Metric(MetricError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Load(_) | CliError::Invalid(_) | CliError::Spec { .. } => EXIT_CONFIG,
            CliError::Fault(_) => EXIT_FAULT,
            _ => EXIT_OTHER,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Runs `s` and attaches every effective setting to the log metadata.
pub fn simulate(s: &Scenario) -> Result<TimeSeriesLog, CliError> {
    let mut log = run_scenario(s).map_err(|e| match e {
        RunError::Config(errors) => CliError::Invalid(errors),
        RunError::Fault(f) => CliError::Fault(Box::new(f)),
    })?;
    log.metadata.extend(effective_parameters(s));
    Ok(log)
}

fn file_name(s: &Scenario) -> String {
    let name: String = s
        .name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if name.is_empty() { "scenario".into() } else { name }
}

fn run(scenario: &str, out: &Path, plot: bool, variant: Option<VariantArg>) -> Result<(), CliError> {
    let mut s = load_scenario(scenario)?;
    if let Some(v) = variant {
        s.variant = v.into();
    }
    s.validate().map_err(CliError::Invalid)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let stem = file_name(&s);
    let started = Instant::now();
    let log = match simulate(&s) {
        Err(CliError::Fault(f)) => {
            let path = out.join(format!("{stem}.fault.json"));
            let json = serde_json::to_string_pretty(&*f.snapshot).expect("state serializes");
            fs::write(&path, json).map_err(io_err(&path))?;
            eprintln!("state at the fault written to {}", path.display());
            return Err(CliError::Fault(f));
        }
        other => other?,
    };
    let elapsed = started.elapsed();
    let csv_path = out.join(format!("{stem}.csv"));
    let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_csv(&log, file).map_err(|source| CliError::Csv {
        path: csv_path.display().to_string(),
        source,
    })?;
    println!(
        "{}: {} samples of {} channels in {:.2} s -> {}",
        s.name,
        log.len(),
        log.channels.len() - 1,
        elapsed.as_secs_f64(),
        csv_path.display()
    );
    if plot {
        let dir = out.join(format!("{stem}_plots"));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (info, col) in log.channels.iter().zip(&log.columns).skip(1) {
            let path = dir.join(format!("{}.svg", info.name));
            let svg = line_plot(log.time(), col, &format!("{} / {}", s.name, info.name), &info.unit);
            fs::write(&path, svg).map_err(io_err(&path))?;
        }
        println!("plots -> {}", dir.display());
    }
    Ok(())
}

fn read_log(path: &Path) -> Result<TimeSeriesLog, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    read_csv(&text).map_err(|source| CliError::Csv {
        path: path.display().to_string(),
        source,
    })
}

fn compare(a: &Path, b: &Path, spec: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(spec).map_err(|e| CliError::Spec {
        path: spec.display().to_string(),
        message: e.to_string(),
    })?;
    let spec: CompareSpec = toml::from_str(&text).map_err(|e| CliError::Spec {
        path: spec.display().to_string(),
        message: e.to_string(),
    })?;
    let report = compare_runs(&read_log(a)?, &read_log(b)?, &spec).map_err(CliError::Metric)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match out {
        Some(path) => fs::write(path, json + "\n").map_err(io_err(path))?,
        None => {
            let _ = writeln!(std::io::stdout(), "{json}");
        }
    }
    Ok(())
}

fn validate(scenario: &str) -> Result<(), CliError> {
    let s = load_scenario(scenario)?;
    s.validate().map_err(CliError::Invalid)?;
    println!("{}: ok", s.name);
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            plot,
            variant,
        } => run(&scenario, &out, plot, variant),
        Command::Compare {
            log_a,
            log_b,
            spec,
            out,
        } => compare(&log_a, &log_b, &spec, out.as_deref()),
        Command::Validate { scenario } => validate(&scenario),
    }
}

pub fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
