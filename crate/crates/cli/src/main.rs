mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

/// Peakon experiments for the r-Camassa-Holm equation.
#[derive(Parser, Debug)]
#[command(name = "rch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a scenario and write its trajectory.
    Simulate(SimulateArgs),
    /// Solve and sample a single peakon profile.
    Profile(ProfileArgs),
    /// Run verification suites and print a JSON report.
    Verify(VerifyArgs),
    /// Sweep a scenario family over exponents.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, value_delimiter = ',', default_value = "csv,json")]
    pub formats: Vec<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<String>,
    /// Scenario config file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Overrides the scenario's end time.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Fixed RK4 step; replaces the scenario's scheme.
    #[arg(long, conflicts_with = "rtol")]
    pub dt: Option<f64>,
    /// Adaptive RK45 tolerance; replaces the scenario's scheme.
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Comma-separated times at which to write profile snapshots.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// Exponent, at least 2.
    #[arg(long)]
    pub r: f64,
    /// Comma-separated peak positions.
    #[arg(long = "q", value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub q: Vec<f64>,
    /// Comma-separated peak heights.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "p", required_unless_present = "p")]
    pub uhat: Vec<f64>,
    /// Comma-separated momenta.
    #[arg(long = "p", value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Vec<f64>,
    /// Sample grid as `lo,hi,count`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suites to run (default: all).
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<String>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Seed for randomized configurations.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Optional file for the JSON report in addition to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Collision,
    PhaseShift,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    /// Comma-separated exponents.
    #[arg(long = "r", value_delimiter = ',')]
    pub r_values: Vec<f64>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Overrides the base scenario's end time.
    #[arg(long)]
    pub t_end: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RCH_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Profile(a) => commands::profile(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
