use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "steerlab", version, about = "EPR steering of two-qubit states")]
pub struct Cli {
    /// Report errors as JSON on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Region labels of a family state for 2, 3 and unlimited settings.
    Classify(ClassifyArgs),
    /// Steering radius maximized over measurement axes.
    Radius(RadiusArgs),
    /// Region labels on a (p, θ) grid.
    ScanRegion(ScanRegionArgs),
    /// Linear steering inequality at canonical settings.
    ScanLinear(ScanLinearArgs),
    /// Simulated counts and a bootstrap of the radius.
    Simulate(SimulateArgs),
    /// Writes a family state as a state file.
    State(StateFileArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionArg {
    Ab,
    Ba,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioArg {
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "infinite")]
    Infinite,
}

/// A family state from `--p/--theta`, or any state from `--state-file`.
#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, conflicts_with_all = ["p", "theta"])]
    pub state_file: Option<PathBuf>,
    /// Read angles in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RadiusArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "ab")]
    pub direction: DirectionArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Bisection tolerance of the certificate.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Skip the canonical starting axes.
    #[arg(long)]
    pub no_canonical: bool,
    /// Include the assemblage at the best settings in the output.
    #[arg(long)]
    pub dump_assemblage: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScanRegionArgs {
    #[arg(long, default_value_t = 0.0)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 50)]
    pub p_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    pub theta_min: f64,
    /// Defaults to π/4 (45 with --degrees).
    #[arg(long)]
    pub theta_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub theta_steps: usize,
    #[arg(long, value_enum, default_value = "3")]
    pub scenario: ScenarioArg,
    /// Add radii at the canonical settings (A→B and B→A).
    #[arg(long)]
    pub with_solver: bool,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScanLinearArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Setting counts, from 2, 3, 4, 6, 10.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,6,10")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value = "ba")]
    pub direction: DirectionArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Mean total number of counts.
    #[arg(long, default_value_t = 1e6)]
    pub counts: f64,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "ab")]
    pub direction: DirectionArg,
    #[arg(long, default_value_t = 100)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the simulated counts as CSV.
    #[arg(long)]
    pub counts_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StateFileArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
