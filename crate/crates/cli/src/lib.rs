//! Command-line front end for the `aerprov` models.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod presets;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::ScenarioConfig;
pub use error::CliError;
pub use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "aerprov",
    version,
    about = "Energy provisioning for UAV-recharged IoT nodes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-event and daily energy breakdown of a node profile.
    Consumption {
        #[command(flatten)]
        source: Source,
    },
    /// Minimum battery capacity for unlimited autonomy.
    Size {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        schedule: Schedule,
        /// Charge rate in C; defaults to the configured chemistry's.
        #[arg(long)]
        c_rate: Option<f64>,
        #[arg(long)]
        chemistry: Option<String>,
        #[command(flatten)]
        daily: DailySource,
    },
    /// Closed-form autonomy of a battery under periodic recharging.
    Autonomy {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        battery: BatteryOverrides,
        /// Interventions per year; 0 disables charging.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        charge_time_s: Option<f64>,
        #[command(flatten)]
        daily: DailySource,
    },
    /// Run the fleet simulator and write trace files.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        battery: BatteryOverrides,
        #[command(flatten)]
        schedule: Schedule,
        #[arg(long)]
        horizon_days: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate a figure's data grid.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        /// Also render each dataset as SVG.
        #[arg(long)]
        svg: bool,
    },
    /// Feasibility of IPT, CPT and RF links for the configured transfers.
    AssessWpt {
        #[command(flatten)]
        source: Source,
        /// Energy to transfer per intervention; repeatable.
        #[arg(long = "energy-j")]
        energies_j: Vec<f64>,
        #[arg(long)]
        time_s: Option<f64>,
        #[arg(long)]
        technology: Option<String>,
        /// Exit with status 3 if any assessed link is infeasible.
        #[arg(long)]
        require_feasible: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Bundled preset name (default `tree-node`).
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Scenario configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Schedule {
    /// Interventions per year.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub charge_time_s: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BatteryOverrides {
    #[arg(long)]
    pub chemistry: Option<String>,
    #[arg(long, conflicts_with = "capacity_j")]
    pub capacity_wh: Option<f64>,
    #[arg(long)]
    pub capacity_j: Option<f64>,
    #[arg(long)]
    pub c_rate: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DailySource {
    /// Use the daily energy computed from the profile even when the
    /// configuration carries a reference total.
    #[arg(long)]
    pub computed_daily: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Soc,
    AutonomyVsTime,
    CapacityVsN,
    All,
}

/// Runs a parsed command line and returns the text for stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    commands::dispatch(cli.command)
}
