use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hsbnet_core::scenario::{B2mTemplate, GenerationConfig};

use crate::experiment::{Experiment, Scale};

#[derive(Debug, Parser)]
#[command(name = "hsbnet", version, about = "Queue analysis and resource optimization for hybrid semantic/bit networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scenario and write it as JSON.
    Generate(GenerateArgs),
    /// Run an experiment and write its CSV files.
    Run(RunArgs),
    /// Print headline metrics of every result CSV in a directory.
    Summarize {
        /// Directory holding result CSVs.
        dir: PathBuf,
    },
    /// Check a scenario file; exits 2 naming the first violated invariant.
    ValidateScenario {
        /// Scenario JSON file.
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum B2mKind {
    /// Linear bit-to-message transformation.
    Linear,
    /// Concave piecewise-linear transformation that saturates.
    Pwl,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of mobile users.
    #[arg(long, default_value_t = 20)]
    pub mus: usize,
    /// Number of base stations.
    #[arg(long, default_value_t = 3)]
    pub bss: usize,
    /// Radius of the deployment disc in meters.
    #[arg(long, default_value_t = 300.0)]
    pub radius: f64,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Interference factor applied to the received power of other users.
    #[arg(long)]
    pub interference: Option<f64>,
    /// Shape of the bit-to-message functions.
    #[arg(long, value_enum, default_value_t = B2mKind::Pwl)]
    pub b2m: B2mKind,
    /// Output file; the scenario is printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl GenerateArgs {
    pub fn generation_config(&self) -> GenerationConfig {
        let defaults = GenerationConfig::default();
        GenerationConfig {
            num_users: self.mus,
            num_stations: self.bss,
            radius_m: self.radius,
            seed: self.seed,
            interference_factor: self.interference.unwrap_or(defaults.interference_factor),
            b2m: b2m_template(self.b2m),
            ..defaults
        }
    }
}

pub fn b2m_template(kind: B2mKind) -> B2mTemplate {
    match (kind, B2mTemplate::default()) {
        (B2mKind::Pwl, t) => t,
        (B2mKind::Linear, B2mTemplate::PiecewiseLinear { slope_range, .. } | B2mTemplate::Linear { slope_range }) => {
            B2mTemplate::Linear { slope_range }
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment to run.
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Scenario file used instead of generated scenarios (comparison experiments only).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Base seed; per-point and per-trial seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Trials per grid point: scenarios for comparisons, replications for validations.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Number of mobile users in generated scenarios.
    #[arg(long)]
    pub mus: Option<usize>,
    /// Number of base stations in generated scenarios.
    #[arg(long)]
    pub bss: Option<usize>,
    /// Deployment radius in meters for generated scenarios.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Sweep grid as `a,b,c` or `start:step:end`. Units: packets/s (validate-scq),
    /// MHz (validate-ptq), BS count (sweep-bs), MU count (sweep-mu), mean matching degree (sweep-tau).
    #[arg(long)]
    pub grid: Option<String>,
    /// Slots (validate-ptq) or packets (validate-scq) per replication.
    #[arg(long)]
    pub slots: Option<u64>,
    /// Default sizes: desk (20 MUs, 3 BSs) or full (200 MUs, 10 BSs, long-running).
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// Shape of the bit-to-message functions in generated scenarios.
    #[arg(long, value_enum, default_value_t = B2mKind::Pwl)]
    pub b2m: B2mKind,
}
