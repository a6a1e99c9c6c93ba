use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use synergy_core::domain::ObjectiveKind;
use synergy_core::planner::{Prioritization, Strategy};
use synergy_core::sim::SimMode;

use crate::output::Format;

/// Plan, count and simulate multi-pipeline inference across wearable accelerators.
#[derive(Debug, Parser)]
#[command(name = "synergy", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count execution plans in closed form.
    Count(CountArgs),
    /// Select a holistic plan and print it with its estimate.
    Plan(PlanArgs),
    /// Simulate a plan over many runs and report throughput and utilization.
    Simulate(SimulateArgs),
    /// Compare strategies and prioritizations on one workload.
    Compare(CompareArgs),
    /// List, check or export the shipped fixtures.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Layer count of a single model.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "pipelines")]
    pub layers: Option<u64>,
    /// Comma-separated layer counts, one per pipeline.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "layers")]
    pub pipelines: Option<Vec<u64>>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub devices: u64,
    /// Output format; plain text when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args, Clone)]
pub struct ScenarioArgs {
    /// Shipped workload fixture (workload1..workload4, all-pipelines).
    #[arg(long)]
    pub fixture: Option<String>,
    /// Shipped device set replacing the fixture's devices (wearables, pair, trio, hetero).
    #[arg(long)]
    pub device_set: Option<String>,
    /// Devices JSON file.
    #[arg(long)]
    pub devices: Option<PathBuf>,
    /// Models JSON file.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Workload JSON file.
    #[arg(long)]
    pub workload: Option<PathBuf>,
    /// Interaction task latency in nanoseconds.
    #[arg(long)]
    pub interaction_latency_ns: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value = "throughput")]
    pub objective: ObjectiveKind,
    /// Let any device host sensing and interaction.
    #[arg(long)]
    pub unconstrained: bool,
    /// Maximum number of model chunks per plan.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_chunks: Option<u64>,
    /// Maximum plan combinations the oracle may examine.
    #[arg(long, env = "SYNERGY_ORACLE_BUDGET")]
    pub oracle_budget: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value = "synergy")]
    pub strategy: Strategy,
    #[arg(long, default_value = "data-intensity-desc")]
    pub prioritization: Prioritization,
    /// Write the plan here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Seq,
    InterPipeline,
    InterRun,
    All,
}

impl ModeArg {
    pub fn modes(self) -> Vec<SimMode> {
        match self {
            ModeArg::Seq => vec![SimMode::Sequential],
            ModeArg::InterPipeline => vec![SimMode::InterPipeline],
            ModeArg::InterRun => vec![SimMode::InterRun],
            ModeArg::All => SimMode::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Plan JSON as written by `plan`.
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long, value_enum, default_value = "seq")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub runs: u32,
    /// Runs per pipeline discarded before measuring.
    #[arg(long, default_value_t = 0)]
    pub warmup: u32,
    /// In-flight runs per pipeline for inter-run mode.
    #[arg(long, default_value_t = synergy_core::sim::DEFAULT_WINDOW, value_parser = clap::value_parser!(u32).range(1..))]
    pub window: u32,
    /// Write the event trace as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Comma-separated strategies; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub strategies: Option<Vec<Strategy>>,
    /// Comma-separated prioritizations, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "data-intensity-desc")]
    pub prioritizations: Vec<String>,
    /// Comma-separated extra objectives to sweep besides --objective.
    #[arg(long, value_delimiter = ',')]
    pub objectives: Option<Vec<ObjectiveKind>>,
    /// Evaluate every subset of this many pipelines and add a ratio-to-oracle column.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub subsets: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[command(subcommand)]
    pub action: FixturesAction,
}

#[derive(Debug, Subcommand)]
pub enum FixturesAction {
    /// List shipped fixture names.
    List,
    /// Check the shipped models against their published figures.
    Check,
    /// Write the fixture JSON files into a directory.
    Export { dir: PathBuf },
}
