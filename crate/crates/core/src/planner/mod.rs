//! Holistic plan selection.
//!
//! Every strategy works on precomputed candidates (one per enumerated
//! execution plan) and breaks ties by dense enumeration index, so results are
//! reproducible regardless of thread scheduling.

mod candidate;
mod estimate;
mod objective;
mod oracle;
mod strategy;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::cost::CostError;
use crate::domain::{DeviceId, HolisticPlan, ObjectiveKind, PlanShapeError};
use crate::enumerate::{CapacityDimension, EnumerationConfig, EnumerationError, RunnableReport};
use crate::scenario::Scenario;

pub use estimate::{
    data_intensity, estimate, estimate_latency, estimate_latency_with, model_data_intensity,
    DataIntensity, GraphLayout, PlanEstimate, TaskGraph, TaskNode,
};
pub use objective::{objective_value, ObjectiveScore};
pub use oracle::{oracle_space_size, select_oracle};
pub use strategy::{prioritize, select_baseline, select_progressive};

pub const DEFAULT_ORACLE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Synergy,
    Oracle,
    MinDev,
    MaxDev,
    PriMinDev,
    PriMaxDev,
    IndModel,
    JointModel,
    IndBest,
}

impl Strategy {
    pub const ALL: [Strategy; 9] = [
        Strategy::Synergy,
        Strategy::Oracle,
        Strategy::MinDev,
        Strategy::MaxDev,
        Strategy::PriMinDev,
        Strategy::PriMaxDev,
        Strategy::IndModel,
        Strategy::JointModel,
        Strategy::IndBest,
    ];

    pub const BASELINES: [Strategy; 7] = [
        Strategy::MinDev,
        Strategy::MaxDev,
        Strategy::PriMinDev,
        Strategy::PriMaxDev,
        Strategy::IndModel,
        Strategy::JointModel,
        Strategy::IndBest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Synergy => "synergy",
            Strategy::Oracle => "oracle",
            Strategy::MinDev => "mindev",
            Strategy::MaxDev => "maxdev",
            Strategy::PriMinDev => "primindev",
            Strategy::PriMaxDev => "primaxdev",
            Strategy::IndModel => "indmodel",
            Strategy::JointModel => "jointmodel",
            Strategy::IndBest => "indbest",
        }
    }

    /// True for strategies that check capacity while fixing plans one at a time.
    pub fn accumulates(self) -> bool {
        matches!(
            self,
            Strategy::Synergy
                | Strategy::MinDev
                | Strategy::MaxDev
                | Strategy::PriMinDev
                | Strategy::PriMaxDev
                | Strategy::JointModel
        )
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == lower)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

/// Order in which pipelines get their execution plan fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Prioritization {
    #[default]
    DataIntensityDesc,
    DataIntensityAsc,
    ModelSizeDes,
    ModelSizeAsc,
    NumLayersDes,
    NumLayersAsc,
    Sequential,
}

impl Prioritization {
    pub const ALL: [Prioritization; 7] = [
        Prioritization::DataIntensityDesc,
        Prioritization::DataIntensityAsc,
        Prioritization::ModelSizeDes,
        Prioritization::ModelSizeAsc,
        Prioritization::NumLayersDes,
        Prioritization::NumLayersAsc,
        Prioritization::Sequential,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Prioritization::DataIntensityDesc => "data-intensity-desc",
            Prioritization::DataIntensityAsc => "data-intensity-asc",
            Prioritization::ModelSizeDes => "model-size-desc",
            Prioritization::ModelSizeAsc => "model-size-asc",
            Prioritization::NumLayersDes => "num-layers-desc",
            Prioritization::NumLayersAsc => "num-layers-asc",
            Prioritization::Sequential => "sequential",
        }
    }
}

impl fmt::Display for Prioritization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Prioritization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Prioritization::ALL
            .into_iter()
            .find(|p| p.as_str() == lower)
            .ok_or_else(|| format!("unknown prioritization `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerConfig {
    pub objective: ObjectiveKind,
    pub prioritization: Prioritization,
    pub enumeration: EnumerationConfig,
    /// Maximum number of plan combinations the oracle may examine.
    pub oracle_budget: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            objective: ObjectiveKind::ThroughputMax,
            prioritization: Prioritization::DataIntensityDesc,
            enumeration: EnumerationConfig::with_requirements(),
            oracle_budget: DEFAULT_ORACLE_BUDGET,
        }
    }
}

impl PlannerConfig {
    pub fn objective(mut self, objective: ObjectiveKind) -> Self {
        self.objective = objective;
        self
    }

    pub fn prioritization(mut self, prioritization: Prioritization) -> Self {
        self.prioritization = prioritization;
        self
    }

    pub fn enumeration(mut self, enumeration: EnumerationConfig) -> Self {
        self.enumeration = enumeration;
        self
    }

    pub fn oracle_budget(mut self, budget: u64) -> Self {
        self.oracle_budget = budget;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Candidate plans (or plan combinations, for the oracle) scored.
    pub evaluated: u64,
    /// Execution-plan count per pipeline, registration order.
    pub space_sizes: Vec<BigUint>,
    /// Pipeline indices in the order their plans were fixed.
    pub order: Vec<usize>,
}

impl SearchStats {
    pub fn space_sum(&self) -> BigUint {
        self.space_sizes.iter().sum()
    }

    pub fn space_product(&self) -> BigUint {
        self.space_sizes.iter().product()
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub plan: HolisticPlan,
    pub estimate: PlanEstimate,
    pub runnable: RunnableReport,
    /// Dense enumeration index of each pipeline's plan, registration order.
    pub indices: Vec<usize>,
    pub stats: SearchStats,
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("holistic plan is empty")]
    EmptyPlan,
    #[error("task graph contains a cycle")]
    CyclicPlan,
    #[error("holistic plan has zero latency")]
    ZeroLatency,
    #[error("no runnable execution plan for pipeline `{pipeline}`")]
    NoRunnablePlan { pipeline: String },
    #[error("search space of {product} plan combinations exceeds budget {budget}")]
    SearchBudgetExceeded { product: BigUint, budget: u64 },
    #[error("out of resource: {}", describe_violations(.0))]
    OutOfResource(Box<Selection>),
    #[error("plan references unknown pipeline `{0}`")]
    UnknownPipeline(String),
    #[error("no pipelines registered")]
    NoPipelines,
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Shape(#[from] PlanShapeError),
}

fn describe_violations(selection: &Selection) -> String {
    let parts: Vec<String> = selection
        .runnable
        .violations()
        .map(|(dev, dim): (&DeviceId, CapacityDimension)| format!("{dev} {}", dim.as_str()))
        .collect();
    parts.join(", ")
}

/// Runs `strategy` on the scenario's registered pipelines.
pub fn select(
    strategy: Strategy,
    scenario: &Scenario,
    config: &PlannerConfig,
) -> Result<Selection, PlanError> {
    match strategy {
        Strategy::Synergy => select_progressive(scenario, config),
        Strategy::Oracle => select_oracle(scenario, config),
        other => select_baseline(other, scenario, config),
    }
}
