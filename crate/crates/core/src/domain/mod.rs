//! Domain types shared by the cost model, planner and simulator.
//!
//! Everything here is plain data: validated once on construction, immutable
//! afterwards. Capacities and sizes are in bytes (1 KB = 1000 B in configs),
//! time is integer nanoseconds.

mod device;
mod model;
mod pipeline;
mod plan;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use device::{
    validate_device, DeviceId, DeviceProfile, DeviceRecord, DeviceSet, LinearCost, SensorSpec,
    UnitKind, UnitPower,
};
pub use model::{
    validate_model, Footprint, LayerKind, LayerRange, LayerRecord, LayerSpec, ModelDescriptor,
    ModelRecord, Shape,
};
pub use pipeline::{PipelineId, PipelineSpec, SourceRequirement, TargetRequirement};
pub use plan::{ChunkAssignment, ExecutionPlan, HolisticPlan, PlanShapeError, Task, TaskKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("invalid device profile `{device}`: {field} {reason}")]
    InvalidProfile {
        device: String,
        field: &'static str,
        reason: String,
    },
    #[error("invalid model `{model}`{}: {reason}", layer.map(|l| format!(" at layer {l}")).unwrap_or_default())]
    InvalidModel {
        model: String,
        layer: Option<usize>,
        reason: String,
    },
    #[error("invalid pipeline `{pipeline}`: {reason}")]
    InvalidPipeline { pipeline: String, reason: String },
    #[error("duplicate {what} id `{id}`")]
    Duplicate { what: &'static str, id: String },
    #[error("pipeline `{pipeline}` references unknown model `{model}`")]
    UnknownModel { pipeline: String, model: String },
}

/// What the planner optimizes for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ObjectiveKind {
    #[default]
    #[serde(rename = "throughput")]
    ThroughputMax,
    #[serde(rename = "latency")]
    LatencyMin,
    #[serde(rename = "power")]
    PowerMin,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [
        ObjectiveKind::ThroughputMax,
        ObjectiveKind::LatencyMin,
        ObjectiveKind::PowerMin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::ThroughputMax => "throughput",
            ObjectiveKind::LatencyMin => "latency",
            ObjectiveKind::PowerMin => "power",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "throughput" | "tput-max" => Ok(ObjectiveKind::ThroughputMax),
            "latency" | "latency-min" => Ok(ObjectiveKind::LatencyMin),
            "power" | "power-min" => Ok(ObjectiveKind::PowerMin),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}
