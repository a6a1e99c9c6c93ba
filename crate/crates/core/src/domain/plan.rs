use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DeviceId, Footprint, LayerRange, PipelineId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskKind {
    Sensing,
    Load,
    Inference {
        layers: LayerRange,
        weight_bytes: u64,
        bias_bytes: u64,
    },
    Unload,
    Tx {
        dest: DeviceId,
    },
    Rx {
        src: DeviceId,
    },
    Interaction,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Sensing => "sensing",
            TaskKind::Load => "load",
            TaskKind::Inference { .. } => "inference",
            TaskKind::Unload => "unload",
            TaskKind::Tx { .. } => "tx",
            TaskKind::Rx { .. } => "rx",
            TaskKind::Interaction => "interaction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Task {
    #[serde(flatten)]
    pub kind: TaskKind,
    pub device: DeviceId,
    /// Bytes produced (sensing, inference) or moved (load, unload, tx, rx).
    pub payload_bytes: u64,
}

/// One model slice placed on one device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkAssignment {
    pub device: DeviceId,
    pub layers: LayerRange,
    pub footprint: Footprint,
}

/// The task-to-device chain for one pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecutionPlan {
    pub pipeline_id: PipelineId,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("execution plan for `{pipeline}` is malformed at task {index}: {reason}")]
pub struct PlanShapeError {
    pub pipeline: String,
    pub index: usize,
    pub reason: String,
}

impl ExecutionPlan {
    pub fn chunks(&self) -> Vec<ChunkAssignment> {
        self.tasks
            .iter()
            .filter_map(|t| match &t.kind {
                TaskKind::Inference {
                    layers,
                    weight_bytes,
                    bias_bytes,
                } => Some(ChunkAssignment {
                    device: t.device.clone(),
                    layers: *layers,
                    footprint: Footprint {
                        weight_bytes: *weight_bytes,
                        bias_bytes: *bias_bytes,
                        layers: layers.len() as u32,
                    },
                }),
                _ => None,
            })
            .collect()
    }

    pub fn source_device(&self) -> Option<&DeviceId> {
        self.tasks.first().map(|t| &t.device)
    }

    pub fn target_device(&self) -> Option<&DeviceId> {
        self.tasks.last().map(|t| &t.device)
    }

    /// Checks the canonical chain shape for a model with `num_layers` layers.
    pub fn check_shape(&self, num_layers: usize) -> Result<(), PlanShapeError> {
        let fail = |index: usize, reason: &str| PlanShapeError {
            pipeline: self.pipeline_id.to_string(),
            index,
            reason: reason.to_string(),
        };
        let tasks = &self.tasks;
        match tasks.first() {
            Some(t) if t.kind == TaskKind::Sensing => {}
            _ => return Err(fail(0, "chain must start with sensing")),
        }
        match tasks.last() {
            Some(t) if t.kind == TaskKind::Interaction => {}
            _ => {
                return Err(fail(
                    tasks.len().saturating_sub(1),
                    "chain must end with interaction",
                ))
            }
        }
        let mut next_layer = 0;
        let mut chunk_devices: Vec<&DeviceId> = Vec::new();
        let mut i = 1;
        while i < tasks.len() {
            let prev = &tasks[i - 1];
            let t = &tasks[i];
            match &t.kind {
                TaskKind::Sensing => return Err(fail(i, "sensing may only open the chain")),
                TaskKind::Interaction if i != tasks.len() - 1 => {
                    return Err(fail(i, "interaction may only close the chain"))
                }
                TaskKind::Tx { dest } => {
                    let rx = tasks.get(i + 1).ok_or_else(|| fail(i, "tx without rx"))?;
                    match &rx.kind {
                        TaskKind::Rx { src } if *src == t.device && rx.device == *dest => {}
                        _ => return Err(fail(i + 1, "tx must be followed by its matching rx")),
                    }
                    if t.device == *dest {
                        return Err(fail(i, "tx/rx must bridge distinct devices"));
                    }
                    if prev.device != t.device {
                        return Err(fail(i, "tx must run where the data is"));
                    }
                    if rx.payload_bytes != t.payload_bytes {
                        return Err(fail(i + 1, "rx payload differs from tx"));
                    }
                    i += 2;
                    continue;
                }
                TaskKind::Rx { .. } => return Err(fail(i, "rx without preceding tx")),
                TaskKind::Load => {
                    let inf = tasks
                        .get(i + 1)
                        .ok_or_else(|| fail(i, "load without inference"))?;
                    let unload = tasks
                        .get(i + 2)
                        .ok_or_else(|| fail(i, "load without unload"))?;
                    let TaskKind::Inference { layers, .. } = &inf.kind else {
                        return Err(fail(i + 1, "load must be followed by inference"));
                    };
                    if unload.kind != TaskKind::Unload {
                        return Err(fail(i + 2, "inference must be followed by unload"));
                    }
                    if inf.device != t.device || unload.device != t.device {
                        return Err(fail(i, "load/inference/unload must share a device"));
                    }
                    if prev.device != t.device {
                        return Err(fail(i, "chunk input must arrive on the chunk device"));
                    }
                    if layers.is_empty() || layers.start != next_layer {
                        return Err(fail(
                            i + 1,
                            "inference ranges must partition the model in order",
                        ));
                    }
                    if chunk_devices.contains(&&t.device) {
                        return Err(fail(i, "a device may host only one chunk of a plan"));
                    }
                    chunk_devices.push(&t.device);
                    next_layer = layers.end;
                    i += 3;
                    continue;
                }
                TaskKind::Interaction => {
                    if prev.device != t.device {
                        return Err(fail(i, "interaction must run where the result is"));
                    }
                }
                TaskKind::Inference { .. } | TaskKind::Unload => {
                    return Err(fail(i, "inference and unload must follow a load"))
                }
            }
            i += 1;
        }
        if next_layer != num_layers || chunk_devices.is_empty() {
            return Err(fail(
                tasks.len() - 1,
                "inference ranges do not cover the model",
            ));
        }
        Ok(())
    }
}

/// One execution plan per registered pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HolisticPlan {
    pub plans: Vec<ExecutionPlan>,
}

impl HolisticPlan {
    pub fn new(plans: Vec<ExecutionPlan>) -> Self {
        HolisticPlan { plans }
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    /// Accelerator usage per device, summed over every chunk of every pipeline.
    pub fn device_totals(&self) -> BTreeMap<DeviceId, Footprint> {
        let mut totals: BTreeMap<DeviceId, Footprint> = BTreeMap::new();
        for plan in &self.plans {
            for chunk in plan.chunks() {
                totals
                    .entry(chunk.device)
                    .or_default()
                    .add(&chunk.footprint);
            }
        }
        totals
    }
}
