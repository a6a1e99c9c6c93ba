//! Latency and energy of every task kind.
//!
//! Inference latency comes from a clock-cycle count of the accelerator's
//! arithmetic: the accelerator parallelizes input channels across `P`
//! processors and retires a whole convolution kernel per cycle. Memory
//! (un)loading follows a fitted linear model, radio transfers are size over
//! bandwidth, sensing latency is a per-sensor profile value.

use serde::{Deserialize, Serialize};

use crate::domain::{
    DeviceId, DeviceProfile, DeviceSet, LayerKind, LayerRange, LayerSpec, LinearCost,
    ModelDescriptor, PipelineSpec, Task, TaskKind, UnitKind,
};
use crate::time::{div_round, Nanos};

/// Exact accelerator or processor clock-cycle count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CycleCount(pub u64);

/// Cycles on a sequential processor, one multiply-accumulate per cycle.
pub fn cycles_sequential(layer: &LayerSpec) -> CycleCount {
    let h_in = layer.in_shape.h as u64;
    let w_in = layer.in_shape.w as u64;
    let c_in = layer.in_shape.c as u64;
    let c_out = layer.out_shape.c as u64;
    match layer.kind {
        LayerKind::FullyConnected => CycleCount(h_in * w_in * c_in * c_out),
        LayerKind::Conv => {
            let k = layer.kernel as u64;
            CycleCount(k * k * h_in * layer.out_shape.w as u64 * c_in * c_out)
        }
        LayerKind::Passthrough => CycleCount(0),
    }
}

/// Cycles on an accelerator with `processors` parallel channel processors.
pub fn cycles_accelerated(layer: &LayerSpec, processors: u32) -> CycleCount {
    assert!(processors >= 1, "processor count must be >= 1");
    let h_in = layer.in_shape.h as u64;
    let c_in_groups = (layer.in_shape.c as u64).div_ceil(processors as u64);
    let c_out = layer.out_shape.c as u64;
    match layer.kind {
        LayerKind::FullyConnected => {
            CycleCount(h_in * layer.in_shape.w as u64 * c_in_groups * c_out)
        }
        LayerKind::Conv => CycleCount(h_in * layer.out_shape.w as u64 * c_in_groups * c_out),
        LayerKind::Passthrough => CycleCount(0),
    }
}

pub fn cycles_to_latency(cycles: CycleCount, clock_hz: u64) -> Nanos {
    Nanos(div_round(
        cycles.0 as u128 * 1_000_000_000,
        clock_hz as u128,
    ))
}

/// Sum of per-layer `cycles / clock` over `layers` on `device`.
pub fn inference_latency(layers: &[LayerSpec], device: &DeviceProfile) -> Nanos {
    layers
        .iter()
        .map(|l| {
            cycles_to_latency(
                cycles_accelerated(l, device.parallel_processors),
                device.clock_hz,
            )
        })
        .sum()
}

pub fn memory_latency(bytes: u64, cost: &LinearCost) -> Nanos {
    Nanos((cost.slope_ns_per_byte * bytes as f64).round() as u64) + cost.intercept
}

/// Load + inference + unload for one model chunk on one accelerator.
pub fn accel_latency(model: &ModelDescriptor, range: LayerRange, device: &DeviceProfile) -> Nanos {
    let load = memory_latency(model.input_bytes_of(range.start), &device.load_cost);
    let inference = inference_latency(&model.layers[range.start..range.end], device);
    let unload = memory_latency(model.output_bytes_of(range), &device.unload_cost);
    load + inference + unload
}

/// Radio transfer time of `bytes` from `sender`.
pub fn comm_latency(bytes: u64, sender: &DeviceProfile) -> Nanos {
    let bits = bytes as u128 * 8 * 1_000_000_000;
    Nanos(div_round(bits, sender.radio_bandwidth_bps as u128)) + sender.radio_fixed_overhead
}

/// Which computation unit a task occupies.
pub fn unit_of(kind: &TaskKind) -> UnitKind {
    match kind {
        TaskKind::Sensing | TaskKind::Load | TaskKind::Unload | TaskKind::Interaction => {
            UnitKind::Cpu
        }
        TaskKind::Inference { .. } => UnitKind::Accelerator,
        TaskKind::Tx { .. } | TaskKind::Rx { .. } => UnitKind::Radio,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostConfig {
    /// Latency of delivering a result through an output interface.
    #[serde(rename = "interaction_latency_ns")]
    pub interaction_latency: Nanos,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            interaction_latency: Nanos::from_millis(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskCost {
    pub latency: Nanos,
    pub energy_nj: u64,
    pub unit: UnitKind,
}

impl TaskCost {
    pub fn energy_joules(&self) -> f64 {
        self.energy_nj as f64 * 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostError {
    #[error("device `{0}` is not part of the deployment")]
    UnknownDevice(DeviceId),
    #[error("device `{device}` has no `{sensor_type}` sensor")]
    UnknownSensor {
        device: DeviceId,
        sensor_type: String,
    },
    #[error("device `{device}` has no sensor")]
    NoSensor { device: DeviceId },
    #[error("device `{device}` has no `{interface}` interface")]
    UnknownInterface { device: DeviceId, interface: String },
}

/// What a task cost lookup needs besides the task itself.
#[derive(Debug, Clone, Copy)]
pub struct CostContext<'a> {
    pub devices: &'a DeviceSet,
    pub model: &'a ModelDescriptor,
    pub pipeline: &'a PipelineSpec,
    pub config: &'a CostConfig,
}

impl CostContext<'_> {
    fn device(&self, id: &DeviceId) -> Result<&DeviceProfile, CostError> {
        self.devices
            .by_id(id)
            .ok_or_else(|| CostError::UnknownDevice(id.clone()))
    }
}

fn energy_nj(watts: f64, latency: Nanos) -> u64 {
    (watts * latency.0 as f64).round() as u64
}

pub fn task_cost(task: &Task, ctx: &CostContext<'_>) -> Result<TaskCost, CostError> {
    let device = ctx.device(&task.device)?;
    let unit = unit_of(&task.kind);
    let latency = match &task.kind {
        TaskKind::Sensing => {
            let sensor = match ctx.pipeline.source.sensor_type.as_deref() {
                Some(t) => device.sensor(t).ok_or_else(|| CostError::UnknownSensor {
                    device: device.id.clone(),
                    sensor_type: t.to_string(),
                })?,
                None => device.sensors.first().ok_or_else(|| CostError::NoSensor {
                    device: device.id.clone(),
                })?,
            };
            sensor.latency
        }
        TaskKind::Load => memory_latency(task.payload_bytes, &device.load_cost),
        TaskKind::Unload => memory_latency(task.payload_bytes, &device.unload_cost),
        TaskKind::Inference { layers, .. } => {
            inference_latency(&ctx.model.layers[layers.start..layers.end], device)
        }
        TaskKind::Tx { .. } => comm_latency(task.payload_bytes, device),
        TaskKind::Rx { src } => comm_latency(task.payload_bytes, ctx.device(src)?),
        TaskKind::Interaction => {
            if let Some(interface) = ctx.pipeline.target.interface_type.as_deref() {
                if !device.has_interface(interface) {
                    return Err(CostError::UnknownInterface {
                        device: device.id.clone(),
                        interface: interface.to_string(),
                    });
                }
            }
            ctx.config.interaction_latency
        }
    };
    let mut energy = energy_nj(device.unit_power.watts(unit), latency);
    if matches!(task.kind, TaskKind::Tx { .. }) {
        energy += (device.radio_energy_nj_per_byte * task.payload_bytes as f64).round() as u64;
    }
    Ok(TaskCost {
        latency,
        energy_nj: energy,
        unit,
    })
}

pub fn plan_costs(tasks: &[Task], ctx: &CostContext<'_>) -> Result<Vec<TaskCost>, CostError> {
    tasks.iter().map(|t| task_cost(t, ctx)).collect()
}
