//! Execution-plan enumeration and the runnable (capacity) filter.

use std::collections::BTreeMap;
use std::rc::Rc;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::domain::{
    DeviceId, DeviceSet, ExecutionPlan, Footprint, HolisticPlan, LayerRange, ModelDescriptor,
    PipelineSpec, Task, TaskKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnumerationConfig {
    /// When off every device may host sensing and interaction, which is the
    /// mode the closed-form count describes.
    pub respect_requirements: bool,
    pub max_chunks: Option<usize>,
}

impl EnumerationConfig {
    pub fn unconstrained() -> Self {
        EnumerationConfig::default()
    }

    pub fn with_requirements() -> Self {
        EnumerationConfig {
            respect_requirements: true,
            max_chunks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("no device satisfies the {role} requirement of pipeline `{pipeline}`")]
    NoEligibleDevice {
        pipeline: String,
        role: &'static str,
    },
    #[error("invalid cut {cut} for a {layers}-layer model")]
    InvalidCut { cut: usize, layers: usize },
    #[error("max_chunks {max_chunks} exceeds the {devices} available devices")]
    TooManyChunks { max_chunks: usize, devices: usize },
    #[error("device set is empty")]
    NoDevices,
}

fn falling_factorial(n: u64, k: u64) -> BigUint {
    (n - k + 1..=n).fold(BigUint::one(), |acc, x| acc * x)
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Closed-form number of execution plans for an `layers`-layer model on `devices` devices.
pub fn count_execution_plans(layers: u64, devices: u64) -> BigUint {
    count_with(layers, devices, devices as usize, devices, devices)
}

/// Count with an explicit chunk cap and the number of admissible source and target devices.
pub fn count_with(
    layers: u64,
    devices: u64,
    max_chunks: usize,
    sources: u64,
    targets: u64,
) -> BigUint {
    let top = devices.min(layers).min(max_chunks as u64);
    let splits: BigUint = (1..=top)
        .map(|d| falling_factorial(devices, d) * binomial(layers - 1, d - 1))
        .sum();
    splits * sources * targets
}

/// Search-space reduction of fixing plans one pipeline at a time: product over sum.
pub fn reduction_factor(product: &BigUint, sum: &BigUint) -> f64 {
    let p = product.to_f64().unwrap_or(f64::INFINITY);
    let s = sum.to_f64().unwrap_or(f64::INFINITY);
    p / s
}

/// Device indices (into the sorted device set) plus layer ranges of one plan.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanLayout {
    pub source: usize,
    pub target: usize,
    pub chunks: Vec<(usize, LayerRange)>,
}

impl PlanLayout {
    /// Builds the canonical task chain.
    pub fn to_plan(
        &self,
        pipeline: &PipelineSpec,
        model: &ModelDescriptor,
        devices: &DeviceSet,
    ) -> ExecutionPlan {
        let id = |i: usize| devices.get(i).id.clone();
        let mut tasks = Vec::with_capacity(3 * self.chunks.len() + 6);
        let hop = |tasks: &mut Vec<Task>, from: usize, to: usize, bytes: u64| {
            if from != to {
                tasks.push(Task {
                    kind: TaskKind::Tx { dest: id(to) },
                    device: id(from),
                    payload_bytes: bytes,
                });
                tasks.push(Task {
                    kind: TaskKind::Rx { src: id(from) },
                    device: id(to),
                    payload_bytes: bytes,
                });
            }
        };
        tasks.push(Task {
            kind: TaskKind::Sensing,
            device: id(self.source),
            payload_bytes: model.input_bytes,
        });
        let mut here = self.source;
        let mut carried = model.input_bytes;
        for &(dev, range) in &self.chunks {
            hop(&mut tasks, here, dev, carried);
            let fp = model.footprint(range);
            let out = model.output_bytes_of(range);
            tasks.push(Task {
                kind: TaskKind::Load,
                device: id(dev),
                payload_bytes: carried,
            });
            tasks.push(Task {
                kind: TaskKind::Inference {
                    layers: range,
                    weight_bytes: fp.weight_bytes,
                    bias_bytes: fp.bias_bytes,
                },
                device: id(dev),
                payload_bytes: out,
            });
            tasks.push(Task {
                kind: TaskKind::Unload,
                device: id(dev),
                payload_bytes: out,
            });
            here = dev;
            carried = out;
        }
        hop(&mut tasks, here, self.target, carried);
        tasks.push(Task {
            kind: TaskKind::Interaction,
            device: id(self.target),
            payload_bytes: carried,
        });
        ExecutionPlan {
            pipeline_id: pipeline.id.clone(),
            tasks,
        }
    }

    pub fn num_chunks(&self) -> usize {
        self.chunks.len()
    }
}

/// All execution plans of one pipeline, streamed lazily in a fixed order.
#[derive(Debug, Clone)]
pub struct PlanSpace<'a> {
    pub pipeline: &'a PipelineSpec,
    pub model: &'a ModelDescriptor,
    pub devices: &'a DeviceSet,
    sources: Vec<usize>,
    targets: Vec<usize>,
    max_chunks: usize,
}

impl<'a> PlanSpace<'a> {
    pub fn new(
        pipeline: &'a PipelineSpec,
        model: &'a ModelDescriptor,
        devices: &'a DeviceSet,
        config: EnumerationConfig,
    ) -> Result<Self, EnumerationError> {
        if devices.is_empty() {
            return Err(EnumerationError::NoDevices);
        }
        let max_chunks = match config.max_chunks {
            Some(m) if m > devices.len() => {
                return Err(EnumerationError::TooManyChunks {
                    max_chunks: m,
                    devices: devices.len(),
                })
            }
            Some(m) => m,
            None => devices.len(),
        };
        let all: Vec<usize> = (0..devices.len()).collect();
        let (sources, targets) = if config.respect_requirements {
            let s: Vec<usize> = all
                .iter()
                .copied()
                .filter(|&i| pipeline.source.accepts(devices.get(i)))
                .collect();
            let t: Vec<usize> = all
                .iter()
                .copied()
                .filter(|&i| pipeline.target.accepts(devices.get(i)))
                .collect();
            for (set, role) in [(&s, "source"), (&t, "target")] {
                if set.is_empty() {
                    return Err(EnumerationError::NoEligibleDevice {
                        pipeline: pipeline.id.to_string(),
                        role,
                    });
                }
            }
            (s, t)
        } else {
            (all.clone(), all)
        };
        Ok(PlanSpace {
            pipeline,
            model,
            devices,
            sources,
            targets,
            max_chunks,
        })
    }

    pub fn count(&self) -> BigUint {
        count_with(
            self.model.num_layers() as u64,
            self.devices.len() as u64,
            self.max_chunks,
            self.sources.len() as u64,
            self.targets.len() as u64,
        )
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Order: chunk count, device permutation, cut points, source, target.
    /// The stream does not borrow the space, only the scenario data.
    pub fn layouts(&self) -> impl Iterator<Item = PlanLayout> + 'a {
        let layers = self.model.num_layers();
        let n = self.devices.len();
        let top = self.max_chunks.min(layers);
        let sources: Rc<[usize]> = self.sources.as_slice().into();
        let targets: Rc<[usize]> = self.targets.as_slice().into();
        (1..=top).flat_map(move |d| {
            let (sources, targets) = (sources.clone(), targets.clone());
            (0..n).permutations(d).flat_map(move |perm| {
                let (sources, targets) = (sources.clone(), targets.clone());
                (1..layers).combinations(d - 1).flat_map(move |cuts| {
                    let bounds = std::iter::once(0)
                        .chain(cuts)
                        .chain(std::iter::once(layers));
                    let chunks: Rc<[(usize, LayerRange)]> = perm
                        .iter()
                        .copied()
                        .zip(
                            bounds
                                .tuple_windows()
                                .map(|(start, end)| LayerRange { start, end }),
                        )
                        .collect();
                    let targets = targets.clone();
                    sources
                        .iter()
                        .copied()
                        .cartesian_product(targets.iter().copied().collect::<Vec<_>>())
                        .map(move |(source, target)| PlanLayout {
                            source,
                            target,
                            chunks: chunks.to_vec(),
                        })
                        .collect::<Vec<_>>()
                })
            })
        })
    }

    pub fn plans(&self) -> impl Iterator<Item = ExecutionPlan> + 'a {
        let (pipeline, model, devices) = (self.pipeline, self.model, self.devices);
        self.layouts()
            .map(move |l| l.to_plan(pipeline, model, devices))
    }
}

/// Streams every execution plan of `pipeline` (convenience over [`PlanSpace`]).
pub fn enumerate_execution_plans<'a>(
    pipeline: &'a PipelineSpec,
    model: &'a ModelDescriptor,
    devices: &'a DeviceSet,
    config: EnumerationConfig,
) -> Result<impl Iterator<Item = ExecutionPlan> + 'a, EnumerationError> {
    Ok(PlanSpace::new(pipeline, model, devices, config)?.plans())
}

pub fn split_model(
    model: &ModelDescriptor,
    cuts: &[usize],
) -> Result<Vec<LayerRange>, EnumerationError> {
    let layers = model.num_layers();
    let mut prev = 0;
    let mut ranges = Vec::with_capacity(cuts.len() + 1);
    for &cut in cuts {
        if cut <= prev || cut >= layers {
            return Err(EnumerationError::InvalidCut { cut, layers });
        }
        ranges.push(LayerRange {
            start: prev,
            end: cut,
        });
        prev = cut;
    }
    ranges.push(LayerRange {
        start: prev,
        end: layers,
    });
    Ok(ranges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CapacityDimension {
    Weight,
    Bias,
    Layers,
    /// The plan references a device that is not in the device set.
    UnknownDevice,
}

impl CapacityDimension {
    pub fn as_str(self) -> &'static str {
        match self {
            CapacityDimension::Weight => "weight",
            CapacityDimension::Bias => "bias",
            CapacityDimension::Layers => "layers",
            CapacityDimension::UnknownDevice => "unknown-device",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceUsage {
    pub device: DeviceId,
    pub used: Footprint,
    pub capacity: Footprint,
    pub violations: Vec<CapacityDimension>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunnableReport {
    pub runnable: bool,
    pub usage: Vec<DeviceUsage>,
}

impl RunnableReport {
    pub fn violations(&self) -> impl Iterator<Item = (&DeviceId, CapacityDimension)> {
        self.usage
            .iter()
            .flat_map(|u| u.violations.iter().map(move |v| (&u.device, *v)))
    }
}

pub(crate) fn capacity_of(device: &crate::domain::DeviceProfile) -> Footprint {
    Footprint {
        weight_bytes: device.weight_capacity,
        bias_bytes: device.bias_capacity,
        layers: device.max_layers,
    }
}

pub(crate) fn violations_of(used: &Footprint, cap: &Footprint) -> Vec<CapacityDimension> {
    let mut v = Vec::new();
    if used.weight_bytes > cap.weight_bytes {
        v.push(CapacityDimension::Weight);
    }
    if used.bias_bytes > cap.bias_bytes {
        v.push(CapacityDimension::Bias);
    }
    if used.layers > cap.layers {
        v.push(CapacityDimension::Layers);
    }
    v
}

/// Capacity check summed over every pipeline's chunks; limits are inclusive.
pub fn is_runnable(holistic: &HolisticPlan, devices: &DeviceSet) -> RunnableReport {
    let totals: BTreeMap<DeviceId, Footprint> = holistic.device_totals();
    let mut usage = Vec::new();
    for device in devices.iter() {
        let used = totals.get(&device.id).copied().unwrap_or_default();
        let capacity = capacity_of(device);
        let violations = violations_of(&used, &capacity);
        usage.push(DeviceUsage {
            device: device.id.clone(),
            used,
            capacity,
            violations,
        });
    }
    for (id, used) in &totals {
        if devices.by_id(id).is_none() {
            usage.push(DeviceUsage {
                device: id.clone(),
                used: *used,
                capacity: Footprint::default(),
                violations: vec![CapacityDimension::UnknownDevice],
            });
        }
    }
    let runnable = usage.iter().all(|u| u.violations.is_empty());
    RunnableReport { runnable, usage }
}
