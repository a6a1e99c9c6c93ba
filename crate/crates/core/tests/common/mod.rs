#![allow(dead_code)]

use synergy_core::domain::{
    validate_device, DeviceProfile, DeviceRecord, LayerSpec, ModelDescriptor, PipelineSpec,
    SensorSpec, Shape, SourceRequirement, TargetRequirement, UnitPower,
};
use synergy_core::Nanos;
use synergy_core::Scenario;

pub fn record(id: &str) -> DeviceRecord {
    DeviceRecord {
        id: id.to_string(),
        weight_capacity_bytes: 442_000,
        bias_capacity_bytes: 2_000,
        max_layers: 32,
        parallel_processors: 64,
        clock_hz: 50_000_000,
        load_slope_ns_per_byte: 70.0,
        load_intercept_ns: 100_000,
        unload_slope_ns_per_byte: 70.0,
        unload_intercept_ns: 100_000,
        radio_bandwidth_bps: 1_000_000,
        radio_overhead_ns: 0,
        unit_power_w: UnitPower {
            cpu: 0.03,
            accel: 0.02,
            radio: 0.25,
        },
        radio_energy_nj_per_byte: 20.0,
        sensors: vec![
            SensorSpec {
                sensor_type: "camera".into(),
                sample_bytes: 3072,
                latency: Nanos::from_millis(30),
            },
            SensorSpec {
                sensor_type: "microphone".into(),
                sample_bytes: 16384,
                latency: Nanos::from_millis(20),
            },
        ],
        interfaces: vec!["display".into(), "haptic".into()],
    }
}

pub fn device(id: &str) -> DeviceProfile {
    validate_device(record(id)).unwrap()
}

pub fn device_with(id: &str, weight: u64, bias: u64, layers: u32) -> DeviceProfile {
    let mut r = record(id);
    r.weight_capacity_bytes = weight;
    r.bias_capacity_bytes = bias;
    r.max_layers = layers;
    validate_device(r).unwrap()
}

/// Chain of fully connected 8 -> 8 layers: 64 weight bytes and 8 bias bytes each.
pub fn fc_model(name: &str, layers: usize) -> ModelDescriptor {
    let shape = Shape::new(1, 1, 8);
    ModelDescriptor {
        name: name.to_string(),
        input_bytes: 8,
        layers: (0..layers)
            .map(|_| LayerSpec::fully_connected(shape, 8))
            .collect(),
        declared_size: None,
    }
}

pub fn pipeline(id: &str, model: &str) -> PipelineSpec {
    PipelineSpec::new(
        id,
        SourceRequirement::sensor("camera"),
        model,
        TargetRequirement::interface("display"),
    )
}

pub fn pinned(id: &str, model: &str, source: &str, target: &str) -> PipelineSpec {
    PipelineSpec::new(
        id,
        SourceRequirement::device(source).with_sensor("camera"),
        model,
        TargetRequirement::device(target).with_interface("display"),
    )
}

pub fn scenario(
    devices: Vec<DeviceProfile>,
    models: Vec<ModelDescriptor>,
    pipelines: Vec<PipelineSpec>,
) -> Scenario {
    Scenario::new(devices, models, pipelines).unwrap()
}
