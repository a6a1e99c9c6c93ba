//! Shipped workload fixtures: eight synthetic models, four device sets and
//! the four workloads, embedded at compile time.

use std::collections::BTreeSet;

use crate::config::{parse_json, ConfigError, DevicesFile, ModelsFile, WorkloadFile};
use crate::domain::{DeviceProfile, DomainError, ModelDescriptor, PipelineSpec};
use crate::planner::model_data_intensity;
use crate::scenario::Scenario;

const MODELS: &str = include_str!("../fixtures/models.json");

const DEVICE_SETS: [(&str, &str); 4] = [
    (
        "wearables",
        include_str!("../fixtures/devices-wearables.json"),
    ),
    ("pair", include_str!("../fixtures/devices-pair.json")),
    ("trio", include_str!("../fixtures/devices-trio.json")),
    ("hetero", include_str!("../fixtures/devices-hetero.json")),
];

const WORKLOADS: [(&str, &str); 5] = [
    ("workload1", include_str!("../fixtures/workload1.json")),
    ("workload2", include_str!("../fixtures/workload2.json")),
    ("workload3", include_str!("../fixtures/workload3.json")),
    ("workload4", include_str!("../fixtures/workload4.json")),
    (
        "all-pipelines",
        include_str!("../fixtures/all-pipelines.json"),
    ),
];

/// Published per-model figures the synthetic layer lists must reproduce.
#[derive(Debug, Clone, Copy)]
pub struct PublishedModel {
    pub name: &'static str,
    pub size_bytes: u64,
    pub avg_out_bytes: u64,
    pub input_shape: (u32, u32, u32),
    /// Only where the layer count is published.
    pub layers: Option<usize>,
}

pub const PUBLISHED: [PublishedModel; 8] = [
    PublishedModel {
        name: "ConvNet5",
        size_bytes: 71_158,
        avg_out_bytes: 14_031,
        input_shape: (28, 28, 1),
        layers: None,
    },
    PublishedModel {
        name: "ResSimpleNet",
        size_bytes: 381_792,
        avg_out_bytes: 11_217,
        input_shape: (32, 32, 3),
        layers: None,
    },
    PublishedModel {
        name: "UNet",
        size_bytes: 279_084,
        avg_out_bytes: 74_547,
        input_shape: (48, 48, 48),
        layers: Some(19),
    },
    PublishedModel {
        name: "KWS",
        size_bytes: 169_472,
        avg_out_bytes: 7_976,
        input_shape: (128, 128, 1),
        layers: Some(9),
    },
    PublishedModel {
        name: "SimpleNet",
        size_bytes: 166_448,
        avg_out_bytes: 9_237,
        input_shape: (32, 32, 3),
        layers: Some(14),
    },
    PublishedModel {
        name: "WideNet",
        size_bytes: 313_700,
        avg_out_bytes: 10_091,
        input_shape: (32, 32, 3),
        layers: None,
    },
    PublishedModel {
        name: "EfficientNetV2",
        size_bytes: 627_220,
        avg_out_bytes: 66_468,
        input_shape: (32, 32, 3),
        layers: Some(29),
    },
    PublishedModel {
        name: "MobileNetV2",
        size_bytes: 821_164,
        avg_out_bytes: 296_318,
        input_shape: (32, 32, 3),
        layers: None,
    },
];

pub const AVG_OUT_TOLERANCE: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("fixture drift: {}", .0.join("; "))]
    FixtureDrift(Vec<String>),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Default)]
pub struct FixtureSet {
    pub models: Vec<ModelDescriptor>,
    pub devices: Vec<DeviceProfile>,
    pub pipelines: Vec<PipelineSpec>,
}

impl FixtureSet {
    pub fn scenario(&self) -> Result<Scenario, DomainError> {
        Scenario::new(
            self.devices.clone(),
            self.models.clone(),
            self.pipelines.clone(),
        )
    }

    pub fn model(&self, name: &str) -> Option<&ModelDescriptor> {
        self.models.iter().find(|m| m.name == name)
    }
}

pub fn all_models() -> Result<Vec<ModelDescriptor>, FixtureError> {
    let file: ModelsFile = parse_json(MODELS, "fixtures/models.json")?;
    Ok(file.models)
}

pub fn device_set(name: &str) -> Result<Vec<DeviceProfile>, FixtureError> {
    let (_, text) = DEVICE_SETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| FixtureError::UnknownFixture(name.to_string()))?;
    let file: DevicesFile = parse_json(text, name)?;
    Ok(file.devices)
}

pub fn workload(name: &str) -> Result<Vec<PipelineSpec>, FixtureError> {
    let (_, text) = WORKLOADS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| FixtureError::UnknownFixture(name.to_string()))?;
    let file: WorkloadFile = parse_json(text, name)?;
    Ok(file.pipelines)
}

pub fn device_set_names() -> impl Iterator<Item = &'static str> {
    DEVICE_SETS.iter().map(|(n, _)| *n)
}

pub fn workload_names() -> impl Iterator<Item = &'static str> {
    WORKLOADS.iter().map(|(n, _)| *n)
}

/// Raw embedded JSON for a fixture file name such as `models` or `devices-pair`.
pub fn raw(name: &str) -> Option<&'static str> {
    if name == "models" {
        return Some(MODELS);
    }
    let dev = name.strip_prefix("devices-");
    DEVICE_SETS
        .iter()
        .find(|(n, _)| Some(*n) == dev)
        .or_else(|| WORKLOADS.iter().find(|(n, _)| *n == name))
        .map(|(_, t)| *t)
}

/// Loads a workload (with the wearables devices and the models it uses), a
/// device set (with every model), or a single model by lower-case name.
pub fn load_fixture(name: &str) -> Result<FixtureSet, FixtureError> {
    let models = all_models()?;
    if WORKLOADS.iter().any(|(n, _)| *n == name) {
        let pipelines = workload(name)?;
        let used: BTreeSet<&str> = pipelines.iter().map(|p| p.model.as_str()).collect();
        let models = models
            .into_iter()
            .filter(|m| used.contains(m.name.as_str()))
            .collect();
        return Ok(FixtureSet {
            models,
            devices: device_set("wearables")?,
            pipelines,
        });
    }
    if DEVICE_SETS.iter().any(|(n, _)| *n == name) {
        return Ok(FixtureSet {
            models,
            devices: device_set(name)?,
            pipelines: Vec::new(),
        });
    }
    if name == "models" {
        return Ok(FixtureSet {
            models,
            ..FixtureSet::default()
        });
    }
    let model = models
        .into_iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| FixtureError::UnknownFixture(name.to_string()))?;
    Ok(FixtureSet {
        models: vec![model],
        ..FixtureSet::default()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheck {
    pub name: String,
    pub layers: usize,
    pub size_bytes: u64,
    pub avg_out_bytes: f64,
    pub avg_out_deviation: f64,
}

/// Verifies every shipped model against its published figures.
pub fn fixture_selfcheck() -> Result<Vec<ModelCheck>, FixtureError> {
    let models = all_models()?;
    let mut drift = Vec::new();
    let mut checks = Vec::new();
    for published in &PUBLISHED {
        let Some(m) = models.iter().find(|m| m.name == published.name) else {
            drift.push(format!("{} missing", published.name));
            continue;
        };
        let size = m.weight_bytes();
        if size != published.size_bytes {
            drift.push(format!(
                "{} size {} != {}",
                m.name, size, published.size_bytes
            ));
        }
        let avg = model_data_intensity(m).bytes();
        let deviation = (avg - published.avg_out_bytes as f64) / published.avg_out_bytes as f64;
        if deviation.abs() > AVG_OUT_TOLERANCE {
            drift.push(format!(
                "{} average output {avg:.1} deviates {:.2}%",
                m.name,
                deviation * 100.0
            ));
        }
        if let Some(layers) = published.layers {
            if m.num_layers() != layers {
                drift.push(format!(
                    "{} has {} layers, expected {layers}",
                    m.name,
                    m.num_layers()
                ));
            }
        }
        let first = &m.layers[0].in_shape;
        if (first.h, first.w, first.c) != published.input_shape {
            drift.push(format!("{} input shape differs", m.name));
        }
        if m.input_bytes != first.elements() {
            drift.push(format!(
                "{} input bytes differ from its input shape",
                m.name
            ));
        }
        checks.push(ModelCheck {
            name: m.name.clone(),
            layers: m.num_layers(),
            size_bytes: size,
            avg_out_bytes: avg,
            avg_out_deviation: deviation,
        });
    }
    if models.len() != PUBLISHED.len() {
        drift.push(format!(
            "{} models shipped, expected {}",
            models.len(),
            PUBLISHED.len()
        ));
    }
    if drift.is_empty() {
        Ok(checks)
    } else {
        Err(FixtureError::FixtureDrift(drift))
    }
}
