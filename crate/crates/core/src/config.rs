//! On-disk JSON documents: device, model and workload files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{DeviceProfile, DomainError, ModelDescriptor, PipelineSpec};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevicesFile {
    #[serde(
        rename = "_provenance",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub provenance: Option<String>,
    pub devices: Vec<DeviceProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelsFile {
    #[serde(
        rename = "_provenance",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub provenance: Option<String>,
    pub models: Vec<ModelDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadFile {
    #[serde(
        rename = "_provenance",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub provenance: Option<String>,
    pub pipelines: Vec<PipelineSpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text, &path.display().to_string())
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(
    text: &str,
    origin: &str,
) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|source| ConfigError::Parse {
        path: origin.to_string(),
        source,
    })
}

pub fn load_scenario(
    devices: &Path,
    models: &Path,
    workload: &Path,
) -> Result<Scenario, ConfigError> {
    let devices: DevicesFile = read_json(devices)?;
    let models: ModelsFile = read_json(models)?;
    let workload: WorkloadFile = read_json(workload)?;
    Ok(Scenario::new(
        devices.devices,
        models.models,
        workload.pipelines,
    )?)
}
