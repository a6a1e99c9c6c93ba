use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DeviceId, DeviceProfile, DomainError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PipelineId(String);

impl PipelineId {
    pub fn new(id: impl Into<String>) -> Self {
        PipelineId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PipelineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Where the sensing task may run. Either field alone is a valid requirement; with
/// both, the designated device must carry the sensor.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SourceRequirement {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_type: Option<String>,
}

impl SourceRequirement {
    pub fn device(id: impl Into<String>) -> Self {
        SourceRequirement {
            device: Some(DeviceId::new(id)),
            sensor_type: None,
        }
    }

    pub fn sensor(sensor_type: impl Into<String>) -> Self {
        SourceRequirement {
            device: None,
            sensor_type: Some(sensor_type.into()),
        }
    }

    pub fn with_sensor(mut self, sensor_type: impl Into<String>) -> Self {
        self.sensor_type = Some(sensor_type.into());
        self
    }

    pub fn accepts(&self, device: &DeviceProfile) -> bool {
        self.device.as_ref().is_none_or(|id| *id == device.id)
            && self
                .sensor_type
                .as_deref()
                .is_none_or(|t| device.sensor(t).is_some())
    }
}

/// Where the interaction task may run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TargetRequirement {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface_type: Option<String>,
}

impl TargetRequirement {
    pub fn device(id: impl Into<String>) -> Self {
        TargetRequirement {
            device: Some(DeviceId::new(id)),
            interface_type: None,
        }
    }

    pub fn interface(interface_type: impl Into<String>) -> Self {
        TargetRequirement {
            device: None,
            interface_type: Some(interface_type.into()),
        }
    }

    pub fn with_interface(mut self, interface_type: impl Into<String>) -> Self {
        self.interface_type = Some(interface_type.into());
        self
    }

    pub fn accepts(&self, device: &DeviceProfile) -> bool {
        self.device.as_ref().is_none_or(|id| *id == device.id)
            && self
                .interface_type
                .as_deref()
                .is_none_or(|t| device.has_interface(t))
    }
}

/// An app's end-to-end chain: sensing, model inference, interaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub id: PipelineId,
    pub source: SourceRequirement,
    pub model: String,
    pub target: TargetRequirement,
}

impl PipelineSpec {
    pub fn new(
        id: impl Into<String>,
        source: SourceRequirement,
        model: impl Into<String>,
        target: TargetRequirement,
    ) -> Self {
        PipelineSpec {
            id: PipelineId::new(id),
            source,
            model: model.into(),
            target,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |reason: &str| DomainError::InvalidPipeline {
            pipeline: self.id.to_string(),
            reason: reason.to_string(),
        };
        if self.id.as_str().is_empty() {
            return Err(bad("pipeline id must be nonempty"));
        }
        if self.model.is_empty() {
            return Err(bad("model reference must be nonempty"));
        }
        let src_dev = self.source.device.as_ref().map(DeviceId::as_str);
        if src_dev.is_none() && self.source.sensor_type.is_none() {
            return Err(bad("source requires a device or a sensor type"));
        }
        if src_dev == Some("") || self.source.sensor_type.as_deref() == Some("") {
            return Err(bad("source requirement tags must be nonempty"));
        }
        let dst_dev = self.target.device.as_ref().map(DeviceId::as_str);
        if dst_dev.is_none() && self.target.interface_type.is_none() {
            return Err(bad("target requires a device or an interface type"));
        }
        if dst_dev == Some("") || self.target.interface_type.as_deref() == Some("") {
            return Err(bad("target requirement tags must be nonempty"));
        }
        Ok(())
    }
}
