use std::collections::BTreeMap;

use crate::cost::{CostConfig, CostContext};
use crate::domain::{
    DeviceProfile, DeviceSet, DomainError, ModelDescriptor, PipelineId, PipelineSpec,
};

/// Devices, model catalog and registered pipelines for one planning problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub devices: DeviceSet,
    pub models: BTreeMap<String, ModelDescriptor>,
    /// Registration order; holistic plans list their execution plans in this order.
    pub pipelines: Vec<PipelineSpec>,
    pub cost: CostConfig,
}

impl Scenario {
    pub fn new(
        devices: Vec<DeviceProfile>,
        models: Vec<ModelDescriptor>,
        pipelines: Vec<PipelineSpec>,
    ) -> Result<Self, DomainError> {
        let devices = DeviceSet::new(devices)?;
        let mut catalog = BTreeMap::new();
        for model in models {
            model.validate()?;
            let name = model.name.clone();
            if catalog.insert(name.clone(), model).is_some() {
                return Err(DomainError::Duplicate {
                    what: "model",
                    id: name,
                });
            }
        }
        let scenario = Scenario {
            devices,
            models: catalog,
            pipelines: Vec::new(),
            cost: CostConfig::default(),
        };
        scenario.with_pipelines(pipelines)
    }

    /// Same devices and catalog, different registered pipelines.
    pub fn with_pipelines(&self, pipelines: Vec<PipelineSpec>) -> Result<Self, DomainError> {
        for (i, p) in pipelines.iter().enumerate() {
            p.validate()?;
            if !self.models.contains_key(&p.model) {
                return Err(DomainError::UnknownModel {
                    pipeline: p.id.to_string(),
                    model: p.model.clone(),
                });
            }
            if pipelines[..i].iter().any(|q| q.id == p.id) {
                return Err(DomainError::Duplicate {
                    what: "pipeline",
                    id: p.id.to_string(),
                });
            }
        }
        Ok(Scenario {
            devices: self.devices.clone(),
            models: self.models.clone(),
            pipelines,
            cost: self.cost,
        })
    }

    pub fn with_cost(mut self, cost: CostConfig) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_devices(&self, devices: Vec<DeviceProfile>) -> Result<Self, DomainError> {
        let mut next = self.clone();
        next.devices = DeviceSet::new(devices)?;
        Ok(next)
    }

    pub fn model_of(&self, pipeline: &PipelineSpec) -> &ModelDescriptor {
        &self.models[&pipeline.model]
    }

    pub fn pipeline_index(&self, id: &PipelineId) -> Option<usize> {
        self.pipelines.iter().position(|p| p.id == *id)
    }

    pub fn cost_context(&self, pipeline_index: usize) -> CostContext<'_> {
        let pipeline = &self.pipelines[pipeline_index];
        CostContext {
            devices: &self.devices,
            model: self.model_of(pipeline),
            pipeline,
            config: &self.cost,
        }
    }
}
