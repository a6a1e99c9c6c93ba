use anyhow::{bail, Context, Result};

use synergy_core::config::{read_json, DevicesFile, ModelsFile, WorkloadFile};
use synergy_core::cost::CostConfig;
use synergy_core::enumerate::EnumerationConfig;
use synergy_core::fixtures::{self, load_fixture};
use synergy_core::planner::{PlannerConfig, Prioritization, DEFAULT_ORACLE_BUDGET};
use synergy_core::{Nanos, Scenario};

use crate::args::{ScenarioArgs, SearchArgs};
use crate::output::{Failure, EXIT_USAGE};

/// Builds the scenario from a fixture, then applies any file overrides.
pub fn load(args: &ScenarioArgs) -> Result<Scenario> {
    let mut set = match &args.fixture {
        Some(name) => {
            load_fixture(name).map_err(|e| Failure::with_code(EXIT_USAGE, e.to_string()))?
        }
        None => Default::default(),
    };
    if args.fixture.is_some() && set.pipelines.is_empty() {
        // A device-set or model fixture: keep every model available.
        set.models = fixtures::all_models()?;
    }
    if let Some(name) = &args.device_set {
        set.devices = fixtures::device_set(name)
            .map_err(|e| Failure::with_code(EXIT_USAGE, e.to_string()))?;
    }
    if let Some(path) = &args.devices {
        set.devices = read_json::<DevicesFile>(path).map_err(usage)?.devices;
    }
    if let Some(path) = &args.models {
        set.models = read_json::<ModelsFile>(path).map_err(usage)?.models;
    }
    if let Some(path) = &args.workload {
        set.pipelines = read_json::<WorkloadFile>(path).map_err(usage)?.pipelines;
        if args.models.is_none() && args.fixture.is_some() {
            set.models = fixtures::all_models()?;
        }
    }
    if set.devices.is_empty() || set.models.is_empty() || set.pipelines.is_empty() {
        bail!(Failure::with_code(
            EXIT_USAGE,
            "need devices, models and a workload: pass --fixture or --devices/--models/--workload"
        ));
    }
    let mut scenario = Scenario::new(set.devices, set.models, set.pipelines).map_err(usage)?;
    if let Some(ns) = args.interaction_latency_ns {
        scenario = scenario.with_cost(CostConfig {
            interaction_latency: Nanos(ns),
        });
    }
    Ok(scenario)
}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    Failure::with_code(EXIT_USAGE, e.to_string())
}

pub fn planner_config(
    search: &SearchArgs,
    prioritization: Prioritization,
    devices: usize,
) -> Result<PlannerConfig> {
    let max_chunks = search
        .max_chunks
        .map(|m| usize::try_from(m).context("max chunks too large"))
        .transpose()?;
    if max_chunks.is_some_and(|m| m > devices) {
        bail!(Failure::with_code(
            EXIT_USAGE,
            format!("--max-chunks exceeds the {devices} devices")
        ));
    }
    Ok(PlannerConfig {
        objective: search.objective,
        prioritization,
        enumeration: EnumerationConfig {
            respect_requirements: !search.unconstrained,
            max_chunks,
        },
        oracle_budget: search.oracle_budget.unwrap_or(DEFAULT_ORACLE_BUDGET),
    })
}
