use crate::cost::{plan_costs, CostError};
use crate::domain::{Footprint, TaskKind};
use crate::enumerate::{capacity_of, PlanLayout, PlanSpace};
use crate::scenario::Scenario;

/// One execution plan with everything the selection rules need, precomputed.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub index: usize,
    pub layout: PlanLayout,
    /// Critical path of the chain (sensing to interaction).
    pub latency: u64,
    pub energy_nj: u64,
    /// Load through final unload, including inter-chunk hops only.
    pub model_latency: u64,
    pub model_energy_nj: u64,
    pub transfer_bytes: u64,
    pub usage: Vec<(usize, Footprint)>,
}

pub(crate) fn evaluate(
    scenario: &Scenario,
    pipeline: usize,
    space: &PlanSpace<'_>,
    index: usize,
    layout: PlanLayout,
) -> Result<Candidate, CostError> {
    let plan = layout.to_plan(space.pipeline, space.model, space.devices);
    let costs = plan_costs(&plan.tasks, &scenario.cost_context(pipeline))?;
    let first_load = plan
        .tasks
        .iter()
        .position(|t| t.kind == TaskKind::Load)
        .unwrap_or(0);
    let last_unload = plan
        .tasks
        .iter()
        .rposition(|t| t.kind == TaskKind::Unload)
        .unwrap_or(plan.tasks.len() - 1);
    let (mut latency, mut energy, mut model_latency, mut model_energy) = (0u64, 0u64, 0u64, 0u64);
    let mut transfer_bytes = 0;
    for (i, (task, cost)) in plan.tasks.iter().zip(&costs).enumerate() {
        let in_model = (first_load..=last_unload).contains(&i);
        energy += cost.energy_nj;
        if in_model {
            model_energy += cost.energy_nj;
        }
        // A paired Rx overlaps its Tx; only the excess (none in practice) extends the path.
        let step = match task.kind {
            TaskKind::Rx { .. } => cost.latency.0.saturating_sub(costs[i - 1].latency.0),
            _ => cost.latency.0,
        };
        latency += step;
        if in_model {
            model_latency += step;
            if matches!(task.kind, TaskKind::Tx { .. }) {
                transfer_bytes += task.payload_bytes;
            }
        }
    }
    let usage = layout
        .chunks
        .iter()
        .map(|&(dev, range)| (dev, space.model.footprint(range)))
        .collect();
    Ok(Candidate {
        index,
        layout,
        latency,
        energy_nj: energy,
        model_latency,
        model_energy_nj: model_energy,
        transfer_bytes,
        usage,
    })
}

/// Accelerator resources still free on each device.
#[derive(Debug, Clone)]
pub(crate) struct UsageTable {
    used: Vec<Footprint>,
    caps: Vec<Footprint>,
}

impl UsageTable {
    pub fn new(scenario: &Scenario) -> Self {
        let caps: Vec<Footprint> = scenario.devices.iter().map(capacity_of).collect();
        UsageTable {
            used: vec![Footprint::default(); caps.len()],
            caps,
        }
    }

    pub fn fits(&self, usage: &[(usize, Footprint)]) -> bool {
        usage.iter().all(|(dev, fp)| {
            let (u, c) = (&self.used[*dev], &self.caps[*dev]);
            u.weight_bytes + fp.weight_bytes <= c.weight_bytes
                && u.bias_bytes + fp.bias_bytes <= c.bias_bytes
                && u.layers + fp.layers <= c.layers
        })
    }

    pub fn add(&mut self, usage: &[(usize, Footprint)]) {
        for (dev, fp) in usage {
            self.used[*dev].add(fp);
        }
    }

    pub fn remove(&mut self, usage: &[(usize, Footprint)]) {
        for (dev, fp) in usage {
            let u = &mut self.used[*dev];
            u.weight_bytes -= fp.weight_bytes;
            u.bias_bytes -= fp.bias_bytes;
            u.layers -= fp.layers;
        }
    }
}
