use std::cmp::Ordering;

use petgraph::algo::toposort;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::Direction;

use crate::cost::plan_costs;
use crate::domain::{HolisticPlan, PipelineSpec, TaskKind};
use crate::scenario::Scenario;
use crate::time::Nanos;

use super::PlanError;

/// How per-pipeline chains are joined into one task graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GraphLayout {
    /// Pipelines are chained in registration order: the merged pipeline runs
    /// each app once, one after another, as the sequential simulator does.
    #[default]
    Unified,
    /// Pipelines are independent subgraphs; the critical path is the longest chain.
    Concurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskNode {
    pub pipeline: usize,
    pub task_index: usize,
    pub latency: Nanos,
    pub energy_nj: u64,
    pub is_target: bool,
}

/// Task-level precedence DAG of a holistic plan.
#[derive(Debug, Clone, Default)]
pub struct TaskGraph {
    graph: DiGraph<TaskNode, ()>,
}

impl TaskGraph {
    pub fn new() -> Self {
        TaskGraph::default()
    }

    pub fn add_task(&mut self, node: TaskNode) -> NodeIndex {
        self.graph.add_node(node)
    }

    pub fn add_dependency(&mut self, before: NodeIndex, after: NodeIndex) {
        self.graph.add_edge(before, after, ());
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn total_energy_nj(&self) -> u64 {
        self.graph.node_weights().map(|n| n.energy_nj).sum()
    }

    pub fn build(
        holistic: &HolisticPlan,
        scenario: &Scenario,
        layout: GraphLayout,
    ) -> Result<Self, PlanError> {
        let mut g = TaskGraph::new();
        let mut carried: Vec<NodeIndex> = Vec::new();
        for plan in &holistic.plans {
            let p = scenario
                .pipeline_index(&plan.pipeline_id)
                .ok_or_else(|| PlanError::UnknownPipeline(plan.pipeline_id.to_string()))?;
            let costs = plan_costs(&plan.tasks, &scenario.cost_context(p))?;
            let mut frontier = match layout {
                GraphLayout::Unified => std::mem::take(&mut carried),
                GraphLayout::Concurrent => Vec::new(),
            };
            let mut before_tx: Vec<NodeIndex> = Vec::new();
            let last = plan.tasks.len().saturating_sub(1);
            for (i, (task, cost)) in plan.tasks.iter().zip(&costs).enumerate() {
                let node = g.add_task(TaskNode {
                    pipeline: p,
                    task_index: i,
                    latency: cost.latency,
                    energy_nj: cost.energy_nj,
                    is_target: i == last && task.kind == TaskKind::Interaction,
                });
                match task.kind {
                    // Rx shares its Tx's predecessors: both occupy the link at once.
                    TaskKind::Rx { .. } => {
                        for &pred in &before_tx {
                            g.add_dependency(pred, node);
                        }
                        frontier.push(node);
                    }
                    TaskKind::Tx { .. } => {
                        for &pred in &frontier {
                            g.add_dependency(pred, node);
                        }
                        before_tx = std::mem::replace(&mut frontier, vec![node]);
                    }
                    _ => {
                        for &pred in &frontier {
                            g.add_dependency(pred, node);
                        }
                        frontier = vec![node];
                    }
                }
            }
            carried = frontier;
        }
        Ok(g)
    }

    /// Longest path ending at a target task; every node's latency counts once.
    pub fn longest_path(&self) -> Result<Nanos, PlanError> {
        let order = toposort(&self.graph, None).map_err(|_| PlanError::CyclicPlan)?;
        let mut finish = vec![Nanos::ZERO; self.graph.node_count()];
        let mut best = Nanos::ZERO;
        let any_target = self.graph.node_weights().any(|n| n.is_target);
        for idx in order {
            let start = self
                .graph
                .neighbors_directed(idx, Direction::Incoming)
                .map(|p| finish[p.index()])
                .max()
                .unwrap_or(Nanos::ZERO);
            let node = &self.graph[idx];
            finish[idx.index()] = start + node.latency;
            if node.is_target || !any_target {
                best = best.max(finish[idx.index()]);
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEstimate {
    pub latency: Nanos,
    pub pipelines: usize,
    pub energy_nj: u64,
}

impl PlanEstimate {
    pub fn end_to_end_latency_s(&self) -> f64 {
        self.latency.as_secs_f64()
    }

    /// Pipelines completed per second.
    pub fn throughput(&self) -> f64 {
        self.pipelines as f64 / self.latency.as_secs_f64()
    }

    /// Joules per execution of the whole holistic plan.
    pub fn energy_per_cycle(&self) -> f64 {
        self.energy_nj as f64 * 1e-9
    }

    pub fn avg_power_w(&self) -> f64 {
        self.energy_nj as f64 / self.latency.0 as f64
    }
}

pub fn estimate_latency(holistic: &HolisticPlan, scenario: &Scenario) -> Result<Nanos, PlanError> {
    estimate_latency_with(holistic, scenario, GraphLayout::Unified)
}

pub fn estimate_latency_with(
    holistic: &HolisticPlan,
    scenario: &Scenario,
    layout: GraphLayout,
) -> Result<Nanos, PlanError> {
    if holistic.is_empty() {
        return Err(PlanError::EmptyPlan);
    }
    TaskGraph::build(holistic, scenario, layout)?.longest_path()
}

pub fn estimate(holistic: &HolisticPlan, scenario: &Scenario) -> Result<PlanEstimate, PlanError> {
    if holistic.is_empty() {
        return Err(PlanError::EmptyPlan);
    }
    let graph = TaskGraph::build(holistic, scenario, GraphLayout::Unified)?;
    let latency = graph.longest_path()?;
    if latency == Nanos::ZERO {
        return Err(PlanError::ZeroLatency);
    }
    Ok(PlanEstimate {
        latency,
        pipelines: holistic.len(),
        energy_nj: graph.total_energy_nj(),
    })
}

/// Mean transferable data size of a pipeline, kept as an exact fraction.
#[derive(Debug, Clone, Copy)]
pub struct DataIntensity {
    pub total_bytes: u128,
    pub points: u64,
}

impl DataIntensity {
    pub fn bytes(&self) -> f64 {
        self.total_bytes as f64 / self.points as f64
    }
}

impl PartialEq for DataIntensity {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DataIntensity {}

impl PartialOrd for DataIntensity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DataIntensity {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.total_bytes * other.points as u128).cmp(&(other.total_bytes * self.points as u128))
    }
}

pub fn data_intensity(pipeline: &PipelineSpec, scenario: &Scenario) -> DataIntensity {
    let model = scenario.model_of(pipeline);
    model_data_intensity(model)
}

pub fn model_data_intensity(model: &crate::domain::ModelDescriptor) -> DataIntensity {
    let outs: u128 = model.layers.iter().map(|l| l.out_bytes as u128).sum();
    DataIntensity {
        total_bytes: model.input_bytes as u128 + outs,
        points: model.num_layers() as u64 + 1,
    }
}
