//! Deterministic discrete-event simulation of a deployed holistic plan.
//!
//! Each device exposes a cpu, an accelerator and a radio, each with its own
//! FIFO queue. A Tx and its paired Rx form one step that holds both radios for
//! its whole duration and waits at the head of both queues until both are idle.
//! Since both queues receive the step in the same global order, the ready
//! instance enqueued earliest is always at the head of every queue it is in,
//! so the schedule cannot deadlock.

mod trace;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::cost::{plan_costs, CostError};
use crate::domain::{DeviceId, HolisticPlan, PipelineId, TaskKind, UnitKind};
use crate::scenario::Scenario;
use crate::time::Nanos;

pub use trace::{
    check_records, read_trace_jsonl, validate_trace, write_trace_jsonl, TraceRecord, TraceViolation,
};

pub const DEFAULT_WINDOW: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SimMode {
    /// Run r+1 of anything starts only after every pipeline finished run r;
    /// within a run pipelines go one after another in registration order.
    #[default]
    Sequential,
    /// Pipelines overlap; each pipeline's run r+1 waits for its own run r.
    InterPipeline,
    /// Successive runs of a pipeline overlap, bounded by the in-flight window.
    InterRun,
}

impl SimMode {
    pub const ALL: [SimMode; 3] = [
        SimMode::Sequential,
        SimMode::InterPipeline,
        SimMode::InterRun,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimMode::Sequential => "seq",
            SimMode::InterPipeline => "inter-pipeline",
            SimMode::InterRun => "inter-run",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "seq" | "sequential" => Ok(SimMode::Sequential),
            "inter-pipeline" | "interpipeline" => Ok(SimMode::InterPipeline),
            "inter-run" | "interrun" => Ok(SimMode::InterRun),
            other => Err(format!("unknown simulation mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub mode: SimMode,
    pub runs: u32,
    /// Runs per pipeline discarded before measuring.
    pub warmup: u32,
    /// Maximum concurrent runs per pipeline in inter-run mode.
    pub window: u32,
    pub record_trace: bool,
}

impl SimConfig {
    pub fn new(mode: SimMode, runs: u32) -> Self {
        SimConfig {
            mode,
            runs,
            warmup: 0,
            window: DEFAULT_WINDOW,
            record_trace: false,
        }
    }

    pub fn warmup(mut self, warmup: u32) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn window(mut self, window: u32) -> Self {
        self.window = window;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid run window: runs {runs}, warmup {warmup}, in-flight window {window}")]
    InvalidWindow { runs: u32, warmup: u32, window: u32 },
    #[error("deadlock at {time}: {pending} task instances can never start")]
    DeadlockDetected { time: Nanos, pending: usize },
    #[error("holistic plan is empty")]
    EmptyPlan,
    #[error("plan references unknown pipeline `{0}`")]
    UnknownPipeline(String),
    #[error("plan references unknown device `{0}`")]
    UnknownDevice(DeviceId),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Trace(#[from] TraceViolation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitUtilization {
    pub device: DeviceId,
    pub unit: UnitKind,
    pub busy: Nanos,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub mode: SimMode,
    pub runs: u32,
    pub warmup: u32,
    pub completed: Vec<(PipelineId, u32)>,
    /// Measured window: from warmup end to the last completion.
    pub makespan: Nanos,
    pub measure_start: Nanos,
    pub measured_completions: u64,
    pub utilization: Vec<UnitUtilization>,
    pub trace: Option<Vec<TraceRecord>>,
}

impl SimReport {
    pub fn makespan_s(&self) -> f64 {
        self.makespan.as_secs_f64()
    }

    /// Pipeline completions per second over the measured window.
    pub fn throughput(&self) -> f64 {
        if self.makespan == Nanos::ZERO {
            return 0.0;
        }
        self.measured_completions as f64 / self.makespan.as_secs_f64()
    }
}

/// One schedulable step: a single task, or a Tx/Rx pair sharing the link.
#[derive(Debug, Clone)]
struct Step {
    tasks: Vec<usize>,
    units: Vec<usize>,
    latency: Nanos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Instance {
    run: u32,
    pipeline: usize,
    step: usize,
}

const UNITS_PER_DEVICE: usize = 3;

fn unit_slot(device: usize, unit: UnitKind) -> usize {
    device * UNITS_PER_DEVICE
        + match unit {
            UnitKind::Cpu => 0,
            UnitKind::Accelerator => 1,
            UnitKind::Radio => 2,
        }
}

fn build_steps(holistic: &HolisticPlan, scenario: &Scenario) -> Result<Vec<Vec<Step>>, SimError> {
    let mut all = Vec::with_capacity(holistic.len());
    for plan in &holistic.plans {
        let p = scenario
            .pipeline_index(&plan.pipeline_id)
            .ok_or_else(|| SimError::UnknownPipeline(plan.pipeline_id.to_string()))?;
        let costs = plan_costs(&plan.tasks, &scenario.cost_context(p))?;
        let slot = |i: usize| -> Result<usize, SimError> {
            let t = &plan.tasks[i];
            let dev = scenario
                .devices
                .index_of(&t.device)
                .ok_or_else(|| SimError::UnknownDevice(t.device.clone()))?;
            Ok(unit_slot(dev, costs[i].unit))
        };
        let mut steps = Vec::new();
        let mut i = 0;
        while i < plan.tasks.len() {
            let paired = matches!(plan.tasks[i].kind, TaskKind::Tx { .. })
                && matches!(
                    plan.tasks.get(i + 1).map(|t| &t.kind),
                    Some(TaskKind::Rx { .. })
                );
            if paired {
                steps.push(Step {
                    tasks: vec![i, i + 1],
                    units: vec![slot(i)?, slot(i + 1)?],
                    latency: costs[i].latency.max(costs[i + 1].latency),
                });
                i += 2;
            } else {
                steps.push(Step {
                    tasks: vec![i],
                    units: vec![slot(i)?],
                    latency: costs[i].latency,
                });
                i += 1;
            }
        }
        all.push(steps);
    }
    Ok(all)
}

struct Engine<'a> {
    cfg: SimConfig,
    steps: &'a [Vec<Step>],
    /// Unmet dependencies of each run's first step, indexed run * pipelines + pipeline.
    first_pending: Vec<u8>,
    ready_at: Vec<Vec<Nanos>>,
    queues: Vec<VecDeque<Instance>>,
    busy: Vec<bool>,
    busy_spans: Vec<Vec<(Nanos, Nanos)>>,
    events: BinaryHeap<Reverse<(Nanos, Instance)>>,
    newly_ready: Vec<Instance>,
    completions: Vec<Nanos>,
    completed: Vec<u32>,
    trace: Option<Vec<TraceRecord>>,
}

impl Engine<'_> {
    fn pipelines(&self) -> usize {
        self.steps.len()
    }

    fn key(&self, run: u32, pipeline: usize) -> usize {
        run as usize * self.pipelines() + pipeline
    }

    fn release_first(&mut self, run: u32, pipeline: usize) {
        if run >= self.cfg.runs {
            return;
        }
        let k = self.key(run, pipeline);
        self.first_pending[k] -= 1;
        if self.first_pending[k] == 0 {
            self.newly_ready.push(Instance {
                run,
                pipeline,
                step: 0,
            });
        }
    }

    fn on_finish(&mut self, inst: Instance, now: Nanos) {
        let last = self.steps[inst.pipeline].len() - 1;
        let n = self.pipelines();
        if inst.step < last {
            self.newly_ready.push(Instance {
                step: inst.step + 1,
                ..inst
            });
        }
        if inst.step == 0 && self.cfg.mode == SimMode::InterRun {
            self.release_first(inst.run + 1, inst.pipeline);
        }
        if inst.step == last {
            self.completions.push(now);
            self.completed[inst.pipeline] += 1;
            match self.cfg.mode {
                SimMode::Sequential => {
                    let (run, p) = if inst.pipeline + 1 < n {
                        (inst.run, inst.pipeline + 1)
                    } else {
                        (inst.run + 1, 0)
                    };
                    self.release_first(run, p);
                }
                SimMode::InterPipeline => self.release_first(inst.run + 1, inst.pipeline),
                SimMode::InterRun => self.release_first(inst.run + self.cfg.window, inst.pipeline),
            }
        }
    }

    fn enqueue_ready(&mut self, now: Nanos) {
        let mut batch = std::mem::take(&mut self.newly_ready);
        batch.sort();
        for inst in batch {
            self.ready_at[inst.pipeline]
                [inst.run as usize * self.steps[inst.pipeline].len() + inst.step] = now;
            for &u in &self.steps[inst.pipeline][inst.step].units {
                self.queues[u].push_back(inst);
            }
        }
    }

    fn dispatch(&mut self, now: Nanos, holistic: &HolisticPlan, scenario: &Scenario) {
        loop {
            let mut started = false;
            for u in 0..self.queues.len() {
                if self.busy[u] {
                    continue;
                }
                let Some(&inst) = self.queues[u].front() else {
                    continue;
                };
                let step = &self.steps[inst.pipeline][inst.step];
                let startable = step
                    .units
                    .iter()
                    .all(|&v| !self.busy[v] && self.queues[v].front() == Some(&inst));
                if !startable {
                    continue;
                }
                let end = now + step.latency;
                for &v in &step.units {
                    self.queues[v].pop_front();
                    self.busy[v] = true;
                    self.busy_spans[v].push((now, end));
                }
                if let Some(trace) = self.trace.as_mut() {
                    let plan = &holistic.plans[inst.pipeline];
                    let ready = self.ready_at[inst.pipeline]
                        [inst.run as usize * self.steps[inst.pipeline].len() + inst.step];
                    for (&ti, &u) in step.tasks.iter().zip(&step.units) {
                        let task = &plan.tasks[ti];
                        trace.push(TraceRecord {
                            pipeline: plan.pipeline_id.to_string(),
                            run: inst.run,
                            task_index: ti,
                            kind: task.kind.name().to_string(),
                            device: scenario.devices.get(u / UNITS_PER_DEVICE).id.to_string(),
                            unit: slot_unit(u),
                            ready_ns: ready.0,
                            start_ns: now.0,
                            end_ns: end.0,
                        });
                    }
                }
                self.events.push(Reverse((end, inst)));
                started = true;
            }
            if !started {
                break;
            }
        }
    }
}

fn slot_unit(slot: usize) -> UnitKind {
    match slot % UNITS_PER_DEVICE {
        0 => UnitKind::Cpu,
        1 => UnitKind::Accelerator,
        _ => UnitKind::Radio,
    }
}

fn clipped(spans: &[(Nanos, Nanos)], from: Nanos, to: Nanos) -> Nanos {
    spans
        .iter()
        .map(|&(s, e)| e.min(to).saturating_sub(s.max(from)))
        .sum()
}

pub fn simulate(
    holistic: &HolisticPlan,
    scenario: &Scenario,
    cfg: SimConfig,
) -> Result<SimReport, SimError> {
    if cfg.runs == 0 || cfg.warmup >= cfg.runs || cfg.window == 0 {
        return Err(SimError::InvalidWindow {
            runs: cfg.runs,
            warmup: cfg.warmup,
            window: cfg.window,
        });
    }
    if holistic.is_empty() {
        return Err(SimError::EmptyPlan);
    }
    let steps = build_steps(holistic, scenario)?;
    let n = steps.len();
    let runs = cfg.runs;
    let mut first_pending = vec![0u8; runs as usize * n];
    for r in 0..runs {
        for p in 0..n {
            let deps = match cfg.mode {
                SimMode::Sequential => u8::from(r > 0 || p > 0),
                SimMode::InterPipeline => u8::from(r > 0),
                SimMode::InterRun => u8::from(r > 0) + u8::from(r >= cfg.window),
            };
            first_pending[r as usize * n + p] = deps;
        }
    }
    let slots = scenario.devices.len() * UNITS_PER_DEVICE;
    let mut engine = Engine {
        cfg,
        steps: &steps,
        newly_ready: (0..n)
            .filter(|&p| first_pending[p] == 0)
            .map(|p| Instance {
                run: 0,
                pipeline: p,
                step: 0,
            })
            .collect(),
        first_pending,
        ready_at: steps
            .iter()
            .map(|s| vec![Nanos::ZERO; s.len() * runs as usize])
            .collect(),
        queues: vec![VecDeque::new(); slots],
        busy: vec![false; slots],
        busy_spans: vec![Vec::new(); slots],
        events: BinaryHeap::new(),
        completions: Vec::with_capacity(runs as usize * n),
        completed: vec![0; n],
        trace: cfg.record_trace.then(Vec::new),
    };
    let mut now = Nanos::ZERO;
    loop {
        engine.enqueue_ready(now);
        engine.dispatch(now, holistic, scenario);
        let Some(Reverse((t, _))) = engine.events.peek().copied() else {
            break;
        };
        now = t;
        while let Some(Reverse((t, inst))) = engine.events.peek().copied() {
            if t != now {
                break;
            }
            engine.events.pop();
            for &u in &steps[inst.pipeline][inst.step].units {
                engine.busy[u] = false;
            }
            engine.on_finish(inst, now);
        }
    }
    let expected = runs as usize * n;
    if engine.completions.len() != expected {
        let pending = engine
            .queues
            .iter()
            .map(VecDeque::len)
            .sum::<usize>()
            .max(1);
        return Err(SimError::DeadlockDetected { time: now, pending });
    }
    let warm_count = cfg.warmup as usize * n;
    let measure_start = if warm_count == 0 {
        Nanos::ZERO
    } else {
        engine.completions[warm_count - 1]
    };
    let last = *engine.completions.last().expect("at least one run");
    let makespan = last.saturating_sub(measure_start);
    let measured_completions = (expected - warm_count) as u64;
    let utilization = (0..slots)
        .map(|u| {
            let busy = clipped(&engine.busy_spans[u], measure_start, last);
            UnitUtilization {
                device: scenario.devices.get(u / UNITS_PER_DEVICE).id.clone(),
                unit: slot_unit(u),
                busy,
                utilization: if makespan == Nanos::ZERO {
                    0.0
                } else {
                    busy.0 as f64 / makespan.0 as f64
                },
            }
        })
        .collect();
    Ok(SimReport {
        mode: cfg.mode,
        runs,
        warmup: cfg.warmup,
        completed: holistic
            .plans
            .iter()
            .zip(&engine.completed)
            .map(|(p, &c)| (p.pipeline_id.clone(), c))
            .collect(),
        makespan,
        measure_start,
        measured_completions,
        utilization,
        trace: engine.trace,
    })
}
