use std::fs::{self, File};
use std::io::BufWriter;

use anyhow::{Context, Result};
use serde_json::Value;

use synergy_core::domain::HolisticPlan;
use synergy_core::enumerate::is_runnable;
use synergy_core::sim::{
    simulate, validate_trace, write_trace_jsonl, SimConfig, SimError, TraceRecord,
};
use synergy_core::Scenario;

use crate::args::SimulateArgs;
use crate::output::{emit, num, secs, table, Failure, EXIT_NO_RUNNABLE, EXIT_USAGE};
use crate::scenario::load;

pub const HEADER: [&str; 7] = [
    "mode",
    "runs",
    "makespan_s",
    "throughput",
    "unit",
    "device",
    "utilization",
];

/// Accepts either the `plan` command's document or a bare holistic plan.
pub fn read_plan(path: &std::path::Path, scenario: &Scenario) -> Result<HolisticPlan> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        Failure::with_code(EXIT_USAGE, format!("cannot parse {}: {e}", path.display()))
    })?;
    let inner = value.get("plan").cloned().unwrap_or(value);
    let plan: HolisticPlan = serde_json::from_value(inner).map_err(|e| {
        Failure::with_code(
            EXIT_USAGE,
            format!("{} is not a holistic plan: {e}", path.display()),
        )
    })?;
    for p in &plan.plans {
        let idx = scenario.pipeline_index(&p.pipeline_id).ok_or_else(|| {
            Failure::with_code(
                EXIT_USAGE,
                format!("plan references unknown pipeline `{}`", p.pipeline_id),
            )
        })?;
        let model = scenario.model_of(&scenario.pipelines[idx]);
        p.check_shape(model.num_layers())
            .map_err(|e| Failure::with_code(EXIT_USAGE, e.to_string()))?;
    }
    let report = is_runnable(&plan, &scenario.devices);
    if !report.runnable {
        let parts: Vec<String> = report
            .violations()
            .map(|(d, v)| format!("{d} {}", v.as_str()))
            .collect();
        return Err(Failure::with_code(
            EXIT_USAGE,
            format!("plan is not runnable: {}", parts.join(", ")),
        ));
    }
    Ok(plan)
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let scenario = load(&args.scenario)?;
    let plan = read_plan(&args.plan, &scenario)?;
    let mut rows = Vec::new();
    let mut traces: Vec<TraceRecord> = Vec::new();
    for mode in args.mode.modes() {
        let mut cfg = SimConfig::new(mode, args.runs)
            .warmup(args.warmup)
            .window(args.window);
        if args.trace.is_some() {
            cfg = cfg.with_trace();
        }
        let report = simulate(&plan, &scenario, cfg).map_err(|e| match e {
            SimError::DeadlockDetected { .. } => {
                Failure::with_code(EXIT_NO_RUNNABLE, e.to_string())
            }
            other => Failure::with_code(EXIT_USAGE, other.to_string()),
        })?;
        if let Some(trace) = &report.trace {
            validate_trace(&report).context("simulator produced an inconsistent trace")?;
            traces.extend(trace.iter().cloned());
        }
        let (m, r, mk, tp) = (
            mode.as_str().to_string(),
            args.runs.to_string(),
            secs(report.makespan_s()),
            num(report.throughput()),
        );
        for u in &report.utilization {
            rows.push(vec![
                m.clone(),
                r.clone(),
                mk.clone(),
                tp.clone(),
                u.unit.as_str().to_string(),
                u.device.to_string(),
                num(u.utilization),
            ]);
        }
        let mean = report
            .utilization
            .iter()
            .map(|u| u.utilization)
            .sum::<f64>()
            / report.utilization.len().max(1) as f64;
        rows.push(vec![m, r, mk, tp, "all".into(), "all".into(), num(mean)]);
    }
    if let Some(path) = &args.trace {
        let file =
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        write_trace_jsonl(&traces, BufWriter::new(file))?;
    }
    let body = table(args.format, &HEADER, &rows)?;
    emit(args.output.as_deref(), "simulate", &body)
}
