use anyhow::Result;
use serde_json::{json, Value};

use synergy_core::planner::{select, PlanError, Selection};
use synergy_core::Scenario;

use crate::args::PlanArgs;
use crate::output::{emit, pretty, Failure, EXIT_BUDGET, EXIT_NO_RUNNABLE, EXIT_OOR, EXIT_USAGE};
use crate::scenario::{load, planner_config};

pub fn estimate_json(selection: &Selection) -> Value {
    let e = &selection.estimate;
    json!({
        "latency_s": e.end_to_end_latency_s(),
        "latency_ns": e.latency.0,
        "throughput": e.throughput(),
        "avg_power_w": e.avg_power_w(),
        "energy_per_cycle_j": e.energy_per_cycle(),
    })
}

pub fn usage_json(selection: &Selection) -> Value {
    Value::Array(
        selection
            .runnable
            .usage
            .iter()
            .map(|u| {
                json!({
                    "device": u.device,
                    "weight_bytes": u.used.weight_bytes,
                    "bias_bytes": u.used.bias_bytes,
                    "layers": u.used.layers,
                    "violations": u.violations.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

/// Maps planner failures onto exit codes, printing a JSON error document for the
/// outcomes scripts need to tell apart.
pub fn failure(err: PlanError, strategy: &str) -> anyhow::Error {
    match err {
        PlanError::OutOfResource(sel) => {
            let violations: Vec<Value> = sel
                .runnable
                .violations()
                .map(|(d, dim)| json!({"device": d, "dimension": dim.as_str()}))
                .collect();
            print!(
                "{}",
                pretty(&json!({
                    "error": "OOR",
                    "strategy": strategy,
                    "violations": violations,
                    "usage": usage_json(&sel),
                    "plan": sel.plan,
                }))
            );
            Failure::with_code(
                EXIT_OOR,
                format!("{strategy} selected an out-of-resource plan"),
            )
        }
        PlanError::NoRunnablePlan { pipeline } => {
            print!(
                "{}",
                pretty(&json!({"error": "NoRunnablePlan", "pipeline": pipeline}))
            );
            Failure::with_code(
                EXIT_NO_RUNNABLE,
                format!("no runnable plan for pipeline `{pipeline}`"),
            )
        }
        PlanError::SearchBudgetExceeded { product, budget } => {
            print!(
                "{}",
                pretty(
                    &json!({"error": "SearchBudgetExceeded", "product": product.to_string(), "budget": budget})
                )
            );
            Failure::with_code(
                EXIT_BUDGET,
                format!("search space of {product} combinations exceeds budget {budget}"),
            )
        }
        other => Failure::with_code(EXIT_USAGE, other.to_string()),
    }
}

pub fn document(selection: &Selection, scenario: &Scenario, args: &PlanArgs) -> Value {
    json!({
        "plan": selection.plan,
        "estimate": estimate_json(selection),
        "strategy": args.strategy.as_str(),
        "objective": args.search.objective.as_str(),
        "prioritization": args.prioritization.as_str(),
        "plan_indices": selection.indices,
        "evaluated": selection.stats.evaluated,
        "pipelines": scenario.pipelines.iter().map(|p| p.id.to_string()).collect::<Vec<_>>(),
        "usage": usage_json(selection),
    })
}

pub fn run(args: PlanArgs) -> Result<()> {
    let scenario = load(&args.scenario)?;
    let config = planner_config(&args.search, args.prioritization, scenario.devices.len())?;
    let selection = select(args.strategy, &scenario, &config)
        .map_err(|e| failure(e, args.strategy.as_str()))?;
    let body = pretty(&document(&selection, &scenario, &args));
    emit(args.output.as_deref(), "plan", &body)
}
