use anyhow::Result;
use itertools::Itertools;

use synergy_core::domain::ObjectiveKind;
use synergy_core::planner::{select, PlanError, Prioritization, Selection, Strategy};
use synergy_core::Scenario;

use crate::args::CompareArgs;
use crate::output::{emit, num, secs, table, Failure, EXIT_USAGE};
use crate::scenario::{load, planner_config};

pub const HEADER: [&str; 7] = [
    "strategy",
    "prioritization",
    "objective",
    "latency_s",
    "throughput",
    "avg_power_w",
    "status",
];

fn status(result: &Result<Selection, PlanError>) -> &'static str {
    match result {
        Ok(_) => "ok",
        Err(PlanError::OutOfResource(_)) => "oor",
        Err(PlanError::SearchBudgetExceeded { .. }) => "budget",
        Err(_) => "infeasible",
    }
}

struct Row {
    strategy: Strategy,
    prioritization: Option<Prioritization>,
    objective: ObjectiveKind,
    result: Result<Selection, PlanError>,
}

impl Row {
    fn cells(&self) -> Vec<String> {
        let (lat, tput, power) = match &self.result {
            Ok(s) => (
                secs(s.estimate.end_to_end_latency_s()),
                num(s.estimate.throughput()),
                num(s.estimate.avg_power_w()),
            ),
            Err(_) => (String::new(), String::new(), String::new()),
        };
        vec![
            self.strategy.as_str().to_string(),
            self.prioritization
                .map_or("-".to_string(), |p| p.as_str().to_string()),
            self.objective.as_str().to_string(),
            lat,
            tput,
            power,
            status(&self.result).to_string(),
        ]
    }

    fn throughput(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|s| s.estimate.throughput())
    }
}

fn parse_prioritizations(raw: &[String]) -> Result<Vec<Prioritization>> {
    if raw.iter().any(|r| r == "all") {
        return Ok(Prioritization::ALL.to_vec());
    }
    raw.iter()
        .map(|r| {
            r.parse()
                .map_err(|e: String| Failure::with_code(EXIT_USAGE, e))
        })
        .collect()
}

fn evaluate(
    scenario: &Scenario,
    args: &CompareArgs,
    strategies: &[Strategy],
    prios: &[Prioritization],
    objectives: &[ObjectiveKind],
) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &objective in objectives {
        for &strategy in strategies {
            // Only accumulating strategies depend on the pipeline order.
            let orders: Vec<Option<Prioritization>> = if strategy.accumulates() {
                prios.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for prioritization in orders {
                let mut search = args.search.clone();
                search.objective = objective;
                let cfg = planner_config(
                    &search,
                    prioritization.unwrap_or_default(),
                    scenario.devices.len(),
                )?;
                rows.push(Row {
                    strategy,
                    prioritization,
                    objective,
                    result: select(strategy, scenario, &cfg),
                });
            }
        }
    }
    Ok(rows)
}

pub fn run(args: CompareArgs) -> Result<()> {
    let scenario = load(&args.scenario)?;
    let strategies = args
        .strategies
        .clone()
        .unwrap_or_else(|| Strategy::ALL.to_vec());
    let prios = parse_prioritizations(&args.prioritizations)?;
    let mut objectives = vec![args.search.objective];
    for o in args.objectives.iter().flatten() {
        if !objectives.contains(o) {
            objectives.push(*o);
        }
    }
    let Some(k) = args.subsets else {
        let rows = evaluate(&scenario, &args, &strategies, &prios, &objectives)?;
        let cells: Vec<Vec<String>> = rows.iter().map(Row::cells).collect();
        return emit(
            args.output.as_deref(),
            "compare",
            &table(args.format, &HEADER, &cells)?,
        );
    };
    let k = k as usize;
    let n = scenario.pipelines.len();
    if k > n {
        return Err(Failure::with_code(
            EXIT_USAGE,
            format!("--subsets {k} exceeds the {n} pipelines"),
        ));
    }
    let mut header = vec!["subset"];
    header.extend(HEADER);
    header.push("ratio");
    let mut cells = Vec::new();
    let mut ratio_sums: Vec<(String, f64, usize)> = Vec::new();
    for subset in (0..n).combinations(k) {
        let pipelines = subset
            .iter()
            .map(|&i| scenario.pipelines[i].clone())
            .collect();
        let sub = scenario
            .with_pipelines(pipelines)
            .map_err(|e| Failure::with_code(EXIT_USAGE, e.to_string()))?;
        let label = subset
            .iter()
            .map(|&i| scenario.pipelines[i].id.to_string())
            .collect::<Vec<_>>()
            .join("+");
        let rows = evaluate(&sub, &args, &strategies, &prios, &objectives)?;
        for row in &rows {
            let oracle = rows
                .iter()
                .find(|r| r.strategy == Strategy::Oracle && r.objective == row.objective)
                .and_then(Row::throughput);
            let ratio = match (row.throughput(), oracle) {
                (Some(t), Some(o)) => Some(t / o),
                (None, Some(_)) if status(&row.result) == "infeasible" => Some(0.0),
                _ => None,
            };
            let key = row.cells()[..3].join(",");
            if let Some(r) = ratio {
                match ratio_sums.iter_mut().find(|(k, ..)| *k == key) {
                    Some(entry) => {
                        entry.1 += r;
                        entry.2 += 1;
                    }
                    None => ratio_sums.push((key, r, 1)),
                }
            }
            let mut line = vec![label.clone()];
            line.extend(row.cells());
            line.push(ratio.map(num).unwrap_or_default());
            cells.push(line);
        }
    }
    for (key, sum, count) in ratio_sums {
        let mut line = vec!["mean".to_string()];
        line.extend(key.split(',').map(str::to_string));
        line.extend([
            String::new(),
            String::new(),
            String::new(),
            "summary".to_string(),
        ]);
        line.push(num(sum / count as f64));
        cells.push(line);
    }
    emit(
        args.output.as_deref(),
        "compare",
        &table(args.format, &header, &cells)?,
    )
}
