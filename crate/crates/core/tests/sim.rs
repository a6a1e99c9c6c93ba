mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use synergy_core::domain::{HolisticPlan, LayerRange, UnitKind};
use synergy_core::enumerate::{EnumerationConfig, PlanLayout};
use synergy_core::planner::{estimate_latency, select, PlannerConfig, Strategy};
use synergy_core::sim::{
    check_records, read_trace_jsonl, simulate, validate_trace, write_trace_jsonl, SimConfig,
    SimError, SimMode, TraceRecord,
};
use synergy_core::{fixtures, Nanos, Scenario};

use common::{device, fc_model, pipeline, scenario};

fn planned(name: &str) -> (Scenario, HolisticPlan) {
    let s = fixtures::load_fixture(name).unwrap().scenario().unwrap();
    let plan = select(Strategy::Synergy, &s, &PlannerConfig::default())
        .unwrap()
        .plan;
    (s, plan)
}

/// Cpu and accelerator units never idle while an instance waits for them.
fn assert_work_conserving(records: &[TraceRecord]) {
    let mut by_unit: BTreeMap<(&str, UnitKind), Vec<&TraceRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.unit != UnitKind::Radio) {
        by_unit.entry((&r.device, r.unit)).or_default().push(r);
    }
    for list in by_unit.values() {
        for r in list.iter().filter(|r| r.start_ns > r.ready_ns) {
            let mut covered = r.ready_ns;
            let mut busy: Vec<_> = list.iter().map(|o| (o.start_ns, o.end_ns)).collect();
            busy.sort();
            for (s, e) in busy {
                if s <= covered && e > covered {
                    covered = e;
                }
            }
            assert!(
                covered >= r.start_ns,
                "{} run {} task {} waited on an idle unit",
                r.pipeline,
                r.run,
                r.task_index
            );
        }
    }
}

#[test]
fn single_run_matches_estimate() {
    for name in ["workload3", "workload4", "workload1", "workload2"] {
        let (s, plan) = planned(name);
        let report = simulate(&plan, &s, SimConfig::new(SimMode::Sequential, 1)).unwrap();
        assert_eq!(
            report.makespan,
            estimate_latency(&plan, &s).unwrap(),
            "{name}"
        );
        assert_eq!(report.measured_completions, plan.len() as u64);
    }
}

#[test]
fn disjoint_pipelines_overlap_only_when_allowed() {
    let devs = vec![device("a"), device("b")];
    let s = scenario(
        devs,
        vec![fc_model("m0", 3), fc_model("m1", 3)],
        vec![pipeline("p0", "m0"), pipeline("p1", "m1")],
    );
    let make = |i: usize, dev: usize| {
        let p = &s.pipelines[i];
        PlanLayout {
            source: dev,
            target: dev,
            chunks: vec![(dev, LayerRange { start: 0, end: 3 })],
        }
        .to_plan(p, s.model_of(p), &s.devices)
    };
    let plan = HolisticPlan::new(vec![make(0, 0), make(1, 1)]);
    let chain =
        |i: usize| estimate_latency(&HolisticPlan::new(vec![plan.plans[i].clone()]), &s).unwrap();
    let (c0, c1) = (chain(0), chain(1));
    let seq = simulate(&plan, &s, SimConfig::new(SimMode::Sequential, 1)).unwrap();
    assert_eq!(seq.makespan, c0 + c1);
    let par = simulate(&plan, &s, SimConfig::new(SimMode::InterPipeline, 1)).unwrap();
    assert_eq!(par.makespan, c0.max(c1));
}

#[test]
fn workload2_parallelism_ordering() {
    let (s, plan) = planned("workload2");
    let tp = |mode| {
        simulate(&plan, &s, SimConfig::new(mode, 12).warmup(2))
            .unwrap()
            .throughput()
    };
    let (seq, ip, ir) = (
        tp(SimMode::Sequential),
        tp(SimMode::InterPipeline),
        tp(SimMode::InterRun),
    );
    assert!(ir >= ip && ip >= seq, "{seq} {ip} {ir}");
}

#[test]
fn simulated_traces_validate() {
    let (s, plan) = planned("workload1");
    for mode in SimMode::ALL {
        let report = simulate(&plan, &s, SimConfig::new(mode, 6).warmup(1).with_trace()).unwrap();
        validate_trace(&report).unwrap();
        let trace = report.trace.as_ref().unwrap();
        assert_work_conserving(trace);
        let tasks: usize = plan.plans.iter().map(|p| p.tasks.len()).sum();
        assert_eq!(trace.len(), tasks * 6);
    }
}

#[test]
fn swapped_starts_are_caught() {
    let (s, plan) = planned("workload2");
    let report = simulate(&plan, &s, SimConfig::new(SimMode::InterRun, 3).with_trace()).unwrap();
    let mut trace = report.trace.unwrap();
    let i = trace.iter().position(|r| r.task_index == 2).unwrap();
    let j = trace
        .iter()
        .position(|r| r.pipeline == trace[i].pipeline && r.run == trace[i].run && r.task_index == 3)
        .unwrap();
    let (a, b) = (trace[i].start_ns, trace[j].start_ns);
    trace[i].start_ns = b;
    trace[j].start_ns = a;
    assert!(check_records(&trace).is_err());
}

fn chain(pipeline: &str, offset: u64) -> Vec<TraceRecord> {
    let steps = [
        ("sensing", UnitKind::Cpu),
        ("load", UnitKind::Cpu),
        ("inference", UnitKind::Accelerator),
        ("unload", UnitKind::Cpu),
        ("interaction", UnitKind::Cpu),
    ];
    steps
        .iter()
        .enumerate()
        .map(|(i, (kind, unit))| TraceRecord {
            pipeline: pipeline.into(),
            run: 0,
            task_index: i,
            kind: kind.to_string(),
            device: "a".into(),
            unit: *unit,
            ready_ns: offset + 10 * i as u64,
            start_ns: offset + 10 * i as u64,
            end_ns: offset + 10 * (i as u64 + 1),
        })
        .collect()
}

#[test]
fn overlapping_intervals_are_caught() {
    let mut ok = chain("p", 0);
    ok.extend(chain("q", 50));
    check_records(&ok).unwrap();
    let mut bad = chain("p", 0);
    bad.extend(chain("q", 5));
    let err = check_records(&bad).unwrap_err();
    assert!(err.reason.contains("overlaps"), "{err}");
}

#[test]
fn invalid_windows() {
    let (s, plan) = planned("workload3");
    assert!(matches!(
        simulate(&plan, &s, SimConfig::new(SimMode::Sequential, 0)),
        Err(SimError::InvalidWindow { .. })
    ));
    assert!(matches!(
        simulate(&plan, &s, SimConfig::new(SimMode::Sequential, 3).warmup(3)),
        Err(SimError::InvalidWindow { .. })
    ));
    assert!(matches!(
        simulate(&plan, &s, SimConfig::new(SimMode::InterRun, 3).window(0)),
        Err(SimError::InvalidWindow { .. })
    ));
    assert!(matches!(
        simulate(
            &HolisticPlan::default(),
            &s,
            SimConfig::new(SimMode::Sequential, 1)
        ),
        Err(SimError::EmptyPlan)
    ));
}

#[test]
fn trace_jsonl_round_trip_and_determinism() {
    let (s, plan) = planned("workload1");
    let cfg = SimConfig::new(SimMode::InterRun, 5).with_trace();
    let a = simulate(&plan, &s, cfg).unwrap();
    let b = simulate(&plan, &s, cfg).unwrap();
    let mut bytes_a = Vec::new();
    write_trace_jsonl(a.trace.as_ref().unwrap(), &mut bytes_a).unwrap();
    let mut bytes_b = Vec::new();
    write_trace_jsonl(b.trace.as_ref().unwrap(), &mut bytes_b).unwrap();
    assert_eq!(bytes_a, bytes_b);
    let back = read_trace_jsonl(&bytes_a[..]).unwrap();
    assert_eq!(&back, a.trace.as_ref().unwrap());
}

#[test]
fn utilization_is_a_fraction() {
    let (s, plan) = planned("workload2");
    let report = simulate(&plan, &s, SimConfig::new(SimMode::InterRun, 10).warmup(2)).unwrap();
    assert!(report.measure_start > Nanos::ZERO);
    assert_eq!(report.measured_completions, 3 * 8);
    for u in &report.utilization {
        assert!((0.0..=1.0).contains(&u.utilization), "{u:?}");
    }
    assert!(report.utilization.iter().any(|u| u.utilization > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_plans_simulate_cleanly(devices in 1usize..4, a in 1usize..5, b in 1usize..5, runs in 1u32..5, window in 1u32..4, mode in 0usize..3) {
        let devs = (0..devices).map(|i| device(&format!("d{i}"))).collect();
        let s = scenario(devs, vec![fc_model("m0", a), fc_model("m1", b)], vec![pipeline("p0", "m0"), pipeline("p1", "m1")]);
        let cfg = PlannerConfig::default().enumeration(EnumerationConfig::unconstrained());
        let plan = select(Strategy::MaxDev, &s, &cfg).unwrap().plan;
        let first = simulate(&plan, &s, SimConfig::new(SimMode::Sequential, 1)).unwrap();
        prop_assert_eq!(first.makespan, estimate_latency(&plan, &s).unwrap());
        let report = simulate(&plan, &s, SimConfig::new(SimMode::ALL[mode], runs).window(window).with_trace()).unwrap();
        prop_assert!(validate_trace(&report).is_ok());
        assert_work_conserving(report.trace.as_ref().unwrap());
        prop_assert_eq!(report.measured_completions, 2 * runs as u64);
    }
}
