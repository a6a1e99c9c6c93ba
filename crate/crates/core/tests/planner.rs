mod common;

use proptest::prelude::*;
use synergy_core::domain::{HolisticPlan, LayerSpec, ModelDescriptor, ObjectiveKind, Shape};
use synergy_core::enumerate::{is_runnable, EnumerationConfig, PlanSpace};
use synergy_core::planner::{
    estimate, estimate_latency, estimate_latency_with, model_data_intensity, objective_value,
    prioritize, select, GraphLayout, ObjectiveScore, PlanError, PlanEstimate, PlannerConfig,
    Prioritization, Strategy, TaskGraph, TaskNode,
};
use synergy_core::{fixtures, BigUint, Nanos, Scenario};

use common::{device, device_with, fc_model, pipeline, scenario};

fn node(pipeline: usize, task_index: usize, ms: u64, is_target: bool) -> TaskNode {
    TaskNode {
        pipeline,
        task_index,
        latency: Nanos::from_millis(ms),
        energy_nj: 0,
        is_target,
    }
}

fn unconstrained() -> PlannerConfig {
    PlannerConfig::default().enumeration(EnumerationConfig::unconstrained())
}

fn generic(devices: usize, layers: &[usize]) -> Scenario {
    let devs = (0..devices).map(|i| device(&format!("d{i}"))).collect();
    let models = layers
        .iter()
        .enumerate()
        .map(|(i, &l)| fc_model(&format!("m{i}"), l))
        .collect();
    let pipes = (0..layers.len())
        .map(|i| pipeline(&format!("p{i}"), &format!("m{i}")))
        .collect();
    scenario(devs, models, pipes)
}

#[test]
fn chain_latency_is_the_sum() {
    let mut g = TaskGraph::new();
    let a = g.add_task(node(0, 0, 1, false));
    let b = g.add_task(node(0, 1, 2, false));
    let c = g.add_task(node(0, 2, 3, true));
    g.add_dependency(a, b);
    g.add_dependency(b, c);
    assert_eq!(g.longest_path().unwrap(), Nanos::from_millis(6));
}

#[test]
fn disjoint_chains_take_the_max() {
    let mut g = TaskGraph::new();
    let a = g.add_task(node(0, 0, 6, false));
    let b = g.add_task(node(0, 1, 0, true));
    let c = g.add_task(node(1, 0, 4, false));
    let d = g.add_task(node(1, 1, 6, true));
    g.add_dependency(a, b);
    g.add_dependency(c, d);
    assert_eq!(g.longest_path().unwrap(), Nanos::from_millis(10));
}

#[test]
fn cycles_are_rejected() {
    let mut g = TaskGraph::new();
    let a = g.add_task(node(0, 0, 1, false));
    let b = g.add_task(node(0, 1, 1, true));
    g.add_dependency(a, b);
    g.add_dependency(b, a);
    assert!(matches!(g.longest_path(), Err(PlanError::CyclicPlan)));
}

#[test]
fn throughput_definition() {
    let e = PlanEstimate {
        latency: Nanos(500_000_000),
        pipelines: 3,
        energy_nj: 1_000_000_000,
    };
    assert_eq!(e.throughput(), 6.0);
    assert_eq!(e.end_to_end_latency_s(), 0.5);
    assert_eq!(e.energy_per_cycle(), 1.0);
    assert_eq!(e.avg_power_w(), 2.0);
}

#[test]
fn empty_plan_has_no_estimate() {
    let s = generic(1, &[1]);
    assert!(matches!(
        estimate(&HolisticPlan::default(), &s),
        Err(PlanError::EmptyPlan)
    ));
}

#[test]
fn layouts_agree_on_one_pipeline_and_differ_on_two() {
    let s = generic(2, &[3, 3]);
    let sel = select(Strategy::Synergy, &s, &unconstrained()).unwrap();
    let unified = estimate_latency(&sel.plan, &s).unwrap();
    let concurrent = estimate_latency_with(&sel.plan, &s, GraphLayout::Concurrent).unwrap();
    assert!(concurrent < unified);
    let one = HolisticPlan::new(vec![sel.plan.plans[0].clone()]);
    assert_eq!(
        estimate_latency(&one, &s).unwrap(),
        estimate_latency_with(&one, &s, GraphLayout::Concurrent).unwrap()
    );
}

#[test]
fn workload1_estimate_is_positive() {
    let s = fixtures::load_fixture("workload1")
        .unwrap()
        .scenario()
        .unwrap();
    let sel = select(Strategy::Synergy, &s, &PlannerConfig::default()).unwrap();
    let e = sel.estimate;
    assert!(e.latency > Nanos::ZERO);
    assert!(e.throughput().is_finite() && e.throughput() > 0.0);
    assert_eq!(estimate(&sel.plan, &s).unwrap(), e);
}

#[test]
fn latency_objective_prefers_faster() {
    let fast = ObjectiveScore::from_parts(ObjectiveKind::LatencyMin, 860_000_000, 5, 1);
    let slow = ObjectiveScore::from_parts(ObjectiveKind::LatencyMin, 27_170_000_000, 1, 1);
    assert!(fast < slow);
}

#[test]
fn power_objective_is_energy_over_time() {
    // 1 J over 2 s beats 1 J over 1 s.
    let a = ObjectiveScore::from_parts(ObjectiveKind::PowerMin, 2_000_000_000, 1_000_000_000, 1);
    let b = ObjectiveScore::from_parts(ObjectiveKind::PowerMin, 1_000_000_000, 1_000_000_000, 1);
    assert!(a < b);
    assert_eq!(a.value(), 0.5);
    let e = PlanEstimate {
        latency: Nanos(2_000_000_000),
        pipelines: 1,
        energy_nj: 1_000_000_000,
    };
    assert_eq!(objective_value(&e, ObjectiveKind::PowerMin), a);
}

#[test]
fn throughput_objective_counts_pipelines() {
    let three = ObjectiveScore::from_parts(ObjectiveKind::ThroughputMax, 600, 0, 3);
    let one = ObjectiveScore::from_parts(ObjectiveKind::ThroughputMax, 300, 0, 1);
    assert!(three < one);
    assert_eq!(ObjectiveScore::new(3, 6), ObjectiveScore::new(1, 2));
}

#[test]
fn data_intensity_mean() {
    let model = ModelDescriptor {
        name: "m".into(),
        input_bytes: 100,
        layers: vec![
            LayerSpec::fully_connected(Shape::new(1, 1, 100), 50),
            LayerSpec::fully_connected(Shape::new(1, 1, 50), 30),
        ],
        declared_size: None,
    };
    assert_eq!(model_data_intensity(&model).bytes(), 60.0);
    let single = ModelDescriptor {
        name: "s".into(),
        input_bytes: 8,
        layers: vec![LayerSpec::fully_connected(Shape::new(1, 1, 8), 8)],
        declared_size: None,
    };
    assert_eq!(model_data_intensity(&single).bytes(), 8.0);
}

#[test]
fn prioritization_orders() {
    let s = fixtures::load_fixture("workload1")
        .unwrap()
        .scenario()
        .unwrap();
    let names = |order: Vec<usize>| -> Vec<String> {
        order
            .into_iter()
            .map(|i| s.pipelines[i].model.clone())
            .collect()
    };
    assert_eq!(
        names(prioritize(&s, Prioritization::Sequential)),
        ["ConvNet5", "ResSimpleNet", "UNet"]
    );
    assert_eq!(
        names(prioritize(&s, Prioritization::ModelSizeDes)),
        ["ResSimpleNet", "UNet", "ConvNet5"]
    );
    assert_eq!(
        names(prioritize(&s, Prioritization::ModelSizeAsc)),
        ["ConvNet5", "UNet", "ResSimpleNet"]
    );
    assert_eq!(
        names(prioritize(&s, Prioritization::DataIntensityDesc))[0],
        "UNet"
    );
    for p in Prioritization::ALL {
        assert_eq!(p.as_str().parse::<Prioritization>().unwrap(), p);
    }
}

#[test]
fn progressive_equals_oracle_on_one_pipeline() {
    for (devices, layers) in [(2, 4), (3, 5), (4, 3)] {
        let s = generic(devices, &[layers]);
        for objective in [
            ObjectiveKind::ThroughputMax,
            ObjectiveKind::LatencyMin,
            ObjectiveKind::PowerMin,
        ] {
            let cfg = unconstrained().objective(objective);
            let a = select(Strategy::Synergy, &s, &cfg).unwrap();
            let b = select(Strategy::Oracle, &s, &cfg).unwrap();
            assert_eq!(a.indices, b.indices);
            assert_eq!(a.plan, b.plan);
        }
    }
}

#[test]
fn oracle_matches_exhaustive_recomputation() {
    // Tight capacity so some plans are not runnable.
    let devs = vec![
        device_with("a", 200, 40, 3),
        device_with("b", 200, 40, 3),
        device("c"),
    ];
    let s = scenario(devs, vec![fc_model("m", 5)], vec![pipeline("p", "m")]);
    let cfg = unconstrained();
    let sel = select(Strategy::Oracle, &s, &cfg).unwrap();
    let p = &s.pipelines[0];
    let space = PlanSpace::new(p, s.model_of(p), &s.devices, cfg.enumeration).unwrap();
    let mut best: Option<(ObjectiveScore, usize)> = None;
    for (i, plan) in space.plans().enumerate() {
        let h = HolisticPlan::new(vec![plan]);
        if !is_runnable(&h, &s.devices).runnable {
            continue;
        }
        let score = objective_value(&estimate(&h, &s).unwrap(), cfg.objective);
        if best.is_none_or(|(b, _)| score < b) {
            best = Some((score, i));
        }
    }
    assert_eq!(sel.indices, [best.unwrap().1]);
}

#[test]
fn infeasible_pair_has_no_runnable_plan() {
    // Each model needs 128 B of weight; the devices hold 100 B each.
    let devs = vec![device_with("a", 100, 40, 8), device_with("b", 100, 40, 8)];
    let s = scenario(
        devs,
        vec![fc_model("m0", 2), fc_model("m1", 2)],
        vec![pipeline("p0", "m0"), pipeline("p1", "m1")],
    );
    let cfg = unconstrained();
    assert!(matches!(
        select(Strategy::Synergy, &s, &cfg),
        Err(PlanError::NoRunnablePlan { .. })
    ));
    assert!(matches!(
        select(Strategy::Oracle, &s, &cfg),
        Err(PlanError::NoRunnablePlan { .. })
    ));
}

#[test]
fn oracle_budget_is_enforced_before_search() {
    let models: Vec<_> = fixtures::all_models()
        .unwrap()
        .into_iter()
        .filter(|m| ["KWS", "SimpleNet", "UNet"].contains(&m.name.as_str()))
        .collect();
    let pipes = ["KWS", "SimpleNet", "UNet"]
        .iter()
        .map(|m| pipeline(m, m))
        .collect();
    let s = scenario(fixtures::device_set("trio").unwrap(), models, pipes);
    match select(Strategy::Oracle, &s, &unconstrained()) {
        Err(PlanError::SearchBudgetExceeded { product, budget }) => {
            assert_eq!(product, BigUint::from(90_190_202_571u64));
            assert_eq!(budget, 100_000_000);
        }
        other => panic!("unexpected {other:?}"),
    }
    let sel = select(Strategy::Synergy, &s, &unconstrained()).unwrap();
    assert_eq!(sel.stats.space_sum(), BigUint::from(16_173u32));
    assert!(sel.stats.evaluated <= 16_173 * 3);
}

#[test]
fn min_dev_uses_one_chunk() {
    let s = generic(3, &[4]);
    let sel = select(Strategy::MinDev, &s, &unconstrained()).unwrap();
    assert_eq!(sel.plan.plans[0].chunks().len(), 1);
}

#[test]
fn max_dev_spreads_over_every_device() {
    let s = generic(4, &[5, 6]);
    let sel = select(Strategy::MaxDev, &s, &unconstrained()).unwrap();
    for plan in &sel.plan.plans {
        assert_eq!(plan.chunks().len(), 4);
    }
}

#[test]
fn independent_model_reports_out_of_resource() {
    let s = fixtures::load_fixture("workload1")
        .unwrap()
        .scenario()
        .unwrap();
    match select(Strategy::IndModel, &s, &PlannerConfig::default()) {
        Err(PlanError::OutOfResource(sel)) => assert!(!sel.runnable.runnable),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn strategy_names_round_trip() {
    for s in Strategy::ALL {
        assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
    }
    assert!("greedy".parse::<Strategy>().is_err());
    assert_eq!(Strategy::BASELINES.len(), 7);
}

#[test]
fn selection_is_deterministic() {
    let s = fixtures::load_fixture("workload2")
        .unwrap()
        .scenario()
        .unwrap();
    for strategy in [Strategy::Synergy, Strategy::JointModel, Strategy::PriMaxDev] {
        let a = select(strategy, &s, &PlannerConfig::default()).unwrap();
        let b = select(strategy, &s, &PlannerConfig::default()).unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.stats, b.stats);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_never_loses_to_any_strategy(devices in 1usize..4, a in 1usize..4, b in 1usize..4, w in 100u64..400) {
        let devs = (0..devices).map(|i| device_with(&format!("d{i}"), w, 64, 8)).collect();
        let s = scenario(devs, vec![fc_model("m0", a), fc_model("m1", b)], vec![pipeline("p0", "m0"), pipeline("p1", "m1")]);
        let cfg = unconstrained();
        let oracle = select(Strategy::Oracle, &s, &cfg);
        for strategy in Strategy::ALL {
            match (select(strategy, &s, &cfg), &oracle) {
                (Ok(sel), Ok(best)) => {
                    prop_assert!(sel.runnable.runnable);
                    prop_assert!(is_runnable(&sel.plan, &s.devices).runnable);
                    prop_assert!(objective_value(&best.estimate, cfg.objective) <= objective_value(&sel.estimate, cfg.objective));
                }
                (Ok(sel), Err(e)) => prop_assert!(false, "{strategy} found {:?} but oracle failed: {e}", sel.indices),
                (Err(_), _) => {}
            }
        }
    }

    #[test]
    fn score_order_is_scale_free(n1 in 1u128..1_000_000, d1 in 1u128..1_000_000, n2 in 1u128..1_000_000, d2 in 1u128..1_000_000, k in 1u128..1_000) {
        let a = ObjectiveScore::new(n1, d1);
        let b = ObjectiveScore::new(n2, d2);
        prop_assert_eq!(a.cmp(&b), ObjectiveScore::new(n1 * k, d1 * k).cmp(&b));
        prop_assert_eq!(a == ObjectiveScore::new(n1 * k, d1 * k), true);
        if a < b {
            prop_assert!(a.value() <= b.value());
        }
    }
}
