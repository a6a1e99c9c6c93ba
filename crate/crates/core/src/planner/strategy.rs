use std::cmp::Reverse;

use rayon::prelude::*;

use crate::domain::{HolisticPlan, ObjectiveKind};
use crate::enumerate::{is_runnable, PlanSpace};
use crate::scenario::Scenario;

use super::candidate::{evaluate, Candidate, UsageTable};
use super::{
    data_intensity, estimate, ObjectiveScore, PlanError, PlannerConfig, Prioritization,
    SearchStats, Selection, Strategy,
};

/// Pipeline indices in the order their plans are fixed. Ties keep registration order.
pub fn prioritize(scenario: &Scenario, prioritization: Prioritization) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scenario.pipelines.len()).collect();
    let model = |i: usize| scenario.model_of(&scenario.pipelines[i]);
    let intensity = |i: usize| data_intensity(&scenario.pipelines[i], scenario);
    match prioritization {
        Prioritization::DataIntensityDesc => order.sort_by_key(|&i| Reverse(intensity(i))),
        Prioritization::DataIntensityAsc => order.sort_by_key(|&i| intensity(i)),
        Prioritization::ModelSizeDes => order.sort_by_key(|&i| Reverse(model(i).weight_bytes())),
        Prioritization::ModelSizeAsc => order.sort_by_key(|&i| model(i).weight_bytes()),
        Prioritization::NumLayersDes => order.sort_by_key(|&i| Reverse(model(i).num_layers())),
        Prioritization::NumLayersAsc => order.sort_by_key(|&i| model(i).num_layers()),
        Prioritization::Sequential => {}
    }
    order
}

pub(crate) fn space_for<'a>(
    scenario: &'a Scenario,
    pipeline: usize,
    config: &PlannerConfig,
) -> Result<PlanSpace<'a>, PlanError> {
    let spec = &scenario.pipelines[pipeline];
    Ok(PlanSpace::new(
        spec,
        scenario.model_of(spec),
        &scenario.devices,
        config.enumeration,
    )?)
}

/// Scores every plan of one pipeline. In unconstrained mode plans whose
/// endpoints lack the required sensor or interface are dropped; otherwise a
/// costing failure is a configuration error.
pub(crate) fn candidates(
    scenario: &Scenario,
    pipeline: usize,
    space: &PlanSpace<'_>,
    config: &PlannerConfig,
) -> Result<Vec<Candidate>, PlanError> {
    let layouts: Vec<_> = space.layouts().collect();
    let scored: Vec<_> = layouts
        .into_par_iter()
        .enumerate()
        .map(|(i, layout)| evaluate(scenario, pipeline, space, i, layout))
        .collect();
    let mut out = Vec::with_capacity(scored.len());
    for c in scored {
        match c {
            Ok(c) => out.push(c),
            Err(_) if !config.enumeration.respect_requirements => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct ChoiceKey {
    tiers: Vec<u64>,
    score: ObjectiveScore,
    index: usize,
}

/// Per-pipeline choice rule; smaller keys win.
fn choice_key(
    rule: Strategy,
    cand: &Candidate,
    objective: ObjectiveKind,
    fixed: (u64, u64, usize),
    capacities: &[u64],
) -> ChoiceKey {
    let (fixed_lat, fixed_energy, fixed_n) = fixed;
    let combined = ObjectiveScore::from_parts(
        objective,
        fixed_lat + cand.latency,
        fixed_energy + cand.energy_nj,
        fixed_n + 1,
    );
    let chunks = cand.layout.num_chunks() as u64;
    let prefer_capacity = || {
        cand.layout
            .chunks
            .iter()
            .map(|&(d, _)| u64::MAX - capacities[d])
    };
    let (tiers, score) = match rule {
        Strategy::MinDev => (vec![chunks], combined),
        Strategy::MaxDev => (vec![u64::MAX - chunks], combined),
        Strategy::PriMinDev => {
            let mut t = vec![chunks, cand.transfer_bytes];
            t.extend(prefer_capacity());
            (t, combined)
        }
        Strategy::PriMaxDev => {
            let mut t = vec![u64::MAX - chunks, cand.transfer_bytes];
            t.extend(prefer_capacity());
            (t, combined)
        }
        Strategy::IndModel | Strategy::JointModel => (
            Vec::new(),
            ObjectiveScore::from_parts(objective, cand.model_latency, cand.model_energy_nj, 1),
        ),
        Strategy::IndBest => (
            Vec::new(),
            ObjectiveScore::from_parts(objective, cand.latency, cand.energy_nj, 1),
        ),
        Strategy::Synergy | Strategy::Oracle => (Vec::new(), combined),
    };
    ChoiceKey {
        tiers,
        score,
        index: cand.index,
    }
}

fn best_candidate(
    rule: Strategy,
    cands: &[Candidate],
    usage: Option<&UsageTable>,
    objective: ObjectiveKind,
    fixed: (u64, u64, usize),
    capacities: &[u64],
) -> Option<usize> {
    cands
        .par_iter()
        .enumerate()
        .filter(|(_, c)| usage.is_none_or(|u| u.fits(&c.usage)))
        .map(|(pos, c)| (choice_key(rule, c, objective, fixed, capacities), pos))
        .min()
        .map(|(_, pos)| pos)
}

fn capacities(scenario: &Scenario) -> Vec<u64> {
    scenario.devices.iter().map(|d| d.weight_capacity).collect()
}

/// Fixes one pipeline at a time, keeping only combinations that still fit.
fn accumulate(
    rule: Strategy,
    scenario: &Scenario,
    config: &PlannerConfig,
) -> Result<Selection, PlanError> {
    if scenario.pipelines.is_empty() {
        return Err(PlanError::NoPipelines);
    }
    let caps = capacities(scenario);
    let order = prioritize(scenario, config.prioritization);
    let mut usage = UsageTable::new(scenario);
    let mut chosen: Vec<Option<Candidate>> = vec![None; scenario.pipelines.len()];
    let mut stats = SearchStats {
        order: order.clone(),
        ..SearchStats::default()
    };
    let mut fixed = (0u64, 0u64, 0usize);
    let mut sizes = vec![Default::default(); scenario.pipelines.len()];
    for &p in &order {
        let space = space_for(scenario, p, config)?;
        sizes[p] = space.count();
        let cands = candidates(scenario, p, &space, config)?;
        stats.evaluated += cands.len() as u64;
        let pos = best_candidate(rule, &cands, Some(&usage), config.objective, fixed, &caps)
            .ok_or_else(|| PlanError::NoRunnablePlan {
                pipeline: scenario.pipelines[p].id.to_string(),
            })?;
        let c = cands
            .into_iter()
            .nth(pos)
            .expect("position from enumeration");
        usage.add(&c.usage);
        fixed = (fixed.0 + c.latency, fixed.1 + c.energy_nj, fixed.2 + 1);
        chosen[p] = Some(c);
    }
    stats.space_sizes = sizes;
    let selection = finish(
        scenario,
        chosen.into_iter().map(|c| c.expect("all fixed")).collect(),
        stats,
    )?;
    assert!(
        selection.runnable.runnable,
        "accumulated plan must satisfy capacities"
    );
    Ok(selection)
}

/// Chooses each pipeline's plan alone, then unions them without a joint check.
fn isolate(
    rule: Strategy,
    scenario: &Scenario,
    config: &PlannerConfig,
) -> Result<Selection, PlanError> {
    if scenario.pipelines.is_empty() {
        return Err(PlanError::NoPipelines);
    }
    let caps = capacities(scenario);
    let empty = UsageTable::new(scenario);
    let mut chosen = Vec::with_capacity(scenario.pipelines.len());
    let mut stats = SearchStats {
        order: (0..scenario.pipelines.len()).collect(),
        ..SearchStats::default()
    };
    for p in 0..scenario.pipelines.len() {
        let space = space_for(scenario, p, config)?;
        stats.space_sizes.push(space.count());
        let cands = candidates(scenario, p, &space, config)?;
        stats.evaluated += cands.len() as u64;
        let pos = best_candidate(
            rule,
            &cands,
            Some(&empty),
            config.objective,
            (0, 0, 0),
            &caps,
        )
        .ok_or_else(|| PlanError::NoRunnablePlan {
            pipeline: scenario.pipelines[p].id.to_string(),
        })?;
        chosen.push(
            cands
                .into_iter()
                .nth(pos)
                .expect("position from enumeration"),
        );
    }
    let selection = finish(scenario, chosen, stats)?;
    if selection.runnable.runnable {
        Ok(selection)
    } else {
        Err(PlanError::OutOfResource(Box::new(selection)))
    }
}

pub(crate) fn finish(
    scenario: &Scenario,
    chosen: Vec<Candidate>,
    stats: SearchStats,
) -> Result<Selection, PlanError> {
    let plans = chosen
        .iter()
        .enumerate()
        .map(|(p, c)| {
            let spec = &scenario.pipelines[p];
            c.layout
                .to_plan(spec, scenario.model_of(spec), &scenario.devices)
        })
        .collect();
    let plan = HolisticPlan::new(plans);
    let estimate = estimate(&plan, scenario)?;
    debug_assert_eq!(
        estimate.latency.0,
        chosen.iter().map(|c| c.latency).sum::<u64>()
    );
    let runnable = is_runnable(&plan, &scenario.devices);
    Ok(Selection {
        plan,
        estimate,
        runnable,
        indices: chosen.iter().map(|c| c.index).collect(),
        stats,
    })
}

/// Progressive selection in prioritization order.
pub fn select_progressive(
    scenario: &Scenario,
    config: &PlannerConfig,
) -> Result<Selection, PlanError> {
    accumulate(Strategy::Synergy, scenario, config)
}

pub fn select_baseline(
    strategy: Strategy,
    scenario: &Scenario,
    config: &PlannerConfig,
) -> Result<Selection, PlanError> {
    match strategy {
        Strategy::IndModel | Strategy::IndBest => isolate(strategy, scenario, config),
        Strategy::Oracle => super::select_oracle(scenario, config),
        other => accumulate(other, scenario, config),
    }
}
