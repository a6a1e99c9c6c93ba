use num_bigint::BigUint;
use rayon::prelude::*;

use crate::domain::ObjectiveKind;
use crate::scenario::Scenario;

use super::candidate::{Candidate, UsageTable};
use super::strategy::{candidates, finish, space_for};
use super::{ObjectiveScore, PlanError, PlannerConfig, SearchStats, Selection};

/// Size of the full cross-product the oracle would search.
pub fn oracle_space_size(
    scenario: &Scenario,
    config: &PlannerConfig,
) -> Result<BigUint, PlanError> {
    let mut product = BigUint::from(1u8);
    for p in 0..scenario.pipelines.len() {
        product *= space_for(scenario, p, config)?.count();
    }
    Ok(product)
}

type Best = Option<(ObjectiveScore, Vec<usize>)>;

struct Search<'a> {
    levels: &'a [Vec<Candidate>],
    objective: ObjectiveKind,
    /// Smallest latency still to be added below each level, for pruning.
    min_rest: Vec<u64>,
    leaves: u64,
}

impl Search<'_> {
    fn bound_prunes(&self, level: usize, latency: u64, best: &Best) -> bool {
        if self.objective == ObjectiveKind::PowerMin {
            return false;
        }
        let Some((score, _)) = best else { return false };
        let bound = ObjectiveScore::from_parts(
            self.objective,
            latency + self.min_rest[level],
            0,
            self.levels.len(),
        );
        bound > *score
    }

    fn dfs(
        &mut self,
        level: usize,
        usage: &mut UsageTable,
        latency: u64,
        energy: u64,
        picked: &mut Vec<usize>,
        best: &mut Best,
    ) {
        if level == self.levels.len() {
            self.leaves += 1;
            let score =
                ObjectiveScore::from_parts(self.objective, latency, energy, self.levels.len());
            let tuple: Vec<usize> = picked
                .iter()
                .enumerate()
                .map(|(l, &pos)| self.levels[l][pos].index)
                .collect();
            let better = match best {
                None => true,
                Some((s, t)) => (score, &tuple) < (*s, t),
            };
            if better {
                *best = Some((score, tuple));
            }
            return;
        }
        if self.bound_prunes(level, latency, best) {
            return;
        }
        let levels = self.levels;
        for (pos, c) in levels[level].iter().enumerate() {
            if !usage.fits(&c.usage) {
                continue;
            }
            usage.add(&c.usage);
            picked.push(pos);
            self.dfs(
                level + 1,
                usage,
                latency + c.latency,
                energy + c.energy_nj,
                picked,
                best,
            );
            picked.pop();
            usage.remove(&c.usage);
        }
    }
}

/// Exhaustive search over the cross-product of execution plans, guarded by a budget.
pub fn select_oracle(scenario: &Scenario, config: &PlannerConfig) -> Result<Selection, PlanError> {
    let n = scenario.pipelines.len();
    if n == 0 {
        return Err(PlanError::NoPipelines);
    }
    let mut sizes = Vec::with_capacity(n);
    for p in 0..n {
        sizes.push(space_for(scenario, p, config)?.count());
    }
    let product: BigUint = sizes.iter().product();
    if product > BigUint::from(config.oracle_budget) {
        return Err(PlanError::SearchBudgetExceeded {
            product,
            budget: config.oracle_budget,
        });
    }
    let mut levels = Vec::with_capacity(n);
    for p in 0..n {
        let space = space_for(scenario, p, config)?;
        levels.push(candidates(scenario, p, &space, config)?);
    }
    let mut min_rest = vec![0u64; n + 1];
    for l in (0..n).rev() {
        let m = levels[l].iter().map(|c| c.latency).min().unwrap_or(0);
        min_rest[l] = min_rest[l + 1] + m;
    }
    let min_rest_ref = &min_rest;
    let levels_ref = &levels;
    let objective = config.objective;
    let (best, leaves) = levels[0]
        .par_iter()
        .enumerate()
        .map(|(pos, c)| {
            let mut search = Search {
                levels: levels_ref,
                objective,
                min_rest: min_rest_ref.clone(),
                leaves: 0,
            };
            let mut usage = UsageTable::new(scenario);
            let mut best: Best = None;
            if usage.fits(&c.usage) {
                usage.add(&c.usage);
                let mut picked = vec![pos];
                search.dfs(
                    1,
                    &mut usage,
                    c.latency,
                    c.energy_nj,
                    &mut picked,
                    &mut best,
                );
            }
            (best, search.leaves)
        })
        .reduce(
            || (None, 0),
            |(a, la), (b, lb)| {
                let best = match (a, b) {
                    (None, x) | (x, None) => x,
                    (Some(x), Some(y)) => Some(if (x.0, &x.1) <= (y.0, &y.1) { x } else { y }),
                };
                (best, la + lb)
            },
        );
    let Some((_, tuple)) = best else {
        return Err(PlanError::NoRunnablePlan {
            pipeline: "all".to_string(),
        });
    };
    let chosen: Vec<Candidate> = tuple
        .iter()
        .enumerate()
        .map(|(l, &idx)| {
            levels[l]
                .iter()
                .find(|c| c.index == idx)
                .expect("index from this search")
                .clone()
        })
        .collect();
    let stats = SearchStats {
        evaluated: leaves,
        space_sizes: sizes,
        order: (0..n).collect(),
    };
    finish(scenario, chosen, stats)
}
