use std::cmp::Ordering;

use crate::domain::ObjectiveKind;

use super::PlanEstimate;

/// A score where smaller is better, compared exactly as a fraction.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveScore {
    num: u128,
    den: u128,
}

impl ObjectiveScore {
    pub fn new(num: u128, den: u128) -> Self {
        ObjectiveScore {
            num,
            den: den.max(1),
        }
    }

    pub fn from_parts(
        objective: ObjectiveKind,
        latency_ns: u64,
        energy_nj: u64,
        pipelines: usize,
    ) -> Self {
        match objective {
            // Max N/lat is min lat/N.
            ObjectiveKind::ThroughputMax => {
                ObjectiveScore::new(latency_ns as u128, pipelines as u128)
            }
            ObjectiveKind::LatencyMin => ObjectiveScore::new(latency_ns as u128, 1),
            // Average power: J per cycle over cycle time.
            ObjectiveKind::PowerMin => ObjectiveScore::new(energy_nj as u128, latency_ns as u128),
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for ObjectiveScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ObjectiveScore {}

impl PartialOrd for ObjectiveScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ObjectiveScore {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num.checked_mul(other.den);
        let rhs = other.num.checked_mul(self.den);
        match (lhs, rhs) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => self.value().total_cmp(&other.value()),
        }
    }
}

pub fn objective_value(estimate: &PlanEstimate, objective: ObjectiveKind) -> ObjectiveScore {
    ObjectiveScore::from_parts(
        objective,
        estimate.latency.0,
        estimate.energy_nj,
        estimate.pipelines,
    )
}
