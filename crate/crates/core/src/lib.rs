//! Holistic planning and simulation of multi-pipeline inference across
//! wearable devices with tiny AI accelerators.

pub mod config;
pub mod cost;
pub mod domain;
pub mod enumerate;
pub mod fixtures;
pub mod planner;
pub mod scenario;
pub mod sim;
pub mod time;

pub use num_bigint::BigUint;
pub use scenario::Scenario;
pub use time::Nanos;
