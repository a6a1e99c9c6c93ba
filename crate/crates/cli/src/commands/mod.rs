pub mod compare;
pub mod count;
pub mod fixtures;
pub mod plan;
pub mod simulate;
