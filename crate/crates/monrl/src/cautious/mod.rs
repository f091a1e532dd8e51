//! Reward-model ensembles and k-of-N robust policy optimization.

pub mod ensemble;
pub mod exact;
pub mod kofn;
pub mod report;
