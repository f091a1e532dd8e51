//! Experiment orchestration: configs, multi-seed runs, statistics, export.

pub mod caution;
pub mod config;
pub mod experiment;
pub mod export;
pub mod metrics;
pub mod stats;
