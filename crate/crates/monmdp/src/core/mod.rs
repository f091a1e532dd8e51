//! The monitored-MDP formalism, independent of any concrete environment.

pub mod episode;
pub mod types;
