//! The plant-watering grid world and its monitor variants.

pub mod config;
pub mod flora;
pub mod grid;
pub mod monitor;
pub mod observe;
pub mod render;
pub mod world;
