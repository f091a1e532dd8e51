//! Egocentric observation encoding: a packed byte window around the agent
//! and its expansion to the 6-channel tensor the networks consume.
//!
//! Packed cell byte: bits 0..2 hold the flora channel triple, bits 3..4 the
//! dryness level (0..=2), bit 5 the wall flag. Floor is 0.

use num_traits::Float;

use crate::envs::grid::{Cell, GridWorld};
use crate::EnvObservation;

pub const CHANNELS: usize = 6;

const WALL_BIT: u8 = 1 << 5;

pub fn pack_cell(cell: Cell) -> u8 {
    match cell {
        Cell::Floor => 0,
        Cell::Wall => WALL_BIT,
        Cell::Flora { kind, dryness } => {
            let t = kind.channel_triple();
            t[0] | (t[1] << 1) | (t[2] << 2) | (dryness.min(2) << 3)
        }
    }
}

/// The agent-centered window; anything outside the grid renders as wall.
pub fn encode_observation(world: &GridWorld, window: usize) -> EnvObservation {
    debug_assert!(window % 2 == 1, "window must be odd");
    let half = (window / 2) as isize;
    let (ar, ac) = world.agent();
    let mut cells = vec![0u8; window * window].into_boxed_slice();
    for wy in 0..window {
        for wx in 0..window {
            let gr = ar as isize + wy as isize - half;
            let gc = ac as isize + wx as isize - half;
            let inside = gr >= 0
                && gc >= 0
                && (gr as usize) < world.height()
                && (gc as usize) < world.width();
            cells[wy * window + wx] = if inside {
                pack_cell(world.cell(gr as usize, gc as usize))
            } else {
                WALL_BIT
            };
        }
    }
    EnvObservation { window: window as u8, cells }
}

/// Tensor length for a window: 6 channels of window x window.
pub fn tensor_len(window: usize) -> usize {
    CHANNELS * window * window
}

/// Expands a packed observation into the channel-major tensor
/// {agent, type bit 0, type bit 1, type bit 2, dryness, walls}; dryness
/// levels {0, 1, 2} scale to {0, 0.5, 1}.
pub fn fill_tensor<T: Float>(obs: &EnvObservation, out: &mut [T]) {
    let w = obs.window as usize;
    let plane = w * w;
    debug_assert_eq!(out.len(), CHANNELS * plane);
    let half_level = T::from(0.5).unwrap();
    for x in out.iter_mut() {
        *x = T::zero();
    }
    let center = (w / 2) * w + (w / 2);
    out[center] = T::one();
    for (p, &b) in obs.cells.iter().enumerate() {
        if b & 1 != 0 {
            out[plane + p] = T::one();
        }
        if b & 2 != 0 {
            out[2 * plane + p] = T::one();
        }
        if b & 4 != 0 {
            out[3 * plane + p] = T::one();
        }
        let dryness = (b >> 3) & 0b11;
        if dryness != 0 {
            out[4 * plane + p] = T::from(dryness).unwrap() * half_level;
        }
        if b & WALL_BIT != 0 {
            out[5 * plane + p] = T::one();
        }
    }
}

pub fn to_tensor<T: Float>(obs: &EnvObservation) -> Vec<T> {
    let mut out = vec![T::zero(); tensor_len(obs.window as usize)];
    fill_tensor(obs, &mut out);
    out
}
