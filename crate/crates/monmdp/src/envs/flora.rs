//! Flora kinds and their observation encodings.

use serde::{Deserialize, Serialize};

/// The five 3-bit codes novel plants draw from. None collides with floor
/// ([0,0,0]), standard plants ([1,1,0]), or cacti ([0,1,1]).
pub const NOVEL_TRIPLES: [[u8; 3]; 5] = [[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 0, 1], [1, 1, 1]];

pub const PLANT_TRIPLE: [u8; 3] = [1, 1, 0];
pub const CACTUS_TRIPLE: [u8; 3] = [0, 1, 1];

/// What grows in a cell. Novel carries an index into [`NOVEL_TRIPLES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FloraKind {
    Plant,
    Cactus,
    Novel(u8),
}

impl FloraKind {
    /// The 3-bit channel code rendered into the observation tensor.
    pub fn channel_triple(self) -> [u8; 3] {
        match self {
            FloraKind::Plant => PLANT_TRIPLE,
            FloraKind::Cactus => CACTUS_TRIPLE,
            FloraKind::Novel(i) => NOVEL_TRIPLES[i as usize % NOVEL_TRIPLES.len()],
        }
    }

    /// Only standard plants take part in drying and change state when
    /// watered; cacti and novel flora are inert.
    pub fn dries(self) -> bool {
        matches!(self, FloraKind::Plant)
    }
}
