//! ASCII rendering for debugging.

use crate::envs::flora::FloraKind;
use crate::envs::grid::{Cell, GridWorld};

/// One character per cell: `A` agent, `P/p/w` plant by dryness (fully dry,
/// partially dry, wet), `C` cactus, `0`..`4` novel flora, `.` floor, `#`
/// wall. The grid is framed by walls.
pub fn render_ascii(world: &GridWorld) -> String {
    let mut out = String::new();
    let frame: String = std::iter::repeat('#').take(world.width() + 2).collect();
    out.push_str(&frame);
    out.push('\n');
    for r in 0..world.height() {
        out.push('#');
        for c in 0..world.width() {
            let ch = if world.agent() == (r, c) {
                'A'
            } else {
                match world.cell(r, c) {
                    Cell::Floor => '.',
                    Cell::Wall => '#',
                    Cell::Flora { kind: FloraKind::Plant, dryness } => match dryness {
                        0 => 'w',
                        1 => 'p',
                        _ => 'P',
                    },
                    Cell::Flora { kind: FloraKind::Cactus, .. } => 'C',
                    Cell::Flora { kind: FloraKind::Novel(i), .. } => (b'0' + (i % 5)) as char,
                }
            };
            out.push(ch);
        }
        out.push_str("#\n");
    }
    out.push_str(&frame);
    out.push('\n');
    out
}
