//! Deterministic seed derivation. Every stochastic component of a run pulls
//! from its own stream derived from (seed, tag), so partial reruns reproduce
//! individual pieces exactly.

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a parent seed and a stream tag.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_mul(0xa076_1d64_78bd_642f)))
}

/// Stream tags for the per-episode generator split.
pub mod stream {
    /// Flora and agent placement.
    pub const LAYOUT: u64 = 1;
    /// The stochastic drying process.
    pub const DRYING: u64 = 2;
    /// Exploration (action selection) during the episode.
    pub const EXPLORE: u64 = 3;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_stable() {
        let s = 42;
        let a = derive(s, stream::LAYOUT);
        let b = derive(s, stream::DRYING);
        let c = derive(s, stream::EXPLORE);
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_eq!(a, derive(42, stream::LAYOUT));
    }
}
