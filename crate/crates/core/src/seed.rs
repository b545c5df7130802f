//! Deterministic seeding primitives shared by the composer and the dataset
//! builder.
//!
//! Everything here is fixed integer arithmetic, so derived seeds and draws
//! are stable across platforms and builds.

/// Weyl sequence increment used by the SplitMix64 generator.
pub(crate) const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; bijective on u64.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Paraphrase index in 0..5 for the construct at `ordinal` in a decomposition.
///
/// Counter-based, so each ordinal draws independently of the others.
pub(crate) fn paraphrase_index(seed: u64, ordinal: usize) -> usize {
    let counter = seed.wrapping_add(GAMMA.wrapping_mul(ordinal as u64 + 1));
    (mix64(counter) % 5) as usize
}

/// Minimal SplitMix64 stream generator.
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in 0..n without modulo bias.
    pub(crate) fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "bound must be positive");
        let threshold = n.wrapping_neg() % n;
        loop {
            let v = self.next_u64();
            if v >= threshold {
                return v % n;
            }
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Seed for one frame's paraphrase draws, derived from the run seed and the
/// frame identity. Adding or removing other frames never changes it.
pub(crate) fn frame_seed(run_seed: u64, subject: &str, task: &str, frame: u64) -> u64 {
    let mut h = FNV_OFFSET;
    h = fnv1a(h, &run_seed.to_le_bytes());
    h = fnv1a(h, &[0xFF]);
    h = fnv1a(h, subject.as_bytes());
    h = fnv1a(h, &[0xFF]);
    h = fnv1a(h, task.as_bytes());
    h = fnv1a(h, &[0xFF]);
    h = fnv1a(h, &frame.to_le_bytes());
    mix64(h)
}

/// Seed for one subject's reference face draw.
pub(crate) fn subject_seed(run_seed: u64, subject: &str) -> u64 {
    let mut h = FNV_OFFSET;
    h = fnv1a(h, &run_seed.to_le_bytes());
    h = fnv1a(h, &[0xFE]);
    h = fnv1a(h, subject.as_bytes());
    mix64(h)
}
