//! Seeded random streams.
//!
//! Every random quantity is drawn from ChaCha8 keyed by a 64-bit seed. Work that
//! can run in parallel (matrix rows, SDE paths, rounding trials) gets its own
//! stream id, so results do not depend on how the work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id families, kept disjoint so that independent uses never collide.
pub mod domain {
    pub const INSTANCE_ROW: u64 = 0;
    pub const PHA_STEP: u64 = 1 << 40;
    pub const ROUNDING: u64 = 2 << 40;
    pub const SDE_PATH: u64 = 3 << 40;
    pub const BASELINE: u64 = 4 << 40;
    pub const PROBE: u64 = 5 << 40;
    pub const MISC: u64 = 6 << 40;
}

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub type Rng = ChaCha8Rng;
