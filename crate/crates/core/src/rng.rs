//! Seed-derived random streams. Every unit of simulated work (a frame, a
//! slot, an outer-sum term) owns a ChaCha stream selected by its index, so
//! results depend only on the master seed and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed echoed by the CLI when none is given.
pub const DEFAULT_SEED: u64 = 0x00C0_FFEE;

/// Purpose tags keep streams of different simulators apart under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    ErasureFrame = 1,
    FadingSlot = 2,
    Allocation = 3,
}

/// Independent stream for work item `index` of the given purpose.
pub fn substream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (purpose as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}
