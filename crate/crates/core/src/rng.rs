//! Reproducible random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream addressed by
//! `(seed, item, lane)`: `item` is the snapshot or sample index and `lane`
//! separates independent consumers inside one item (the serving link, each
//! annulus of the base-station field, ...). Streams never overlap, so the
//! result of item `k` does not depend on which worker ran it or on how many
//! other items were drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const LANE_BITS: u32 = 16;

/// Largest item index that can be addressed.
pub const MAX_ITEM: u64 = (1 << (64 - LANE_BITS)) - 1;

/// Lanes used by the simulator. Annulus lanes start at `ANNULUS_BASE`.
pub mod lane {
    pub const SERVING: u16 = 1;
    pub const HARVEST: u16 = 2;
    pub const INTERFERENCE_ORACLE: u16 = 3;
    pub const ANNULUS_BASE: u16 = 64;
}

pub fn stream(seed: u64, item: u64, lane: u16) -> SimRng {
    debug_assert!(item <= MAX_ITEM);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((item << LANE_BITS) | u64::from(lane));
    rng
}
