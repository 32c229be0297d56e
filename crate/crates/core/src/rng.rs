//! Hierarchical seed derivation.
//!
//! Every random quantity in a run is drawn from a stream identified by a path
//! of tags below the master seed (e.g. `master / layout 3 / draw 17 / fading`).
//! A stream depends only on its path, so any trial can be regenerated in
//! isolation and results do not depend on the order in which work items run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used for every stream.
pub type StreamRng = ChaCha8Rng;

/// Node in the seed hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    key: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl SeedTree {
    pub fn new(master_seed: u64) -> Self {
        SeedTree {
            key: splitmix64(master_seed),
        }
    }

    /// Child stream keyed by an integer counter.
    pub fn index(&self, i: u64) -> Self {
        SeedTree {
            key: splitmix64(self.key.rotate_left(17) ^ splitmix64(i)),
        }
    }

    /// Child stream keyed by a name.
    pub fn named(&self, name: &str) -> Self {
        self.index(fnv1a(name))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::seed_from_u64(self.key)
    }
}
