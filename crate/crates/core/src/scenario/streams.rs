//! Seeded random streams.
//!
//! A single master seed fans out into independent ChaCha streams, one per
//! (run, purpose, index) triple. The stream id is a mix of the triple, so any
//! stream can be reconstructed without touching the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Deployment = 1,
    Shadowing = 2,
    Mobility = 3,
    /// Indexed by slot.
    Fading = 4,
    /// Indexed by subnetwork.
    Arrivals = 5,
    /// Indexed by subnetwork.
    Policy = 6,
}

/// Stream factory for one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    master: u64,
}

impl Streams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self, run: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        let id = splitmix(splitmix(splitmix(run) ^ purpose as u64) ^ index);
        rng.set_stream(id);
        rng
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
