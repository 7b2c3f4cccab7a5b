//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream identified by
//! `(master_seed, domain, index)`. The domain names the purpose (city
//! resolution, replications, ...) and the index is typically a replication
//! number or incident id. ChaCha's native 64-bit stream parameter carries
//! the index, so streams are independent and can be created in any order,
//! on any thread, with identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Creates the streams of one domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    pub fn new(master_seed: u64, domain: &str) -> Self {
        let mut state = master_seed ^ fnv1a(domain.as_bytes()).rotate_left(17);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        StreamFactory { key }
    }

    pub fn stream(&self, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

/// Derives a child seed, e.g. one per experiment of a run.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    let mut state = master_seed ^ fnv1a(label.as_bytes());
    splitmix64(&mut state)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
