//! Counter-keyed random streams.
//!
//! Every random decision is drawn from a stream identified by
//! `(master_seed, iteration, individual, purpose)`. The four words form the
//! 256-bit ChaCha key directly, so a stream depends only on its identifier and
//! never on how many draws other streams made or in which order they ran.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What a stream is used for. Part of the stream key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Crossover = 2,
    Mutation = 3,
    Noise = 4,
    Instance = 5,
    TrialSeed = 6,
    BackendSeed = 7,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub iteration: u64,
    pub individual: u64,
    pub purpose: Purpose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub id: StreamId,
}

impl RngStream {
    pub fn new(master_seed: u64, iteration: u64, individual: u64, purpose: Purpose) -> Self {
        RngStream {
            master_seed,
            id: StreamId {
                iteration,
                individual,
                purpose,
            },
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.id.iteration.to_le_bytes());
        key[16..24].copy_from_slice(&self.id.individual.to_le_bytes());
        key[24..32].copy_from_slice(&(self.id.purpose as u64).to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// First 64-bit word of the stream, for deriving child seeds.
    pub fn derive_seed(&self) -> u64 {
        use rand::RngCore;
        self.rng().next_u64()
    }
}
