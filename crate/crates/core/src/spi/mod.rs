//! Software stand-in for the optical path.
//!
//! A spin vector becomes a binary illumination pattern that is bright
//! exactly where two spins disagree, `bits[i][j] = (1 - σ_i σ_j) / 2`. The
//! single-pixel detector reads the inner product of that pattern with the
//! weight image:
//!
//! ```text
//! I(s) = Σ_ij bits_ij w_ij = (H(s) + Σ_{i≠j} w_ij) / 2
//! ```
//!
//! so a brighter reading means a higher-energy, i.e. better, solution for
//! both number partition and max cut.

mod backend;
pub mod pnm;

pub use backend::{
    replay_load, IdealBackend, MeasurementBackend, NoiseModel, NoisyBackend, ReplayBackend,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{check_dims, SpinVector, WeightImage};

/// N×N binary illumination pattern, row-major, `0` dark and `1` bright.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    n: usize,
    bits: Vec<u8>,
}

impl Pattern {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[i * self.n + j]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bright_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Pixelwise inner product with a weight image: what the detector sees.
    pub fn inner_product(&self, w: &WeightImage) -> Result<f64> {
        check_dims(w.n(), self.n)?;
        Ok(self
            .bits
            .iter()
            .zip(w.as_slice())
            .filter(|(&b, _)| b == 1)
            .map(|(_, &x)| x)
            .sum())
    }
}

pub fn pattern_from_spins(s: &SpinVector) -> Pattern {
    let spins = s.as_slice();
    let n = spins.len();
    let mut bits = Vec::with_capacity(n * n);
    for &si in spins {
        bits.extend(spins.iter().map(|&sj| u8::from(si != sj)));
    }
    Pattern { n, bits }
}

/// Noise-free single-pixel reading for spin state `s`.
pub fn ideal_intensity(s: &SpinVector, w: &WeightImage) -> Result<f64> {
    check_dims(w.n(), s.len())?;
    pattern_from_spins(s).inner_product(w)
}
