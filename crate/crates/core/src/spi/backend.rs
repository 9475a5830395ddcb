use std::collections::VecDeque;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Pattern;
use crate::error::{Error, Result};
use crate::model::WeightImage;
use crate::rng::{Purpose, RngStream};

/// Source of single-pixel readings.
///
/// `iteration` keys any randomness so a reading depends on
/// `(iteration, position in batch)` and not on call order.
pub trait MeasurementBackend {
    /// One intensity per pattern, in submission order.
    fn measure_batch(&mut self, patterns: &[Pattern], iteration: u64) -> Result<Vec<f64>>;
}

impl<B: MeasurementBackend + ?Sized> MeasurementBackend for &mut B {
    fn measure_batch(&mut self, patterns: &[Pattern], iteration: u64) -> Result<Vec<f64>> {
        (**self).measure_batch(patterns, iteration)
    }
}

impl<B: MeasurementBackend + ?Sized> MeasurementBackend for Box<B> {
    fn measure_batch(&mut self, patterns: &[Pattern], iteration: u64) -> Result<Vec<f64>> {
        (**self).measure_batch(patterns, iteration)
    }
}

#[derive(Clone, Debug)]
pub struct IdealBackend {
    weights: WeightImage,
}

impl IdealBackend {
    pub fn new(weights: WeightImage) -> Self {
        IdealBackend { weights }
    }

    pub fn weights(&self) -> &WeightImage {
        &self.weights
    }
}

impl MeasurementBackend for IdealBackend {
    fn measure_batch(&mut self, patterns: &[Pattern], _iteration: u64) -> Result<Vec<f64>> {
        patterns
            .par_iter()
            .map(|p| p.inner_product(&self.weights))
            .collect()
    }
}

/// Detector degradation: additive Gaussian noise scaled to the image's full
/// scale, a dark offset, and uniform quantization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub gaussian_sigma: f64,
    /// `0` disables quantization.
    pub quantization_bits: u32,
    pub dark_offset: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            gaussian_sigma: 0.01,
            quantization_bits: 12,
            dark_offset: 0.0,
        }
    }
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel {
        gaussian_sigma: 0.0,
        quantization_bits: 0,
        dark_offset: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma.is_finite() && self.gaussian_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be >= 0, got {}",
                self.gaussian_sigma
            )));
        }
        if self.quantization_bits > 16 {
            return Err(Error::InvalidConfig(format!(
                "quantization bits must be in 0..=16, got {}",
                self.quantization_bits
            )));
        }
        if !(self.dark_offset.is_finite() && self.dark_offset >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dark offset must be >= 0, got {}",
                self.dark_offset
            )));
        }
        Ok(())
    }

    /// Applies the model to one ideal reading given a standard normal draw.
    pub fn apply(&self, ideal: f64, full_scale: f64, z: f64) -> f64 {
        let noise_amp = self.gaussian_sigma * full_scale;
        let mut v = (ideal + self.dark_offset + noise_amp * z).max(0.0);
        if self.quantization_bits > 0 {
            let top = full_scale + self.dark_offset + 4.0 * noise_amp;
            let levels = (1u64 << self.quantization_bits) - 1;
            if top > 0.0 {
                let step = top / levels as f64;
                v = (v.min(top) / step).round() * step;
            }
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct NoisyBackend {
    weights: WeightImage,
    model: NoiseModel,
    seed: u64,
    full_scale: f64,
}

impl NoisyBackend {
    pub fn new(weights: WeightImage, model: NoiseModel, seed: u64) -> Result<Self> {
        model.validate()?;
        let full_scale = weights.full_scale();
        Ok(NoisyBackend {
            weights,
            model,
            seed,
            full_scale,
        })
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    /// Reading for the pattern at `individual` within batch `iteration`.
    pub fn measure_one(&self, pattern: &Pattern, iteration: u64, individual: u64) -> Result<f64> {
        let ideal = pattern.inner_product(&self.weights)?;
        let mut rng = RngStream::new(self.seed, iteration, individual, Purpose::Noise).rng();
        let z: f64 = StandardNormal.sample(&mut rng);
        Ok(self.model.apply(ideal, self.full_scale, z))
    }
}

impl MeasurementBackend for NoisyBackend {
    fn measure_batch(&mut self, patterns: &[Pattern], iteration: u64) -> Result<Vec<f64>> {
        patterns
            .par_iter()
            .enumerate()
            .map(|(k, p)| self.measure_one(p, iteration, k as u64))
            .collect()
    }
}

/// Feeds pre-recorded readings back in order.
#[derive(Clone, Debug, Default)]
pub struct ReplayBackend {
    values: VecDeque<f64>,
}

impl ReplayBackend {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        ReplayBackend {
            values: values.into_iter().collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.values.len()
    }

    /// One decimal value per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = VecDeque::new();
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let v: f64 = body.parse().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad intensity {body:?}: {e}"),
            })?;
            values.push_back(v);
        }
        Ok(ReplayBackend { values })
    }
}

impl MeasurementBackend for ReplayBackend {
    fn measure_batch(&mut self, patterns: &[Pattern], _iteration: u64) -> Result<Vec<f64>> {
        if self.values.len() < patterns.len() {
            return Err(Error::ReplayExhausted {
                requested: patterns.len(),
                remaining: self.values.len(),
            });
        }
        Ok(self.values.drain(..patterns.len()).collect())
    }
}

pub fn replay_load(path: impl AsRef<Path>) -> Result<ReplayBackend> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ReplayBackend::parse(&text)
}
