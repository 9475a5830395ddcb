//! Software Ising machine driven by single-pixel measurements.
//!
//! Combinatorial problems are encoded as weight images, candidate spin
//! states as binary illumination patterns, and an evolutionary loop selects
//! on the simulated single-pixel intensity.

pub mod bench;
pub mod cli;

pub mod error;
pub mod evolve;
pub mod model;
pub mod problems;
pub mod rng;
pub mod spi;

pub use error::{Error, Result};
pub use evolve::{run, run_from, GaConfig, IterationStats, RunInput, RunResult};
pub use model::{hamiltonian, SpinVector, WeightImage};
pub use problems::{brute_force, Instance, MaxCutInstance, NumberPartitionInstance};
pub use rng::{Purpose, RngStream};
pub use spi::{ideal_intensity, pattern_from_spins, MeasurementBackend, NoiseModel, Pattern};
