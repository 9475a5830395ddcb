//! Evolutionary search over illumination patterns.
//!
//! Each iteration measures one pattern per individual, keeps the `J`
//! brightest individuals unchanged, and refills the remaining `K - J` slots
//! with uniform-mask crossovers of two distinct elites followed by per-spin
//! mutation, redrawing children that would duplicate an individual. Every random draw comes from a stream keyed by
//! `(iteration, slot, purpose)`, so runs are reproducible regardless of how
//! the batch is scheduled.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_dims, SpinVector, WeightImage};
use crate::problems::Instance;
use crate::rng::{Purpose, RngStream};
use crate::spi::{pattern_from_spins, MeasurementBackend, Pattern};

/// Extra draws allowed per individual when trying to avoid duplicates in the
/// initial population.
pub const INIT_RETRIES: usize = 16;

/// Extra draws allowed per child when it duplicates an individual already
/// in the next generation.
pub const CHILD_RETRIES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_k: usize,
    pub elites_j: usize,
    /// Per-spin flip probability applied to children.
    pub mutation_rate: f64,
    pub max_iterations: usize,
    /// Known optimal objective; the run stops once it is reached.
    pub target: Option<f64>,
    pub master_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig::with_population(6, 0)
    }
}

impl GaConfig {
    pub fn default_elites(k: usize) -> usize {
        (k / 3).max(1)
    }

    pub fn with_population(k: usize, master_seed: u64) -> Self {
        GaConfig {
            population_k: k,
            elites_j: Self::default_elites(k),
            mutation_rate: 0.1,
            max_iterations: 20,
            target: None,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_k < 2 {
            return Err(Error::InvalidConfig(format!(
                "population_k must be >= 2, got {}",
                self.population_k
            )));
        }
        if self.elites_j < 1 || self.elites_j >= self.population_k {
            return Err(Error::InvalidConfig(format!(
                "elites_j must satisfy 1 <= J < K = {}, got {}",
                self.population_k, self.elites_j
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidConfig(format!(
                "mutation_rate must be in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if let Some(t) = self.target {
            if !t.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "target must be finite, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub best_intensity: f64,
    pub best_spins: SpinVector,
    /// Exact objective of `best_spins`, when the instance is known.
    pub decoded_quality: Option<f64>,
    pub population_mean_intensity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestIndividual {
    pub spins: SpinVector,
    pub intensity: f64,
    pub objective: Option<f64>,
    pub iteration: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub history: Vec<IterationStats>,
    pub best: BestIndividual,
    pub converged_at: Option<usize>,
}

impl RunResult {
    /// Number of measured generations up to and including the one that
    /// reached the target.
    pub fn iterations_to_solve(&self) -> Option<usize> {
        self.converged_at.map(|c| c + 1)
    }
}

/// A failed run, carrying the history recorded before the failure.
#[derive(Debug)]
pub struct RunError {
    pub history: Vec<IterationStats>,
    pub source: Error,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run failed after {} iterations: {}",
            self.history.len(),
            self.source
        )
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<Error> for RunError {
    fn from(source: Error) -> Self {
        RunError {
            history: Vec::new(),
            source,
        }
    }
}

/// Patterns measured so far in a run, stored sign-normalized (`σ_0 = +1`).
#[derive(Clone, Debug, Default)]
pub struct PatternMemory {
    seen: HashSet<Vec<i8>>,
}

impl PatternMemory {
    pub fn new() -> Self {
        Self::default()
    }

    fn canonical(s: &SpinVector) -> Vec<i8> {
        if s.get(0) == 1 {
            s.as_slice().to_vec()
        } else {
            s.flipped().as_slice().to_vec()
        }
    }

    pub fn contains(&self, s: &SpinVector) -> bool {
        self.seen.contains(&Self::canonical(s))
    }

    pub fn insert(&mut self, s: &SpinVector) {
        self.seen.insert(Self::canonical(s));
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// `s` and `-s` produce the same illumination pattern, so duplicates are
/// judged up to a global flip.
fn contains_pattern(population: &[SpinVector], s: &SpinVector) -> bool {
    let same_sign = |x: &SpinVector| x.get(0) == s.get(0);
    population.iter().any(|x| {
        if same_sign(x) {
            x == s
        } else {
            x.as_slice()
                .iter()
                .zip(s.as_slice())
                .all(|(a, b)| *a == -*b)
        }
    })
}

/// `b` or `-b`, whichever is closer to `a` in Hamming distance (ties keep
/// `b`). Both encode the same pattern; the aligned one mixes with `a`
/// without scrambling the partition.
pub fn aligned(a: &SpinVector, b: &SpinVector) -> SpinVector {
    let disagree = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .filter(|(x, y)| x != y)
        .count();
    if 2 * disagree > a.len() {
        b.flipped()
    } else {
        b.clone()
    }
}

fn random_spins(n: usize, rng: &mut impl Rng) -> SpinVector {
    SpinVector::from_vec_unchecked((0..n).map(|_| if rng.random() { 1 } else { -1 }).collect())
}

/// `K` random individuals. A draw whose pattern duplicates an earlier
/// individual's is
/// redrawn up to [`INIT_RETRIES`] times, then kept.
pub fn init_population(n: usize, config: &GaConfig) -> Result<Vec<SpinVector>> {
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    let mut population: Vec<SpinVector> = Vec::with_capacity(config.population_k);
    for ind in 0..config.population_k {
        let mut rng = RngStream::new(config.master_seed, 0, ind as u64, Purpose::Init).rng();
        let mut s = random_spins(n, &mut rng);
        for _ in 0..INIT_RETRIES {
            if !contains_pattern(&population, &s) {
                break;
            }
            s = random_spins(n, &mut rng);
        }
        population.push(s);
    }
    Ok(population)
}

/// Population indices of the `j` largest intensities, best first; ties go
/// to the lower index.
pub fn elite_indices(intensities: &[f64], j: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..intensities.len()).collect();
    idx.sort_by(|&a, &b| intensities[b].total_cmp(&intensities[a]).then(a.cmp(&b)));
    idx.truncate(j);
    idx
}

pub fn select_elites(
    population: &[SpinVector],
    intensities: &[f64],
    j: usize,
) -> Result<Vec<SpinVector>> {
    check_dims(population.len(), intensities.len())?;
    if j >= population.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot keep {j} elites from a population of {}",
            population.len()
        )));
    }
    Ok(elite_indices(intensities, j)
        .into_iter()
        .map(|i| population[i].clone())
        .collect())
}

/// Uniform-mask crossover: each position is taken from `a` or `b` by a fair
/// coin.
pub fn crossover(a: &SpinVector, b: &SpinVector, rng: &mut impl Rng) -> Result<SpinVector> {
    check_dims(a.len(), b.len())?;
    Ok(SpinVector::from_vec_unchecked(
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(&x, &y)| if rng.random() { x } else { y })
            .collect(),
    ))
}

/// Flips each spin independently with probability `rate`.
pub fn mutate(s: &SpinVector, rate: f64, rng: &mut impl Rng) -> Result<SpinVector> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidConfig(format!(
            "mutation rate must be in [0, 1], got {rate}"
        )));
    }
    Ok(SpinVector::from_vec_unchecked(
        s.as_slice()
            .iter()
            .map(|&v| if rng.random::<f64>() < rate { -v } else { v })
            .collect(),
    ))
}

/// Breeds the child for `slot`. A child whose pattern duplicates an
/// individual already in `next`, or one already measured when a memory is
/// given, is redrawn from the same streams up to
/// [`CHILD_RETRIES`] times, then kept.
fn breed_child(
    elites: &[SpinVector],
    next: &[SpinVector],
    memory: Option<&PatternMemory>,
    slot: usize,
    iteration: usize,
    config: &GaConfig,
) -> SpinVector {
    let seed = config.master_seed;
    let mut xrng = RngStream::new(seed, iteration as u64, slot as u64, Purpose::Crossover).rng();
    let mut mrng = RngStream::new(seed, iteration as u64, slot as u64, Purpose::Mutation).rng();
    let j = elites.len();
    let mut child = None;
    for _ in 0..=CHILD_RETRIES {
        let (pa, pb) = if j == 1 {
            (0, 0)
        } else {
            let a = xrng.random_range(0..j);
            let mut b = xrng.random_range(0..j - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        };
        let other = aligned(&elites[pa], &elites[pb]);
        let mixed = crossover(&elites[pa], &other, &mut xrng).expect("elites share a length");
        let c =
            mutate(&mixed, config.mutation_rate, &mut mrng).expect("rate validated with config");
        let fresh = !contains_pattern(next, &c) && !memory.is_some_and(|m| m.contains(&c));
        child = Some(c);
        if fresh {
            break;
        }
    }
    child.expect("at least one draw")
}

/// Result of measuring and evolving one generation.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub next: Vec<SpinVector>,
    pub stats: IterationStats,
    /// Readings of the population that was measured, by index.
    pub intensities: Vec<f64>,
}

/// Measures `population`, records statistics, and breeds the next
/// generation: elites first in rank order, then `K - J` children.
pub fn step<B: MeasurementBackend + ?Sized>(
    population: &[SpinVector],
    backend: &mut B,
    config: &GaConfig,
    iteration: usize,
    instance: Option<&Instance>,
) -> Result<StepOutcome> {
    step_inner(population, backend, config, iteration, instance, None)
}

/// [`step`] that also records the measured patterns in `memory` and
/// avoids breeding children whose pattern was measured before.
pub fn step_with_memory<B: MeasurementBackend + ?Sized>(
    population: &[SpinVector],
    backend: &mut B,
    config: &GaConfig,
    iteration: usize,
    instance: Option<&Instance>,
    memory: &mut PatternMemory,
) -> Result<StepOutcome> {
    step_inner(
        population,
        backend,
        config,
        iteration,
        instance,
        Some(memory),
    )
}

fn step_inner<B: MeasurementBackend + ?Sized>(
    population: &[SpinVector],
    backend: &mut B,
    config: &GaConfig,
    iteration: usize,
    instance: Option<&Instance>,
    mut memory: Option<&mut PatternMemory>,
) -> Result<StepOutcome> {
    config.validate()?;
    check_dims(config.population_k, population.len())?;
    let patterns: Vec<Pattern> = population.par_iter().map(pattern_from_spins).collect();
    let intensities = backend.measure_batch(&patterns, iteration as u64)?;
    check_dims(population.len(), intensities.len())?;
    if let Some(m) = memory.as_deref_mut() {
        population.iter().for_each(|s| m.insert(s));
    }

    let ranked = elite_indices(&intensities, config.elites_j);
    let top = ranked[0];
    let decoded_quality = instance
        .map(|inst| inst.objective(&population[top]))
        .transpose()?;
    let stats = IterationStats {
        iteration,
        best_intensity: intensities[top],
        best_spins: population[top].clone(),
        decoded_quality,
        population_mean_intensity: intensities.iter().sum::<f64>() / intensities.len() as f64,
    };

    let elites: Vec<SpinVector> = ranked.iter().map(|&i| population[i].clone()).collect();
    let mut next = elites.clone();
    for slot in config.elites_j..config.population_k {
        let child = breed_child(&elites, &next, memory.as_deref(), slot, iteration, config);
        next.push(child);
    }
    Ok(StepOutcome {
        next,
        stats,
        intensities,
    })
}

/// What the solver is pointed at: a bare weight image, or a problem instance
/// whose exact objective can score candidates.
#[derive(Clone, Copy, Debug)]
pub enum RunInput<'a> {
    Image(&'a WeightImage),
    Instance(&'a Instance),
}

impl RunInput<'_> {
    fn n(&self) -> usize {
        match self {
            RunInput::Image(w) => w.n(),
            RunInput::Instance(i) => i.n(),
        }
    }

    fn instance(&self) -> Option<&Instance> {
        match self {
            RunInput::Image(_) => None,
            RunInput::Instance(i) => Some(i),
        }
    }
}

pub fn run<B: MeasurementBackend + ?Sized>(
    input: RunInput<'_>,
    backend: &mut B,
    config: &GaConfig,
) -> std::result::Result<RunResult, RunError> {
    config.validate()?;
    let population = init_population(input.n(), config)?;
    run_from(population, input, backend, config)
}

/// Runs from a caller-supplied initial population.
///
/// The best individual is ranked by exact objective when an instance is
/// given (so a noisy reading cannot hide a good candidate) and by measured
/// intensity otherwise; the earliest evaluation wins ties.
pub fn run_from<B: MeasurementBackend + ?Sized>(
    mut population: Vec<SpinVector>,
    input: RunInput<'_>,
    backend: &mut B,
    config: &GaConfig,
) -> std::result::Result<RunResult, RunError> {
    config.validate()?;
    check_dims(config.population_k, population.len())?;
    if let Some(bad) = population.iter().find(|s| s.len() != input.n()) {
        return Err(Error::DimensionMismatch {
            expected: input.n(),
            found: bad.len(),
        }
        .into());
    }
    let instance = input.instance();
    let mut history = Vec::with_capacity(config.max_iterations.min(1024));
    let mut best: Option<BestIndividual> = None;
    let mut converged_at = None;
    let mut memory = PatternMemory::new();

    for iteration in 0..config.max_iterations {
        let outcome = match step_with_memory(
            &population,
            backend,
            config,
            iteration,
            instance,
            &mut memory,
        ) {
            Ok(o) => o,
            Err(source) => return Err(RunError { history, source }),
        };
        let mut reached = false;
        for (s, &intensity) in population.iter().zip(&outcome.intensities) {
            let objective = match instance {
                Some(inst) => Some(inst.objective(s).map_err(|source| RunError {
                    history: history.clone(),
                    source,
                })?),
                None => None,
            };
            let improves = match (&best, instance) {
                (None, _) => true,
                (Some(b), Some(inst)) => inst.is_better(objective.unwrap(), b.objective.unwrap()),
                (Some(b), None) => intensity > b.intensity,
            };
            if improves {
                best = Some(BestIndividual {
                    spins: s.clone(),
                    intensity,
                    objective,
                    iteration,
                });
            }
            if let (Some(inst), Some(target), Some(v)) = (instance, config.target, objective) {
                reached |= inst.reaches(v, target);
            }
        }
        history.push(outcome.stats);
        if reached {
            converged_at = Some(iteration);
            break;
        }
        population = outcome.next;
    }

    Ok(RunResult {
        history,
        best: best.expect("max_iterations >= 1"),
        converged_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{brute_force, NumberPartitionInstance};
    use crate::spi::{IdealBackend, ReplayBackend};
    use proptest::prelude::*;
    use rand::Rng;

    fn spins(v: &[i8]) -> SpinVector {
        SpinVector::new(v.to_vec()).unwrap()
    }

    fn partition(v: &[u64]) -> Instance {
        Instance::Partition(NumberPartitionInstance::new(v.to_vec()).unwrap())
    }

    fn cfg(k: usize, seed: u64) -> GaConfig {
        GaConfig::with_population(k, seed)
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = GaConfig::default();
        assert_eq!((c.population_k, c.elites_j, c.mutation_rate), (6, 2, 0.1));
        assert_eq!(GaConfig::default_elites(2), 1);
        assert!(GaConfig {
            population_k: 1,
            elites_j: 1,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            elites_j: 6,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            elites_j: 0,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            mutation_rate: 1.5,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            max_iterations: 0,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn init_population_golden() {
        let pop = init_population(4, &cfg(6, 42)).unwrap();
        let idx: Vec<u64> = pop.iter().map(SpinVector::index).collect();
        assert_eq!(idx, GOLDEN_INIT_N4_K6_SEED42);
        for (i, s) in pop.iter().enumerate() {
            assert!(!contains_pattern(&pop[..i], s));
        }
        assert_eq!(pop, init_population(4, &cfg(6, 42)).unwrap());
    }

    const GOLDEN_INIT_N4_K6_SEED42: [u64; 6] = [14, 5, 13, 11, 8, 6];

    #[test]
    fn init_population_prefers_distinct() {
        // n = 2 has four states; K = 2 distinct picks should essentially always succeed
        for seed in 0..50 {
            let pop = init_population(2, &cfg(2, seed)).unwrap();
            assert_eq!(pop.len(), 2);
            assert_ne!(pop[0], pop[1], "seed {seed}");
        }
        // more individuals than states: duplicates are allowed after retries
        let pop = init_population(2, &cfg(6, 1)).unwrap();
        assert_eq!(pop.len(), 6);
    }

    #[test]
    fn elite_selection() {
        let pop: Vec<SpinVector> = (0..3)
            .map(|k| SpinVector::from_index(3, k).unwrap())
            .collect();
        assert_eq!(
            select_elites(&pop, &[1.0, 5.0, 3.0], 1).unwrap(),
            vec![pop[1].clone()]
        );
        assert_eq!(
            select_elites(&pop, &[5.0, 5.0, 3.0], 1).unwrap(),
            vec![pop[0].clone()]
        );
        assert_eq!(
            select_elites(&pop, &[1.0, 5.0, 3.0], 2).unwrap(),
            vec![pop[1].clone(), pop[2].clone()]
        );
        assert!(select_elites(&pop, &[1.0, 5.0], 1).is_err());
        assert!(select_elites(&pop, &[1.0, 5.0, 3.0], 3).is_err());
    }

    #[test]
    fn crossover_cases() {
        let mut rng = RngStream::new(1, 0, 0, Purpose::Crossover).rng();
        let a = spins(&[1, -1, 1, 1, -1, 1]);
        assert_eq!(crossover(&a, &a, &mut rng).unwrap(), a);

        let up = SpinVector::uniform(4).unwrap();
        let down = up.flipped();
        let mut r1 = RngStream::new(5, 0, 0, Purpose::Crossover).rng();
        let mut r2 = RngStream::new(5, 0, 0, Purpose::Crossover).rng();
        let child = crossover(&up, &down, &mut r1).unwrap();
        let mask: Vec<i8> = (0..4)
            .map(|_| if r2.random::<bool>() { 1 } else { -1 })
            .collect();
        assert_eq!(child.as_slice(), &mask[..]);

        assert!(crossover(&a, &up, &mut rng).is_err());
    }

    #[test]
    fn crossover_golden() {
        let a = spins(&[1, 1, 1, -1, -1, -1]);
        let b = spins(&[-1, 1, -1, 1, -1, 1]);
        let mut rng = RngStream::new(42, 0, 0, Purpose::Crossover).rng();
        let child = crossover(&a, &b, &mut rng).unwrap();
        for i in 0..6 {
            assert!(child.get(i) == a.get(i) || child.get(i) == b.get(i));
        }
        assert_eq!(child.index(), GOLDEN_CROSSOVER_SEED42);
    }

    const GOLDEN_CROSSOVER_SEED42: u64 = 61;

    #[test]
    fn mutation_extremes() {
        let s = spins(&[1, -1, 1, 1, -1]);
        let mut rng = RngStream::new(3, 0, 0, Purpose::Mutation).rng();
        assert_eq!(mutate(&s, 0.0, &mut rng).unwrap(), s);
        assert_eq!(mutate(&s, 1.0, &mut rng).unwrap(), s.flipped());
        assert!(mutate(&s, -0.1, &mut rng).is_err());
    }

    #[test]
    fn mutation_half_rate_binomial_band() {
        let s = SpinVector::uniform(10_000).unwrap();
        let mut rng = RngStream::new(9, 0, 0, Purpose::Mutation).rng();
        let flipped = mutate(&s, 0.5, &mut rng)
            .unwrap()
            .as_slice()
            .iter()
            .filter(|&&v| v == -1)
            .count();
        assert!((4600..=5400).contains(&flipped), "{flipped}");
    }

    #[test]
    fn elite_survives_with_two_individuals() {
        let inst = partition(&[2, 4, 5, 6, 9]);
        let w = inst.encode();
        let c = GaConfig {
            max_iterations: 30,
            ..cfg(2, 3)
        };
        let mut backend = IdealBackend::new(w);
        let mut pop = init_population(5, &c).unwrap();
        for it in 0..c.max_iterations {
            let out = step(&pop, &mut backend, &c, it, Some(&inst)).unwrap();
            let top = elite_indices(&out.intensities, 1)[0];
            assert_eq!(out.next[0], pop[top]);
            pop = out.next;
        }
    }

    #[test]
    fn zero_mutation_children_copy_identical_elites() {
        let inst = partition(&[2, 4, 5, 6, 9]);
        let c = GaConfig {
            elites_j: 2,
            mutation_rate: 0.0,
            ..cfg(3, 1)
        };
        let s = spins(&[1, -1, 1, 1, -1]);
        let pop = vec![s.clone(), s.clone(), s.clone()];
        let mut backend = IdealBackend::new(inst.encode());
        let out = step(&pop, &mut backend, &c, 0, None).unwrap();
        assert!(out.next.iter().all(|x| *x == s));
    }

    #[test]
    fn step_keeps_population_size_and_elites() {
        let inst = partition(&[1, 2, 5, 7, 9, 11, 15, 16, 18]);
        let c = cfg(8, 5);
        let mut backend = IdealBackend::new(inst.encode());
        let mut pop = init_population(9, &c).unwrap();
        for it in 0..10 {
            let out = step(&pop, &mut backend, &c, it, Some(&inst)).unwrap();
            assert_eq!(out.next.len(), 8);
            let ranked = elite_indices(&out.intensities, c.elites_j);
            for (slot, &i) in ranked.iter().enumerate() {
                assert_eq!(out.next[slot], pop[i]);
            }
            assert_eq!(
                out.stats.decoded_quality,
                Some(inst.objective(&out.stats.best_spins).unwrap())
            );
            pop = out.next;
        }
    }

    #[test]
    fn golden_best_intensity_trajectory() {
        let inst = partition(&[2, 4, 5, 6, 9]);
        let c = GaConfig {
            max_iterations: 8,
            ..cfg(6, 6)
        };
        let mut backend = IdealBackend::new(inst.encode());
        let result = run(RunInput::Image(&inst.encode()), &mut backend, &c).unwrap();
        let curve: Vec<f64> = result.history.iter().map(|h| h.best_intensity).collect();
        assert_eq!(curve, GOLDEN_TRAJECTORY_SEED6);
    }

    const GOLDEN_TRAJECTORY_SEED6: [f64; 8] =
        [320.0, 336.0, 336.0, 338.0, 338.0, 338.0, 338.0, 338.0];

    #[test]
    fn single_iteration_history() {
        let inst = partition(&[1, 2, 5, 6, 7, 9]);
        let c = GaConfig {
            max_iterations: 1,
            ..cfg(6, 0)
        };
        let mut backend = IdealBackend::new(inst.encode());
        let r = run(RunInput::Instance(&inst), &mut backend, &c).unwrap();
        assert_eq!(r.history.len(), 1);
    }

    #[test]
    fn optimal_initial_individual_converges_at_zero() {
        let inst = partition(&[1, 2, 5, 6, 7, 9]);
        let c = GaConfig {
            target: Some(0.0),
            ..cfg(6, 0)
        };
        let mut pop = init_population(6, &c).unwrap();
        pop[3] = spins(&[1, -1, 1, -1, -1, 1]);
        let mut backend = IdealBackend::new(inst.encode());
        let r = run_from(pop, RunInput::Instance(&inst), &mut backend, &c).unwrap();
        assert_eq!(r.converged_at, Some(0));
        assert_eq!(r.iterations_to_solve(), Some(1));
        assert_eq!(r.best.objective, Some(0.0));
    }

    #[test]
    fn seeded_optimal_start_converges_at_zero() {
        // {1,1}: every state with disagreeing spins is optimal; find a seed
        // whose initial population already contains one.
        let inst = partition(&[1, 1]);
        let seed = (0..100)
            .find(|&seed| {
                init_population(2, &cfg(2, seed))
                    .unwrap()
                    .iter()
                    .any(|s| s.get(0) != s.get(1))
            })
            .unwrap();
        let c = GaConfig {
            target: Some(0.0),
            ..cfg(2, seed)
        };
        let mut backend = IdealBackend::new(inst.encode());
        let r = run(RunInput::Instance(&inst), &mut backend, &c).unwrap();
        assert_eq!(r.converged_at, Some(0));
    }

    #[test]
    fn backend_failure_keeps_history() {
        let inst = partition(&[2, 4, 5, 6, 9]);
        let c = cfg(6, 0);
        // enough readings for two generations
        let mut backend = ReplayBackend::new((0..15).map(|v| v as f64));
        let err = run(RunInput::Instance(&inst), &mut backend, &c).unwrap_err();
        assert_eq!(err.history.len(), 2);
        assert!(matches!(
            err.source,
            Error::ReplayExhausted {
                requested: 6,
                remaining: 3
            }
        ));
    }

    #[test]
    fn elitism_is_monotone_under_ideal_backend() {
        for seed in 0..40 {
            let inst = partition(&[3, 8, 1, 9, 14, 2, 7, 5]);
            let c = GaConfig {
                max_iterations: 25,
                ..cfg(4 + seed as usize % 5, seed)
            };
            let mut backend = IdealBackend::new(inst.encode());
            let r = run(RunInput::Instance(&inst), &mut backend, &c).unwrap();
            for w in r.history.windows(2) {
                assert!(w[1].best_intensity >= w[0].best_intensity, "seed {seed}");
            }
        }
    }

    #[test]
    fn final_is_best_over_evaluated() {
        let inst = partition(&[1, 2, 5, 7, 9, 11, 15, 16, 18]);
        let opt = brute_force(&inst).unwrap();
        let c = GaConfig {
            max_iterations: 3,
            ..cfg(6, 77)
        };
        let mut backend = IdealBackend::new(inst.encode());
        let r = run(RunInput::Instance(&inst), &mut backend, &c).unwrap();
        let best_seen = r
            .history
            .iter()
            .map(|h| h.decoded_quality.unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(r.best.objective.unwrap() <= best_seen);
        assert!(r.best.objective.unwrap() >= opt.value);
    }

    #[test]
    fn global_optimum_reachable_from_mutation() {
        // N = 8 max cut, 2000 short seeded runs
        let inst = Instance::MaxCut(crate::problems::random_max_cut_instance(8, 4).unwrap());
        let opt = brute_force(&inst).unwrap();
        let hit = (0..2000u64).any(|seed| {
            let c = GaConfig {
                max_iterations: 2,
                ..cfg(2, seed)
            };
            let mut backend = IdealBackend::new(inst.encode());
            let r = run(RunInput::Instance(&inst), &mut backend, &c).unwrap();
            !inst.is_better(opt.value, r.best.objective.unwrap())
        });
        assert!(hit);
    }

    #[test]
    fn memory_treats_flips_as_one_pattern() {
        let mut m = PatternMemory::new();
        assert!(m.is_empty());
        m.insert(&spins(&[-1, 1, 1]));
        assert!(m.contains(&spins(&[1, -1, -1])));
        assert!(!m.contains(&spins(&[1, 1, -1])));
        m.insert(&spins(&[1, -1, -1]));
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn aligned_flips_only_when_closer() {
        let a = spins(&[1, 1, 1, 1]);
        assert_eq!(aligned(&a, &spins(&[-1, -1, -1, 1])), spins(&[1, 1, 1, -1]));
        assert_eq!(aligned(&a, &spins(&[-1, -1, 1, 1])), spins(&[-1, -1, 1, 1]));
    }

    struct Recording<'a> {
        inner: IdealBackend,
        seen: &'a mut Vec<Vec<u8>>,
    }

    impl MeasurementBackend for Recording<'_> {
        fn measure_batch(&mut self, patterns: &[Pattern], iteration: u64) -> Result<Vec<f64>> {
            self.seen.extend(patterns.iter().map(|p| p.bits().to_vec()));
            self.inner.measure_batch(patterns, iteration)
        }
    }

    #[test]
    fn children_are_mostly_unmeasured_patterns() {
        let inst = Instance::MaxCut(crate::problems::random_max_cut_instance(10, 3).unwrap());
        let config = GaConfig {
            max_iterations: 20,
            ..cfg(6, 4)
        };
        let mut seen = Vec::new();
        let mut backend = Recording {
            inner: IdealBackend::new(inst.encode()),
            seen: &mut seen,
        };
        let r = run(RunInput::Image(&inst.encode()), &mut backend, &config).unwrap();
        let iterations = r.history.len();
        let distinct: HashSet<_> = seen.iter().collect();
        let budget = 6 + (iterations - 1) * (6 - config.elites_j);
        assert!(
            distinct.len() * 10 >= budget * 9,
            "{} of {budget}",
            distinct.len()
        );
    }

    proptest! {
        #[test]
        fn aligned_keeps_pattern_and_halves_distance(
            pair in (2usize..12).prop_flat_map(|n| (
                prop::collection::vec(prop::bool::ANY, n),
                prop::collection::vec(prop::bool::ANY, n),
            ))
        ) {
            let to = |v: &[bool]| spins(&v.iter().map(|&b| if b { 1 } else { -1 }).collect::<Vec<_>>());
            let (a, b) = (to(&pair.0), to(&pair.1));
            let c = aligned(&a, &b);
            prop_assert_eq!(pattern_from_spins(&c), pattern_from_spins(&b));
            let dist = a.as_slice().iter().zip(c.as_slice()).filter(|(x, y)| x != y).count();
            prop_assert!(2 * dist <= a.len());
        }
    }
}
