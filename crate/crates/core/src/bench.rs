//! Desk-scale experiments: convergence curves, the number-partition scaling
//! sweep, and noise robustness, with CSV and gnuplot output.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{run, GaConfig, RunInput, RunResult};
use crate::model::SpinVector;
use crate::problems::{brute_force, perfect_partition_instance, Instance, MAX_BRUTE_FORCE_N};
use crate::rng::{Purpose, RngStream};
use crate::spi::{IdealBackend, MeasurementBackend, NoiseModel, NoisyBackend};

/// Largest N the sweep accepts unless large runs are explicitly enabled.
pub const DEFAULT_SWEEP_MAX_N: usize = 200;
pub const DEFAULT_SWEEP_CAP: usize = 5000;

pub const SWEEP_CSV_HEADER: &str = "n,seed,iterations_to_solve,wall_time_s";
pub const CURVE_CSV_HEADER: &str = "iteration,best_objective,best_intensity";
pub const NOISE_CSV_HEADER: &str = "sigma,success_rate,mean_iterations";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub best_objective: f64,
    pub best_intensity: f64,
}

/// One run's curve plus the best state measured in each iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub curve: Vec<CurvePoint>,
    pub states: Vec<SpinVector>,
    pub result: RunResult,
}

pub fn convergence_experiment<B: MeasurementBackend + ?Sized>(
    instance: &Instance,
    backend: &mut B,
    config: &GaConfig,
) -> Result<Convergence> {
    let result = run(RunInput::Instance(instance), backend, config).map_err(|e| e.source)?;
    Ok(Convergence {
        curve: curve_of(&result),
        states: result
            .history
            .iter()
            .map(|h| h.best_spins.clone())
            .collect(),
        result,
    })
}

pub fn curve_of(result: &RunResult) -> Vec<CurvePoint> {
    result
        .history
        .iter()
        .map(|h| CurvePoint {
            iteration: h.iteration,
            best_objective: h.decoded_quality.unwrap_or(f64::NAN),
            best_intensity: h.best_intensity,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// Master seed of the run.
    pub seed: u64,
    /// `None` when the iteration cap was hit.
    pub iterations_to_solve: Option<usize>,
    pub wall_time: f64,
}

/// Number-partition scaling sweep over `N = n_from, n_from + n_step, ..`.
///
/// Each trial gets an instance with a known zero-error split and runs until
/// error 0 or `config_template.max_iterations`. For `N <= 26` success is
/// confirmed against the exhaustive oracle. `config_template.master_seed`
/// seeds the whole sweep.
pub fn scaling_sweep(
    n_from: usize,
    n_to: usize,
    n_step: usize,
    trials_per_n: usize,
    config_template: &GaConfig,
) -> Result<Vec<SweepRow>> {
    if n_from < 2 {
        return Err(Error::InvalidConfig(format!(
            "n_from must be >= 2, got {n_from}"
        )));
    }
    if n_step < 1 {
        return Err(Error::InvalidConfig("n_step must be >= 1".into()));
    }
    config_template.validate()?;
    if n_from > n_to {
        return Ok(Vec::new());
    }
    let jobs: Vec<(usize, usize)> = (n_from..=n_to)
        .step_by(n_step)
        .flat_map(|n| (0..trials_per_n).map(move |t| (n, t)))
        .collect();
    jobs.into_par_iter()
        .map(|(n, trial)| sweep_trial(n, trial, config_template))
        .collect()
}

fn sweep_trial(n: usize, trial: usize, template: &GaConfig) -> Result<SweepRow> {
    let sweep_seed = template.master_seed;
    let instance = Instance::Partition(perfect_partition_instance(
        n,
        RngStream::new(sweep_seed, n as u64, trial as u64, Purpose::Instance),
    )?);
    let seed = RngStream::new(sweep_seed, n as u64, trial as u64, Purpose::TrialSeed).derive_seed();
    let oracle = if n <= MAX_BRUTE_FORCE_N {
        Some(brute_force(&instance)?.value)
    } else {
        None
    };
    let config = GaConfig {
        master_seed: seed,
        target: Some(oracle.unwrap_or(0.0)),
        ..template.clone()
    };
    let start = Instant::now();
    let mut backend = IdealBackend::new(instance.encode());
    let result = run(RunInput::Instance(&instance), &mut backend, &config).map_err(|e| e.source)?;
    let wall_time = start.elapsed().as_secs_f64();

    let verified = match (oracle, result.best.objective) {
        (Some(opt), Some(found)) => instance.reaches(found, opt),
        _ => true,
    };
    let iterations_to_solve = result
        .iterations_to_solve()
        .filter(|&it| verified && it <= template.max_iterations);
    Ok(SweepRow {
        n,
        seed,
        iterations_to_solve,
        wall_time,
    })
}

/// Median iterations among solved rows for one `n`.
pub fn median_iterations(rows: &[SweepRow], n: usize) -> Option<f64> {
    let mut its: Vec<usize> = rows
        .iter()
        .filter(|r| r.n == n)
        .filter_map(|r| r.iterations_to_solve)
        .collect();
    if its.is_empty() {
        return None;
    }
    its.sort_unstable();
    let m = its.len();
    Some(if m % 2 == 1 {
        its[m / 2] as f64
    } else {
        (its[m / 2 - 1] + its[m / 2]) as f64 / 2.0
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub sigma: f64,
    pub success_rate: f64,
    /// Mean iterations to solve over successful trials.
    pub mean_iterations: Option<f64>,
}

/// One seeded trial of the noise experiment. `model = None` runs the ideal
/// backend with the same run seed, for run-for-run comparison.
pub fn noise_trial(
    instance: &Instance,
    trial: usize,
    config: &GaConfig,
    model: Option<NoiseModel>,
    optimum: f64,
) -> Result<RunResult> {
    let seed =
        RngStream::new(config.master_seed, trial as u64, 0, Purpose::TrialSeed).derive_seed();
    let backend_seed =
        RngStream::new(config.master_seed, trial as u64, 0, Purpose::BackendSeed).derive_seed();
    let config = GaConfig {
        master_seed: seed,
        target: Some(optimum),
        ..config.clone()
    };
    let input = RunInput::Instance(instance);
    let result = match model {
        None => run(input, &mut IdealBackend::new(instance.encode()), &config),
        Some(m) => run(
            input,
            &mut NoisyBackend::new(instance.encode(), m, backend_seed)?,
            &config,
        ),
    };
    result.map_err(|e| e.source)
}

/// Success rate per noise level, where success means the final answer's
/// exact objective equals the oracle optimum.
pub fn noise_robustness(
    instance: &Instance,
    sigma_list: &[f64],
    trials: usize,
    config: &GaConfig,
    base_model: NoiseModel,
) -> Result<Vec<NoiseRow>> {
    config.validate()?;
    let optimum = brute_force(instance)?.value;
    sigma_list
        .iter()
        .map(|&sigma| {
            let model = NoiseModel {
                gaussian_sigma: sigma,
                ..base_model
            };
            model.validate()?;
            let outcomes: Vec<Option<usize>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let r = noise_trial(instance, t, config, Some(model), optimum)?;
                    let ok = r
                        .best
                        .objective
                        .is_some_and(|v| instance.reaches(v, optimum));
                    Ok(r.iterations_to_solve().filter(|_| ok))
                })
                .collect::<Result<_>>()?;
            let solved: Vec<usize> = outcomes.iter().flatten().copied().collect();
            Ok(NoiseRow {
                sigma,
                success_rate: if trials == 0 {
                    0.0
                } else {
                    solved.len() as f64 / trials as f64
                },
                mean_iterations: (!solved.is_empty())
                    .then(|| solved.iter().sum::<usize>() as f64 / solved.len() as f64),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        let its = r
            .iterations_to_solve
            .map_or_else(|| "unsolved".to_string(), |i| i.to_string());
        writeln!(out, "{},{},{},{:.6}", r.n, r.seed, its, r.wall_time).unwrap();
    }
    out
}

pub fn curve_csv(curve: &[CurvePoint]) -> String {
    let mut out = format!("{CURVE_CSV_HEADER}\n");
    for p in curve {
        writeln!(
            out,
            "{},{},{}",
            p.iteration, p.best_objective, p.best_intensity
        )
        .unwrap();
    }
    out
}

pub fn noise_csv(rows: &[NoiseRow]) -> String {
    let mut out = format!("{NOISE_CSV_HEADER}\n");
    for r in rows {
        let mean = r
            .mean_iterations
            .map_or_else(String::new, |m| m.to_string());
        writeln!(out, "{},{},{}", r.sigma, r.success_rate, mean).unwrap();
    }
    out
}

fn gnuplot_preamble(title: &str, xlabel: &str, ylabel: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel '{xlabel}'\n\
         set ylabel '{ylabel}'\n\
         set grid\n"
    )
}

pub fn sweep_gnuplot(csv_name: &str) -> String {
    let mut s = gnuplot_preamble("Iterations to converge vs. N", "N", "iterations to solve");
    writeln!(
        s,
        "plot '{csv_name}' using 1:3 with points pt 7 ps 0.6 title 'trials', \\\n     \
         '' using 1:3 smooth unique with lines lw 2 title 'mean'"
    )
    .unwrap();
    s
}

pub fn curve_gnuplot(csv_name: &str, objective_label: &str) -> String {
    let mut s = gnuplot_preamble("Convergence", "iteration", objective_label);
    writeln!(
        s,
        "set y2label 'best intensity'\nset y2tics\n\
         plot '{csv_name}' using 1:2 with linespoints lw 2 title '{objective_label}', \\\n     \
         '' using 1:3 axes x1y2 with lines dt 2 title 'best intensity'"
    )
    .unwrap();
    s
}

pub fn noise_gnuplot(csv_name: &str) -> String {
    let mut s = gnuplot_preamble("Noise robustness", "sigma", "success rate");
    writeln!(
        s,
        "set logscale x\nset yrange [0:1.05]\n\
         plot '{csv_name}' using 1:2 with linespoints pt 7 lw 2 title 'success rate'"
    )
    .unwrap();
    s
}
