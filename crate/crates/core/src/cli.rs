//! Command-line front end.
//!
//! `parse_args` turns argv into a validated [`CliConfig`]; `execute` runs it
//! and maps the outcome to an exit code: `0` success, `2` iteration budget
//! exhausted before reaching the target, `1` error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{
    self, curve_csv, curve_gnuplot, curve_of, noise_csv, noise_gnuplot, sweep_csv, sweep_gnuplot,
    DEFAULT_SWEEP_CAP, DEFAULT_SWEEP_MAX_N,
};
use crate::error::Error;
use crate::evolve::{run, GaConfig, RunInput, RunResult};
use crate::model::SpinVector;
use crate::problems::{
    brute_force, random_max_cut_instance, random_partition_instance, Instance, Optimum, Solution,
    MAX_BRUTE_FORCE_N,
};
use crate::rng::{Purpose, RngStream};
use crate::spi::pnm::{pattern_to_pbm, weights_to_pgm};
use crate::spi::{
    pattern_from_spins, replay_load, IdealBackend, MeasurementBackend, NoiseModel, NoisyBackend,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] Error),
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}

#[derive(Debug, Parser)]
#[command(
    name = "spi-ising",
    version,
    about = "Ising machine simulator driven by evolutionary single-pixel measurements"
)]
struct Cli {
    /// Worker threads; 0 uses all cores. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a number-partition instance.
    Partition(SolveArgs),
    /// Solve a max-cut instance.
    Maxcut(SolveArgs),
    /// Number-partition scaling sweep over N.
    Sweep(SweepArgs),
    /// Success rate versus detector noise.
    Noise(NoiseArgs),
    /// Exhaustive optimum (N <= 26).
    Oracle(OracleArgs),
    /// Write the illumination pattern of a spin vector.
    ExportPatterns(ExportArgs),
}

#[derive(Debug, Args, Default)]
struct InstanceArgs {
    /// Comma-separated partition numbers.
    #[arg(long, value_delimiter = ',')]
    numbers: Option<Vec<u64>>,
    /// Instance file (`partition` or `maxcut` text format).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Generate a random instance with this many elements.
    #[arg(long)]
    generate: Option<usize>,
    /// Seed for --generate.
    #[arg(long, default_value_t = 1)]
    gen_seed: u64,
}

#[derive(Debug, Args)]
struct GaArgs {
    /// Population size K.
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Elites J kept per iteration [default: max(1, K/3)].
    #[arg(long)]
    elites: Option<usize>,
    /// Per-spin flip probability for children.
    #[arg(long, default_value_t = 0.1)]
    mutation_rate: f64,
    /// Iteration cap [default: 20, sweep 5000].
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Objective to stop at [default: oracle optimum when N <= 26].
    #[arg(long, allow_negative_numbers = true)]
    target: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Ideal,
    Noisy,
    Replay,
}

#[derive(Debug, Args)]
struct BackendArgs {
    #[arg(long, value_enum, default_value_t = BackendKind::Ideal)]
    backend: BackendKind,
    /// Gaussian noise std as a fraction of full scale.
    #[arg(long)]
    sigma: Option<f64>,
    /// Quantization bits, 0 disables.
    #[arg(long)]
    bits: Option<u32>,
    /// Dark offset added to every reading.
    #[arg(long)]
    offset: Option<f64>,
    /// Recorded intensity trace for the replay backend.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    ga: GaArgs,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Also write the weight image (PGM) and best patterns (PBM).
    #[arg(long)]
    export: bool,
    /// Re-run the configuration echoed in a previous result.json.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 10)]
    n_from: usize,
    #[arg(long, default_value_t = 100)]
    n_to: usize,
    #[arg(long, default_value_t = 10)]
    n_step: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Allow N above 200.
    #[arg(long)]
    allow_large: bool,
    #[command(flatten)]
    ga: GaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Maxcut instance instead of partition.
    #[arg(long)]
    maxcut: bool,
    #[arg(long, value_delimiter = ',', default_value = "0,0.001,0.01,0.1,1")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 12)]
    bits: u32,
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    #[command(flatten)]
    ga: GaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Treat --generate as a max-cut instance.
    #[arg(long)]
    maxcut: bool,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Spin vector, e.g. `+1,-1,+1`.
    #[arg(long, allow_hyphen_values = true)]
    spins: String,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    maxcut: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Partition,
    #[serde(rename = "maxcut")]
    MaxCut,
}

impl ProblemKind {
    fn name(self) -> &'static str {
        match self {
            ProblemKind::Partition => "partition",
            ProblemKind::MaxCut => "maxcut",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    Numbers(Vec<u64>),
    File(PathBuf),
    Generated { n: usize, seed: u64 },
}

impl InstanceSource {
    pub fn load(&self, kind: ProblemKind) -> Result<Instance, CliError> {
        let instance = match self {
            InstanceSource::Numbers(v) => {
                if kind == ProblemKind::MaxCut {
                    return Err(usage("--numbers", "only valid for partition instances"));
                }
                Instance::Partition(crate::NumberPartitionInstance::new(v.clone())?)
            }
            InstanceSource::File(path) => Instance::load(path)?,
            InstanceSource::Generated { n, seed } => match kind {
                ProblemKind::Partition => Instance::Partition(random_partition_instance(
                    *n,
                    RngStream::new(*seed, *n as u64, 0, Purpose::Instance),
                )?),
                ProblemKind::MaxCut => Instance::MaxCut(random_max_cut_instance(*n, *seed)?),
            },
        };
        if instance.name() != kind.name() {
            return Err(CliError::Usage(format!(
                "instance is a {} problem, expected {}",
                instance.name(),
                kind.name()
            )));
        }
        Ok(instance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendSpec {
    Ideal,
    Noisy(NoiseModel),
    Replay { path: PathBuf },
}

/// Everything that determines a solve's output. Echoed into result.json.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub problem: ProblemKind,
    pub source: InstanceSource,
    pub ga: GaConfig,
    pub backend: BackendSpec,
    pub format: Format,
    pub export: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n_from: usize,
    pub n_to: usize,
    pub n_step: usize,
    pub trials: usize,
    pub ga: GaConfig,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    pub problem: ProblemKind,
    pub source: InstanceSource,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub model: NoiseModel,
    pub ga: GaConfig,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CommandConfig {
    Solve(SolveConfig),
    Sweep(SweepConfig),
    Noise(NoiseConfig),
    Oracle {
        problem: ProblemKind,
        source: InstanceSource,
    },
    ExportPatterns {
        spins: SpinVector,
        instance: Option<(ProblemKind, InstanceSource)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub command: CommandConfig,
    pub out_dir: PathBuf,
    pub threads: usize,
}

fn instance_source(args: &InstanceArgs) -> Result<Option<InstanceSource>, CliError> {
    let given = [
        args.numbers.is_some(),
        args.instance.is_some(),
        args.generate.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if given > 1 {
        return Err(CliError::Usage(
            "--numbers, --instance and --generate are mutually exclusive".into(),
        ));
    }
    Ok(if let Some(v) = &args.numbers {
        Some(InstanceSource::Numbers(v.clone()))
    } else if let Some(p) = &args.instance {
        Some(InstanceSource::File(p.clone()))
    } else {
        args.generate.map(|n| InstanceSource::Generated {
            n,
            seed: args.gen_seed,
        })
    })
}

fn required_source(args: &InstanceArgs) -> Result<InstanceSource, CliError> {
    instance_source(args)?.ok_or_else(|| {
        CliError::Usage("one of --numbers, --instance or --generate is required".into())
    })
}

fn ga_config(args: &GaArgs, default_iters: usize) -> Result<GaConfig, CliError> {
    if args.k < 2 {
        return Err(usage(
            "--k",
            format!("population_k must be >= 2, got {}", args.k),
        ));
    }
    let elites = args
        .elites
        .unwrap_or_else(|| GaConfig::default_elites(args.k));
    if elites < 1 || elites >= args.k {
        return Err(usage(
            "--elites",
            format!("elites must satisfy 1 <= J < K = {}, got {elites}", args.k),
        ));
    }
    if !(0.0..=1.0).contains(&args.mutation_rate) {
        return Err(usage(
            "--mutation-rate",
            format!("must be in [0, 1], got {}", args.mutation_rate),
        ));
    }
    let max_iterations = args.max_iters.unwrap_or(default_iters);
    if max_iterations < 1 {
        return Err(usage("--max-iters", "must be >= 1"));
    }
    if args.target.is_some_and(|t| !t.is_finite()) {
        return Err(usage("--target", "must be finite"));
    }
    Ok(GaConfig {
        population_k: args.k,
        elites_j: elites,
        mutation_rate: args.mutation_rate,
        max_iterations,
        target: args.target,
        master_seed: args.seed,
    })
}

fn noise_model(sigma: f64, bits: u32, offset: f64) -> Result<NoiseModel, CliError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(usage("--sigma", format!("must be >= 0, got {sigma}")));
    }
    if bits > 16 {
        return Err(usage("--bits", format!("must be in 0..=16, got {bits}")));
    }
    if !(offset.is_finite() && offset >= 0.0) {
        return Err(usage("--offset", format!("must be >= 0, got {offset}")));
    }
    Ok(NoiseModel {
        gaussian_sigma: sigma,
        quantization_bits: bits,
        dark_offset: offset,
    })
}

fn backend_spec(args: &BackendArgs) -> Result<BackendSpec, CliError> {
    let noise_flags = args.sigma.is_some() || args.bits.is_some() || args.offset.is_some();
    match args.backend {
        BackendKind::Ideal | BackendKind::Replay if noise_flags => Err(usage(
            "--sigma/--bits/--offset",
            "only valid with --backend noisy",
        )),
        BackendKind::Ideal if args.replay.is_some() => {
            Err(usage("--replay", "only valid with --backend replay"))
        }
        BackendKind::Ideal => Ok(BackendSpec::Ideal),
        BackendKind::Noisy => {
            if args.replay.is_some() {
                return Err(usage("--replay", "only valid with --backend replay"));
            }
            let d = NoiseModel::default();
            Ok(BackendSpec::Noisy(noise_model(
                args.sigma.unwrap_or(d.gaussian_sigma),
                args.bits.unwrap_or(d.quantization_bits),
                args.offset.unwrap_or(d.dark_offset),
            )?))
        }
        BackendKind::Replay => args
            .replay
            .clone()
            .map(|path| BackendSpec::Replay { path })
            .ok_or_else(|| usage("--replay", "required with --backend replay")),
    }
}

fn parse_spins(text: &str) -> Result<SpinVector, CliError> {
    let states = text
        .split(',')
        .map(|tok| match tok.trim() {
            "+1" | "1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(usage(
                "--spins",
                format!("bad spin {other:?}, expected +1 or -1"),
            )),
        })
        .collect::<Result<Vec<i8>, _>>()?;
    SpinVector::new(states).map_err(|e| usage("--spins", e))
}

fn solve_config(kind: ProblemKind, args: &SolveArgs) -> Result<SolveConfig, CliError> {
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let echo: ResultEcho = serde_json::from_str(&text)
            .map_err(|e| usage("--config", format!("{}: {e}", path.display())))?;
        if echo.config.problem != kind {
            return Err(usage(
                "--config",
                format!("configuration is for {}", echo.config.problem.name()),
            ));
        }
        return Ok(echo.config);
    }
    Ok(SolveConfig {
        problem: kind,
        source: required_source(&args.instance)?,
        ga: ga_config(&args.ga, 20)?,
        backend: backend_spec(&args.backend)?,
        format: args.output.format,
        export: args.export,
    })
}

#[derive(Deserialize)]
struct ResultEcho {
    config: SolveConfig,
}

/// Parses and validates command-line arguments (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, out_dir) = match cli.command {
        Command::Partition(a) => (
            CommandConfig::Solve(solve_config(ProblemKind::Partition, &a)?),
            a.output.out,
        ),
        Command::Maxcut(a) => (
            CommandConfig::Solve(solve_config(ProblemKind::MaxCut, &a)?),
            a.output.out,
        ),
        Command::Sweep(a) => {
            if a.n_from < 2 {
                return Err(usage("--n-from", "must be >= 2"));
            }
            if a.n_step < 1 {
                return Err(usage("--n-step", "must be >= 1"));
            }
            if a.n_to > DEFAULT_SWEEP_MAX_N && !a.allow_large {
                return Err(usage(
                    "--n-to",
                    format!("N above {DEFAULT_SWEEP_MAX_N} requires --allow-large"),
                ));
            }
            if a.ga.target.is_some() {
                return Err(usage("--target", "not used by sweep (target is error 0)"));
            }
            (
                CommandConfig::Sweep(SweepConfig {
                    n_from: a.n_from,
                    n_to: a.n_to,
                    n_step: a.n_step,
                    trials: a.trials,
                    ga: ga_config(&a.ga, DEFAULT_SWEEP_CAP)?,
                    format: a.output.format,
                }),
                a.output.out,
            )
        }
        Command::Noise(a) => {
            let problem = if a.maxcut {
                ProblemKind::MaxCut
            } else {
                ProblemKind::Partition
            };
            for &s in &a.sigmas {
                noise_model(s, a.bits, a.offset)?;
            }
            if a.ga.target.is_some() {
                return Err(usage(
                    "--target",
                    "not used by noise (target is the oracle optimum)",
                ));
            }
            (
                CommandConfig::Noise(NoiseConfig {
                    problem,
                    source: required_source(&a.instance)?,
                    sigmas: a.sigmas.clone(),
                    trials: a.trials,
                    model: noise_model(0.0, a.bits, a.offset)?,
                    ga: ga_config(&a.ga, 20)?,
                    format: a.output.format,
                }),
                a.output.out,
            )
        }
        Command::Oracle(a) => {
            let source = required_source(&a.instance)?;
            let problem = match (&source, a.maxcut) {
                (InstanceSource::File(p), _) => Instance::load(p)?.name_kind(),
                (_, true) => ProblemKind::MaxCut,
                (_, false) => ProblemKind::Partition,
            };
            (
                CommandConfig::Oracle { problem, source },
                PathBuf::from("out"),
            )
        }
        Command::ExportPatterns(a) => {
            let spins = parse_spins(&a.spins)?;
            let instance = match instance_source(&a.instance)? {
                None => None,
                Some(InstanceSource::File(p)) => {
                    let kind = Instance::load(&p)?.name_kind();
                    Some((kind, InstanceSource::File(p)))
                }
                Some(src) if a.maxcut => Some((ProblemKind::MaxCut, src)),
                Some(src) => Some((ProblemKind::Partition, src)),
            };
            (CommandConfig::ExportPatterns { spins, instance }, a.out)
        }
    };
    Ok(CliConfig {
        command,
        out_dir,
        threads: cli.threads,
    })
}

impl Instance {
    fn name_kind(&self) -> ProblemKind {
        match self {
            Instance::Partition(_) => ProblemKind::Partition,
            Instance::MaxCut(_) => ProblemKind::MaxCut,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    BudgetExhausted,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::BudgetExhausted => 2,
        }
    }
}

#[derive(Serialize)]
struct ResultFile<'a> {
    problem: &'static str,
    n: usize,
    config: &'a SolveConfig,
    seed: u64,
    history_path: String,
    best: BestEntry,
    converged_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleEntry>,
}

#[derive(Serialize)]
struct BestEntry {
    spins: SpinVector,
    groups: Solution,
    objective: f64,
    intensity: f64,
    iteration: usize,
}

#[derive(Serialize)]
struct OracleEntry {
    value: f64,
    matched: bool,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| Error::io(path, e).into())
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e).into())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn oracle_for(instance: &Instance) -> Result<Option<Optimum>, CliError> {
    if instance.n() <= MAX_BRUTE_FORCE_N {
        Ok(Some(brute_force(instance)?))
    } else {
        eprintln!(
            "note: N = {} exceeds {MAX_BRUTE_FORCE_N}; oracle check skipped",
            instance.n()
        );
        Ok(None)
    }
}

fn execute_solve(cfg: &SolveConfig, out_dir: &Path) -> Result<ExitStatus, CliError> {
    let instance = cfg.source.load(cfg.problem)?;
    let oracle = oracle_for(&instance)?;
    let mut effective = cfg.clone();
    if effective.ga.target.is_none() {
        effective.ga.target = match (&oracle, &instance) {
            (Some(o), _) => Some(o.value),
            // An odd total can never split better than error 1.
            (None, Instance::Partition(p)) => Some((p.total() % 2) as f64),
            (None, Instance::MaxCut(_)) => None,
        };
    }
    let ga = &effective.ga;
    let weights = instance.encode();
    let mut backend: Box<dyn MeasurementBackend> = match &effective.backend {
        BackendSpec::Ideal => Box::new(IdealBackend::new(weights.clone())),
        BackendSpec::Noisy(model) => {
            let seed = RngStream::new(ga.master_seed, 0, 0, Purpose::BackendSeed).derive_seed();
            Box::new(NoisyBackend::new(weights.clone(), *model, seed)?)
        }
        BackendSpec::Replay { path } => Box::new(replay_load(path)?),
    };
    let result: RunResult = run(RunInput::Instance(&instance), &mut backend, ga).map_err(|e| {
        eprintln!("run stopped after {} recorded iterations", e.history.len());
        CliError::Core(e.source)
    })?;

    create_dir(out_dir)?;
    let curve = curve_of(&result);
    let objective_label = match instance {
        Instance::Partition(_) => "partition error",
        Instance::MaxCut(_) => "cut value",
    };
    let history_path = match effective.format {
        Format::Csv => {
            write_file(&out_dir.join("curve.csv"), &curve_csv(&curve))?;
            write_file(
                &out_dir.join("curve.gp"),
                &curve_gnuplot("curve.csv", objective_label),
            )?;
            "curve.csv"
        }
        Format::Json => {
            write_file(&out_dir.join("curve.json"), &to_json(&curve))?;
            "curve.json"
        }
    };

    let best = &result.best;
    let groups = instance.describe(&best.spins)?;
    let objective = groups.objective();
    let oracle_entry = oracle.as_ref().map(|o| OracleEntry {
        value: o.value,
        matched: instance.reaches(objective, o.value),
    });
    let file = ResultFile {
        problem: instance.name(),
        n: instance.n(),
        config: &effective,
        seed: ga.master_seed,
        history_path: history_path.to_string(),
        best: BestEntry {
            spins: best.spins.clone(),
            groups: groups.clone(),
            objective,
            intensity: best.intensity,
            iteration: best.iteration,
        },
        converged_at: result.converged_at,
        oracle: oracle_entry,
    };
    write_file(&out_dir.join("result.json"), &to_json(&file))?;

    if effective.export {
        write_file(&out_dir.join("weights.pgm"), &weights_to_pgm(&weights))?;
        write_file(
            &out_dir.join("best_pattern.pbm"),
            &pattern_to_pbm(&pattern_from_spins(&best.spins)),
        )?;
        let dir = out_dir.join("patterns");
        create_dir(&dir)?;
        for h in &result.history {
            write_file(
                &dir.join(format!("iter_{:04}.pbm", h.iteration)),
                &pattern_to_pbm(&pattern_from_spins(&h.best_spins)),
            )?;
        }
    }

    match &groups {
        Solution::Partition(p) => println!(
            "groups {:?} | {:?}  sums {} | {}  error {}",
            p.group_a, p.group_b, p.sum_a, p.sum_b, p.error
        ),
        Solution::Cut(c) => println!(
            "groups {:?} | {:?}  cut {}",
            c.group_a, c.group_b, c.cut_value
        ),
    }
    match result.converged_at {
        Some(it) => println!("reached target at iteration {it}"),
        None => println!("ran {} iterations", result.history.len()),
    }
    if let (Some(o), Some(e)) = (&oracle, &file.oracle) {
        println!(
            "oracle optimum {} ({})",
            o.value,
            if e.matched { "matched" } else { "not matched" }
        );
    }

    Ok(if ga.target.is_some() && result.converged_at.is_none() {
        ExitStatus::BudgetExhausted
    } else {
        ExitStatus::Success
    })
}

fn execute_sweep(cfg: &SweepConfig, out_dir: &Path) -> Result<ExitStatus, CliError> {
    let rows = bench::scaling_sweep(cfg.n_from, cfg.n_to, cfg.n_step, cfg.trials, &cfg.ga)?;
    create_dir(out_dir)?;
    match cfg.format {
        Format::Csv => {
            write_file(&out_dir.join("sweep.csv"), &sweep_csv(&rows))?;
            write_file(&out_dir.join("sweep.gp"), &sweep_gnuplot("sweep.csv"))?;
        }
        Format::Json => write_file(&out_dir.join("sweep.json"), &to_json(&rows))?,
    }
    for n in (cfg.n_from..=cfg.n_to).step_by(cfg.n_step) {
        let solved = rows
            .iter()
            .filter(|r| r.n == n && r.iterations_to_solve.is_some())
            .count();
        let median =
            bench::median_iterations(&rows, n).map_or_else(|| "-".to_string(), |m| m.to_string());
        println!(
            "N={n:<4} solved {solved}/{}  median iterations {median}",
            cfg.trials
        );
    }
    Ok(if rows.iter().all(|r| r.iterations_to_solve.is_some()) {
        ExitStatus::Success
    } else {
        ExitStatus::BudgetExhausted
    })
}

fn execute_noise(cfg: &NoiseConfig, out_dir: &Path) -> Result<ExitStatus, CliError> {
    let instance = cfg.source.load(cfg.problem)?;
    let rows = bench::noise_robustness(&instance, &cfg.sigmas, cfg.trials, &cfg.ga, cfg.model)?;
    create_dir(out_dir)?;
    match cfg.format {
        Format::Csv => {
            write_file(&out_dir.join("noise.csv"), &noise_csv(&rows))?;
            write_file(&out_dir.join("noise.gp"), &noise_gnuplot("noise.csv"))?;
        }
        Format::Json => write_file(&out_dir.join("noise.json"), &to_json(&rows))?,
    }
    for r in &rows {
        println!("sigma {:<8} success {:.2}", r.sigma, r.success_rate);
    }
    Ok(ExitStatus::Success)
}

fn execute_oracle(problem: ProblemKind, source: &InstanceSource) -> Result<ExitStatus, CliError> {
    let instance = source.load(problem)?;
    let opt = brute_force(&instance)?;
    println!("optimum {}", opt.value);
    println!("witness {}", opt.witness);
    match instance.describe(&opt.witness)? {
        Solution::Partition(p) => println!("groups {:?} | {:?}", p.group_a, p.group_b),
        Solution::Cut(c) => println!("groups {:?} | {:?}", c.group_a, c.group_b),
    }
    Ok(ExitStatus::Success)
}

fn execute_export(
    spins: &SpinVector,
    instance: Option<&(ProblemKind, InstanceSource)>,
    out_dir: &Path,
) -> Result<ExitStatus, CliError> {
    create_dir(out_dir)?;
    let pattern = pattern_from_spins(spins);
    write_file(&out_dir.join("pattern.pbm"), &pattern_to_pbm(&pattern))?;
    if let Some((kind, source)) = instance {
        let inst = source.load(*kind)?;
        let w = inst.encode();
        write_file(&out_dir.join("weights.pgm"), &weights_to_pgm(&w))?;
        println!("intensity {}", pattern.inner_product(&w)?);
    }
    Ok(ExitStatus::Success)
}

/// Runs a validated configuration on a pool of `config.threads` workers.
pub fn execute(config: &CliConfig) -> Result<ExitStatus, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| usage("--threads", e))?;
    pool.install(|| match &config.command {
        CommandConfig::Solve(c) => execute_solve(c, &config.out_dir),
        CommandConfig::Sweep(c) => execute_sweep(c, &config.out_dir),
        CommandConfig::Noise(c) => execute_noise(c, &config.out_dir),
        CommandConfig::Oracle { problem, source } => execute_oracle(*problem, source),
        CommandConfig::ExportPatterns { spins, instance } => {
            execute_export(spins, instance.as_ref(), &config.out_dir)
        }
    })
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match execute(&config) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
