//! Number partition and max cut: encoding into weight images, decoding spin
//! vectors back into groups, exact scoring, and the exhaustive oracle.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_dims, SpinVector, WeightImage};
use crate::rng::{Purpose, RngStream};

/// Largest instance the exhaustive oracle accepts.
pub const MAX_BRUTE_FORCE_N: usize = 26;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumberPartitionInstance {
    numbers: Vec<u64>,
}

impl NumberPartitionInstance {
    pub fn new(numbers: Vec<u64>) -> Result<Self> {
        if numbers.len() < 2 {
            return Err(Error::TooFewElements(numbers.len()));
        }
        if numbers.contains(&0) {
            return Err(Error::InvalidInstance(
                "partition numbers must be >= 1".into(),
            ));
        }
        // products must stay exact in f64
        if numbers.iter().any(|&a| a > 1 << 26) {
            return Err(Error::InvalidInstance(format!(
                "partition numbers must be <= {}",
                1u64 << 26
            )));
        }
        Ok(NumberPartitionInstance { numbers })
    }

    pub fn numbers(&self) -> &[u64] {
        &self.numbers
    }

    pub fn len(&self) -> usize {
        self.numbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numbers.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.numbers.iter().sum()
    }

    /// `|Σ σ_i a_i|`
    pub fn error(&self, s: &SpinVector) -> Result<u64> {
        check_dims(self.len(), s.len())?;
        Ok(signed_sum(&self.numbers, s).unsigned_abs())
    }
}

fn signed_sum(numbers: &[u64], s: &SpinVector) -> i64 {
    numbers
        .iter()
        .zip(s.as_slice())
        .map(|(&a, &sigma)| i64::from(sigma) * a as i64)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxCutInstance {
    weights: WeightImage,
}

impl MaxCutInstance {
    pub fn new(weights: WeightImage) -> Self {
        MaxCutInstance { weights }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(MaxCutInstance {
            weights: WeightImage::from_rows(rows)?,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &WeightImage {
        &self.weights
    }

    /// `Σ_{i<j, σ_i≠σ_j} w_ij`
    pub fn cut_value(&self, s: &SpinVector) -> Result<f64> {
        check_dims(self.n(), s.len())?;
        let spins = s.as_slice();
        let mut cut = 0.0;
        for i in 0..spins.len() {
            for j in i + 1..spins.len() {
                if spins[i] != spins[j] {
                    cut += self.weights.get(i, j);
                }
            }
        }
        Ok(cut)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "lowercase")]
pub enum Instance {
    Partition(NumberPartitionInstance),
    #[serde(rename = "maxcut")]
    MaxCut(MaxCutInstance),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Partition(p) => p.len(),
            Instance::MaxCut(m) => m.n(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Instance::Partition(_) => "partition",
            Instance::MaxCut(_) => "maxcut",
        }
    }

    pub fn sense(&self) -> Sense {
        match self {
            Instance::Partition(_) => Sense::Minimize,
            Instance::MaxCut(_) => Sense::Maximize,
        }
    }

    pub fn encode(&self) -> WeightImage {
        match self {
            Instance::Partition(p) => encode_number_partition(p),
            Instance::MaxCut(m) => encode_max_cut(m),
        }
    }

    /// Partition error (lower is better) or cut value (higher is better).
    pub fn objective(&self, s: &SpinVector) -> Result<f64> {
        match self {
            Instance::Partition(p) => p.error(s).map(|e| e as f64),
            Instance::MaxCut(m) => m.cut_value(s),
        }
    }

    /// Tolerance used when comparing objective values. Partition objectives
    /// are integers and compare exactly.
    pub fn tolerance(&self) -> f64 {
        match self {
            Instance::Partition(_) => 0.0,
            Instance::MaxCut(m) => 1e-9 * m.weights().full_scale().max(1.0),
        }
    }

    /// `a` strictly better than `b`.
    pub fn is_better(&self, a: f64, b: f64) -> bool {
        let tol = self.tolerance();
        match self.sense() {
            Sense::Minimize => a < b - tol,
            Sense::Maximize => a > b + tol,
        }
    }

    /// `value` is at least as good as `target`.
    pub fn reaches(&self, value: f64, target: f64) -> bool {
        !self.is_better(target, value)
    }

    pub fn describe(&self, s: &SpinVector) -> Result<Solution> {
        match self {
            Instance::Partition(p) => decode_partition(s, p).map(Solution::Partition),
            Instance::MaxCut(m) => decode_cut(s, m).map(Solution::Cut),
        }
    }

    /// Parses the plain-text instance format:
    ///
    /// ```text
    /// partition
    /// 1 2 5 6 7 9
    /// ```
    ///
    /// or `maxcut`, then `N`, then `N` rows of `N` weights.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, kind) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty instance file".into(),
        })?;
        match kind {
            "partition" => {
                let (line, body) = lines.next().ok_or(Error::Parse {
                    line: line_no + 1,
                    message: "missing number list".into(),
                })?;
                let numbers = body
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<u64>().map_err(|e| Error::Parse {
                            line,
                            message: format!("bad number {tok:?}: {e}"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                NumberPartitionInstance::new(numbers).map(Instance::Partition)
            }
            "maxcut" => {
                let (line, header) = lines.next().ok_or(Error::Parse {
                    line: line_no + 1,
                    message: "missing node count".into(),
                })?;
                let n: usize = header.parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad node count {header:?}: {e}"),
                })?;
                let mut rows = Vec::with_capacity(n);
                for _ in 0..n {
                    let (line, body) = lines.next().ok_or(Error::Parse {
                        line: line + rows.len() + 1,
                        message: format!("expected {n} weight rows, found {}", rows.len()),
                    })?;
                    let row = body
                        .split_whitespace()
                        .map(|tok| {
                            tok.parse::<f64>().map_err(|e| Error::Parse {
                                line,
                                message: format!("bad weight {tok:?}: {e}"),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if row.len() != n {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected {n} weights, found {}", row.len()),
                        });
                    }
                    rows.push(row);
                }
                MaxCutInstance::from_rows(&rows).map(Instance::MaxCut)
            }
            other => Err(Error::Parse {
                line: line_no,
                message: format!("unknown problem kind {other:?}, expected partition or maxcut"),
            }),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Instance::Partition(p) => {
                out.push_str("partition\n");
                let nums: Vec<String> = p.numbers().iter().map(u64::to_string).collect();
                out.push_str(&nums.join(" "));
                out.push('\n');
            }
            Instance::MaxCut(m) => {
                let n = m.n();
                writeln!(out, "maxcut\n{n}").unwrap();
                for i in 0..n {
                    let row: Vec<String> =
                        m.weights().row(i).iter().map(|w| w.to_string()).collect();
                    out.push_str(&row.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSolution {
    pub group_a: Vec<u64>,
    pub group_b: Vec<u64>,
    pub sum_a: u64,
    pub sum_b: u64,
    pub error: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSolution {
    pub group_a: Vec<usize>,
    pub group_b: Vec<usize>,
    pub cut_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Solution {
    Partition(PartitionSolution),
    Cut(CutSolution),
}

impl Solution {
    pub fn objective(&self) -> f64 {
        match self {
            Solution::Partition(p) => p.error as f64,
            Solution::Cut(c) => c.cut_value,
        }
    }
}

/// Couplings `w_ij = a_i a_j` off the diagonal.
pub fn encode_number_partition(inst: &NumberPartitionInstance) -> WeightImage {
    let a = inst.numbers();
    let n = a.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = (a[i] * a[j]) as f64;
            }
        }
    }
    WeightImage::new(n, w).expect("products of positive numbers form a valid image")
}

/// The graph weights are the image; the cut objective comes from the
/// disagreement encoding of the illumination pattern.
pub fn encode_max_cut(inst: &MaxCutInstance) -> WeightImage {
    inst.weights().clone()
}

pub fn decode_partition(
    s: &SpinVector,
    inst: &NumberPartitionInstance,
) -> Result<PartitionSolution> {
    check_dims(inst.len(), s.len())?;
    let (mut group_a, mut group_b) = (Vec::new(), Vec::new());
    for (&a, &sigma) in inst.numbers().iter().zip(s.as_slice()) {
        if sigma == 1 {
            group_a.push(a);
        } else {
            group_b.push(a);
        }
    }
    let sum_a: u64 = group_a.iter().sum();
    let sum_b: u64 = group_b.iter().sum();
    Ok(PartitionSolution {
        group_a,
        group_b,
        sum_a,
        sum_b,
        error: sum_a.abs_diff(sum_b),
    })
}

pub fn decode_cut(s: &SpinVector, inst: &MaxCutInstance) -> Result<CutSolution> {
    let cut_value = inst.cut_value(s)?;
    let (group_a, group_b) = (0..s.len()).partition(|&i| s.get(i) == 1);
    Ok(CutSolution {
        group_a,
        group_b,
        cut_value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub value: f64,
    pub witness: SpinVector,
}

/// Exhaustive search over the `2^(N-1)` states with `σ_0 = +1`.
///
/// States are visited in Gray-code order so each step flips one spin and
/// updates the objective incrementally. Among optimal states the one with
/// the lowest [`SpinVector::index`] is returned.
pub fn brute_force(instance: &Instance) -> Result<Optimum> {
    let n = instance.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_BRUTE_FORCE_N,
        });
    }
    let free = n - 1;
    let total: u64 = 1 << free;
    let chunk_bits = free.min(12);
    let chunk_len: u64 = 1 << chunk_bits;
    let chunks = total / chunk_len;

    let best = match instance {
        Instance::Partition(p) => (0..chunks)
            .into_par_iter()
            .map(|c| partition_chunk(p.numbers(), c * chunk_len, chunk_len))
            .reduce_with(|a, b| pick(instance, a, b))
            .expect("at least one chunk"),
        Instance::MaxCut(m) => (0..chunks)
            .into_par_iter()
            .map(|c| cut_chunk(m.weights(), c * chunk_len, chunk_len))
            .reduce_with(|a, b| pick(instance, a, b))
            .expect("at least one chunk"),
    };
    let witness = SpinVector::from_index(n, best.1)?;
    // Report the witness's value computed directly rather than the running sum.
    let value = instance.objective(&witness)?;
    Ok(Optimum { value, witness })
}

/// (value, state index)
type Candidate = (f64, u64);

fn pick(instance: &Instance, a: Candidate, b: Candidate) -> Candidate {
    if instance.is_better(b.0, a.0) || (!instance.is_better(a.0, b.0) && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[inline]
fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

/// Gray code `g` over the free spins maps to a state index with spin 0 fixed.
#[inline]
fn state_index(g: u64) -> u64 {
    g << 1
}

fn partition_chunk(numbers: &[u64], start: u64, len: u64) -> Candidate {
    let idx0 = state_index(gray(start));
    let mut sum: i64 = numbers
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if (idx0 >> i) & 1 == 1 {
                -(a as i64)
            } else {
                a as i64
            }
        })
        .sum();
    let mut state = idx0;
    let mut best = (sum.unsigned_abs(), state);
    for k in start + 1..start + len {
        let spin = (k.trailing_zeros() + 1) as usize;
        let a = numbers[spin] as i64;
        if (state >> spin) & 1 == 1 {
            sum += 2 * a;
        } else {
            sum -= 2 * a;
        }
        state ^= 1 << spin;
        let err = sum.unsigned_abs();
        if err < best.0 || (err == best.0 && state < best.1) {
            best = (err, state);
        }
    }
    (best.0 as f64, best.1)
}

fn cut_chunk(w: &WeightImage, start: u64, len: u64) -> Candidate {
    let n = w.n();
    let mut state = state_index(gray(start));
    let side = |state: u64, i: usize| (state >> i) & 1;
    let mut cut = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if side(state, i) != side(state, j) {
                cut += w.get(i, j);
            }
        }
    }
    let tol = 1e-9 * w.full_scale().max(1.0);
    let mut best = (cut, state);
    for k in start + 1..start + len {
        let spin = (k.trailing_zeros() + 1) as usize;
        let row = w.row(spin);
        let mine = side(state, spin);
        // Edges to the same side become cut, edges across become uncut.
        let mut delta = 0.0;
        for (j, &wj) in row.iter().enumerate() {
            if j != spin {
                if side(state, j) == mine {
                    delta += wj;
                } else {
                    delta -= wj;
                }
            }
        }
        cut += delta;
        state ^= 1 << spin;
        if cut > best.0 + tol || (cut >= best.0 - tol && state < best.1) {
            best = (cut, state);
        }
    }
    best
}

/// Integers uniform in `[1, 100]`.
pub fn random_partition_instance(n: usize, stream: RngStream) -> Result<NumberPartitionInstance> {
    let mut rng = stream.rng();
    NumberPartitionInstance::new((0..n).map(|_| rng.random_range(1..=100)).collect())
}

/// Integers in `[1, 100]` that are guaranteed to admit a zero-error split.
///
/// Draws `n - 1` values, splits them greedily (largest first into the lighter
/// group) and appends the greedy imbalance as the last value, which is
/// always at most the largest draw. Draws whose greedy split is already
/// perfect are rejected. The result is shuffled.
pub fn perfect_partition_instance(n: usize, stream: RngStream) -> Result<NumberPartitionInstance> {
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    let mut rng = stream.rng();
    loop {
        let mut numbers: Vec<u64> = (0..n - 1).map(|_| rng.random_range(1..=100)).collect();
        let mut sorted = numbers.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let (mut light, mut heavy) = (0u64, 0u64);
        for a in sorted {
            light += a;
            if light > heavy {
                std::mem::swap(&mut light, &mut heavy);
            }
        }
        let gap = heavy - light;
        if gap == 0 {
            continue;
        }
        numbers.push(gap);
        numbers.shuffle(&mut rng);
        return NumberPartitionInstance::new(numbers);
    }
}

/// Complete graph with weights uniform in `[0, 1)` at three decimals.
pub fn random_max_cut_instance(n: usize, seed: u64) -> Result<MaxCutInstance> {
    if n < 2 {
        return Err(Error::TooFewElements(n));
    }
    let mut rng = RngStream::new(seed, n as u64, 0, Purpose::Instance).rng();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0..1000u32) as f64 / 1000.0;
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    Ok(MaxCutInstance::new(WeightImage::new(n, w)?))
}
