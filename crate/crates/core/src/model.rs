//! Spin states, coupling images and the Ising energy.
//!
//! The energy of a spin configuration `s` under couplings `w` is
//!
//! ```text
//! H(s) = -Σ_i Σ_j s_i s_j w_ij
//! ```
//!
//! summed over all ordered pairs. Weight images keep a zero diagonal, so
//! the self-coupling terms vanish and `H(s) = -2 Σ_{i<j} s_i s_j w_ij`.

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A candidate solution: one `+1`/`-1` state per element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(states: Vec<i8>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::TooFewElements(states.len()));
        }
        if let Some((index, &value)) = states.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::InvalidSpin {
                index,
                value: value as i64,
            });
        }
        Ok(SpinVector(states))
    }

    /// All spins `+1`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    /// Spin `i` is `-1` exactly when bit `i` of `index` is set.
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| if (index >> i) & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub(crate) fn from_vec_unchecked(states: Vec<i8>) -> Self {
        debug_assert!(states.len() >= 2 && states.iter().all(|&v| v == 1 || v == -1));
        SpinVector(states)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    /// Global sign flip.
    pub fn flipped(&self) -> Self {
        SpinVector(self.0.iter().map(|&v| -v).collect())
    }

    /// Inverse of [`SpinVector::from_index`].
    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == -1)
            .fold(0u64, |acc, (i, _)| acc | (1 << i))
    }
}

impl Neg for &SpinVector {
    type Output = SpinVector;

    fn neg(self) -> SpinVector {
        self.flipped()
    }
}

impl TryFrom<Vec<i8>> for SpinVector {
    type Error = Error;

    fn try_from(states: Vec<i8>) -> Result<Self> {
        SpinVector::new(states)
    }
}

impl From<SpinVector> for Vec<i8> {
    fn from(s: SpinVector) -> Self {
        s.0
    }
}

impl fmt::Display for SpinVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|&v| if v == 1 { "+1" } else { "-1" })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Symmetric, non-negative coupling matrix with a zero diagonal, stored
/// row-major at full precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightImageRepr", into = "WeightImageRepr")]
pub struct WeightImage {
    n: usize,
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightImageRepr {
    n: usize,
    weights: Vec<f64>,
}

impl TryFrom<WeightImageRepr> for WeightImage {
    type Error = Error;

    fn try_from(r: WeightImageRepr) -> Result<Self> {
        WeightImage::new(r.n, r.weights)
    }
}

impl From<WeightImage> for WeightImageRepr {
    fn from(w: WeightImage) -> Self {
        WeightImageRepr {
            n: w.n,
            weights: w.w,
        }
    }
}

impl WeightImage {
    pub fn new(n: usize, w: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewElements(n));
        }
        if w.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: w.len(),
            });
        }
        for i in 0..n {
            if w[i * n + i] != 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "diagonal entry ({i},{i}) is {}, must be 0",
                    w[i * n + i]
                )));
            }
            for j in 0..n {
                let v = w[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidWeights(format!(
                        "entry ({i},{j}) is {v}, must be finite and non-negative"
                    )));
                }
                if v != w[j * n + i] {
                    return Err(Error::InvalidWeights(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(WeightImage { n, w })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    /// Total image energy `Σ_{i≠j} w_ij`, the intensity of an all-bright
    /// off-diagonal pattern.
    pub fn full_scale(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }

    /// Non-negative linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &WeightImage, b: f64) -> Result<WeightImage> {
        check_dims(self.n, other.n)?;
        let w = self
            .w
            .iter()
            .zip(&other.w)
            .map(|(x, y)| a * x + b * y)
            .collect();
        WeightImage::new(self.n, w)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Ising energy `-Σ_i Σ_j s_i s_j w_ij` over all ordered pairs.
pub fn hamiltonian(s: &SpinVector, w: &WeightImage) -> Result<f64> {
    check_dims(w.n(), s.len())?;
    let spins = s.as_slice();
    let mut h = 0.0;
    for (i, &si) in spins.iter().enumerate() {
        let row = w.row(i);
        let mut acc = 0.0;
        for (j, &sj) in spins.iter().enumerate() {
            acc += f64::from(sj) * row[j];
        }
        h += f64::from(si) * acc;
    }
    Ok(-h)
}
