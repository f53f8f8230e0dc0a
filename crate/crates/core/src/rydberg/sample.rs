use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// How measured bits map to the independent set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// An empty trap reads as `0`; the atom was in the Rydberg state and the
    /// vertex is selected. An occupied trap (`1`) means excluded.
    #[default]
    EmptyTrapIsSelected,
}

/// Measurement record of one run: bitstring (character `i` is atom `i`) to count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotSet {
    pub shots: usize,
    pub seed: u64,
    pub counts: BTreeMap<String, usize>,
    #[serde(default)]
    pub convention: Convention,
}

impl ShotSet {
    pub fn new(counts: BTreeMap<String, usize>, seed: u64) -> Result<Self> {
        let mut len = None;
        for k in counts.keys() {
            if k.bytes().any(|b| b != b'0' && b != b'1') {
                return Err(Error::Input(format!("bitstring {k:?} contains non-binary characters")));
            }
            if *len.get_or_insert(k.len()) != k.len() {
                return Err(Error::Input("bitstrings have different lengths".into()));
            }
        }
        Ok(Self {
            shots: counts.values().sum(),
            seed,
            counts,
            convention: Convention::EmptyTrapIsSelected,
        })
    }

    /// Shot set where every shot reads `pattern`.
    pub fn point_mass(pattern: &str, shots: usize) -> Result<Self> {
        Self::new(BTreeMap::from([(pattern.to_string(), shots)]), 0)
    }

    pub fn n_qubits(&self) -> Option<usize> {
        self.counts.keys().next().map(String::len)
    }
}

/// Bitstring for basis index `k` under the empty-trap convention: a Rydberg
/// atom (bit set in `k`) reads `0`.
pub fn basis_pattern(k: usize, n: usize) -> String {
    (0..n).map(|i| if k >> i & 1 == 1 { '0' } else { '1' }).collect()
}

/// Draw `shots` computational-basis outcomes from `state`.
pub fn sample(state: &[Complex64], shots: usize, seed: u64) -> Result<ShotSet> {
    if shots == 0 {
        return Err(Error::Input("shots must be positive".into()));
    }
    let dim = state.len();
    if !dim.is_power_of_two() {
        return Err(Error::Input(format!("state dimension {dim} is not a power of two")));
    }
    let n = dim.trailing_zeros() as usize;
    let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Input(format!("state is not normalized (norm² = {norm})")));
    }
    let mut cdf = Vec::with_capacity(dim);
    let mut acc = 0.0;
    for a in state {
        acc += a.norm_sqr() / norm;
        cdf.push(acc);
    }
    let mut rng = seed::rng(seed);
    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(dim - 1);
        *hits.entry(k).or_default() += 1;
    }
    let counts = hits.into_iter().map(|(k, c)| (basis_pattern(k, n), c)).collect();
    ShotSet::new(counts, seed)
}
