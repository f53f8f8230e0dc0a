//! Turning measured bitstrings into maximal independent sets.
//!
//! Shots whose decoded vertex set is not independent are discarded; every
//! other shot is extended greedily by descending weight. The best refined
//! set is the candidate answer of the quantum route.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::rydberg::ShotSet;
use crate::seed;
use crate::solvers::mwis::augment_members;

/// Decode each distinct bitstring into its vertex set.
///
/// Bit `0` at position `i` (empty trap) selects vertex `i`.
pub fn decode_shots(shots: &ShotSet, g: &WeightedGraph) -> Result<Vec<(VertexSet, usize)>> {
    shots
        .counts
        .iter()
        .map(|(pattern, &count)| Ok((decode(pattern, g)?, count)))
        .collect()
}

fn decode(pattern: &str, g: &WeightedGraph) -> Result<VertexSet> {
    if pattern.len() != g.n() {
        return Err(Error::Input(format!(
            "bitstring has length {} but the graph has {} vertices",
            pattern.len(),
            g.n()
        )));
    }
    let members = pattern.bytes().enumerate().filter(|(_, b)| *b == b'0').map(|(i, _)| i);
    VertexSet::new(g, members)
}

fn encode(set: &VertexSet, n: usize) -> String {
    let mask = set.mask(n);
    mask.into_iter().map(|m| if m { '0' } else { '1' }).collect()
}

/// Add vertices in descending weight order (ties: lowest index) while the
/// set stays independent.
pub fn greedy_augment(s: &VertexSet, g: &WeightedGraph) -> Result<VertexSet> {
    if !g.is_independent(s)? {
        return Err(Error::Contract("greedy_augment requires an independent set".into()));
    }
    VertexSet::new(g, augment_members(g, s.members()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSet {
    pub bitstring: String,
    pub members: Vec<usize>,
    pub count: usize,
    pub independent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedSet {
    /// Raw bitstring this set was refined from.
    pub source: String,
    pub bitstring: String,
    pub members: Vec<usize>,
    pub objective: f64,
    pub count: usize,
    /// Normalized Hamming distance between source and refined bitstrings.
    pub hamming: f64,
    /// Whether the refined bitstring itself was observed among the raw shots.
    pub sampled: bool,
}

/// Shot counts per category of the raw and refined histograms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub independent: usize,
    pub non_independent: usize,
    pub best: usize,
    pub refined_sampled: usize,
    pub refined_augmented: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementOutcome {
    pub raw_sets: Vec<RawSet>,
    pub feasible_sets: Vec<RawSet>,
    pub refined_sets: Vec<RefinedSet>,
    pub best: VertexSet,
    /// True when no shot was independent and `best` is the greedy
    /// augmentation of the empty set.
    pub best_from_fallback: bool,
    pub n_nonindependent: usize,
    pub hamming_mean: f64,
    pub hamming_max: f64,
    pub histogram: Histogram,
}

/// Higher objective first; equal objectives prefer the lexicographically
/// smallest member list.
fn better(a: &VertexSet, b: &VertexSet) -> bool {
    let tol = 1e-12 * a.objective().abs().max(b.objective().abs()).max(1.0);
    if a.objective() > b.objective() + tol {
        return true;
    }
    if a.objective() < b.objective() - tol {
        return false;
    }
    a.members().cmp(b.members()) == Ordering::Less
}

/// Discard non-independent shots, augment the rest, pick the best.
pub fn refine(shots: &ShotSet, g: &WeightedGraph) -> Result<RefinementOutcome> {
    let n = g.n();
    let decoded = decode_shots(shots, g)?;
    let mut raw_sets = Vec::with_capacity(decoded.len());
    let mut refined_sets = Vec::new();
    let mut n_nonindependent = 0;
    let mut best: Option<VertexSet> = None;
    let mut hsum = 0.0;
    let mut hmax: f64 = 0.0;
    let mut kept = 0usize;
    for ((pattern, _), (set, count)) in shots.counts.iter().zip(decoded) {
        let independent = g.independent_members(set.members());
        raw_sets.push(RawSet {
            bitstring: pattern.clone(),
            members: set.members().to_vec(),
            count,
            independent,
        });
        if !independent {
            n_nonindependent += count;
            continue;
        }
        let refined = VertexSet::new(g, augment_members(g, set.members()))?;
        let bitstring = encode(&refined, n);
        let hamming = if n == 0 {
            0.0
        } else {
            pattern.bytes().zip(bitstring.bytes()).filter(|(a, b)| a != b).count() as f64 / n as f64
        };
        hsum += hamming * count as f64;
        hmax = hmax.max(hamming);
        kept += count;
        if best.as_ref().is_none_or(|b| better(&refined, b)) {
            best = Some(refined.clone());
        }
        refined_sets.push(RefinedSet {
            source: pattern.clone(),
            sampled: shots.counts.contains_key(&bitstring),
            bitstring,
            members: refined.members().to_vec(),
            objective: refined.objective(),
            count,
            hamming,
        });
    }
    let best_from_fallback = best.is_none();
    let best = match best {
        Some(b) => b,
        None => VertexSet::new(g, augment_members(g, &[]))?,
    };
    let mut histogram = Histogram::default();
    for r in &raw_sets {
        if !r.independent {
            histogram.non_independent += r.count;
        } else if r.members == best.members() {
            histogram.best += r.count;
        } else {
            histogram.independent += r.count;
        }
    }
    for r in &refined_sets {
        if r.sampled {
            histogram.refined_sampled += r.count;
        } else {
            histogram.refined_augmented += r.count;
        }
    }
    let feasible_sets = raw_sets.iter().filter(|r| r.independent).cloned().collect();
    Ok(RefinementOutcome {
        raw_sets,
        feasible_sets,
        refined_sets,
        best,
        best_from_fallback,
        n_nonindependent,
        hamming_mean: if kept == 0 { 0.0 } else { hsum / kept as f64 },
        hamming_max: hmax,
        histogram,
    })
}

/// Bootstrap the best refined objective over `reps` resamples of
/// `subsample` shots drawn with replacement from the empirical distribution.
pub fn bootstrap_objectives(
    shots: &ShotSet,
    g: &WeightedGraph,
    subsample: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if subsample > shots.shots {
        return Err(Error::Input(format!(
            "subsample {subsample} exceeds the {} recorded shots",
            shots.shots
        )));
    }
    let patterns: Vec<&String> = shots.counts.keys().collect();
    let counts: Vec<usize> = shots.counts.values().copied().collect();
    // Best refinement per distinct bitstring, computed once.
    let mut per_pattern: HashMap<&str, Option<VertexSet>> = HashMap::new();
    for p in &patterns {
        let set = decode(p, g)?;
        let refined = g
            .independent_members(set.members())
            .then(|| VertexSet::new(g, augment_members(g, set.members())))
            .transpose()?;
        per_pattern.insert(p.as_str(), refined);
    }
    let fallback = VertexSet::new(g, augment_members(g, &[]))?;
    let total = shots.shots;
    let out = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seed::rng(seed::derive_seed(seed, &format!("bootstrap-{rep}")));
            let mut drawn: BTreeMap<usize, ()> = BTreeMap::new();
            for _ in 0..subsample {
                let mut u = rng.random_range(0..total);
                let idx = counts
                    .iter()
                    .position(|&c| {
                        if u < c {
                            true
                        } else {
                            u -= c;
                            false
                        }
                    })
                    .expect("u < total");
                drawn.insert(idx, ());
            }
            let mut best: Option<&VertexSet> = None;
            for idx in drawn.keys() {
                if let Some(Some(r)) = per_pattern.get(patterns[*idx].as_str()) {
                    if best.is_none_or(|b| better(r, b)) {
                        best = Some(r);
                    }
                }
            }
            best.unwrap_or(&fallback).objective()
        })
        .collect();
    Ok(out)
}
