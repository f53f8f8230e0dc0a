//! Maximum weight independent set: enumeration oracle, branch and bound, greedy.

use std::time::{Duration, Instant};

use super::bits::Bits;
use super::{SolveResult, Status};
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

pub const BRUTEFORCE_LIMIT: usize = 25;

/// Exact optimum by enumerating all `2^n` subsets.
pub fn mwis_bruteforce(g: &WeightedGraph) -> Result<SolveResult<VertexSet>> {
    let start = Instant::now();
    let n = g.n();
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::Size {
            what: "vertices",
            got: n,
            limit: BRUTEFORCE_LIMIT,
        });
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let mut best_mask = 0u32;
    let mut best = 0.0;
    for mask in 1u32..(1u32 << n) {
        let mut independent = true;
        let mut w = 0.0;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if adj[v] & mask != 0 {
                independent = false;
                break;
            }
            w += g.weight(v);
        }
        if independent && w > best {
            best = w;
            best_mask = mask;
        }
    }
    let set = VertexSet::new(g, (0..n).filter(|&v| best_mask >> v & 1 == 1))?;
    let obj = set.objective();
    Ok(SolveResult::new(set, obj, Status::Optimal, start.elapsed()))
}

/// Vertices sorted by descending weight, lowest index first among ties.
pub(crate) fn weight_order(g: &WeightedGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| g.weight(b).total_cmp(&g.weight(a)).then(a.cmp(&b)));
    order
}

/// Extend `members` (assumed independent) greedily by descending weight.
pub(crate) fn augment_members(g: &WeightedGraph, members: &[usize]) -> Vec<usize> {
    let mut blocked = vec![false; g.n()];
    let mut out = members.to_vec();
    for &v in members {
        blocked[v] = true;
        for &u in g.neighbors(v) {
            blocked[u] = true;
        }
    }
    for v in weight_order(g) {
        if !blocked[v] {
            out.push(v);
            blocked[v] = true;
            for &u in g.neighbors(v) {
                blocked[u] = true;
            }
        }
    }
    out
}

/// Repeatedly take the heaviest vertex compatible with the current set.
///
/// Ties go to the lowest vertex index, so the output is deterministic. The
/// result is always a maximal independent set.
pub fn greedy_mwis(g: &WeightedGraph) -> SolveResult<VertexSet> {
    let start = Instant::now();
    let set = VertexSet::new(g, augment_members(g, &[])).expect("indices come from the graph");
    let obj = set.objective();
    SolveResult::new(set, obj, Status::Feasible, start.elapsed())
}

struct Search {
    weights: Vec<f64>,
    neighbors: Vec<Bits>,
    by_weight: Vec<usize>,
    best: f64,
    best_set: Vec<usize>,
    current: Vec<usize>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

impl Search {
    fn tol(&self) -> f64 {
        1e-12 * self.best.abs().max(1.0)
    }

    /// Weighted clique-cover bound: each greedy clique contributes its heaviest member.
    fn clique_cover_bound(&self, cand: &Bits) -> f64 {
        let mut cliques: Vec<Vec<usize>> = Vec::new();
        let mut bound = 0.0;
        for &v in &self.by_weight {
            if !cand.contains(v) {
                continue;
            }
            match cliques
                .iter_mut()
                .find(|c| c.iter().all(|&u| self.neighbors[v].contains(u)))
            {
                Some(c) => c.push(v),
                None => {
                    bound += self.weights[v];
                    cliques.push(vec![v]);
                }
            }
        }
        bound
    }

    fn expand(&mut self, cand: Bits, cur: f64) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes % 1024 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    return;
                }
            }
        }
        let Some(v) = cand.iter().next() else {
            if cur > self.best + self.tol() {
                self.best = cur;
                self.best_set = self.current.clone();
            }
            return;
        };
        let sum: f64 = cand.iter().map(|u| self.weights[u]).sum();
        if cur + sum <= self.best + self.tol() {
            return;
        }
        if cur + self.clique_cover_bound(&cand) <= self.best + self.tol() {
            return;
        }
        let mut with = cand.clone();
        with.remove(v);
        let isolated = !with.intersects(&self.neighbors[v]);
        with.difference_with(&self.neighbors[v]);
        self.current.push(v);
        self.expand(with, cur + self.weights[v]);
        self.current.pop();
        if isolated {
            // Taking v never hurts when it has no remaining neighbour.
            return;
        }
        let mut without = cand;
        without.remove(v);
        self.expand(without, cur);
    }
}

/// Branch and bound with a deadline.
///
/// Vertices are branched on in order of decreasing weight-to-degree ratio;
/// nodes are pruned by the residual weight sum and by a weighted clique
/// cover. The greedy solution seeds the incumbent, so a timeout still
/// returns a maximal independent set. `budget = None` runs to optimality.
pub fn mwis_exact(g: &WeightedGraph, budget: Option<Duration>) -> SolveResult<VertexSet> {
    let start = Instant::now();
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    let ratio = |v: usize| g.weight(v) / (g.degree(v) as f64 + 1.0);
    order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(a.cmp(&b)));
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let weights: Vec<f64> = order.iter().map(|&v| g.weight(v)).collect();
    let neighbors: Vec<Bits> = order
        .iter()
        .map(|&v| {
            let mut b = Bits::new(n);
            for &u in g.neighbors(v) {
                b.insert(pos[u]);
            }
            b
        })
        .collect();
    let mut by_weight: Vec<usize> = (0..n).collect();
    by_weight.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));

    let greedy = greedy_mwis(g);
    let mut search = Search {
        weights,
        neighbors,
        by_weight,
        best: greedy.objective,
        best_set: greedy.solution.members().iter().map(|&v| pos[v]).collect(),
        current: Vec::new(),
        deadline: budget.map(|b| start + b),
        nodes: 0,
        timed_out: false,
    };
    search.expand(Bits::full(n), 0.0);
    let set = VertexSet::new(g, search.best_set.iter().map(|&k| order[k])).expect("valid indices");
    let status = if search.timed_out {
        Status::FeasibleTimeout
    } else {
        Status::Optimal
    };
    let obj = set.objective();
    SolveResult::new(set, obj, status, start.elapsed())
}
