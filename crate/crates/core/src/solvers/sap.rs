//! Spectrum assignment as minimum-cost coloring of the path conflict graph.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{SolveResult, Status};
use crate::error::{Error, Result};
use crate::graph::{ColoringInstance, WeightedGraph};

pub const EXACT_LIMIT: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SapMode {
    Exact,
    Dsatur,
}

impl std::str::FromStr for SapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "dsatur" => Ok(Self::Dsatur),
            other => Err(Error::Input(format!("unknown SAP mode {other:?}"))),
        }
    }
}

/// Band index (0-based) per path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub band_of: Vec<usize>,
    /// Number of distinct bands in use.
    pub bands_used: usize,
    /// When infeasible: a clique of the conflict graph larger than the band
    /// set, if one was found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clique_certificate: Option<Vec<usize>>,
}

impl Coloring {
    fn from_bands(band_of: Vec<usize>) -> Self {
        let mut used = band_of.clone();
        used.sort_unstable();
        used.dedup();
        Self {
            bands_used: used.len(),
            band_of,
            clique_certificate: None,
        }
    }

    /// No conflicting pair shares a band and every band index is available.
    pub fn is_proper_for(&self, inst: &ColoringInstance) -> bool {
        self.band_of.len() == inst.n_paths()
            && self.band_of.iter().all(|&q| q < inst.n_bands())
            && inst.conflicts.iter().all(|&(p, r)| self.band_of[p] != self.band_of[r])
    }

    pub fn cost(&self, inst: &ColoringInstance) -> f64 {
        self.band_of.iter().enumerate().map(|(p, &q)| inst.cost(p, q)).sum()
    }
}

/// Saturation-degree greedy coloring with unbounded palette. Ties on
/// saturation go to the higher degree, then the lower index.
pub fn dsatur(g: &WeightedGraph) -> Vec<usize> {
    let n = g.n();
    let mut band = vec![usize::MAX; n];
    let mut seen: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut saturation = vec![0usize; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| band[v] == usize::MAX)
            .max_by(|&a, &b| {
                saturation[a]
                    .cmp(&saturation[b])
                    .then(g.degree(a).cmp(&g.degree(b)))
                    .then(b.cmp(&a))
            })
            .expect("uncolored vertex remains");
        let q = (0..)
            .find(|&q| !seen[v].get(q).copied().unwrap_or(false))
            .expect("unbounded");
        band[v] = q;
        for &u in g.neighbors(v) {
            if seen[u].len() <= q {
                seen[u].resize(q + 1, false);
            }
            if !seen[u][q] {
                seen[u][q] = true;
                saturation[u] += 1;
            }
        }
    }
    band
}

/// Largest clique by simple branch and bound; graphs here have ≤ 30 vertices.
fn max_clique(g: &WeightedGraph) -> Vec<usize> {
    fn grow(g: &WeightedGraph, cur: &mut Vec<usize>, cand: Vec<usize>, best: &mut Vec<usize>) {
        if cand.is_empty() {
            if cur.len() > best.len() {
                *best = cur.clone();
            }
            return;
        }
        for (i, &v) in cand.iter().enumerate() {
            if cur.len() + cand.len() - i <= best.len() {
                return;
            }
            let next: Vec<usize> = cand[i + 1..].iter().copied().filter(|&u| g.has_edge(u, v)).collect();
            cur.push(v);
            grow(g, cur, next, best);
            cur.pop();
        }
    }
    let mut best = Vec::new();
    grow(g, &mut Vec::new(), (0..g.n()).collect(), &mut best);
    best
}

/// Smallest palette that properly colors `g`, with a witness coloring.
///
/// Colors are introduced in index order, so permutations of an existing
/// partial coloring are never revisited.
fn chromatic(g: &WeightedGraph, lower: usize, upper: Vec<usize>) -> (usize, Vec<usize>) {
    fn fill(g: &WeightedGraph, color: &mut [usize], used: usize, limit: usize) -> bool {
        let n = g.n();
        let mut pick: Option<(usize, usize)> = None;
        for v in (0..n).filter(|&v| color[v] == usize::MAX) {
            let mut seen = vec![false; limit];
            for &u in g.neighbors(v) {
                if color[u] != usize::MAX {
                    seen[color[u]] = true;
                }
            }
            let sat = seen.iter().filter(|x| **x).count();
            if pick.is_none_or(|(pv, ps)| sat > ps || (sat == ps && g.degree(v) > g.degree(pv))) {
                pick = Some((v, sat));
            }
        }
        let Some((v, _)) = pick else {
            return true;
        };
        for q in 0..(used + 1).min(limit) {
            if g.neighbors(v).iter().any(|&u| color[u] == q) {
                continue;
            }
            color[v] = q;
            if fill(g, color, used.max(q + 1), limit) {
                return true;
            }
            color[v] = usize::MAX;
        }
        false
    }
    let ub = upper.iter().map(|&q| q + 1).max().unwrap_or(0);
    for limit in lower..ub {
        let mut color = vec![usize::MAX; g.n()];
        if fill(g, &mut color, 0, limit) {
            return (limit, color);
        }
    }
    (ub, upper)
}

struct Backtrack<'a> {
    g: &'a WeightedGraph,
    inst: &'a ColoringInstance,
    k: usize,
    max_used: usize,
    band: Vec<usize>,
    /// Paths currently on each band.
    load: Vec<usize>,
    distinct: usize,
    best: Option<(f64, Vec<usize>)>,
}

impl Backtrack<'_> {
    fn allowed(&self, v: usize) -> Vec<bool> {
        let full = self.distinct >= self.max_used;
        let mut a: Vec<bool> = (0..self.k).map(|q| !full || self.load[q] > 0).collect();
        for &u in self.g.neighbors(v) {
            if self.band[u] != usize::MAX {
                a[self.band[u]] = false;
            }
        }
        a
    }

    fn search(&mut self, cost: f64, remaining: usize) {
        let incumbent = self.best.as_ref().map_or(f64::INFINITY, |b| b.0);
        if remaining == 0 {
            if cost < incumbent - 1e-12 {
                self.best = Some((cost, self.band.clone()));
            }
            return;
        }
        // Bound: each uncolored path pays at least its cheapest allowed band.
        // Branch on the uncolored path with fewest allowed bands.
        let mut bound = cost;
        let mut pick: Option<(usize, usize, Vec<bool>)> = None;
        for v in 0..self.g.n() {
            if self.band[v] != usize::MAX {
                continue;
            }
            let a = self.allowed(v);
            let count = a.iter().filter(|x| **x).count();
            if count == 0 {
                return;
            }
            bound += (0..self.k)
                .filter(|&q| a[q])
                .map(|q| self.inst.cost(v, q))
                .fold(f64::INFINITY, f64::min);
            let better = match &pick {
                None => true,
                Some((pv, pc, _)) => count < *pc || (count == *pc && self.g.degree(v) > self.g.degree(*pv)),
            };
            if better {
                pick = Some((v, count, a));
            }
        }
        if bound >= incumbent - 1e-12 {
            return;
        }
        let (v, _, a) = pick.expect("remaining > 0");
        let mut options: Vec<usize> = (0..self.k).filter(|&q| a[q]).collect();
        options.sort_by(|&x, &y| self.inst.cost(v, x).total_cmp(&self.inst.cost(v, y)).then(x.cmp(&y)));
        for q in options {
            self.band[v] = q;
            if self.load[q] == 0 {
                self.distinct += 1;
            }
            self.load[q] += 1;
            self.search(cost + self.inst.cost(v, q), remaining - 1);
            self.load[q] -= 1;
            if self.load[q] == 0 {
                self.distinct -= 1;
            }
            self.band[v] = usize::MAX;
        }
    }
}

/// Map color classes onto bands, larger classes on cheaper bands.
fn place_classes(inst: &ColoringInstance, color: &[usize]) -> Vec<usize> {
    let classes = color.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut size = vec![0usize; classes];
    color.iter().for_each(|&c| size[c] += 1);
    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| size[b].cmp(&size[a]).then(a.cmp(&b)));
    let mut bands: Vec<usize> = (0..inst.n_bands()).collect();
    let total = |q: usize| (0..inst.n_paths()).map(|p| inst.cost(p, q)).sum::<f64>();
    bands.sort_by(|&a, &b| total(a).total_cmp(&total(b)).then(a.cmp(&b)));
    let mut to_band = vec![0; classes];
    for (rank, &c) in order.iter().enumerate() {
        to_band[c] = bands[rank];
    }
    color.iter().map(|&c| to_band[c]).collect()
}

/// Assign one band per path with no two conflicting paths sharing a band.
///
/// `Exact` first finds the fewest bands any proper assignment needs, then
/// minimizes the total cost among assignments using that many bands
/// (backtracking on the most constrained path, cheapest band first).
/// `Dsatur` returns the saturation-degree heuristic coloring.
pub fn sap_solve(inst: &ColoringInstance, mode: SapMode) -> Result<SolveResult<Coloring>> {
    let start = Instant::now();
    let g = inst.conflict_graph();
    let n = g.n();
    let k = inst.n_bands();
    let infeasible = |certificate: Option<Vec<usize>>| {
        let c = Coloring {
            band_of: vec![usize::MAX; n],
            bands_used: 0,
            clique_certificate: certificate,
        };
        SolveResult::new(c, 0.0, Status::Infeasible, start.elapsed())
    };
    match mode {
        SapMode::Dsatur => {
            let bands = dsatur(&g);
            if bands.iter().any(|&q| q >= k) {
                return Ok(infeasible(None));
            }
            let c = Coloring::from_bands(bands);
            let obj = c.cost(inst);
            Ok(SolveResult::new(c, obj, Status::Feasible, start.elapsed()))
        }
        SapMode::Exact => {
            if n > EXACT_LIMIT {
                return Err(Error::Size {
                    what: "paths",
                    got: n,
                    limit: EXACT_LIMIT,
                });
            }
            let clique = max_clique(&g);
            if clique.len() > k {
                return Ok(infeasible(Some(clique)));
            }
            let (chi, witness) = chromatic(&g, clique.len(), dsatur(&g));
            if chi > k {
                return Ok(infeasible(None));
            }
            let seed = place_classes(inst, &witness);
            let seed_cost = Coloring::from_bands(seed.clone()).cost(inst);
            let mut bt = Backtrack {
                g: &g,
                inst,
                k,
                max_used: chi,
                band: vec![usize::MAX; n],
                load: vec![0; k],
                distinct: 0,
                best: Some((seed_cost + 1e-9 * seed_cost.abs().max(1.0), seed)),
            };
            bt.search(0.0, n);
            match bt.best {
                Some((_, bands)) => {
                    let c = Coloring::from_bands(bands);
                    let obj = c.cost(inst);
                    Ok(SolveResult::new(c, obj, Status::Optimal, start.elapsed()))
                }
                None => Ok(infeasible(None)),
            }
        }
    }
}
