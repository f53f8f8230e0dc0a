//! Instance data model shared by every stage.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected vertex-weighted simple graph.
///
/// Edges are stored normalized (`i < j`) and sorted; adjacency lists are
/// sorted as well so [`WeightedGraph::has_edge`] is a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    labels: Option<Vec<String>>,
}

impl WeightedGraph {
    pub fn new(weights: Vec<f64>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = weights.len();
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let mut seen = HashSet::new();
        let mut norm = Vec::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            norm.push(e);
        }
        norm.sort_unstable();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &norm {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self {
            weights,
            edges: norm,
            adj,
            labels: None,
        })
    }

    /// Graph with unit weights.
    pub fn unweighted(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(vec![1.0; n], edges)
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), []).expect("empty graph is valid")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Schema(format!(
                "labels has {} entries but n = {}",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Number of unordered vertex pairs that are not edges.
    pub fn non_edge_count(&self) -> usize {
        let n = self.n();
        n * n.saturating_sub(1) / 2 - self.edges.len()
    }

    /// Relabel vertices: vertex `i` of `self` becomes vertex `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n || perm.iter().collect::<HashSet<_>>().len() != n || perm.iter().any(|&p| p >= n) {
            return Err(Error::Input("permutation must be a bijection on 0..n".into()));
        }
        let mut w = vec![0.0; n];
        for (i, &p) in perm.iter().enumerate() {
            w[p] = self.weights[i];
        }
        Self::new(w, self.edges.iter().map(|&(a, b)| (perm[a], perm[b])))
    }

    /// Induced subgraph on `keep` (in the given order).
    pub fn induced(&self, keep: &[usize]) -> Result<Self> {
        let mut pos = vec![usize::MAX; self.n()];
        for (k, &v) in keep.iter().enumerate() {
            if v >= self.n() {
                return Err(Error::IndexOutOfRange { index: v, n: self.n() });
            }
            pos[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(a, b)| pos[*a] != usize::MAX && pos[*b] != usize::MAX)
            .map(|&(a, b)| (pos[a], pos[b]));
        let g = Self::new(keep.iter().map(|&v| self.weights[v]).collect(), edges)?;
        match &self.labels {
            Some(l) => g.with_labels(keep.iter().map(|&v| l[v].clone()).collect()),
            None => Ok(g),
        }
    }

    fn check_members(&self, s: &VertexSet) -> Result<()> {
        match s.members.iter().find(|&&v| v >= self.n()) {
            Some(&index) => Err(Error::IndexOutOfRange { index, n: self.n() }),
            None => Ok(()),
        }
    }

    /// True iff no edge has both endpoints in `s`.
    pub fn is_independent(&self, s: &VertexSet) -> Result<bool> {
        self.check_members(s)?;
        Ok(self.independent_members(&s.members))
    }

    pub(crate) fn independent_members(&self, members: &[usize]) -> bool {
        let mut inside = vec![false; self.n()];
        for &v in members {
            inside[v] = true;
        }
        members.iter().all(|&v| self.adj[v].iter().all(|&u| !inside[u]))
    }

    /// True iff `s` is independent and no outside vertex can be added.
    pub fn is_maximal(&self, s: &VertexSet) -> Result<bool> {
        if !self.is_independent(s)? {
            return Err(Error::Contract("is_maximal requires an independent set".into()));
        }
        let mut blocked = vec![false; self.n()];
        for &v in &s.members {
            blocked[v] = true;
            for &u in &self.adj[v] {
                blocked[u] = true;
            }
        }
        Ok(blocked.into_iter().all(|b| b))
    }
}

/// A set of vertices together with its total weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSet {
    members: Vec<usize>,
    objective: f64,
}

impl VertexSet {
    pub fn new(g: &WeightedGraph, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m: Vec<usize> = members.into_iter().collect();
        m.sort_unstable();
        m.dedup();
        if let Some(&index) = m.iter().find(|&&v| v >= g.n()) {
            return Err(Error::IndexOutOfRange { index, n: g.n() });
        }
        let objective = m.iter().map(|&v| g.weight(v)).sum();
        Ok(Self { members: m, objective })
    }

    pub fn empty() -> Self {
        Self {
            members: Vec::new(),
            objective: 0.0,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Indicator vector of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.members {
            m[v] = true;
        }
        m
    }
}

/// Satellite-to-gateway link structure of the gateway selection stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BipartiteInstance {
    pub satellites: Vec<String>,
    pub gateways: Vec<String>,
    /// `(satellite, gateway)` index pairs.
    pub links: Vec<(usize, usize)>,
    pub link_costs: Option<Vec<f64>>,
    /// Diagnostics produced while building the instance, e.g. satellites
    /// without any feasible link.
    pub warnings: Vec<String>,
}

impl BipartiteInstance {
    pub fn new(
        satellites: Vec<String>,
        gateways: Vec<String>,
        links: Vec<(usize, usize)>,
        link_costs: Option<Vec<f64>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(s, g) in &links {
            if s >= satellites.len() {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    n: satellites.len(),
                });
            }
            if g >= gateways.len() {
                return Err(Error::IndexOutOfRange {
                    index: g,
                    n: gateways.len(),
                });
            }
            if !seen.insert((s, g)) {
                return Err(Error::DuplicateEdge(s, g));
            }
        }
        if let Some(c) = &link_costs {
            if c.len() != links.len() {
                return Err(Error::Schema("link_costs must have one entry per link".into()));
            }
        }
        let mut inst = Self {
            satellites,
            gateways,
            links,
            link_costs,
            warnings: Vec::new(),
        };
        for s in 0..inst.satellites.len() {
            if inst.gateways_of(s).is_empty() {
                inst.warnings.push(format!(
                    "satellite {} has no feasible gateway link; the assignment is infeasible",
                    inst.satellites[s]
                ));
            }
        }
        Ok(inst)
    }

    pub fn n_satellites(&self) -> usize {
        self.satellites.len()
    }

    pub fn n_gateways(&self) -> usize {
        self.gateways.len()
    }

    pub fn gateways_of(&self, s: usize) -> Vec<usize> {
        self.links.iter().filter(|l| l.0 == s).map(|l| l.1).collect()
    }
}

/// Conflict graph of transmission paths plus the available bands.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColoringInstance {
    /// Human-readable path descriptions, one per conflict-graph vertex.
    pub paths: Vec<String>,
    pub conflicts: Vec<(usize, usize)>,
    pub bands: Vec<String>,
    /// `costs[p][q]`; `None` means the 1-based band index.
    pub costs: Option<Vec<Vec<f64>>>,
    pub warnings: Vec<String>,
}

impl ColoringInstance {
    pub fn new(
        paths: Vec<String>,
        conflicts: Vec<(usize, usize)>,
        bands: Vec<String>,
        costs: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        // Reuse the graph validator for the conflict relation.
        let g = WeightedGraph::unweighted(paths.len(), conflicts.iter().copied())?;
        if let Some(c) = &costs {
            if c.len() != paths.len() || c.iter().any(|row| row.len() != bands.len()) {
                return Err(Error::Schema("costs must be |P| x |K|".into()));
            }
        }
        Ok(Self {
            paths,
            conflicts: g.edges().to_vec(),
            bands,
            costs,
            warnings: Vec::new(),
        })
    }

    /// Instance with `n` anonymous paths and `k` bands named `1..=k`.
    pub fn anonymous(n: usize, conflicts: Vec<(usize, usize)>, k: usize) -> Result<Self> {
        Self::new(
            (0..n).map(|p| format!("p{p}")).collect(),
            conflicts,
            (1..=k).map(|q| q.to_string()).collect(),
            None,
        )
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn cost(&self, p: usize, q: usize) -> f64 {
        match &self.costs {
            Some(c) => c[p][q],
            None => (q + 1) as f64,
        }
    }

    pub fn conflict_graph(&self) -> WeightedGraph {
        WeightedGraph::unweighted(self.paths.len(), self.conflicts.iter().copied()).expect("validated at construction")
    }
}
