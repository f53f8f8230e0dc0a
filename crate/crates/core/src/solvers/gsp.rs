//! Gateway selection: assign every satellite to one linked gateway while
//! minimizing the largest gateway load `M`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::flow::FlowNetwork;
use super::{SolveResult, Status};
use crate::error::{Error, Result};
use crate::graph::BipartiteInstance;

/// Gateway index per satellite plus the resulting maximum load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub gateway_of: Vec<usize>,
    pub max_load: usize,
}

impl Assignment {
    pub fn loads(&self, n_gateways: usize) -> Vec<usize> {
        let mut loads = vec![0; n_gateways];
        for &g in &self.gateway_of {
            loads[g] += 1;
        }
        loads
    }

    /// Every satellite uses one of its links and no gateway exceeds `max_load`.
    pub fn is_valid_for(&self, inst: &BipartiteInstance) -> bool {
        self.gateway_of.len() == inst.n_satellites()
            && self
                .gateway_of
                .iter()
                .enumerate()
                .all(|(s, &g)| inst.links.contains(&(s, g)))
            && self.loads(inst.n_gateways()).into_iter().max().unwrap_or(0) <= self.max_load
    }
}

/// Decide whether every satellite can be served with gateway loads at most
/// `max_load`, returning a witness assignment.
pub fn gsp_feasible(inst: &BipartiteInstance, max_load: usize) -> Option<Assignment> {
    let ns = inst.n_satellites();
    let ng = inst.n_gateways();
    let (src, sink) = (ns + ng, ns + ng + 1);
    let mut net = FlowNetwork::new(ns + ng + 2);
    for s in 0..ns {
        net.add_edge(src, s, 1);
    }
    let link_ids: Vec<usize> = inst.links.iter().map(|&(s, g)| net.add_edge(s, ns + g, 1)).collect();
    for g in 0..ng {
        net.add_edge(ns + g, sink, max_load as i64);
    }
    if net.max_flow(src, sink) < ns as i64 {
        return None;
    }
    let mut gateway_of = vec![usize::MAX; ns];
    for (&(s, g), &id) in inst.links.iter().zip(&link_ids) {
        if net.flow(id) > 0 {
            gateway_of[s] = g;
        }
    }
    let loads = {
        let mut l = vec![0; ng];
        gateway_of.iter().for_each(|&g| l[g] += 1);
        l
    };
    Some(Assignment {
        max_load: loads.into_iter().max().unwrap_or(0),
        gateway_of,
    })
}

fn infeasible(start: Instant, ns: usize) -> SolveResult<Assignment> {
    SolveResult::new(
        Assignment {
            gateway_of: vec![usize::MAX; ns],
            max_load: 0,
        },
        0.0,
        Status::Infeasible,
        start.elapsed(),
    )
}

/// Exact min-max assignment by binary search on `M` with a flow check.
pub fn gsp_solve(inst: &BipartiteInstance) -> SolveResult<Assignment> {
    let start = Instant::now();
    let ns = inst.n_satellites();
    if ns == 0 {
        let a = Assignment {
            gateway_of: Vec::new(),
            max_load: 0,
        };
        return SolveResult::new(a, 0.0, Status::Optimal, start.elapsed());
    }
    if (0..ns).any(|s| inst.gateways_of(s).is_empty()) {
        return infeasible(start, ns);
    }
    let ng = inst.n_gateways();
    let (mut lo, mut hi) = (ns.div_ceil(ng).max(1), ns);
    let mut best = match gsp_feasible(inst, hi) {
        Some(a) => a,
        None => return infeasible(start, ns),
    };
    // Invariant: hi is feasible (witness in `best`), everything below lo is not.
    while lo < hi {
        let mid = (lo + hi) / 2;
        match gsp_feasible(inst, mid) {
            Some(a) => {
                hi = mid;
                best = a;
            }
            None => lo = mid + 1,
        }
    }
    best.max_load = hi;
    SolveResult::new(best, hi as f64, Status::Optimal, start.elapsed())
}

pub const BRUTEFORCE_SATELLITES: usize = 8;
pub const BRUTEFORCE_GATEWAYS: usize = 5;

/// Exhaustive enumeration of all assignments.
pub fn gsp_bruteforce(inst: &BipartiteInstance) -> Result<SolveResult<Assignment>> {
    let start = Instant::now();
    let ns = inst.n_satellites();
    if ns > BRUTEFORCE_SATELLITES {
        return Err(Error::Size {
            what: "satellites",
            got: ns,
            limit: BRUTEFORCE_SATELLITES,
        });
    }
    if inst.n_gateways() > BRUTEFORCE_GATEWAYS {
        return Err(Error::Size {
            what: "gateways",
            got: inst.n_gateways(),
            limit: BRUTEFORCE_GATEWAYS,
        });
    }
    let options: Vec<Vec<usize>> = (0..ns).map(|s| inst.gateways_of(s)).collect();
    if options.iter().any(Vec::is_empty) {
        return Ok(infeasible(start, ns));
    }
    let mut idx = vec![0usize; ns];
    let mut best: Option<Assignment> = None;
    loop {
        let gateway_of: Vec<usize> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
        let mut loads = vec![0; inst.n_gateways()];
        gateway_of.iter().for_each(|&g| loads[g] += 1);
        let m = loads.into_iter().max().unwrap_or(0);
        if best.as_ref().is_none_or(|b| m < b.max_load) {
            best = Some(Assignment {
                gateway_of,
                max_load: m,
            });
        }
        // Odometer increment.
        let mut k = 0;
        while k < ns {
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == ns {
            break;
        }
    }
    let best = best.expect("at least one assignment exists");
    let m = best.max_load as f64;
    Ok(SolveResult::new(best, m, Status::Optimal, start.elapsed()))
}
