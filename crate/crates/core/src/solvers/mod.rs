//! Classical baselines and oracles for the three network design stages.

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub mod gsp;
pub mod mwis;
pub mod sap;

mod bits;
mod flow;

pub use gsp::{gsp_bruteforce, gsp_feasible, gsp_solve, Assignment};
pub use mwis::{greedy_mwis, mwis_bruteforce, mwis_exact};
pub use sap::{dsatur, sap_solve, Coloring, SapMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    /// Valid solution from a heuristic; optimality not established.
    Feasible,
    FeasibleTimeout,
    Infeasible,
}

/// Outcome of a solver call, serialized as
/// `{"objective": .., "status": .., "solution": .., "elapsed_s": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult<S> {
    pub objective: f64,
    pub status: Status,
    pub solution: S,
    pub elapsed_s: f64,
}

impl<S> SolveResult<S> {
    pub(crate) fn new(solution: S, objective: f64, status: Status, elapsed: Duration) -> Self {
        Self {
            objective,
            status,
            solution,
            elapsed_s: elapsed.as_secs_f64(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != Status::Infeasible
    }
}
