//! Design toolkit for space-terrestrial integrated networks.
//!
//! The three network design subproblems are modelled as graph problems:
//!
//! * satellite selection as a maximum weight independent set ([`solvers::mwis`]),
//! * gateway selection as a min-max bipartite assignment ([`solvers::gsp`]),
//! * spectrum assignment as a minimum-cost graph coloring ([`solvers::sap`]).
//!
//! Besides the classical solvers, the crate carries a full neutral-atom route
//! for the selection stage: graphs are embedded into a Rydberg register
//! ([`embedding`]), evolved under an adiabatic pulse schedule by a state-vector
//! simulator ([`rydberg`]) and the measured bitstrings are repaired into
//! maximal independent sets ([`postprocess`]). [`pipeline`] chains the stages and
//! benchmarks the variants against each other.

pub mod config;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod instance_gen;
pub mod io;
pub mod pipeline;
pub mod postprocess;
pub mod rydberg;
pub mod seed;
pub mod solvers;

pub use error::{Error, Result};
pub use graph::{BipartiteInstance, ColoringInstance, VertexSet, WeightedGraph};
