//! Neutral-atom adiabatic simulation for weighted independent sets.

use serde::{Deserialize, Serialize};

use crate::embedding::{validate_embedding, EmbeddingReport, HardwareGeometry, Layout};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

mod evolve;
mod sample;
mod schedule;

pub use evolve::{energy_expectation, evolve};
pub use sample::{basis_pattern, sample, Convention, ShotSet};
pub use schedule::{
    blockade_radius, build_qaa_schedule, local_factors, rabi_for_radius, PulseSchedule, ScheduleShape, Waveform,
};

pub const MAX_QUBITS_LIMIT: usize = 22;

/// Device constants and integrator settings. Rates are angular (rad/μs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicsConfig {
    /// Van der Waals coefficient in rad/μs·μm⁶.
    pub c6: f64,
    pub omega_max: f64,
    pub delta_max: f64,
    /// Magnitude of the most negative local detuning; derived from the
    /// weights when absent.
    pub local_span: Option<f64>,
    pub integrator_tol: f64,
    pub max_qubits: usize,
    /// Drop basis states with two excited atoms closer than this radius.
    pub ideal_blockade_radius: Option<f64>,
    pub shape: ScheduleShape,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            c6: 5.42e6,
            omega_max: tau * 2.5,
            delta_max: tau * 20.0,
            local_span: None,
            integrator_tol: 1e-9,
            max_qubits: 15,
            ideal_blockade_radius: None,
            shape: ScheduleShape::default(),
        }
    }
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c6 >= 0.0
            && self.omega_max > 0.0
            && self.delta_max > 0.0
            && self.local_span.is_none_or(|s| s >= 0.0)
            && self.integrator_tol > 0.0
            && (1..=MAX_QUBITS_LIMIT).contains(&self.max_qubits);
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("invalid physics settings {self:?}")))
        }
    }
}

/// Everything produced by one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaaRun {
    pub shots: ShotSet,
    pub schedule: PulseSchedule,
    pub blockade_radius: f64,
    pub report: EmbeddingReport,
}

/// Validate the layout, pick the blockade radius, build the schedule,
/// evolve and sample.
pub fn run_qaa(
    g: &WeightedGraph,
    layout: &Layout,
    geo: &HardwareGeometry,
    phys: &PhysicsConfig,
    shots: usize,
    seed: u64,
) -> Result<QaaRun> {
    let report = validate_embedding(layout, g, geo)?;
    let (d, big_d) = report.distance_interval(geo);
    let r_b = blockade_radius(d, big_d)?;
    let schedule = build_qaa_schedule(g, r_b, phys)?;
    let state = evolve(layout, &schedule, phys)?;
    let shots = sample(&state, shots, seed)?;
    Ok(QaaRun {
        shots,
        schedule,
        blockade_radius: r_b,
        report,
    })
}
