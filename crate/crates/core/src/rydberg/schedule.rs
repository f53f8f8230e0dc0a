//! Piecewise-linear control waveforms and the adiabatic schedule.

use serde::{Deserialize, Serialize};

use super::PhysicsConfig;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Linear interpolation between `(times[k], values[k])` breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Waveform {
    /// Build from segment durations and the values at each breakpoint.
    pub fn from_durations(durations: &[f64], values: Vec<f64>) -> Result<Self> {
        if values.len() != durations.len() + 1 {
            return Err(Error::Input(format!(
                "{} segment durations need {} values, got {}",
                durations.len(),
                durations.len() + 1,
                values.len()
            )));
        }
        let mut times = vec![0.0];
        let mut t = 0.0;
        for &d in durations {
            t += d;
            times.push(t);
        }
        let w = Self { times, values };
        w.validate()?;
        Ok(w)
    }

    pub fn constant(value: f64, duration: f64) -> Self {
        Self {
            times: vec![0.0, duration],
            values: vec![value, value],
        }
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.times.len() >= 2
            && self.times.len() == self.values.len()
            && self.times[0] == 0.0
            && self.times.windows(2).all(|w| w[1] > w[0])
            && self.times.iter().chain(&self.values).all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("malformed waveform {self:?}")))
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.times.len() {
            return *self.values.last().expect("non-empty");
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// Drive, global detuning, and per-atom scaling of a shared non-positive
/// local detuning waveform. Rates are in rad/μs and times in μs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub omega: Waveform,
    pub delta_global: Waveform,
    pub delta_local: Waveform,
    pub local_factors: Vec<f64>,
    pub duration: f64,
}

impl PulseSchedule {
    pub fn validate(&self) -> Result<()> {
        for w in [&self.omega, &self.delta_global, &self.delta_local] {
            w.validate()?;
            if (w.duration() - self.duration).abs() > 1e-12 {
                return Err(Error::Input(format!(
                    "waveform ends at {} but the schedule lasts {}",
                    w.duration(),
                    self.duration
                )));
            }
        }
        if self.delta_local.values.iter().any(|&v| v > 0.0) {
            return Err(Error::Input("local detuning must be non-positive".into()));
        }
        if self.local_factors.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Input("local factors must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Detuning of atom `i` at time `t`.
    pub fn delta(&self, i: usize, t: f64) -> f64 {
        self.delta_global.at(t) + self.local_factors[i] * self.delta_local.at(t)
    }

    /// Union of all breakpoints, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = [&self.omega, &self.delta_global, &self.delta_local]
            .iter()
            .flat_map(|w| w.times.iter().copied())
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, c| (*a - *c).abs() < 1e-12);
        b
    }
}

/// Segment durations and relative levels of the adiabatic sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleShape {
    /// Drive: ramp up, hold, ramp down to `omega_tail`, ramp off.
    pub omega_durations: [f64; 4],
    /// Fraction of the peak drive reached after the ramp-down segment.
    pub omega_tail: f64,
    /// Global detuning: hold negative, sweep, hold positive.
    pub delta_durations: [f64; 3],
    /// Ratio `Δ/Ω` imposed at the peak.
    pub delta_over_omega: f64,
}

impl Default for ScheduleShape {
    fn default() -> Self {
        Self {
            omega_durations: [0.1, 2.0, 0.1, 0.8],
            omega_tail: 0.5,
            delta_durations: [0.6, 1.5, 0.9],
            delta_over_omega: 3.0,
        }
    }
}

/// Blockade radius for an embedding with adjacent pairs within `d` and
/// non-adjacent pairs beyond `big_d`: the geometric mean.
pub fn blockade_radius(d: f64, big_d: f64) -> Result<f64> {
    if !(d > 0.0 && big_d > 0.0 && d.is_finite() && big_d.is_finite()) {
        return Err(Error::Input(format!(
            "distances must be positive and finite (d = {d}, D = {big_d})"
        )));
    }
    if d > big_d {
        return Err(Error::Input(format!("d = {d} exceeds D = {big_d}")));
    }
    Ok((d * big_d).sqrt())
}

/// Peak drive `Ω` for which `r_b = (C6 / ((2Ω)² + Δ²))^(1/6)` with `Δ = ratio·Ω`.
pub fn rabi_for_radius(r_b: f64, c6: f64, ratio: f64) -> f64 {
    (c6 / ((4.0 + ratio * ratio) * r_b.powi(6))).sqrt()
}

/// Local factor per vertex: 1 for the lightest, 0 for the heaviest.
pub fn local_factors(weights: &[f64]) -> Vec<f64> {
    let lo = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; weights.len()];
    }
    weights.iter().map(|w| (hi - w) / (hi - lo)).collect()
}

/// The adiabatic schedule for `g` at blockade radius `r_b`.
///
/// The drive and global sweep follow [`ScheduleShape`]; the peak drive is
/// fixed by `r_b`. Without an explicit `local_span`, the span is chosen so
/// that the final detuning of every atom is proportional to its weight.
pub fn build_qaa_schedule(g: &WeightedGraph, r_b: f64, phys: &PhysicsConfig) -> Result<PulseSchedule> {
    if !(r_b > 0.0 && r_b.is_finite()) {
        return Err(Error::Input(format!("blockade radius must be positive, got {r_b}")));
    }
    let shape = &phys.shape;
    let omega = rabi_for_radius(r_b, phys.c6, shape.delta_over_omega);
    let delta = shape.delta_over_omega * omega;
    if omega > phys.omega_max || delta > phys.delta_max {
        let factor = (omega / phys.omega_max).max(delta / phys.delta_max).cbrt();
        return Err(Error::Parameter(format!(
            "blockade radius {r_b:.3} μm needs Ω = {omega:.3} rad/μs and Δ = {delta:.3} rad/μs, above the limits \
             ({:.3}, {:.3}); scale the layout by at least {factor:.4}",
            phys.omega_max, phys.delta_max
        )));
    }
    let o = Waveform::from_durations(
        &shape.omega_durations,
        vec![0.0, omega, omega, shape.omega_tail * omega, 0.0],
    )?;
    let dg = Waveform::from_durations(&shape.delta_durations, vec![-delta, -delta, delta, delta])?;
    let total = o.duration();
    if (dg.duration() - total).abs() > 1e-12 {
        return Err(Error::Input("drive and detuning durations differ".into()));
    }
    let factors = local_factors(g.weights());
    let span = match phys.local_span {
        Some(s) => s,
        None => {
            let hi = g.weights().iter().copied().fold(0.0, f64::max);
            let lo = g.weights().iter().copied().fold(f64::INFINITY, f64::min);
            if hi > 0.0 {
                delta * (hi - lo) / hi
            } else {
                0.0
            }
        }
    };
    let s = PulseSchedule {
        omega: o,
        delta_global: dg,
        delta_local: Waveform::constant(-span, total),
        local_factors: factors,
        duration: total,
    };
    s.validate()?;
    Ok(s)
}
