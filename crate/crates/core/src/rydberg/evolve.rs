//! State-vector integration of the Rydberg Hamiltonian
//! `H = Ω/2 Σ X_i − Σ Δ_i n_i + Σ C6/r⁶ n_j n_k`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::schedule::PulseSchedule;
use super::PhysicsConfig;
use crate::embedding::Layout;
use crate::error::{Error, Result};

/// Dimension above which Hamiltonian application runs on the thread pool.
const PARALLEL_DIM: usize = 1 << 12;
const NONE: u32 = u32::MAX;

/// Hamiltonian pieces precomputed per basis state.
pub(crate) struct Hamiltonian {
    n: usize,
    /// Basis indices kept; `None` means the full space.
    states: Option<Vec<usize>>,
    /// For the restricted space: position of `state ^ (1 << i)`, or `NONE`.
    flips: Vec<u32>,
    interaction: Vec<f64>,
    excited: Vec<f64>,
    factor_sum: Vec<f64>,
}

impl Hamiltonian {
    pub(crate) fn new(layout: &Layout, factors: &[f64], phys: &PhysicsConfig) -> Result<Self> {
        let n = layout.len();
        if n > phys.max_qubits {
            return Err(Error::Size {
                what: "qubits",
                got: n,
                limit: phys.max_qubits,
            });
        }
        if factors.len() != n {
            return Err(Error::Input(format!("{} local factors for {n} atoms", factors.len())));
        }
        let mut coupling = vec![0.0; n * n];
        let mut blocked = vec![0usize; n];
        for i in 0..n {
            for j in i + 1..n {
                let r = layout.dist(i, j);
                if phys.ideal_blockade_radius.is_some_and(|rb| r < rb) {
                    blocked[i] |= 1 << j;
                    blocked[j] |= 1 << i;
                } else {
                    coupling[i * n + j] = phys.c6 / r.powi(6);
                }
            }
        }
        let states: Option<Vec<usize>> = phys.ideal_blockade_radius.map(|_| {
            (0..1usize << n)
                .filter(|&k| (0..n).all(|i| k >> i & 1 == 0 || k & blocked[i] == 0))
                .collect()
        });
        let basis: Vec<usize> = states.clone().unwrap_or_else(|| (0..1usize << n).collect());
        let mut flips = Vec::new();
        if let Some(st) = &states {
            let mut pos = vec![NONE; 1 << n];
            for (p, &k) in st.iter().enumerate() {
                pos[k] = p as u32;
            }
            flips = st
                .iter()
                .flat_map(|&k| (0..n).map(move |i| k ^ (1 << i)))
                .map(|k| pos[k])
                .collect();
        }
        let interaction = basis
            .iter()
            .map(|&k| {
                let mut e = 0.0;
                for i in 0..n {
                    if k >> i & 1 == 1 {
                        for j in i + 1..n {
                            if k >> j & 1 == 1 {
                                e += coupling[i * n + j];
                            }
                        }
                    }
                }
                e
            })
            .collect();
        let excited = basis.iter().map(|&k| k.count_ones() as f64).collect();
        let factor_sum = basis
            .iter()
            .map(|&k| (0..n).filter(|&i| k >> i & 1 == 1).map(|i| factors[i]).sum())
            .collect();
        Ok(Self {
            n,
            states,
            flips,
            interaction,
            excited,
            factor_sum,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.interaction.len()
    }

    fn row(&self, k: usize, psi: &[Complex64], half_omega: f64, dg: f64, dl: f64) -> Complex64 {
        let diag = self.interaction[k] - dg * self.excited[k] - dl * self.factor_sum[k];
        let mut drive = Complex64::new(0.0, 0.0);
        if self.states.is_some() {
            for &p in &self.flips[k * self.n..(k + 1) * self.n] {
                if p != NONE {
                    drive += psi[p as usize];
                }
            }
        } else {
            for i in 0..self.n {
                drive += psi[k ^ (1 << i)];
            }
        }
        psi[k] * diag + drive * half_omega
    }

    /// `out = H(t) ψ`.
    pub(crate) fn apply(&self, s: &PulseSchedule, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let half_omega = 0.5 * s.omega.at(t);
        let dg = s.delta_global.at(t);
        let dl = s.delta_local.at(t);
        if out.len() >= PARALLEL_DIM {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(k, o)| *o = self.row(k, psi, half_omega, dg, dl));
        } else {
            for (k, o) in out.iter_mut().enumerate() {
                *o = self.row(k, psi, half_omega, dg, dl);
            }
        }
    }

    fn embed(&self, psi: Vec<Complex64>) -> Vec<Complex64> {
        match &self.states {
            None => psi,
            Some(st) => {
                let mut full = vec![Complex64::new(0.0, 0.0); 1 << self.n];
                for (&k, a) in st.iter().zip(psi) {
                    full[k] = a;
                }
                full
            }
        }
    }

    fn restrict(&self, psi: &[Complex64]) -> Vec<Complex64> {
        match &self.states {
            None => psi.to_vec(),
            Some(st) => st.iter().map(|&k| psi[k]).collect(),
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[0.2],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 10_000_000;

struct Stepper<'a> {
    h: &'a Hamiltonian,
    s: &'a PulseSchedule,
    k: Vec<Vec<Complex64>>,
    tmp: Vec<Complex64>,
}

impl Stepper<'_> {
    /// `out = -i H(t) ψ`.
    fn deriv(&mut self, t: f64, psi: &[Complex64], slot: usize) {
        let mut out = std::mem::take(&mut self.k[slot]);
        self.h.apply(self.s, t, psi, &mut out);
        for v in out.iter_mut() {
            *v = Complex64::new(v.im, -v.re);
        }
        self.k[slot] = out;
    }

    fn combine(&mut self, y: &[Complex64], h: f64, coefs: &[f64]) {
        let k = &self.k;
        self.tmp.iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = y[i];
            for (j, &c) in coefs.iter().enumerate() {
                if c != 0.0 {
                    acc += k[j][i] * (h * c);
                }
            }
            *o = acc;
        });
    }

    /// Integrate from `t0` to `t1`; `k[0]` must hold the derivative at `t0`.
    fn run(
        &mut self,
        psi: &mut Vec<Complex64>,
        t0: f64,
        t1: f64,
        h: &mut f64,
        tol: f64,
        steps: &mut usize,
    ) -> Result<()> {
        let mut t = t0;
        while t < t1 {
            if *steps >= MAX_STEPS {
                return Err(Error::Integrator(format!("step limit reached at t = {t}")));
            }
            let last = t + *h >= t1;
            let step = if last { t1 - t } else { *h };
            for stage in 1..7 {
                self.combine(psi, step, A[stage]);
                let y = std::mem::take(&mut self.tmp);
                self.deriv(t + C[stage] * step, &y, stage);
                self.tmp = y;
            }
            // tmp holds the 5th-order solution (stage 7 input), k[6] its derivative.
            let mut err = 0.0f64;
            for i in 0..psi.len() {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, &c) in E.iter().enumerate() {
                    if c != 0.0 {
                        e += self.k[j][i] * c;
                    }
                }
                err = err.max((e * step).norm());
            }
            let ratio = err / tol;
            *steps += 1;
            if ratio <= 1.0 {
                std::mem::swap(psi, &mut self.tmp);
                self.k.swap(0, 6);
                t = if last { t1 } else { t + step };
            }
            let grow = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            let next = step * grow;
            if !last || ratio > 1.0 {
                *h = next;
            }
            if *h < 1e-13 * t1.max(1.0) {
                return Err(Error::Integrator(format!("step size underflow at t = {t}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate the Schrödinger equation from the all-ground state over the schedule.
pub fn evolve(layout: &Layout, schedule: &PulseSchedule, phys: &PhysicsConfig) -> Result<Vec<Complex64>> {
    schedule.validate()?;
    phys.validate()?;
    let ham = Hamiltonian::new(layout, &schedule.local_factors, phys)?;
    let dim = ham.dim();
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(1.0, 0.0);
    evolve_state(&ham, schedule, phys.integrator_tol, &mut psi)?;
    Ok(ham.embed(psi))
}

pub(crate) fn evolve_state(
    ham: &Hamiltonian,
    schedule: &PulseSchedule,
    tol: f64,
    psi: &mut Vec<Complex64>,
) -> Result<()> {
    let dim = ham.dim();
    let mut st = Stepper {
        h: ham,
        s: schedule,
        k: vec![vec![Complex64::new(0.0, 0.0); dim]; 7],
        tmp: vec![Complex64::new(0.0, 0.0); dim],
    };
    let mut h = 1e-3;
    let mut steps = 0;
    let bps = schedule.breakpoints();
    for w in bps.windows(2) {
        // Restart at every kink of the piecewise-linear controls.
        st.deriv(w[0], &psi.clone(), 0);
        st.run(psi, w[0], w[1], &mut h, tol, &mut steps)?;
        let nrm = norm(psi);
        if (nrm - 1.0).abs() > 1e-6 {
            return Err(Error::Integrator(format!("norm drifted to {nrm} by t = {}", w[1])));
        }
    }
    let nrm = norm(psi);
    psi.iter_mut().for_each(|a| *a /= nrm);
    Ok(())
}

/// `⟨ψ|H(t)|ψ⟩` for a full-space state; the imaginary part is numerical noise.
pub fn energy_expectation(
    layout: &Layout,
    schedule: &PulseSchedule,
    phys: &PhysicsConfig,
    state: &[Complex64],
    t: f64,
) -> Result<Complex64> {
    let ham = Hamiltonian::new(layout, &schedule.local_factors, phys)?;
    if state.len() != 1 << layout.len() {
        return Err(Error::Input(format!(
            "state has dimension {} for {} atoms",
            state.len(),
            layout.len()
        )));
    }
    let psi = ham.restrict(state);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    ham.apply(schedule, t, &psi, &mut out);
    Ok(psi.iter().zip(&out).map(|(a, b)| a.conj() * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rydberg::schedule::Waveform;

    fn constant(omega: f64, delta: f64, t: f64, n: usize) -> PulseSchedule {
        PulseSchedule {
            omega: Waveform::constant(omega, t),
            delta_global: Waveform::constant(delta, t),
            delta_local: Waveform::constant(0.0, t),
            local_factors: vec![0.0; n],
            duration: t,
        }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let l = Layout::new(vec![[0.0, 0.0], [50.0, 0.0]]);
        let phys = PhysicsConfig {
            c6: 0.0,
            ..Default::default()
        };
        let psi = evolve(&l, &constant(0.0, 0.0, 1.0, 2), &phys).unwrap();
        assert_eq!(psi[0], Complex64::new(1.0, 0.0));
        assert!(psi[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn rabi_flop() {
        let l = Layout::new(vec![[0.0, 0.0]]);
        let omega = 2.0 * std::f64::consts::PI;
        for frac in [0.25, 0.5, 1.0] {
            let t = frac * std::f64::consts::PI / omega * 2.0;
            let psi = evolve(&l, &constant(omega, 0.0, t, 1), &PhysicsConfig::default()).unwrap();
            let expect = (omega * t / 2.0).sin().powi(2);
            assert!((psi[1].norm_sqr() - expect).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn ideal_blockade_matches_full_space_for_strong_interaction() {
        let l = Layout::new(vec![[0.0, 0.0], [4.0, 0.0], [30.0, 0.0]]);
        let s = constant(2.0, 1.0, 1.0, 3);
        let full = evolve(&l, &s, &PhysicsConfig::default()).unwrap();
        let ideal = evolve(
            &l,
            &s,
            &PhysicsConfig {
                ideal_blockade_radius: Some(8.0),
                ..Default::default()
            },
        )
        .unwrap();
        let overlap: Complex64 = full.iter().zip(&ideal).map(|(a, b)| a.conj() * b).sum();
        assert!(overlap.norm() > 0.99, "overlap {}", overlap.norm());
        assert_eq!(ideal[0b011].norm(), 0.0);
    }
}
