//! Fruchterman–Reingold force-directed initialization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{HardwareGeometry, Layout};
use crate::graph::WeightedGraph;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrConfig {
    /// Equilibrium edge length in micrometers.
    pub k: f64,
    pub max_iter: usize,
}

impl Default for FrConfig {
    fn default() -> Self {
        Self { k: 7.0, max_iter: 1000 }
    }
}

/// Force-directed layout in micrometers, centred in the register.
///
/// Repulsion `k²/r²` acts on every pair, attraction `r/k` on edges; moves are
/// capped by a linearly cooling temperature. The result is shrunk about its
/// centre only when it does not fit the register.
pub fn fr_init(g: &WeightedGraph, geo: &HardwareGeometry, cfg: &FrConfig, seed: u64) -> Layout {
    let n = g.n();
    let k = cfg.k;
    let mut rng = seed::rng(seed);
    let side = k * (n as f64).sqrt();
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)])
        .collect();
    let t0 = side.max(k);
    let mut disp = vec![[0.0f64; 2]; n];
    for it in 0..cfg.max_iter {
        disp.iter_mut().for_each(|d| *d = [0.0; 2]);
        for i in 0..n {
            for j in i + 1..n {
                let dx = pos[i][0] - pos[j][0];
                let dy = pos[i][1] - pos[j][1];
                let r = dx.hypot(dy).max(1e-2);
                let mut f = k * k / (r * r);
                if g.has_edge(i, j) {
                    f -= r / k;
                }
                let (ux, uy) = (dx / r * f, dy / r * f);
                disp[i][0] += ux;
                disp[i][1] += uy;
                disp[j][0] -= ux;
                disp[j][1] -= uy;
            }
        }
        let temp = t0 * (1.0 - it as f64 / cfg.max_iter as f64);
        let mut moved = 0.0f64;
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step = len.min(temp);
                p[0] += d[0] / len * step;
                p[1] += d[1] / len * step;
                moved = moved.max(step);
            }
        }
        if moved < 1e-9 {
            break;
        }
    }
    fit_to_register(pos, geo)
}

fn fit_to_register(mut pos: Vec<[f64; 2]>, geo: &HardwareGeometry) -> Layout {
    if pos.is_empty() {
        return Layout::new(pos);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pos {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let scale = [geo.width / (hi[0] - lo[0]), geo.height / (hi[1] - lo[1])]
        .into_iter()
        .fold(1.0f64, f64::min);
    for p in &mut pos {
        p[0] = geo.width / 2.0 + (p[0] - centre[0]) * scale;
        p[1] = geo.height / 2.0 + (p[1] - centre[1]) * scale;
    }
    Layout::new(pos)
}
