//! Distance encoder network: a per-instance autoencoder trained on the
//! embedding loss, with a hand-written backward pass and AdamW.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::elf::{adjacency_matrix, evaluate};
use super::{HardwareGeometry, Layout};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::seed;

/// Hidden widths between the `2N` input and `2N` output.
pub const HIDDEN: [usize; 7] = [64, 36, 18, 9, 18, 36, 64];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    /// Stop once the inference loss has moved less than `tol` this many epochs in a row.
    pub patience: usize,
    pub tol: f64,
}

impl Default for DenConfig {
    fn default() -> Self {
        Self {
            epochs: 5000,
            learning_rate: 1e-2,
            weight_decay: 1e-2,
            dropout: 0.3,
            patience: 200,
            tol: 1e-8,
        }
    }
}

impl DenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) || self.learning_rate <= 0.0 || self.weight_decay < 0.0 {
            return Err(Error::Input(format!("invalid network settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    /// Best inference layout, centred on the origin.
    pub layout: Layout,
    /// Inference loss per epoch.
    pub loss_trace: Vec<f64>,
    pub best_loss: f64,
    pub best_epoch: usize,
}

struct Mlp {
    sizes: Vec<usize>,
    /// Weights (row-major, out × in) then biases, layer after layer.
    params: Vec<f64>,
    offsets: Vec<usize>,
}

struct Pass {
    /// Layer inputs; `acts[l]` feeds layer `l`.
    acts: Vec<Vec<f64>>,
    /// Pre-activations of each layer.
    pre: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
}

impl Mlp {
    fn new(sizes: Vec<usize>, rng: &mut ChaCha8Rng) -> Self {
        let mut offsets = Vec::new();
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            offsets.push(params.len());
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out + fan_out {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Self { sizes, params, offsets }
    }

    fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    fn forward(&self, input: &[f64], dropout: Option<(f64, &mut ChaCha8Rng)>) -> Pass {
        let mut acts = vec![input.to_vec()];
        let mut pre = Vec::new();
        let mut masks = Vec::new();
        let mut dropout = dropout;
        for l in 0..self.layers() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[self.offsets[l]..self.offsets[l] + fan_in * fan_out];
            let b = &self.params[self.offsets[l] + fan_in * fan_out..][..fan_out];
            let x = acts.last().expect("input present");
            let z: Vec<f64> = (0..fan_out)
                .map(|o| b[o] + w[o * fan_in..][..fan_in].iter().zip(x).map(|(a, c)| a * c).sum::<f64>())
                .collect();
            if l + 1 < self.layers() {
                let mut a: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
                let mask = dropout.as_mut().map(|(p, rng)| {
                    let keep = 1.0 / (1.0 - *p);
                    (0..fan_out)
                        .map(|_| if rng.random::<f64>() < *p { 0.0 } else { keep })
                        .collect::<Vec<f64>>()
                });
                if let Some(m) = &mask {
                    a.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
                }
                acts.push(a);
                masks.push(mask);
            } else {
                masks.push(None);
            }
            pre.push(z);
        }
        Pass { acts, pre, masks }
    }

    /// Gradient of the loss with respect to all parameters, given `dL/dz` of the output layer.
    fn backward(&self, pass: &Pass, d_out: Vec<f64>) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        let mut dz = d_out;
        for l in (0..self.layers()).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offsets[l];
            let x = &pass.acts[l];
            for o in 0..fan_out {
                let g = dz[o];
                if g == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * fan_in..][..fan_in];
                row.iter_mut().zip(x).for_each(|(r, xi)| *r += g * xi);
                grad[off + fan_in * fan_out + o] += g;
            }
            if l == 0 {
                break;
            }
            let w = &self.params[off..off + fan_in * fan_out];
            let mut dx = vec![0.0; fan_in];
            for o in 0..fan_out {
                let g = dz[o];
                if g != 0.0 {
                    dx.iter_mut()
                        .zip(&w[o * fan_in..][..fan_in])
                        .for_each(|(d, wi)| *d += g * wi);
                }
            }
            // Back through dropout and ReLU of the previous layer.
            let z = &pass.pre[l - 1];
            let mask = &pass.masks[l - 1];
            for i in 0..fan_in {
                let m = mask.as_ref().map_or(1.0, |m| m[i]);
                dx[i] = if z[i] > 0.0 { dx[i] * m } else { 0.0 };
            }
            dz = dx;
        }
        grad
    }
}

struct AdamW {
    lr: f64,
    wd: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamW {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for (k, p) in params.iter_mut().enumerate() {
            *p -= self.lr * self.wd * *p;
            self.m[k] = Self::B1 * self.m[k] + (1.0 - Self::B1) * grad[k];
            self.v[k] = Self::B2 * self.v[k] + (1.0 - Self::B2) * grad[k] * grad[k];
            *p -= self.lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + Self::EPS);
        }
    }
}

fn decode(out: &[f64], half: [f64; 2]) -> Vec<[f64; 2]> {
    let n = out.len() / 2;
    (0..n)
        .map(|i| [half[0] * out[i].tanh(), half[1] * out[n + i].tanh()])
        .collect()
}

/// Train the network on one instance and return the best inference layout.
///
/// Each epoch is a dropout training step followed by an AdamW update, then a
/// dropout-free inference pass whose loss is recorded. Inputs are the initial
/// coordinates normalized by the register half-size; outputs are
/// `(L/2)·tanh` per axis, so the layout is centred on the origin.
pub fn den_train(
    g: &WeightedGraph,
    init: &Layout,
    geo: &HardwareGeometry,
    cfg: &DenConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n = g.n();
    if init.len() != n {
        return Err(Error::Input(format!(
            "initial layout has {} positions for {n} vertices",
            init.len()
        )));
    }
    let half = [geo.width / 2.0, geo.height / 2.0];
    if n == 0 {
        return Ok(TrainOutcome {
            layout: Layout::new(Vec::new()),
            loss_trace: Vec::new(),
            best_loss: 0.0,
            best_epoch: 0,
        });
    }
    let adj = adjacency_matrix(g);
    let mut input = vec![0.0; 2 * n];
    for (i, [x, y]) in init.coords.iter().enumerate() {
        input[i] = x / half[0] - 1.0;
        input[n + i] = y / half[1] - 1.0;
    }
    let mut rng = seed::rng(seed::derive_seed(seed, "weights"));
    let mut drop_rng = seed::rng(seed::derive_seed(seed, "dropout"));
    let mut sizes = vec![2 * n];
    sizes.extend(HIDDEN);
    sizes.push(2 * n);
    let mut net = Mlp::new(sizes, &mut rng);
    let mut opt = AdamW {
        lr: cfg.learning_rate,
        wd: cfg.weight_decay,
        m: vec![0.0; net.params.len()],
        v: vec![0.0; net.params.len()],
        t: 0,
    };

    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Vec<[f64; 2]>)> = None;
    let mut flat = 0usize;
    let mut coord_grad = vec![[0.0; 2]; n];
    for epoch in 0..cfg.epochs {
        let pass = net.forward(&input, Some((cfg.dropout, &mut drop_rng)));
        let out = pass.pre.last().expect("output layer");
        let coords = decode(out, half);
        let loss = evaluate(&coords, &adj, geo, Some(&mut coord_grad)).total;
        if !loss.is_finite() {
            return Err(Error::Training(format!("non-finite training loss at epoch {epoch}")));
        }
        let mut d_out = vec![0.0; 2 * n];
        for i in 0..n {
            for (a, k) in [(0, i), (1, n + i)] {
                let t = out[k].tanh();
                d_out[k] = coord_grad[i][a] * half[a] * (1.0 - t * t);
            }
        }
        let grad = net.backward(&pass, d_out);
        opt.step(&mut net.params, &grad);

        let pass = net.forward(&input, None);
        let coords = decode(pass.pre.last().expect("output layer"), half);
        let loss = evaluate(&coords, &adj, geo, None).total;
        if !loss.is_finite() {
            return Err(Error::Training(format!("non-finite inference loss at epoch {epoch}")));
        }
        if let Some(&prev) = trace.last() {
            let prev: f64 = prev;
            flat = if (loss - prev).abs() < cfg.tol { flat + 1 } else { 0 };
        }
        trace.push(loss);
        if best.as_ref().is_none_or(|b| loss < b.0) {
            best = Some((loss, epoch, coords));
        }
        if flat >= cfg.patience {
            break;
        }
    }
    let (best_loss, best_epoch, coords) = match best {
        Some(b) => b,
        None => {
            let pass = net.forward(&input, None);
            let coords = decode(pass.pre.last().expect("output layer"), half);
            (evaluate(&coords, &adj, geo, None).total, 0, coords)
        }
    };
    Ok(TrainOutcome {
        layout: Layout::new(coords),
        loss_trace: trace,
        best_loss,
        best_epoch,
    })
}
