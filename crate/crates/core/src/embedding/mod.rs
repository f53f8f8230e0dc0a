//! Mapping graphs to atom positions in a rectangular Rydberg register.
//!
//! The route is force-directed initialization ([`fr_init`]), per-instance
//! training of a distance encoder network ([`den_train`]), bounded refinement
//! inside safe boxes ([`refine_layout`]) and a final unit-disk check
//! ([`validate_embedding`]). [`embed`] runs all four.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::seed;

mod den;
mod elf;
mod fr;
mod lbfgsb;
mod refine;

pub use den::{den_train, DenConfig, TrainOutcome};
pub use elf::{elf_loss, elf_loss_with_grad, LossComponents};
pub use fr::{fr_init, FrConfig};
pub use lbfgsb::{minimize_box, BoxResult};
pub use refine::{refine_layout, RefineConfig};

/// Register constraints in micrometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardwareGeometry {
    /// Minimum distance between any two atoms.
    pub d_min: f64,
    /// Minimum vertical spacing between distinct rows.
    pub d_row: f64,
    pub width: f64,
    pub height: f64,
    /// Largest separation still treated as adjacent.
    pub d_adj: f64,
    /// Coordinate resolution.
    pub grid: f64,
}

impl Default for HardwareGeometry {
    fn default() -> Self {
        Self {
            d_min: 4.0,
            d_row: 2.0,
            width: 76.0,
            height: 128.0,
            d_adj: 10.0,
            grid: 0.1,
        }
    }
}

impl HardwareGeometry {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.d_row
            && self.d_row <= self.d_min
            && self.d_min <= self.d_adj
            && self.d_adj <= self.width.min(self.height)
            && self.grid > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("inconsistent register geometry {self:?}")))
        }
    }

    /// Upper bound used for non-adjacent pairs: the register diagonal bound.
    pub fn diagonal_bound(&self) -> f64 {
        self.width.max(self.height) * std::f64::consts::SQRT_2
    }
}

/// One `(x, y)` position in micrometers per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub coords: Vec<[f64; 2]>,
}

impl Layout {
    pub fn new(coords: Vec<[f64; 2]>) -> Self {
        Self { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.coords[i];
        let [xj, yj] = self.coords[j];
        (xi - xj).hypot(yi - yj)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.coords.iter().map(|[x, y]| [x + dx, y + dy]).collect())
    }

    /// Relabel: vertex `i` moves to index `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut c = vec![[0.0; 2]; self.len()];
        for (i, &p) in perm.iter().enumerate() {
            c[p] = self.coords[i];
        }
        Self::new(c)
    }

    pub fn min_corner(&self) -> [f64; 2] {
        self.coords
            .iter()
            .fold([f64::INFINITY; 2], |[mx, my], [x, y]| [mx.min(*x), my.min(*y)])
    }
}

/// Layout file: coordinates together with the geometry they were built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub coords: Vec<[f64; 2]>,
    pub geometry: HardwareGeometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    MinDistance { i: usize, j: usize, distance: f64 },
    RowSpacing { i: usize, j: usize, dy: f64 },
    OutOfBounds { i: usize, x: f64, y: f64 },
}

/// Adjacency gap summary of a layout.
///
/// `d` is the largest adjacent-pair distance (0 without edges) and `big_d`
/// the smallest non-adjacent distance (`None` means +∞, i.e. a complete graph).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub d: f64,
    pub big_d: Option<f64>,
    pub is_unit_disk: bool,
    /// `big_d - d`; `None` when infinite.
    pub gap: Option<f64>,
    pub constraint_violations: Vec<Violation>,
}

impl EmbeddingReport {
    pub fn is_feasible(&self) -> bool {
        self.constraint_violations.is_empty()
    }

    /// Finite `(d, D)` interval for choosing a blockade radius. Without
    /// edges the lower end is the minimum atom spacing; without non-edges the
    /// upper end collapses onto `d`.
    pub fn distance_interval(&self, geo: &HardwareGeometry) -> (f64, f64) {
        let has_edges = self.d > 0.0;
        match (has_edges, self.big_d) {
            (true, Some(big)) => (self.d.min(big), self.d.max(big)),
            (true, None) => (self.d, self.d),
            (false, Some(big)) => (geo.d_min.min(big), big),
            (false, None) => (geo.d_min, geo.d_min),
        }
    }
}

/// Absolute slack for floating-point comparisons on grid-snapped coordinates.
pub(crate) const GEOM_TOL: f64 = 1e-6;

pub(crate) fn hard_violations(layout: &Layout, geo: &HardwareGeometry) -> Vec<Violation> {
    let mut v = Vec::new();
    let n = layout.len();
    for (i, &[x, y]) in layout.coords.iter().enumerate() {
        if !(x >= -GEOM_TOL && x <= geo.width + GEOM_TOL && y >= -GEOM_TOL && y <= geo.height + GEOM_TOL) {
            v.push(Violation::OutOfBounds { i, x, y });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let distance = layout.dist(i, j);
            if distance < geo.d_min - GEOM_TOL {
                v.push(Violation::MinDistance { i, j, distance });
            }
            let dy = (layout.coords[i][1] - layout.coords[j][1]).abs();
            if dy > GEOM_TOL && dy < geo.d_row - GEOM_TOL {
                v.push(Violation::RowSpacing { i, j, dy });
            }
        }
    }
    v
}

/// Measure `d`, `D`, the gap and every hard-constraint violation.
pub fn validate_embedding(layout: &Layout, g: &WeightedGraph, geo: &HardwareGeometry) -> Result<EmbeddingReport> {
    if layout.len() != g.n() {
        return Err(Error::Input(format!(
            "layout has {} positions for {} vertices",
            layout.len(),
            g.n()
        )));
    }
    let n = g.n();
    let mut d: f64 = 0.0;
    let mut big_d: Option<f64> = None;
    for i in 0..n {
        for j in i + 1..n {
            let r = layout.dist(i, j);
            if g.has_edge(i, j) {
                d = d.max(r);
            } else {
                big_d = Some(big_d.map_or(r, |b| b.min(r)));
            }
        }
    }
    let is_unit_disk = big_d.is_none_or(|b| d < b);
    Ok(EmbeddingReport {
        d,
        big_d,
        is_unit_disk,
        gap: big_d.map(|b| b - d),
        constraint_violations: hard_violations(layout, geo),
    })
}

/// Settings for the full embedding route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct EmbedConfig {
    pub fr: FrConfig,
    pub den: DenConfig,
    pub refine: RefineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedOutcome {
    pub layout: Layout,
    pub report: EmbeddingReport,
    pub loss_trace: Vec<f64>,
}

/// Force-directed initialization, network training, refinement and validation.
pub fn embed(g: &WeightedGraph, geo: &HardwareGeometry, cfg: &EmbedConfig, seed: u64) -> Result<EmbedOutcome> {
    geo.validate()?;
    let init = fr_init(g, geo, &cfg.fr, seed::derive_seed(seed, "fr"));
    let trained = den_train(g, &init, geo, &cfg.den, seed::derive_seed(seed, "den"))?;
    // Network outputs are centred on the origin; move them into the register.
    let shifted = trained.layout.translated(geo.width / 2.0, geo.height / 2.0);
    let layout = refine_layout(&shifted, g, geo, &cfg.refine)?;
    let report = validate_embedding(&layout, g, geo)?;
    Ok(EmbedOutcome {
        layout,
        report,
        loss_trace: trained.loss_trace,
    })
}
