//! Grid-aligned refinement inside per-atom safe boxes.

use serde::{Deserialize, Serialize};

use super::lbfgsb::minimize_box;
use super::{hard_violations, HardwareGeometry, Layout};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    /// Box recomputation rounds.
    pub rounds: usize,
    /// Quasi-Newton iterations per round.
    pub max_iter: usize,
    /// Edges are pulled below `d_adj - margin`, non-edges pushed above `d_adj + margin`.
    pub margin: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            rounds: 8,
            max_iter: 300,
            margin: 0.0,
        }
    }
}

/// Integer grid coordinates.
struct Grid {
    step: f64,
    per_um: Option<f64>,
}

impl Grid {
    fn new(step: f64) -> Self {
        let inv = 1.0 / step;
        let per_um = ((inv - inv.round()).abs() < 1e-9).then(|| inv.round());
        Self { step, per_um }
    }

    fn units(&self, v: f64) -> i64 {
        (v / self.step).round() as i64
    }

    fn um(&self, u: i64) -> f64 {
        match self.per_um {
            Some(k) => u as f64 / k,
            None => u as f64 * self.step,
        }
    }

    fn snap(&self, v: f64) -> f64 {
        self.um(self.units(v))
    }

    fn to_layout(&self, u: &[[i64; 2]]) -> Layout {
        Layout::new(u.iter().map(|&[x, y]| [self.um(x), self.um(y)]).collect())
    }
}

/// Group atoms into rows; rows closer than half the row spacing merge and
/// later rows are pushed up to keep at least the row spacing.
fn legalize_rows(u: &mut [[i64; 2]], row_units: i64) {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by_key(|&i| (u[i][1], u[i][0], i));
    let mut row_y: Option<i64> = None;
    for &i in &order {
        match row_y {
            Some(y) if u[i][1] - y < (row_units + 1) / 2 => u[i][1] = y,
            Some(y) => {
                let ny = u[i][1].max(y + row_units);
                u[i][1] = ny;
                row_y = Some(ny);
            }
            None => row_y = Some(u[i][1]),
        }
    }
    // Separate atoms that landed on the same point.
    order.sort_by_key(|&i| (u[i][1], u[i][0], i));
    for w in 1..order.len() {
        let (a, b) = (order[w - 1], order[w]);
        if u[b][1] == u[a][1] && u[b][0] <= u[a][0] {
            u[b][0] = u[a][0] + 1;
        }
    }
}

fn min_pair_distance(l: &Layout) -> f64 {
    let n = l.len();
    let mut m = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            m = m.min(l.dist(i, j));
        }
    }
    m
}

/// Scale up about the origin until every pair clears `d_min`. Rounding up
/// keeps equal rows equal and never shrinks a row gap.
fn repair_spacing(u: &mut [[i64; 2]], grid: &Grid, geo: &HardwareGeometry) {
    for _ in 0..64 {
        let m = min_pair_distance(&grid.to_layout(u));
        if m >= geo.d_min {
            return;
        }
        let s = (geo.d_min + 2.0 * grid.step) / m;
        for p in u.iter_mut() {
            for c in p.iter_mut() {
                *c = (*c as f64 * s).ceil() as i64;
            }
        }
    }
}

/// Place atoms one by one (bottom to top), moving any atom that clashes with
/// those already placed to the nearest valid grid point on growing square
/// rings. Returns false when some atom cannot be placed.
fn relocate(u: &mut [[i64; 2]], grid: &Grid, geo: &HardwareGeometry, row_units: i64) -> bool {
    let w = grid.units(geo.width);
    let h = grid.units(geo.height);
    let dmin = (geo.d_min / grid.step - 1e-9).ceil() as i64;
    let step = (row_units / 4).max(1);
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by_key(|&i| (u[i][1], u[i][0], i));
    let mut placed: Vec<[i64; 2]> = Vec::with_capacity(u.len());
    let valid = |p: [i64; 2], placed: &[[i64; 2]]| {
        (0..=w).contains(&p[0])
            && (0..=h).contains(&p[1])
            && placed.iter().all(|q| {
                let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                dx * dx + dy * dy >= dmin * dmin && (dy == 0 || dy.abs() >= row_units)
            })
    };
    for &i in &order {
        let p0 = [u[i][0].clamp(0, w), u[i][1].clamp(0, h)];
        let mut found = valid(p0, &placed).then_some(p0);
        let mut r = 1;
        while found.is_none() && r * step <= w.max(h) {
            let mut best: Option<(i64, [i64; 2])> = None;
            for a in -r..=r {
                for [ox, oy] in [[a, -r], [a, r], [-r, a], [r, a]] {
                    let p = [p0[0] + ox * step, p0[1] + oy * step];
                    let d2 = (ox * ox + oy * oy) * step * step;
                    if best.is_none_or(|b| d2 < b.0) && valid(p, &placed) {
                        best = Some((d2, p));
                    }
                }
            }
            found = best.map(|b| b.1);
            r += 1;
        }
        match found {
            Some(p) => {
                u[i] = p;
                placed.push(p);
            }
            None => return false,
        }
    }
    true
}

fn margin_loss(
    x: &[f64],
    y_of: &dyn Fn(&[f64], usize) -> f64,
    adj: &[bool],
    lo: f64,
    hi: f64,
    grad: Option<(&mut [f64], &[usize], usize)>,
) -> f64 {
    let n = adj.len().isqrt();
    let mut loss = 0.0;
    let mut grad = grad;
    if let Some((g, _, _)) = grad.as_mut() {
        g.iter_mut().for_each(|v| *v = 0.0);
    }
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y_of(x, i) - y_of(x, j);
            let d = dx.hypot(dy);
            let e = if adj[i * n + j] { d - lo } else { hi - d };
            if e <= 0.0 {
                continue;
            }
            loss += e * e;
            if let Some((g, row_of, nx)) = grad.as_mut() {
                if d == 0.0 {
                    continue;
                }
                let sign = if adj[i * n + j] { 1.0 } else { -1.0 };
                let k = 2.0 * e * sign / d;
                g[i] += k * dx;
                g[j] -= k * dx;
                g[*nx + row_of[i]] += k * dy;
                g[*nx + row_of[j]] -= k * dy;
            }
        }
    }
    loss
}

fn layout_margin_loss(l: &Layout, adj: &[bool], lo: f64, hi: f64) -> f64 {
    let x: Vec<f64> = l.coords.iter().map(|c| c[0]).collect();
    let ys: Vec<f64> = l.coords.iter().map(|c| c[1]).collect();
    margin_loss(&x, &|_, i| ys[i], adj, lo, hi, None)
}

/// One optimization round inside safe boxes computed at `cur`.
fn box_round(cur: &Layout, adj: &[bool], geo: &HardwareGeometry, grid: &Grid, cfg: &RefineConfig) -> Layout {
    let n = cur.len();
    // Rows are atoms sharing an exact y coordinate.
    let mut row_ys: Vec<f64> = Vec::new();
    let mut row_of = vec![0; n];
    let mut by_y: Vec<usize> = (0..n).collect();
    by_y.sort_by(|&a, &b| cur.coords[a][1].total_cmp(&cur.coords[b][1]));
    for &i in &by_y {
        let y = cur.coords[i][1];
        if row_ys.last().is_none_or(|&r| (y - r).abs() > 1e-9) {
            row_ys.push(y);
        }
        row_of[i] = row_ys.len() - 1;
    }
    let nr = row_ys.len();

    // Half-width of each atom's box: moving every atom by at most
    // (nearest − d_min)/2 keeps all pairs at ≥ d_min.
    let half: Vec<f64> = (0..n)
        .map(|i| {
            let nearest = (0..n)
                .filter(|&j| j != i)
                .map(|j| cur.dist(i, j))
                .fold(f64::INFINITY, f64::min);
            if nearest.is_infinite() {
                return f64::INFINITY;
            }
            (((nearest - geo.d_min) / 2.0 - grid.step) / std::f64::consts::SQRT_2).max(0.0)
        })
        .collect();
    let mut row_slack: Vec<f64> = (0..nr)
        .map(|r| {
            let below = if r > 0 {
                row_ys[r] - row_ys[r - 1]
            } else {
                f64::INFINITY
            };
            let above = if r + 1 < nr {
                row_ys[r + 1] - row_ys[r]
            } else {
                f64::INFINITY
            };
            ((below.min(above) - geo.d_row) / 2.0 - grid.step).max(0.0)
        })
        .collect();
    for i in 0..n {
        row_slack[row_of[i]] = row_slack[row_of[i]].min(half[i]);
    }

    let mut x0 = Vec::with_capacity(n + nr);
    let mut lo = Vec::with_capacity(n + nr);
    let mut hi = Vec::with_capacity(n + nr);
    for i in 0..n {
        let x = cur.coords[i][0];
        x0.push(x);
        lo.push((x - half[i]).max(0.0));
        hi.push((x + half[i]).min(geo.width));
    }
    for r in 0..nr {
        x0.push(row_ys[r]);
        lo.push((row_ys[r] - row_slack[r]).max(0.0));
        hi.push((row_ys[r] + row_slack[r]).min(geo.height));
    }
    let (dlo, dhi) = (geo.d_adj - cfg.margin, geo.d_adj + cfg.margin);
    let y_of = |v: &[f64], i: usize| v[n + row_of[i]];
    let res = minimize_box(
        |v, g| margin_loss(v, &y_of, adj, dlo, dhi, Some((g, &row_of, n))),
        &x0,
        &lo,
        &hi,
        cfg.max_iter,
        1e-9,
    );
    Layout::new(
        (0..n)
            .map(|i| [grid.snap(res.x[i]), grid.snap(res.x[n + row_of[i]])])
            .collect(),
    )
}

/// Move a layout onto the hardware grid and improve its adjacency margins.
///
/// The layout is translated to the origin, snapped, grouped into rows and
/// uniformly scaled until every pair clears the minimum distance; if that
/// overflows the register, clashing atoms are relocated instead. Each round
/// then minimizes a margin loss within boxes that cannot break any hard
/// constraint; a round is kept only if it stays feasible and lowers the loss.
pub fn refine_layout(layout: &Layout, g: &WeightedGraph, geo: &HardwareGeometry, cfg: &RefineConfig) -> Result<Layout> {
    geo.validate()?;
    let n = g.n();
    if layout.len() != n {
        return Err(Error::Input(format!(
            "layout has {} positions for {n} vertices",
            layout.len()
        )));
    }
    if layout.coords.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("layout has non-finite coordinates".into()));
    }
    if n == 0 {
        return Ok(layout.clone());
    }
    let grid = Grid::new(geo.grid);
    let [mx, my] = layout.min_corner();
    let mut u: Vec<[i64; 2]> = layout
        .coords
        .iter()
        .map(|&[x, y]| [grid.units(x - mx), grid.units(y - my)])
        .collect();
    let row_units = (geo.d_row / geo.grid - 1e-9).ceil() as i64;
    legalize_rows(&mut u, row_units);
    let mut scaled = u.clone();
    repair_spacing(&mut scaled, &grid, geo);
    let mut cur = grid.to_layout(&scaled);
    if !hard_violations(&cur, geo).is_empty() && relocate(&mut u, &grid, geo, row_units) {
        cur = grid.to_layout(&u);
    }
    let violations = hard_violations(&cur, geo);
    if !violations.is_empty() {
        let shown: Vec<String> = violations.iter().take(5).map(|v| format!("{v:?}")).collect();
        return Err(Error::Refinement(format!(
            "{} hard-constraint violations remain after legalization: {}",
            violations.len(),
            shown.join("; ")
        )));
    }

    let adj = super::elf::adjacency_matrix(g);
    let (dlo, dhi) = (geo.d_adj - cfg.margin, geo.d_adj + cfg.margin);
    let mut loss = layout_margin_loss(&cur, &adj, dlo, dhi);
    for _ in 0..cfg.rounds {
        if loss == 0.0 {
            break;
        }
        let next = box_round(&cur, &adj, geo, &grid, cfg);
        if !hard_violations(&next, geo).is_empty() {
            break;
        }
        let next_loss = layout_margin_loss(&next, &adj, dlo, dhi);
        if next_loss >= loss - 1e-12 * loss.max(1.0) {
            break;
        }
        cur = next;
        loss = next_loss;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::validate_embedding;

    fn geo() -> HardwareGeometry {
        HardwareGeometry::default()
    }

    #[test]
    fn feasible_layout_only_snaps() {
        let g = WeightedGraph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let l = Layout::new(vec![[0.0, 0.0], [5.01, 0.0], [10.0, 4.0]]);
        let r = refine_layout(&l, &g, &geo(), &RefineConfig::default()).unwrap();
        assert_eq!(r.coords, vec![[0.0, 0.0], [5.0, 0.0], [10.0, 4.0]]);
    }

    #[test]
    fn translated_to_origin() {
        let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
        let l = Layout::new(vec![[-5.0, -5.0], [1.0, -5.0]]);
        let r = refine_layout(&l, &g, &geo(), &RefineConfig::default()).unwrap();
        assert_eq!(r.min_corner(), [0.0, 0.0]);
    }

    #[test]
    fn p3_line_validates() {
        let g = WeightedGraph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let l = Layout::new(vec![[0.0, 0.0], [5.0, 0.0], [10.0, 0.0]]);
        let r = refine_layout(&l, &g, &geo(), &RefineConfig::default()).unwrap();
        let rep = validate_embedding(&r, &g, &geo()).unwrap();
        assert!(rep.is_unit_disk && rep.is_feasible());
        assert_eq!((rep.d, rep.big_d), (5.0, Some(10.0)));
    }

    #[test]
    fn crowded_layout_is_legalized() {
        // Three atoms nearly on top of each other with slightly different heights.
        let g = WeightedGraph::unweighted(3, [(0, 1)]).unwrap();
        let l = Layout::new(vec![[10.0, 10.0], [10.5, 10.3], [11.0, 11.5]]);
        let r = refine_layout(&l, &g, &geo(), &RefineConfig::default()).unwrap();
        let rep = validate_embedding(&r, &g, &geo()).unwrap();
        assert!(rep.is_feasible(), "{:?}", rep.constraint_violations);
    }

    #[test]
    fn margins_improve() {
        // Edge 0-1 at 12 μm is too long; the box lets it shrink.
        let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
        let l = Layout::new(vec![[0.0, 0.0], [12.0, 0.0]]);
        let r = refine_layout(&l, &g, &geo(), &RefineConfig::default()).unwrap();
        assert!(r.dist(0, 1) <= 10.0 + 1e-9, "{:?}", r.coords);
        assert!(r.dist(0, 1) >= 4.0);
    }

    #[test]
    fn stacked_atoms_are_relocated() {
        let g = WeightedGraph::unweighted(4, []).unwrap();
        let l = Layout::new(vec![[0.0, 0.0], [0.0, 0.0], [60.0, 100.0], [60.0, 100.0]]);
        let r = refine_layout(&l, &g, &geo(), &RefineConfig::default()).unwrap();
        assert!(validate_embedding(&r, &g, &geo()).unwrap().is_feasible());
    }

    #[test]
    fn overcrowded_register_fails() {
        let small = HardwareGeometry {
            width: 10.0,
            height: 10.0,
            ..Default::default()
        };
        let g = WeightedGraph::unweighted(30, []).unwrap();
        let l = Layout::new((0..30).map(|i| [i as f64 * 0.3, 0.0]).collect());
        assert!(matches!(
            refine_layout(&l, &g, &small, &RefineConfig::default()),
            Err(Error::Refinement(_))
        ));
    }
}
