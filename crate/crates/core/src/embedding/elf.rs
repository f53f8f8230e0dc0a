//! Embedding loss over squared pair and row distances.

use serde::{Deserialize, Serialize};

use super::{HardwareGeometry, Layout};
use crate::graph::WeightedGraph;

/// Graphs above this size use the relaxed weighting.
pub const RELAXED_ABOVE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossComponents {
    pub total: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub l_row: f64,
    /// Largest squared edge length minus smallest squared non-edge length;
    /// zero when either set of pairs is empty.
    pub l_ud: f64,
}

pub(crate) fn adjacency_matrix(g: &WeightedGraph) -> Vec<bool> {
    let n = g.n();
    let mut a = vec![false; n * n];
    for &(i, j) in g.edges() {
        a[i * n + j] = true;
        a[j * n + i] = true;
    }
    a
}

/// Loss and its gradient with respect to every coordinate.
pub(crate) fn evaluate(
    coords: &[[f64; 2]],
    adj: &[bool],
    geo: &HardwareGeometry,
    grad: Option<&mut [[f64; 2]]>,
) -> LossComponents {
    let n = coords.len();
    let dmin2 = geo.d_min * geo.d_min;
    let dadj2 = geo.d_adj * geo.d_adj;
    let diag2 = geo.diagonal_bound().powi(2);
    let row_c = 4.0 / (geo.d_row * geo.d_row);
    let ud_weight = if n <= RELAXED_ABOVE { 1.0 } else { 0.1 };
    let max_weight = if n <= RELAXED_ABOVE { 1.0 } else { 0.0 };

    let mut c = LossComponents::default();
    let mut far_edge: Option<(f64, usize, usize)> = None;
    let mut near_non: Option<(f64, usize, usize)> = None;
    // Per pair: dL/ds (s = squared distance) and dL/dr (r = squared row gap).
    let mut pair_grads: Vec<(usize, usize, f64, f64)> = Vec::new();
    let want_grad = grad.is_some();

    for i in 0..n {
        for j in i + 1..n {
            let dx = coords[i][0] - coords[j][0];
            let dy = coords[i][1] - coords[j][1];
            let s = dx * dx + dy * dy;
            let r = dy * dy;
            let edge = adj[i * n + j];
            let (lo, hi) = if edge { (dmin2, dadj2) } else { (dadj2, diag2) };
            let mut ds = 0.0;
            let mut dr = 0.0;
            if s < lo {
                c.l_min += lo - s;
                ds -= 1.0;
            }
            if s > hi {
                c.l_max += s - hi;
                ds += max_weight;
            }
            let p = -row_c * r * r + 4.0 * r;
            if p > 0.0 {
                c.l_row += p;
                dr += -2.0 * row_c * r + 4.0;
            }
            if edge {
                if far_edge.is_none_or(|(v, _, _)| s > v) {
                    far_edge = Some((s, i, j));
                }
            } else if near_non.is_none_or(|(v, _, _)| s < v) {
                near_non = Some((s, i, j));
            }
            if want_grad && (ds != 0.0 || dr != 0.0) {
                pair_grads.push((i, j, ds, dr));
            }
        }
    }
    if let (Some((a, ai, aj)), Some((b, bi, bj))) = (far_edge, near_non) {
        c.l_ud = a - b;
        if want_grad {
            pair_grads.push((ai, aj, ud_weight, 0.0));
            pair_grads.push((bi, bj, -ud_weight, 0.0));
        }
    }
    c.total = c.l_min + c.l_row + max_weight * c.l_max + ud_weight * c.l_ud;

    if let Some(grad) = grad {
        grad.iter_mut().for_each(|g| *g = [0.0; 2]);
        for (i, j, ds, dr) in pair_grads {
            let dx = coords[i][0] - coords[j][0];
            let dy = coords[i][1] - coords[j][1];
            let gx = 2.0 * dx * ds;
            let gy = 2.0 * dy * (ds + dr);
            grad[i][0] += gx;
            grad[i][1] += gy;
            grad[j][0] -= gx;
            grad[j][1] -= gy;
        }
    }
    c
}

pub fn elf_loss(layout: &Layout, g: &WeightedGraph, geo: &HardwareGeometry) -> LossComponents {
    evaluate(&layout.coords, &adjacency_matrix(g), geo, None)
}

/// Loss together with `∂L/∂(x_i, y_i)` for every vertex.
pub fn elf_loss_with_grad(
    layout: &Layout,
    g: &WeightedGraph,
    geo: &HardwareGeometry,
) -> (LossComponents, Vec<[f64; 2]>) {
    let mut grad = vec![[0.0; 2]; layout.len()];
    let c = evaluate(&layout.coords, &adjacency_matrix(g), geo, Some(&mut grad));
    (c, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn geo() -> HardwareGeometry {
        HardwareGeometry::default()
    }

    #[test]
    fn adjacent_pair_too_close() {
        let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
        let c = elf_loss(&Layout::new(vec![[0.0, 0.0], [3.0, 0.0]]), &g, &geo());
        assert!((c.l_min - 7.0).abs() < 1e-12);
        assert_eq!(c.l_row, 0.0);
        assert_eq!(c.l_ud, 0.0);
    }

    #[test]
    fn row_polynomial_values() {
        let g = WeightedGraph::unweighted(2, []).unwrap();
        let at = |dy: f64| elf_loss(&Layout::new(vec![[0.0, 0.0], [20.0, dy]]), &g, &geo()).l_row;
        assert_eq!(at(2.0), 0.0);
        assert!((at(1.0) - 3.0).abs() < 1e-12);
        assert_eq!(at(0.0), 0.0);
        assert_eq!(at(5.0), 0.0);
    }

    #[test]
    fn feasible_unit_disk_layout_has_zero_hard_terms() {
        let g = WeightedGraph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let c = elf_loss(&Layout::new(vec![[0.0, 0.0], [6.0, 0.0], [12.0, 0.0]]), &g, &geo());
        // Non-edge 0-2 sits at 12 > 10.
        assert_eq!(c.l_min, 0.0);
        assert_eq!(c.l_row, 0.0);
        assert_eq!(c.l_max, 0.0);
        assert!((c.l_ud - (36.0 - 144.0)).abs() < 1e-9);
        assert!((c.total - c.l_ud).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 6, 24] {
            let edges: Vec<_> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|_| rng.random_bool(0.4))
                .collect();
            let g = WeightedGraph::unweighted(n, edges).unwrap();
            let coords: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.random_range(0.0..30.0), rng.random_range(0.0..30.0)])
                .collect();
            let layout = Layout::new(coords.clone());
            let (_, grad) = elf_loss_with_grad(&layout, &g, &geo());
            let h = 1e-5;
            for v in 0..n {
                for a in 0..2 {
                    let mut p = coords.clone();
                    p[v][a] += h;
                    let mut m = coords.clone();
                    m[v][a] -= h;
                    let fd = (elf_loss(&Layout::new(p), &g, &geo()).total
                        - elf_loss(&Layout::new(m), &g, &geo()).total)
                        / (2.0 * h);
                    let an = grad[v][a];
                    assert!(
                        (fd - an).abs() <= 1e-4 * an.abs().max(1.0),
                        "n={n} v={v} axis={a}: fd={fd} analytic={an}"
                    );
                }
            }
        }
    }
}
