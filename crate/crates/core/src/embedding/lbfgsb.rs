//! Box-constrained limited-memory quasi-Newton minimization.
//!
//! Projected L-BFGS: the two-loop direction is computed on the variables not
//! held at a bound, and a backtracking search along the projected path
//! enforces sufficient decrease.

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

const MEMORY: usize = 10;

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f` over `lo ≤ x ≤ hi`. `f` writes the gradient into its second
/// argument and returns the value.
pub fn minimize_box<F>(mut f: F, x0: &[f64], lo: &[f64], hi: &[f64], max_iter: usize, gtol: f64) -> BoxResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lo, hi);
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut g_new = vec![0.0; n];
    for it in 0..max_iter {
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)))
            .collect();
        let pg = (0..n)
            .map(|i| (x[i] - (x[i] - g[i]).clamp(lo[i], hi[i])).abs())
            .fold(0.0, f64::max);
        if pg <= gtol {
            return BoxResult {
                x,
                f: fx,
                iterations: it,
                converged: true,
            };
        }
        // Two-loop recursion on the free subspace.
        let mut q: Vec<f64> = (0..n).map(|i| if free[i] { g[i] } else { 0.0 }).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut d: Vec<f64> = (0..n).map(|i| if free[i] { -q[i] } else { 0.0 }).collect();
        if dot(&d, &g) >= 0.0 {
            d = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
            hist.clear();
        }

        // Bracketing search for Armijo decrease plus the curvature condition
        // along the projected path.
        let gd = dot(&g, &d);
        let (mut lo_s, mut hi_s, mut step) = (0.0, f64::INFINITY, 1.0);
        let mut accepted: Option<(Vec<f64>, Vec<f64>, f64, Vec<f64>)> = None;
        let mut prev_x: Option<Vec<f64>> = None;
        for _ in 0..40 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            project(&mut xn, lo, hi);
            if prev_x.as_ref() == Some(&xn) {
                break;
            }
            let moved: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let fnew = f(&xn, &mut g_new);
            if fnew > fx + 1e-4 * dot(&g, &moved) {
                hi_s = step;
            } else {
                let curved = dot(&g_new, &d) >= 0.9 * gd;
                accepted = Some((xn.clone(), moved, fnew, g_new.clone()));
                if curved {
                    break;
                }
                lo_s = step;
                prev_x = Some(xn);
            }
            step = if hi_s.is_finite() {
                0.5 * (lo_s + hi_s)
            } else {
                2.0 * step
            };
        }
        let Some((xn, s, fnew, gn)) = accepted else {
            return BoxResult {
                x,
                f: fx,
                iterations: it,
                converged: false,
            };
        };
        g_new.copy_from_slice(&gn);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).max(1e-300) {
            if hist.len() == MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - fnew;
        x = xn;
        fx = fnew;
        g.copy_from_slice(&g_new);
        if decrease <= 1e-15 * fx.abs().max(1.0) {
            return BoxResult {
                x,
                f: fx,
                iterations: it + 1,
                converged: true,
            };
        }
    }
    BoxResult {
        x,
        f: fx,
        iterations: max_iter,
        converged: false,
    }
}
