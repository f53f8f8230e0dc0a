use num_complex::Complex64;
use stin_core::embedding::{HardwareGeometry, Layout};
use stin_core::postprocess::refine;
use stin_core::rydberg::*;
use stin_core::solvers::mwis_bruteforce;
use stin_core::WeightedGraph;

fn geo() -> HardwareGeometry {
    HardwareGeometry::default()
}

#[test]
fn single_atom_is_excited() {
    let g = WeightedGraph::new(vec![1.0], []).unwrap();
    let l = Layout::new(vec![[10.0, 10.0]]);
    let run = run_qaa(&g, &l, &geo(), &PhysicsConfig::default(), 300, 1).unwrap();
    let selected = run.shots.counts.get("0").copied().unwrap_or(0);
    assert!(selected as f64 >= 0.95 * 300.0, "{:?}", run.shots.counts);
}

#[test]
fn adjacent_pair_is_blockaded() {
    let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
    for sep in [4.0, 5.0] {
        let l = Layout::new(vec![[0.0, 0.0], [sep, 0.0]]);
        let run = run_qaa(&g, &l, &geo(), &PhysicsConfig::default(), 300, 2).unwrap();
        let both = run.shots.counts.get("00").copied().unwrap_or(0);
        assert!(both < 15, "separation {sep}: {:?}", run.shots.counts);
    }
}

#[test]
fn two_atoms_under_qaa_schedule_at_four_microns() {
    let g = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
    let l = Layout::new(vec![[0.0, 0.0], [4.0, 0.0]]);
    let phys = PhysicsConfig::default();
    let s = build_qaa_schedule(&g, 4.0, &phys).unwrap();
    let psi = evolve(&l, &s, &phys).unwrap();
    assert!(psi[0b11].norm_sqr() < 0.05);
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn heavy_vertex_of_triangle_wins() {
    let g = WeightedGraph::new(vec![1.0, 1.0, 3.0], [(0, 1), (1, 2), (0, 2)]).unwrap();
    let h = 5.0 * 3f64.sqrt() / 2.0;
    let l = Layout::new(vec![[10.0, 10.0], [15.0, 10.0], [12.5, 10.0 + h]]);
    let run = run_qaa(&g, &l, &geo(), &PhysicsConfig::default(), 300, 3).unwrap();
    let out = refine(&run.shots, &g).unwrap();
    let modal = out.refined_sets.iter().max_by_key(|r| r.count).unwrap();
    assert_eq!(modal.members, vec![2]);
    assert_eq!(out.best.objective(), mwis_bruteforce(&g).unwrap().objective);
}

fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

#[test]
fn halving_tolerance_converges() {
    let g = WeightedGraph::new(vec![1.0, 2.0, 1.5], [(0, 1), (1, 2)]).unwrap();
    let l = Layout::new(vec![[0.0, 0.0], [6.0, 0.0], [12.0, 0.0]]);
    let phys = PhysicsConfig::default();
    let s = build_qaa_schedule(&g, (6.0f64 * 12.0).sqrt(), &phys).unwrap();
    let a = evolve(&l, &s, &phys).unwrap();
    let half = PhysicsConfig {
        integrator_tol: phys.integrator_tol / 2.0,
        ..phys.clone()
    };
    let b = evolve(&l, &s, &half).unwrap();
    assert!((1.0 - fidelity(&a, &b)).abs() < 1e-6);
}

#[test]
fn energy_expectation_is_real() {
    let g = WeightedGraph::new(vec![1.0, 2.0, 1.5], [(0, 1), (1, 2)]).unwrap();
    let l = Layout::new(vec![[0.0, 0.0], [6.0, 0.0], [12.0, 0.0]]);
    let phys = PhysicsConfig::default();
    let s = build_qaa_schedule(&g, 72f64.sqrt(), &phys).unwrap();
    let psi = evolve(&l, &s, &phys).unwrap();
    let mut ground = vec![Complex64::new(0.0, 0.0); 8];
    ground[0] = Complex64::new(1.0, 0.0);
    for (state, t) in [(&ground, 0.0), (&psi, 3.0), (&psi, 1.3)] {
        let e = energy_expectation(&l, &s, &phys, state, t).unwrap();
        assert!(e.im.abs() < 1e-9 * e.re.abs().max(1.0), "{e}");
    }
}

#[test]
fn relabeling_permutes_probabilities() {
    let g = WeightedGraph::new(vec![1.0, 2.0, 1.5, 1.2], [(0, 1), (1, 2), (2, 3)]).unwrap();
    let l = Layout::new(vec![[0.0, 0.0], [6.0, 0.0], [12.0, 0.0], [18.0, 0.0]]);
    let perm = [2usize, 0, 3, 1];
    let gp = g.permuted(&perm).unwrap();
    let lp = l.permuted(&perm);
    let phys = PhysicsConfig::default();
    let s = build_qaa_schedule(&g, 72f64.sqrt(), &phys).unwrap();
    let sp = build_qaa_schedule(&gp, 72f64.sqrt(), &phys).unwrap();
    let a = evolve(&l, &s, &phys).unwrap();
    let b = evolve(&lp, &sp, &phys).unwrap();
    for k in 0..16usize {
        let kp = (0..4).filter(|&i| k >> i & 1 == 1).fold(0, |m, i| m | 1 << perm[i]);
        assert!((a[k].norm_sqr() - b[kp].norm_sqr()).abs() < 1e-7);
    }
}

#[test]
fn too_many_qubits_is_rejected() {
    let n = 16;
    let l = Layout::new((0..n).map(|i| [i as f64 * 5.0, 0.0]).collect());
    let g = WeightedGraph::unweighted(n, []).unwrap();
    let s = build_qaa_schedule(&g, 5.0, &PhysicsConfig::default()).unwrap();
    assert!(evolve(&l, &s, &PhysicsConfig::default()).is_err());
}
