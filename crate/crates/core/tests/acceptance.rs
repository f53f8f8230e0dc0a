//! End-to-end acceptance checks. Every test prints one `[PASS]`/`[FAIL]`
//! line before asserting; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use stin_core::config::Config;
use stin_core::embedding::{elf_loss, elf_loss_with_grad, embed, EmbedConfig, HardwareGeometry, Layout};
use stin_core::instance_gen::synth_suite;
use stin_core::pipeline::{
    bench, distributions_csv, instances_csv, js_divergence, nonindependent_csv, relative_improvement, run_pipeline,
    SolverKind,
};
use stin_core::postprocess::{greedy_augment, refine};
use stin_core::rydberg::{
    build_qaa_schedule, evolve, local_factors, PhysicsConfig, PulseSchedule, ScheduleShape, ShotSet, Waveform,
};
use stin_core::solvers::{
    dsatur, greedy_mwis, gsp_bruteforce, gsp_feasible, gsp_solve, mwis_bruteforce, mwis_exact, sap_solve, SapMode,
    Status,
};
use stin_core::{BipartiteInstance, ColoringInstance, VertexSet, WeightedGraph};

fn report(name: &str, ok: bool, detail: impl std::fmt::Display) {
    println!("\n[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Erdős–Rényi graph with weights on a 1e-3 grid in (0, 1].
fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> WeightedGraph {
    let weights = (0..n).map(|_| rng.random_range(1..=1000) as f64 / 1000.0).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    WeightedGraph::new(weights, edges).unwrap()
}

/// The 1000 graphs shared by the selection checks: n in [1, 20], densities 0.1..0.9.
fn mwis_corpus() -> Vec<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..1000)
        .map(|k| {
            let n = rng.random_range(1..=20);
            let p = (k % 9 + 1) as f64 / 10.0;
            random_graph(&mut rng, n, p)
        })
        .collect()
}

#[test]
fn mwis_exact_agrees_with_enumeration() {
    let graphs = mwis_corpus();
    let start = Instant::now();
    let mismatches: Vec<usize> = graphs
        .par_iter()
        .enumerate()
        .filter(|(_, g)| {
            let exact = mwis_exact(g, None);
            let bf = mwis_bruteforce(g).unwrap();
            exact.status != Status::Optimal
                || !close(exact.objective, bf.objective)
                || !g.is_independent(&exact.solution).unwrap()
        })
        .map(|(k, _)| k)
        .collect();
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && elapsed < Duration::from_secs(120);
    report(
        "mwis exact vs brute force",
        ok,
        format!(
            "{} graphs, {} mismatches, {:.1?}",
            graphs.len(),
            mismatches.len(),
            elapsed
        ),
    );
    assert!(ok, "mismatching graphs {mismatches:?} in {elapsed:?}");
}

#[test]
fn greedy_is_independent_maximal_and_dominated() {
    let graphs = mwis_corpus();
    let violations: Vec<usize> = graphs
        .par_iter()
        .enumerate()
        .filter(|(_, g)| {
            let r = greedy_mwis(g);
            let bf = mwis_bruteforce(g).unwrap().objective;
            !g.is_independent(&r.solution).unwrap() || !g.is_maximal(&r.solution).unwrap() || r.objective > bf + 1e-12
        })
        .map(|(k, _)| k)
        .collect();
    let ok = violations.is_empty();
    report(
        "greedy independence, maximality, dominance",
        ok,
        format!("{} graphs, {} violations", graphs.len(), violations.len()),
    );
    assert!(ok, "violating graphs {violations:?}");
}

#[test]
fn gsp_flow_search_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut infeasible = 0;
    for k in 0..500 {
        let ns = rng.random_range(0..=8);
        let ng = rng.random_range(1..=5);
        let p = rng.random_range(0.15..0.9);
        let links: Vec<(usize, usize)> = (0..ns)
            .flat_map(|s| (0..ng).map(move |g| (s, g)))
            .filter(|_| rng.random_bool(p))
            .collect();
        let inst = BipartiteInstance::new(
            (0..ns).map(|s| format!("s{s}")).collect(),
            (0..ng).map(|g| format!("g{g}")).collect(),
            links,
            None,
        )
        .unwrap();
        let fast = gsp_solve(&inst);
        let slow = gsp_bruteforce(&inst).unwrap();
        if slow.status == Status::Infeasible {
            infeasible += 1;
            if fast.status != Status::Infeasible {
                failures.push(k);
            }
            continue;
        }
        let m = fast.objective as usize;
        let tight = fast.solution.is_valid_for(&inst)
            && gsp_feasible(&inst, m).is_some()
            && (m == 0 || gsp_feasible(&inst, m - 1).is_none());
        if fast.objective != slow.objective || !tight {
            failures.push(k);
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(60);
    report(
        "gsp exactness",
        ok,
        format!(
            "500 instances ({infeasible} infeasible), {} failures, {elapsed:.1?}",
            failures.len()
        ),
    );
    assert!(ok, "failing instances {failures:?}");
}

/// Chromatic number by trying k = 1, 2, ... with plain backtracking in index order.
fn chromatic_number(n: usize, edges: &[(usize, usize)]) -> usize {
    fn extend(v: usize, k: usize, adj: &[Vec<usize>], colour: &mut Vec<usize>) -> bool {
        if v == adj.len() {
            return true;
        }
        for c in 0..k {
            if adj[v].iter().all(|&u| u > v || colour[u] != c) {
                colour[v] = c;
                if extend(v + 1, k, adj, colour) {
                    return true;
                }
            }
        }
        false
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    (0..=n).find(|&k| extend(0, k, &adj, &mut vec![usize::MAX; n])).unwrap()
}

fn petersen() -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
    e.extend((0..5).map(|i| (i, i + 5)));
    e.extend((0..5).map(|i| (5 + i, 5 + (i + 2) % 5)));
    e
}

#[test]
fn sap_band_counts_match_chromatic_numbers() {
    let start = Instant::now();
    let mut cases: Vec<(String, usize, Vec<(usize, usize)>, Option<usize>)> = vec![
        ("C5".into(), 5, (0..5).map(|i| (i, (i + 1) % 5)).collect(), Some(3)),
        ("Petersen".into(), 10, petersen(), Some(3)),
        (
            "K4".into(),
            4,
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            Some(4),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for k in 0..200 {
        let n = rng.random_range(1..=12);
        let p = rng.random_range(0.1..0.9);
        let g = random_graph(&mut rng, n, p);
        cases.push((format!("random-{k}"), n, g.edges().to_vec(), None));
    }
    let mut failures = Vec::new();
    for (name, n, edges, expected) in &cases {
        let chi = chromatic_number(*n, edges);
        if expected.is_some_and(|e| e != chi) {
            failures.push(format!("{name}: oracle gives {chi}"));
        }
        let inst = ColoringInstance::anonymous(*n, edges.clone(), *n).unwrap();
        let exact = sap_solve(&inst, SapMode::Exact).unwrap();
        if exact.status != Status::Optimal || exact.solution.bands_used != chi || !exact.solution.is_proper_for(&inst) {
            failures.push(format!(
                "{name}: exact uses {} bands, chi = {chi}",
                exact.solution.bands_used
            ));
        }
        let heur = sap_solve(&inst, SapMode::Dsatur).unwrap();
        let bands = dsatur(&inst.conflict_graph());
        if heur.status == Status::Infeasible
            || !heur.solution.is_proper_for(&inst)
            || edges.iter().any(|&(a, b)| bands[a] == bands[b])
        {
            failures.push(format!("{name}: dsatur infeasible"));
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < Duration::from_secs(60);
    report(
        "sap chromatic numbers and dsatur feasibility",
        ok,
        format!("{} graphs, {} failures, {elapsed:.1?}", cases.len(), failures.len()),
    );
    assert!(ok, "{failures:#?}");
}

fn path_graph(n: usize) -> WeightedGraph {
    WeightedGraph::unweighted(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

fn cycle_graph(n: usize) -> WeightedGraph {
    WeightedGraph::unweighted(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

/// Ladder with two rows of `k` vertices.
fn grid_graph(k: usize) -> WeightedGraph {
    let mut e: Vec<(usize, usize)> = (0..k).map(|i| (i, i + k)).collect();
    for r in 0..2 {
        e.extend((1..k).map(|i| (r * k + i - 1, r * k + i)));
    }
    WeightedGraph::unweighted(2 * k, e).unwrap()
}

#[test]
fn embeddings_of_paths_cycles_and_ladders_are_feasible() {
    let mut graphs: Vec<(String, WeightedGraph)> = Vec::new();
    graphs.extend((2..=10).map(|n| (format!("P{n}"), path_graph(n))));
    graphs.extend((3..=10).map(|n| (format!("C{n}"), cycle_graph(n))));
    graphs.extend((2..=5).map(|k| (format!("2x{k}"), grid_graph(k))));
    let geo = HardwareGeometry::default();
    let cfg = EmbedConfig::default();
    let jobs: Vec<(usize, u64)> = (0..graphs.len()).flat_map(|g| (0..20).map(move |s| (g, s))).collect();
    let start = Instant::now();
    let results: Vec<(usize, bool, bool)> = jobs
        .par_iter()
        .map(|&(k, seed)| match embed(&graphs[k].1, &geo, &cfg, seed) {
            Ok(out) => (k, out.report.constraint_violations.is_empty(), out.report.is_unit_disk),
            Err(_) => (k, false, false),
        })
        .collect();
    let elapsed = start.elapsed();
    let runs = results.len();
    let feasible = results.iter().filter(|r| r.1).count();
    let unit_disk = results.iter().filter(|r| r.2).count();
    let mut per_graph = String::new();
    for (k, (name, _)) in graphs.iter().enumerate() {
        let ud = results.iter().filter(|r| r.0 == k && r.2).count();
        if ud < 20 {
            per_graph.push_str(&format!(" {name}:{ud}/20"));
        }
    }
    let ok = feasible == runs && unit_disk as f64 >= 0.9 * runs as f64 && elapsed < Duration::from_secs(600);
    report(
        "embedding feasibility",
        ok,
        format!("{runs} runs, {feasible} feasible, {unit_disk} unit-disk, {elapsed:.1?}{per_graph}"),
    );
    assert!(ok);
}

#[test]
fn elf_values_and_gradients() {
    let geo = HardwareGeometry::default();
    // Hand-computed single-term cases.
    let pair = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
    let apart = WeightedGraph::unweighted(2, []).unwrap();
    let close_pair = elf_loss(&Layout::new(vec![[0.0, 0.0], [3.0, 0.0]]), &pair, &geo);
    let row = |dy: f64| elf_loss(&Layout::new(vec![[0.0, 0.0], [20.0, dy]]), &apart, &geo);
    let values_ok =
        close_pair.l_min == 7.0 && close_pair.total == 7.0 && row(2.0).l_row == 0.0 && row(1.0).l_row == 3.0;

    // Gradients on random layouts away from every kink of the max/min terms.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let thresholds = [
        geo.d_min.powi(2),
        geo.d_adj.powi(2),
        geo.width.max(geo.height).powi(2) * 2.0,
    ];
    let smooth = |coords: &[[f64; 2]], g: &WeightedGraph| {
        let n = coords.len();
        let mut edge_d = Vec::new();
        let mut non_d = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let dx = coords[i][0] - coords[j][0];
                let dy = coords[i][1] - coords[j][1];
                let d2 = dx * dx + dy * dy;
                if thresholds.iter().any(|t| (d2 - t).abs() < 0.5) || (dy.abs() - geo.d_row).abs() < 0.05 {
                    return false;
                }
                if g.has_edge(i, j) {
                    edge_d.push(d2)
                } else {
                    non_d.push(d2)
                }
            }
        }
        // Unique arg-max over edges and arg-min over non-edges.
        let gap = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v.windows(2).all(|w| w[1] - w[0] > 0.5)
        };
        gap(edge_d) && gap(non_d)
    };
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 50 {
        let n = rng.random_range(2..=24);
        let p = rng.random_range(0.2..0.7);
        let g = random_graph(&mut rng, n, p);
        let coords: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random_range(0.0..geo.width), rng.random_range(0.0..geo.height)])
            .collect();
        if !smooth(&coords, &g) {
            continue;
        }
        checked += 1;
        let (_, grad) = elf_loss_with_grad(&Layout::new(coords.clone()), &g, &geo);
        let h = 1e-5;
        for v in 0..n {
            for a in 0..2 {
                let shifted = |delta: f64| {
                    let mut c = coords.clone();
                    c[v][a] += delta;
                    elf_loss(&Layout::new(c), &g, &geo).total
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                worst = worst.max((fd - grad[v][a]).abs() / grad[v][a].abs().max(fd.abs()).max(1.0));
            }
        }
    }
    let ok = values_ok && worst <= 1e-4;
    report(
        "elf values and gradients",
        ok,
        format!(
            "hand values {}, worst relative gradient error {worst:.2e} over {checked} layouts",
            if values_ok { "exact" } else { "wrong" }
        ),
    );
    assert!(ok);
}

fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn flat(value: f64, t: f64) -> Waveform {
    Waveform::constant(value, t)
}

#[test]
fn simulator_physics() {
    let phys = PhysicsConfig::default();
    // evolve fails if the norm drifts by more than 1e-6 at any checkpoint, so
    // every completed run certifies conservation.
    let mut worst_norm: f64 = 0.0;
    let mut runs = 0;

    // Resonant Rabi flopping of a lone atom.
    let one = Layout::new(vec![[0.0, 0.0]]);
    let omega = phys.omega_max;
    let mut rabi_err: f64 = 0.0;
    for k in 1..=12 {
        let t = k as f64 * 0.1;
        let s = PulseSchedule {
            omega: flat(omega, t),
            delta_global: flat(0.0, t),
            delta_local: flat(0.0, t),
            local_factors: vec![0.0],
            duration: t,
        };
        let psi = evolve(&one, &s, &phys).unwrap();
        runs += 1;
        worst_norm = worst_norm.max((norm(&psi) - 1.0).abs());
        rabi_err = rabi_err.max((psi[1].norm_sqr() - (omega * t / 2.0).sin().powi(2)).abs());
    }

    // Blockade of two atoms 4 μm apart under the adiabatic schedule.
    let k2 = WeightedGraph::unweighted(2, [(0, 1)]).unwrap();
    let pair = Layout::new(vec![[0.0, 0.0], [4.0, 0.0]]);
    let s = build_qaa_schedule(&k2, 4.0, &phys).unwrap();
    let psi = evolve(&pair, &s, &phys).unwrap();
    runs += 1;
    worst_norm = worst_norm.max((norm(&psi) - 1.0).abs());
    let p11 = psi[0b11].norm_sqr();

    // Halving the integrator tolerance on three-atom instances.
    let mut worst_fid: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..5 {
        let g = random_graph(&mut rng, 3, 0.5);
        let l = Layout::new((0..3).map(|i| [6.0 * i as f64, rng.random_range(0.0..3.0)]).collect());
        let s = build_qaa_schedule(&g, 7.0, &phys).unwrap();
        let a = evolve(&l, &s, &phys).unwrap();
        let half = PhysicsConfig {
            integrator_tol: phys.integrator_tol / 2.0,
            ..phys.clone()
        };
        let b = evolve(&l, &s, &half).unwrap();
        runs += 2;
        worst_norm = worst_norm.max((norm(&a) - 1.0).abs()).max((norm(&b) - 1.0).abs());
        let overlap = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.conj() * y)
            .sum::<Complex64>()
            .norm_sqr();
        worst_fid = worst_fid.max((1.0 - overlap).abs());
    }

    let ok = worst_norm <= 1e-6 && rabi_err <= 1e-4 && p11 < 0.05 && worst_fid < 1e-6;
    report(
        "simulator physics",
        ok,
        format!(
            "{runs} runs within the 1e-6 checkpoint norm guard (final drift {worst_norm:.1e}), Rabi error {rabi_err:.1e}, P(11) at 4um {p11:.2e}, tolerance-halving infidelity {worst_fid:.1e}"
        ),
    );
    assert!(ok);
}

#[test]
fn quantum_pipeline_end_to_end() {
    let suite = synth_suite(2024, 50, [3, 10]);
    let mut cfg = Config::default();
    cfg.budgets.exact_seconds = None;
    assert_eq!(cfg.budgets.shots, 300);
    let start = Instant::now();
    let rows: Vec<(String, f64, f64, f64, bool)> = suite
        .par_iter()
        .map(|t| {
            let bf = mwis_bruteforce(&t.ssp).unwrap().objective;
            let exact = mwis_exact(&t.ssp, None).objective;
            match run_pipeline(t, SolverKind::Qaa, &cfg, 2024) {
                Ok(art) => {
                    let members = &art.report.ssp.members;
                    let set = VertexSet::new(&t.ssp, members.iter().copied()).unwrap();
                    let independent = t.ssp.is_independent(&set).unwrap();
                    (t.id.clone(), art.report.ssp.objective, bf, exact, independent)
                }
                Err(_) => (t.id.clone(), f64::NAN, bf, exact, false),
            }
        })
        .collect();
    let elapsed = start.elapsed();
    let hits = rows.iter().filter(|r| close(r.1, r.2)).count();
    let infeasible = rows.iter().filter(|r| !r.4).count();
    let above_exact = rows.iter().filter(|r| !(r.1 <= r.3 + 1e-9)).count();
    let ok = hits as f64 >= 0.9 * rows.len() as f64
        && infeasible == 0
        && above_exact == 0
        && elapsed < Duration::from_secs(900);
    report(
        "qaa pipeline",
        ok,
        format!(
            "{hits}/{} optimal, {infeasible} infeasible, {above_exact} above exact, 300 shots, {elapsed:.1?}",
            rows.len()
        ),
    );
    assert!(ok, "{rows:?}");
}

#[test]
fn postprocess_identities() {
    let graphs = mwis_corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = 0;
    let mut hamming_range = (f64::INFINITY, f64::NEG_INFINITY);
    for g in &graphs {
        let augmented = greedy_augment(&VertexSet::empty(), g).unwrap();
        if augmented.members() != greedy_mwis(g).solution.members() {
            failures += 1;
        }
        // Random shots, biased towards sparse selections so that some are independent.
        let n = g.n();
        let mut counts = std::collections::BTreeMap::new();
        for _ in 0..20 {
            let s: String = (0..n).map(|_| if rng.random_bool(0.25) { '0' } else { '1' }).collect();
            *counts.entry(s).or_insert(0) += rng.random_range(1..5);
        }
        let shots = ShotSet::new(counts, 0).unwrap();
        let out = refine(&shots, g).unwrap();
        for r in &out.refined_sets {
            let set = VertexSet::new(g, r.members.iter().copied()).unwrap();
            if !g.is_independent(&set).unwrap() || !g.is_maximal(&set).unwrap() {
                failures += 1;
            }
            hamming_range.0 = hamming_range.0.min(r.hamming);
            hamming_range.1 = hamming_range.1.max(r.hamming);
        }
        if !g.is_independent(&out.best).unwrap() || !g.is_maximal(&out.best).unwrap() {
            failures += 1;
        }
        if !(0.0..=1.0).contains(&out.hamming_mean) || !(0.0..=1.0).contains(&out.hamming_max) {
            failures += 1;
        }
    }
    let ok = failures == 0 && hamming_range.0 >= 0.0 && hamming_range.1 <= 1.0;
    report(
        "postprocess identities",
        ok,
        format!(
            "{} graphs, {failures} violations, hamming in [{:.3}, {:.3}]",
            graphs.len(),
            hamming_range.0,
            hamming_range.1
        ),
    );
    assert!(ok);
}

#[test]
fn schedule_arithmetic() {
    let shape = ScheduleShape::default();
    let durations_ok =
        shape.omega_durations.iter().sum::<f64>() == 3.0 && shape.delta_durations.iter().sum::<f64>() == 3.0;
    let equal_ok = local_factors(&[0.7; 6]).iter().all(|&f| f == 0.0);

    let phys = PhysicsConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut monotone_ok = true;
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let g = random_graph(&mut rng, n, 0.3);
        let s = build_qaa_schedule(&g, 7.0, &phys).unwrap();
        monotone_ok &= s.duration == 3.0;
        for t in [0.0, 0.5, 1.4, 2.9, 3.0] {
            for i in 0..n {
                for j in 0..n {
                    if g.weight(i) < g.weight(j) {
                        monotone_ok &= s.delta(i, t) <= s.delta(j, t);
                        monotone_ok &= s.local_factors[i] > s.local_factors[j];
                    }
                }
            }
        }
    }
    let ok = durations_ok && equal_ok && monotone_ok;
    report(
        "schedule arithmetic",
        ok,
        format!("durations sum to 3.0: {durations_ok}, equal weights give zero factors: {equal_ok}, monotone: {monotone_ok}"),
    );
    assert!(ok);
}

#[test]
fn metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut self_ok = true;
    for _ in 0..100 {
        let k = rng.random_range(1..10);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        self_ok &= js_divergence(&p, &p).unwrap() == 0.0;
    }
    let disjoint = js_divergence(&[0.5, 0.5, 0.0, 0.0], &[0.0, 0.0, 0.25, 0.75]).unwrap();
    let disjoint_ok = (disjoint - std::f64::consts::LN_2).abs() <= 1e-12;
    let impr = relative_improvement(16.50, 16.22).unwrap();
    let impr_ok = (impr - 0.01726).abs() <= 1e-5;
    let ok = self_ok && disjoint_ok && impr_ok;
    report(
        "metrics",
        ok,
        format!("JS(p,p) = 0: {self_ok}, disjoint JS = {disjoint:.15}, improvement 16.50 vs 16.22 = {impr:.6}"),
    );
    assert!(ok);
}

#[test]
fn bench_reruns_are_byte_identical() {
    let suite = synth_suite(11, 6, [3, 8]);
    let cfg = Config::default();
    let run = || {
        let out = bench(&suite, &SolverKind::ALL, &cfg, 11).unwrap();
        (
            instances_csv(&out.reports).unwrap(),
            distributions_csv(&out.reports).unwrap(),
            nonindependent_csv(&out.reports).unwrap(),
        )
    };
    let a = run();
    let b = run();
    let written = {
        let dir = tempfile::tempdir().unwrap();
        let mut files = Vec::new();
        for _ in 0..2 {
            let out = bench(&suite, &SolverKind::ALL, &cfg, 11).unwrap();
            stin_core::pipeline::write_bench(dir.path(), &out).unwrap();
            files.push(std::fs::read(dir.path().join("instances.csv")).unwrap());
        }
        files[0] == files[1]
    };
    let ok = a == b && written && a.0.lines().count() == suite.len() + 1;
    report(
        "bench determinism",
        ok,
        format!("{} instances, csv bytes identical: {}", suite.len(), a == b && written),
    );
    assert!(ok);
}
