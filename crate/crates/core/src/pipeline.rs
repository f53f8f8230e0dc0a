//! SSP → GSP → SAP chains, three-way benchmarks and their reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::embedding::{embed, EmbeddingReport, Layout};
use crate::error::{Error, Result};
use crate::graph::{BipartiteInstance, ColoringInstance, VertexSet, WeightedGraph};
use crate::instance_gen::{build_gsp_instance, downstream, sap_for, InstanceTriple};
use crate::io;
use crate::postprocess::{bootstrap_objectives, refine, Histogram};
use crate::rydberg::{run_qaa, ShotSet};
use crate::seed;
use crate::solvers::{greedy_mwis, mwis_exact, sap_solve, Assignment, Coloring, SapMode, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Qaa,
    Exact,
    Greedy,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Qaa, SolverKind::Exact, SolverKind::Greedy];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Qaa => "qaa",
            SolverKind::Exact => "exact",
            SolverKind::Greedy => "greedy",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qaa" => Ok(Self::Qaa),
            "exact" => Ok(Self::Exact),
            "greedy" => Ok(Self::Greedy),
            other => Err(Error::Input(format!(
                "unknown solver {other:?}; expected qaa, exact or greedy"
            ))),
        }
    }
}

/// `(a - b) / b`.
pub fn relative_improvement(a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::Input(
            "relative improvement is undefined for a zero baseline".into(),
        ));
    }
    Ok((a - b) / b)
}

fn kl_term(p: f64, m: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / m).ln()
    }
}

/// Jensen-Shannon divergence in nats of two distributions on a common support.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Input(format!(
            "supports differ in size: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    for (name, d) in [("p", p), ("q", q)] {
        if d.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Input(format!("{name} has a negative or non-finite entry")));
        }
        let total: f64 = d.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!("{name} sums to {total}, not 1")));
        }
    }
    let js: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let m = (a + b) / 2.0;
            0.5 * kl_term(a, m) + 0.5 * kl_term(b, m)
        })
        .sum();
    Ok(js.clamp(0.0, std::f64::consts::LN_2))
}

/// Normalized histograms of two integer-valued samples over their joint
/// support, in ascending value order.
pub fn integer_histograms(a: &[i64], b: &[i64]) -> (Vec<i64>, Vec<f64>, Vec<f64>) {
    let support: Vec<i64> = a
        .iter()
        .chain(b)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let hist = |xs: &[i64]| -> Vec<f64> {
        support
            .iter()
            .map(|v| xs.iter().filter(|x| *x == v).count() as f64 / xs.len() as f64)
            .collect()
    };
    (support.clone(), hist(a), hist(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SspRecord {
    pub members: Vec<usize>,
    pub objective: f64,
    pub status: Status,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GspRecord {
    pub satellites: usize,
    pub links: usize,
    /// Maximum gateway load `M`.
    pub objective: f64,
    pub status: Status,
    pub assignment: Assignment,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SapRecord {
    pub paths: usize,
    pub conflicts: usize,
    /// Total band cost.
    pub objective: f64,
    pub bands_used: usize,
    pub status: Status,
    pub mode: SapMode,
    pub coloring: Coloring,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaaRecord {
    pub blockade_radius: f64,
    pub embedding: EmbeddingReport,
    pub shots: usize,
    pub n_nonindependent: usize,
    pub hamming_mean: f64,
    pub hamming_max: f64,
    pub best_from_fallback: bool,
    pub histogram: Histogram,
    pub bootstrap: Vec<f64>,
    pub embed_s: f64,
    pub simulate_s: f64,
}

/// One solver's full chain on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub solver: SolverKind,
    pub ssp: SspRecord,
    pub gsp: GspRecord,
    pub sap: SapRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qaa: Option<QaaRecord>,
}

/// Derived instances and raw quantum outputs of a chain, for persistence.
#[derive(Debug, Clone)]
pub struct ChainArtifacts {
    pub report: ChainReport,
    pub gsp: BipartiteInstance,
    pub sap: ColoringInstance,
    pub layout: Option<Layout>,
    pub shots: Option<ShotSet>,
}

impl ChainArtifacts {
    /// Write `report.json`, `gsp.json`, `sap.json` and, for quantum runs,
    /// `layout.json` and `shots.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_json(dir.join("report.json"), &self.report)?;
        io::write_instance(dir.join("gsp.json"), &io::Instance::Gsp(self.gsp.clone()))?;
        io::write_instance(dir.join("sap.json"), &io::Instance::Sap(self.sap.clone()))?;
        if let Some(l) = &self.layout {
            io::write_json(dir.join("layout.json"), l)?;
        }
        if let Some(s) = &self.shots {
            io::write_json(dir.join("shots.json"), s)?;
        }
        Ok(())
    }
}

struct QaaOutput {
    set: VertexSet,
    record: Option<QaaRecord>,
    layout: Option<Layout>,
    shots: Option<ShotSet>,
}

fn solve_qaa(g: &WeightedGraph, cfg: &Config, seed: u64) -> Result<QaaOutput> {
    let n = g.n();
    if n > cfg.physics.max_qubits {
        return Err(Error::Size {
            what: "vertices for qaa (use the exact or greedy solver)",
            got: n,
            limit: cfg.physics.max_qubits,
        });
    }
    if n == 0 {
        return Ok(QaaOutput {
            set: VertexSet::empty(),
            record: None,
            layout: None,
            shots: None,
        });
    }
    let t = Instant::now();
    let emb = embed(g, &cfg.geometry, &cfg.embed, seed::derive_seed(seed, "embed"))?;
    let embed_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let run = run_qaa(
        g,
        &emb.layout,
        &cfg.geometry,
        &cfg.physics,
        cfg.budgets.shots,
        seed::derive_seed(seed, "shots"),
    )?;
    let simulate_s = t.elapsed().as_secs_f64();
    let out = refine(&run.shots, g)?;
    let subsample = cfg.budgets.bootstrap_subsample.min(run.shots.shots);
    let bootstrap = bootstrap_objectives(
        &run.shots,
        g,
        subsample,
        cfg.budgets.bootstrap_reps,
        seed::derive_seed(seed, "bootstrap"),
    )?;
    Ok(QaaOutput {
        set: out.best,
        record: Some(QaaRecord {
            blockade_radius: run.blockade_radius,
            embedding: run.report,
            shots: run.shots.shots,
            n_nonindependent: out.n_nonindependent,
            hamming_mean: out.hamming_mean,
            hamming_max: out.hamming_max,
            best_from_fallback: out.best_from_fallback,
            histogram: out.histogram,
            bootstrap,
            embed_s,
            simulate_s,
        }),
        layout: Some(emb.layout),
        shots: Some(run.shots),
    })
}

fn solve_sap(inst: &ColoringInstance, mode: SapMode) -> Result<(SapMode, crate::solvers::SolveResult<Coloring>)> {
    match sap_solve(inst, mode) {
        // Too many paths for the exact search: fall back to the heuristic.
        Err(Error::Size { .. }) if mode == SapMode::Exact => Ok((SapMode::Dsatur, sap_solve(inst, SapMode::Dsatur)?)),
        other => Ok((mode, other?)),
    }
}

/// Solve the selection stage with `solver` and push its satellite set
/// through gateway assignment and spectrum assignment.
pub fn run_pipeline(triple: &InstanceTriple, solver: SolverKind, cfg: &Config, seed: u64) -> Result<ChainArtifacts> {
    let g = &triple.ssp;
    let chain_seed = seed::derive_path(seed, &[&triple.id, solver.name()]);
    let start = Instant::now();
    let (set, status, qaa) = match solver {
        SolverKind::Greedy => {
            let r = greedy_mwis(g);
            (r.solution, r.status, None)
        }
        SolverKind::Exact => {
            let r = mwis_exact(g, cfg.budgets.exact_budget());
            (r.solution, r.status, None)
        }
        SolverKind::Qaa => {
            let out = solve_qaa(g, cfg, chain_seed)?;
            (out.set.clone(), Status::Feasible, Some(out))
        }
    };
    let ssp = SspRecord {
        members: set.members().to_vec(),
        objective: set.objective(),
        status,
        elapsed_s: start.elapsed().as_secs_f64(),
    };
    let (gsp_inst, gsp_sol, sap_inst) = downstream(&triple.network, &set)?;
    let gsp = GspRecord {
        satellites: gsp_inst.n_satellites(),
        links: gsp_inst.links.len(),
        objective: gsp_sol.objective,
        status: gsp_sol.status,
        assignment: gsp_sol.solution,
        elapsed_s: gsp_sol.elapsed_s,
    };
    let (mode, sap_sol) = solve_sap(&sap_inst, cfg.budgets.sap_mode)?;
    let sap = SapRecord {
        paths: sap_inst.n_paths(),
        conflicts: sap_inst.conflicts.len(),
        objective: sap_sol.objective,
        bands_used: sap_sol.solution.bands_used,
        status: sap_sol.status,
        mode,
        coloring: sap_sol.solution,
        elapsed_s: sap_sol.elapsed_s,
    };
    let (record, layout, shots) = match qaa {
        Some(q) => (q.record, q.layout, q.shots),
        None => (None, None, None),
    };
    Ok(ChainArtifacts {
        report: ChainReport {
            solver,
            ssp,
            gsp,
            sap,
            qaa: record,
        },
        gsp: gsp_inst,
        sap: sap_inst,
        layout,
        shots,
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Re-derive the downstream instances from the stored selection and check
/// every stored solution against them.
pub fn verify_chain(triple: &InstanceTriple, chain: &ChainReport) -> Result<()> {
    let fail = |msg: String| {
        Err(Error::Contract(format!(
            "{} chain on {}: {msg}",
            chain.solver, triple.id
        )))
    };
    let g = &triple.ssp;
    let set = VertexSet::new(g, chain.ssp.members.iter().copied())?;
    if !g.is_independent(&set)? {
        return fail("selection is not independent".into());
    }
    if !close(set.objective(), chain.ssp.objective) {
        return fail(format!(
            "selection weighs {}, report says {}",
            set.objective(),
            chain.ssp.objective
        ));
    }
    let gsp = build_gsp_instance(&triple.network, &set)?;
    let feasible = chain.gsp.status != Status::Infeasible;
    if feasible {
        let a = &chain.gsp.assignment;
        if !a.is_valid_for(&gsp) || a.max_load as f64 != chain.gsp.objective {
            return fail("gateway assignment does not reproduce its objective".into());
        }
        let loads = a.loads(gsp.n_gateways());
        if loads.into_iter().max().unwrap_or(0) != a.max_load {
            return fail("gateway loads disagree with M".into());
        }
    } else if (0..gsp.n_satellites()).all(|s| !gsp.gateways_of(s).is_empty()) {
        return fail("gateway stage reported infeasible although every satellite has a link".into());
    }
    let solved = crate::solvers::SolveResult {
        objective: chain.gsp.objective,
        status: chain.gsp.status,
        solution: chain.gsp.assignment.clone(),
        elapsed_s: 0.0,
    };
    let sap = sap_for(&triple.network, &gsp, &solved)?;
    if sap.n_paths() != chain.sap.paths {
        return fail(format!(
            "{} paths re-derived, report says {}",
            sap.n_paths(),
            chain.sap.paths
        ));
    }
    if chain.sap.status != Status::Infeasible {
        let c = &chain.sap.coloring;
        if !c.is_proper_for(&sap) || !close(c.cost(&sap), chain.sap.objective) {
            return fail("band assignment does not reproduce its objective".into());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Improvements {
    pub qaa_vs_greedy: Option<f64>,
    pub qaa_vs_exact: Option<f64>,
    pub exact_vs_greedy: Option<f64>,
}

/// All requested chains on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub id: String,
    pub n: usize,
    pub edges: usize,
    pub chains: BTreeMap<SolverKind, ChainReport>,
    /// Chains that failed, with the error message.
    pub errors: BTreeMap<SolverKind, String>,
    pub improvements: Improvements,
}

impl PipelineReport {
    fn objective(&self, s: SolverKind) -> Option<f64> {
        self.chains.get(&s).map(|c| c.ssp.objective)
    }

    fn improvement(&self, a: SolverKind, b: SolverKind) -> Option<f64> {
        relative_improvement(self.objective(a)?, self.objective(b)?).ok()
    }
}

/// Run every solver in `solvers` on one instance; failures are recorded,
/// not propagated.
pub fn run_instance(triple: &InstanceTriple, solvers: &[SolverKind], cfg: &Config, seed: u64) -> PipelineReport {
    let mut chains = BTreeMap::new();
    let mut errors = BTreeMap::new();
    for &s in solvers {
        match run_pipeline(triple, s, cfg, seed) {
            Ok(a) => {
                chains.insert(s, a.report);
            }
            Err(e) => {
                errors.insert(s, e.to_string());
            }
        }
    }
    let mut r = PipelineReport {
        id: triple.id.clone(),
        n: triple.ssp.n(),
        edges: triple.ssp.edges().len(),
        chains,
        errors,
        improvements: Improvements::default(),
    };
    r.improvements = Improvements {
        qaa_vs_greedy: r.improvement(SolverKind::Qaa, SolverKind::Greedy),
        qaa_vs_exact: r.improvement(SolverKind::Qaa, SolverKind::Exact),
        exact_vs_greedy: r.improvement(SolverKind::Exact, SolverKind::Greedy),
    };
    r
}

/// Instances where two solvers chose different satellite sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionDifferences {
    pub compared: usize,
    pub differing: usize,
    pub affecting_objective: usize,
    pub same_objective: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub stage: String,
    pub a: SolverKind,
    pub b: SolverKind,
    pub js: f64,
}

/// Suite-level aggregates. Contains no timings, so reruns reproduce it exactly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub instances: usize,
    pub failures: usize,
    pub mean_improvements: Improvements,
    pub qaa_exceeds_exact: usize,
    pub differences: BTreeMap<String, SelectionDifferences>,
    pub divergences: Vec<Divergence>,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub reports: Vec<PipelineReport>,
    pub summary: BenchSummary,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn summarize(reports: &[PipelineReport], solvers: &[SolverKind]) -> BenchSummary {
    let mean_of = |f: fn(&Improvements) -> Option<f64>| mean(reports.iter().filter_map(|r| f(&r.improvements)));
    let mut differences = BTreeMap::new();
    let mut divergences = Vec::new();
    for (i, &a) in solvers.iter().enumerate() {
        for &b in &solvers[i + 1..] {
            let mut d = SelectionDifferences::default();
            let mut stage_values: [(Vec<i64>, Vec<i64>); 2] = Default::default();
            for r in reports {
                let (Some(ca), Some(cb)) = (r.chains.get(&a), r.chains.get(&b)) else {
                    continue;
                };
                d.compared += 1;
                if ca.ssp.members != cb.ssp.members {
                    d.differing += 1;
                    if close(ca.ssp.objective, cb.ssp.objective) {
                        d.same_objective += 1;
                    } else {
                        d.affecting_objective += 1;
                    }
                }
                stage_values[0].0.push(ca.gsp.assignment.max_load as i64);
                stage_values[0].1.push(cb.gsp.assignment.max_load as i64);
                stage_values[1].0.push(ca.sap.bands_used as i64);
                stage_values[1].1.push(cb.sap.bands_used as i64);
            }
            for (stage, (va, vb)) in ["gsp", "sap"].iter().zip(&stage_values) {
                if va.is_empty() {
                    continue;
                }
                let (_, p, q) = integer_histograms(va, vb);
                divergences.push(Divergence {
                    stage: stage.to_string(),
                    a,
                    b,
                    js: js_divergence(&p, &q).expect("histograms are normalized"),
                });
            }
            differences.insert(format!("{a}-{b}"), d);
        }
    }
    BenchSummary {
        instances: reports.len(),
        failures: reports.iter().filter(|r| !r.errors.is_empty()).count(),
        mean_improvements: Improvements {
            qaa_vs_greedy: mean_of(|i| i.qaa_vs_greedy),
            qaa_vs_exact: mean_of(|i| i.qaa_vs_exact),
            exact_vs_greedy: mean_of(|i| i.exact_vs_greedy),
        },
        qaa_exceeds_exact: reports
            .iter()
            .filter(|r| r.improvements.qaa_vs_exact.is_some_and(|x| x > 1e-12))
            .count(),
        differences,
        divergences,
    }
}

/// Three-way comparison over a suite on a bounded worker pool.
pub fn bench(suite: &[InstanceTriple], solvers: &[SolverKind], cfg: &Config, seed: u64) -> Result<BenchOutcome> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.budgets.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker pool: {e}")))?;
    let reports: Vec<PipelineReport> =
        pool.install(|| suite.par_iter().map(|t| run_instance(t, solvers, cfg, seed)).collect());
    let summary = summarize(&reports, solvers);
    Ok(BenchOutcome { reports, summary })
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v}"))
}

/// One row per instance, without timings.
pub fn instances_csv(reports: &[PipelineReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "n".into(), "edges".into()];
    for s in SolverKind::ALL {
        header.push(format!("obj_{s}"));
    }
    header.extend(["impr_qaa_greedy", "impr_qaa_exact", "impr_exact_greedy"].map(String::from));
    for s in SolverKind::ALL {
        header.push(format!("m_{s}"));
    }
    for s in SolverKind::ALL {
        header.push(format!("bands_{s}"));
    }
    header.extend(
        [
            "hamming_mean",
            "hamming_max",
            "n_nonindependent",
            "bootstrap_mean",
            "errors",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.id.clone(), r.n.to_string(), r.edges.to_string()];
        let chain = |s| r.chains.get(&s);
        for s in SolverKind::ALL {
            row.push(cell(chain(s).map(|c| c.ssp.objective)));
        }
        let i = &r.improvements;
        row.extend([cell(i.qaa_vs_greedy), cell(i.qaa_vs_exact), cell(i.exact_vs_greedy)]);
        for s in SolverKind::ALL {
            row.push(chain(s).map_or_else(String::new, |c| c.gsp.assignment.max_load.to_string()));
        }
        for s in SolverKind::ALL {
            row.push(chain(s).map_or_else(String::new, |c| c.sap.bands_used.to_string()));
        }
        let q = chain(SolverKind::Qaa).and_then(|c| c.qaa.as_ref());
        row.push(cell(q.map(|q| q.hamming_mean)));
        row.push(cell(q.map(|q| q.hamming_max)));
        row.push(q.map_or_else(String::new, |q| q.n_nonindependent.to_string()));
        row.push(cell(q.and_then(|q| mean(q.bootstrap.iter().copied()))));
        row.push(
            r.errors
                .iter()
                .map(|(s, e)| format!("{s}: {e}"))
                .collect::<Vec<_>>()
                .join("; "),
        );
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Input(e.to_string()))?).expect("csv is utf-8"))
}

/// Long-format objective values per stage and solver.
pub fn distributions_csv(reports: &[PipelineReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "solver", "ssp", "gsp_m", "sap_bands", "sap_cost"])?;
    for r in reports {
        for (s, c) in &r.chains {
            w.write_record([
                r.id.clone(),
                s.to_string(),
                format!("{}", c.ssp.objective),
                c.gsp.assignment.max_load.to_string(),
                c.sap.bands_used.to_string(),
                format!("{}", c.sap.objective),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Input(e.to_string()))?).expect("csv is utf-8"))
}

/// Non-independent shot counts against graph size.
pub fn nonindependent_csv(reports: &[PipelineReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "n", "shots", "n_nonindependent", "fraction"])?;
    for r in reports {
        if let Some(q) = r.chains.get(&SolverKind::Qaa).and_then(|c| c.qaa.as_ref()) {
            w.write_record([
                r.id.clone(),
                r.n.to_string(),
                q.shots.to_string(),
                q.n_nonindependent.to_string(),
                format!("{}", q.n_nonindependent as f64 / q.shots as f64),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Input(e.to_string()))?).expect("csv is utf-8"))
}

/// Write per-instance JSON reports, the CSV tables and `summary.json`.
pub fn write_bench(dir: impl AsRef<Path>, out: &BenchOutcome) -> Result<()> {
    let dir = dir.as_ref();
    let reports_dir = dir.join("reports");
    fs::create_dir_all(&reports_dir).map_err(|e| Error::io(&reports_dir, e))?;
    for r in &out.reports {
        io::write_json(reports_dir.join(format!("{}.json", r.id)), r)?;
    }
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("instances.csv", instances_csv(&out.reports)?)?;
    write("distributions.csv", distributions_csv(&out.reports)?)?;
    write("nonindependent.csv", nonindependent_csv(&out.reports)?)?;
    io::write_json(dir.join("summary.json"), &out.summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance_gen::{synth_suite, GroundNetwork, NetworkContext};
    use crate::solvers::mwis_bruteforce;

    #[test]
    fn improvement_values() {
        assert_eq!(relative_improvement(2.0, 2.0).unwrap(), 0.0);
        assert!((relative_improvement(1.1, 1.0).unwrap() - 0.1).abs() < 1e-12);
        assert!((relative_improvement(16.50, 16.22).unwrap() - 0.01726).abs() < 1e-5);
        assert!(relative_improvement(1.0, 0.0).is_err());
    }

    #[test]
    fn divergence_values() {
        assert_eq!(js_divergence(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        let ln2 = std::f64::consts::LN_2;
        assert!((js_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - ln2).abs() < 1e-12);
        // Direct evaluation: m = (0.75, 0.25).
        let expect = 0.5 * (0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln()) + 0.5 * (1.0f64 / 0.75).ln();
        let got = js_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.2158).abs() < 1e-4);
        assert!(js_divergence(&[0.5, 0.6], &[0.5, 0.5]).is_err());
        assert!(js_divergence(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn histograms_share_support() {
        let (s, p, q) = integer_histograms(&[1, 1, 2], &[2, 3]);
        assert_eq!(s, vec![1, 2, 3]);
        assert_eq!(p, vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert_eq!(q, vec![0.0, 0.5, 0.5]);
    }

    fn quick() -> Config {
        let mut cfg = Config::default();
        cfg.budgets.exact_seconds = None;
        cfg
    }

    #[test]
    fn greedy_chain_populates_all_stages() {
        let t = &synth_suite(1, 1, [5, 10])[0];
        let a = run_pipeline(t, SolverKind::Greedy, &quick(), 1).unwrap();
        assert!(a.report.ssp.objective > 0.0);
        assert!(a.report.gsp.objective >= 1.0);
        assert!(a.report.sap.bands_used >= 1);
        verify_chain(t, &a.report).unwrap();
    }

    #[test]
    fn exact_chain_matches_bruteforce() {
        for t in synth_suite(3, 4, [6, 12]) {
            let a = run_pipeline(&t, SolverKind::Exact, &quick(), 3).unwrap();
            let bf = mwis_bruteforce(&t.ssp).unwrap();
            assert!((a.report.ssp.objective - bf.objective).abs() < 1e-9);
            verify_chain(&t, &a.report).unwrap();
        }
    }

    #[test]
    fn empty_graph_chain() {
        let net = NetworkContext {
            satellites: vec![],
            visible: vec![],
            ground: GroundNetwork::default(),
            bands: 4,
        };
        let t = InstanceTriple::new("empty", WeightedGraph::empty(), net).unwrap();
        for s in SolverKind::ALL {
            let a = run_pipeline(&t, s, &quick(), 0).unwrap();
            assert_eq!(a.report.gsp.objective, 0.0);
            assert_eq!(a.report.sap.paths, 0);
            verify_chain(&t, &a.report).unwrap();
        }
    }

    #[test]
    fn qaa_rejects_oversized_graphs() {
        let mut cfg = quick();
        cfg.physics.max_qubits = 4;
        let t = &synth_suite(2, 1, [6, 6])[0];
        match run_pipeline(t, SolverKind::Qaa, &cfg, 0) {
            Err(Error::Size { what, .. }) => assert!(what.contains("exact or greedy")),
            other => panic!("{other:?}"),
        }
        let r = run_instance(t, &SolverKind::ALL, &cfg, 0);
        assert!(r.errors.contains_key(&SolverKind::Qaa));
        assert!(r.improvements.exact_vs_greedy.is_some());
    }

    #[test]
    fn tampered_report_fails_verification() {
        let t = &synth_suite(1, 1, [5, 10])[0];
        let mut a = run_pipeline(t, SolverKind::Greedy, &quick(), 1).unwrap().report;
        a.ssp.objective += 0.5;
        assert!(verify_chain(t, &a).is_err());
    }
}
