//! Python bindings. Structured results (solver outputs, reports) cross the
//! boundary as plain dicts and lists.

use std::collections::BTreeMap;
use std::time::Duration;

use pyo3::exceptions::{PyIndexError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use stin_core::config::Config;
use stin_core::embedding::{self, HardwareGeometry, Layout};
use stin_core::instance_gen::{self, InstanceTriple};
use stin_core::io::{self, Instance, InstanceKind};
use stin_core::pipeline::{self, SolverKind};
use stin_core::rydberg::{self, ShotSet};
use stin_core::{postprocess, solvers, BipartiteInstance, ColoringInstance, Error, VertexSet, WeightedGraph};

fn err(e: Error) -> PyErr {
    match e {
        Error::IndexOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Serialize through JSON into native Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn config(toml: Option<&str>) -> PyResult<Config> {
    match toml {
        Some(t) => Config::from_toml(t).map_err(err),
        None => Ok(Config::default()),
    }
}

fn parse<T>(text: &str, kind: InstanceKind, pick: impl FnOnce(Instance) -> Option<T>) -> PyResult<T> {
    let inst = io::parse_instance(text, kind).map_err(err)?;
    pick(inst).ok_or_else(|| PyValueError::new_err(format!("expected a {kind:?} instance")))
}

/// Vertex-weighted undirected graph (the satellite selection instance).
#[pyclass(name = "Graph", module = "stin", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph(WeightedGraph);

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (weights, edges, labels = None))]
    fn new(weights: Vec<f64>, edges: Vec<(usize, usize)>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let g = WeightedGraph::new(weights, edges).map_err(err)?;
        Ok(Self(match labels {
            Some(l) => g.with_labels(l).map_err(err)?,
            None => g,
        }))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text, InstanceKind::Ssp, |i| match i {
            Instance::Ssp(g) => Some(Self(g)),
            _ => None,
        })
    }

    fn to_json(&self) -> String {
        io::instance_to_json(&Instance::Ssp(self.0.clone()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().to_vec()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<String>> {
        self.0.labels().map(<[String]>::to_vec)
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.0.n() {
            return Err(PyIndexError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.0.neighbors(v).to_vec())
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.0.n() && b < self.0.n() && self.0.has_edge(a, b)
    }

    fn is_independent(&self, members: Vec<usize>) -> PyResult<bool> {
        let s = VertexSet::new(&self.0, members).map_err(err)?;
        self.0.is_independent(&s).map_err(err)
    }

    fn is_maximal(&self, members: Vec<usize>) -> PyResult<bool> {
        let s = VertexSet::new(&self.0, members).map_err(err)?;
        self.0.is_maximal(&s).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.0.n(), self.0.edges().len())
    }
}

/// Satellite-to-gateway links (the gateway selection instance).
#[pyclass(name = "Bipartite", module = "stin", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBipartite(BipartiteInstance);

#[pymethods]
impl PyBipartite {
    #[new]
    fn new(satellites: Vec<String>, gateways: Vec<String>, links: Vec<(usize, usize)>) -> PyResult<Self> {
        BipartiteInstance::new(satellites, gateways, links, None)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text, InstanceKind::Gsp, |i| match i {
            Instance::Gsp(b) => Some(Self(b)),
            _ => None,
        })
    }

    fn to_json(&self) -> String {
        io::instance_to_json(&Instance::Gsp(self.0.clone()))
    }

    #[getter]
    fn satellites(&self) -> Vec<String> {
        self.0.satellites.clone()
    }

    #[getter]
    fn gateways(&self) -> Vec<String> {
        self.0.gateways.clone()
    }

    #[getter]
    fn links(&self) -> Vec<(usize, usize)> {
        self.0.links.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Bipartite(satellites={}, gateways={}, links={})",
            self.0.n_satellites(),
            self.0.n_gateways(),
            self.0.links.len()
        )
    }
}

/// Path conflict graph plus available bands (the spectrum assignment instance).
#[pyclass(name = "Coloring", module = "stin", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyColoring(ColoringInstance);

#[pymethods]
impl PyColoring {
    #[new]
    #[pyo3(signature = (paths, conflicts, bands, costs = None))]
    fn new(
        paths: Vec<String>,
        conflicts: Vec<(usize, usize)>,
        bands: Vec<String>,
        costs: Option<Vec<Vec<f64>>>,
    ) -> PyResult<Self> {
        ColoringInstance::new(paths, conflicts, bands, costs)
            .map(Self)
            .map_err(err)
    }

    /// `n` anonymous paths and bands named `"1"..="k"`.
    #[staticmethod]
    fn anonymous(n: usize, conflicts: Vec<(usize, usize)>, k: usize) -> PyResult<Self> {
        ColoringInstance::anonymous(n, conflicts, k).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text, InstanceKind::Sap, |i| match i {
            Instance::Sap(c) => Some(Self(c)),
            _ => None,
        })
    }

    fn to_json(&self) -> String {
        io::instance_to_json(&Instance::Sap(self.0.clone()))
    }

    #[getter]
    fn paths(&self) -> Vec<String> {
        self.0.paths.clone()
    }

    #[getter]
    fn conflicts(&self) -> Vec<(usize, usize)> {
        self.0.conflicts.clone()
    }

    #[getter]
    fn bands(&self) -> Vec<String> {
        self.0.bands.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Coloring(paths={}, conflicts={}, bands={})",
            self.0.n_paths(),
            self.0.conflicts.len(),
            self.0.n_bands()
        )
    }
}

/// One benchmark instance: the selection graph, the downstream reference
/// instances and the network context that rebuilds them.
#[pyclass(name = "Triple", module = "stin", frozen, skip_from_py_object)]
struct PyTriple(InstanceTriple);

#[pymethods]
impl PyTriple {
    #[staticmethod]
    fn read(dir: &str) -> PyResult<Self> {
        InstanceTriple::read_dir(dir).map(Self).map_err(err)
    }

    fn write(&self, dir: &str) -> PyResult<()> {
        self.0.write_dir(dir).map_err(err)
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id.clone()
    }

    #[getter]
    fn ssp(&self) -> PyGraph {
        PyGraph(self.0.ssp.clone())
    }

    #[getter]
    fn gsp(&self) -> PyBipartite {
        PyBipartite(self.0.gsp.clone())
    }

    #[getter]
    fn sap(&self) -> PyColoring {
        PyColoring(self.0.sap.clone())
    }

    fn __repr__(&self) -> String {
        format!("Triple(id={:?}, n={})", self.0.id, self.0.ssp.n())
    }
}

/// Exact maximum weight independent set; `budget_s=None` runs to optimality.
#[pyfunction]
#[pyo3(signature = (g, budget_s = None))]
fn mwis_exact<'py>(py: Python<'py>, g: &PyGraph, budget_s: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let budget = budget_s
        .map(|s| Duration::try_from_secs_f64(s).map_err(|e| PyValueError::new_err(e.to_string())))
        .transpose()?;
    to_py(py, &py.detach(|| solvers::mwis_exact(&g.0, budget)))
}

#[pyfunction]
fn mwis_greedy<'py>(py: Python<'py>, g: &PyGraph) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &solvers::greedy_mwis(&g.0))
}

#[pyfunction]
fn mwis_bruteforce<'py>(py: Python<'py>, g: &PyGraph) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &solvers::mwis_bruteforce(&g.0).map_err(err)?)
}

#[pyfunction]
fn gsp_solve<'py>(py: Python<'py>, inst: &PyBipartite) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &solvers::gsp_solve(&inst.0))
}

/// `mode` is `"exact"` or `"dsatur"`.
#[pyfunction]
#[pyo3(signature = (inst, mode = "exact"))]
fn sap_solve<'py>(py: Python<'py>, inst: &PyColoring, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let mode: solvers::SapMode = mode.parse().map_err(err)?;
    let r = py.detach(|| solvers::sap_solve(&inst.0, mode)).map_err(err)?;
    to_py(py, &r)
}

/// Embed into the atom register. Returns `{"layout", "report", "loss_trace"}`.
#[pyfunction]
#[pyo3(signature = (g, seed = 0, config = None))]
fn embed<'py>(py: Python<'py>, g: &PyGraph, seed: u64, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = self::config(config)?;
    let out = py
        .detach(|| embedding::embed(&g.0, &cfg.geometry, &cfg.embed, seed))
        .map_err(err)?;
    to_py(py, &out)
}

/// Constraint check of explicit coordinates in micrometers.
#[pyfunction]
#[pyo3(signature = (g, coords, config = None))]
fn validate_embedding<'py>(
    py: Python<'py>,
    g: &PyGraph,
    coords: Vec<[f64; 2]>,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let geo: HardwareGeometry = self::config(config)?.geometry;
    to_py(
        py,
        &embedding::validate_embedding(&Layout::new(coords), &g.0, &geo).map_err(err)?,
    )
}

/// Simulate the adiabatic protocol on an embedded graph and sample `shots`
/// bitstrings ('0' marks a selected vertex).
#[pyfunction]
#[pyo3(signature = (g, coords, shots = 300, seed = 0, config = None))]
fn simulate<'py>(
    py: Python<'py>,
    g: &PyGraph,
    coords: Vec<[f64; 2]>,
    shots: usize,
    seed: u64,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = self::config(config)?;
    let layout = Layout::new(coords);
    let run = py
        .detach(|| rydberg::run_qaa(&g.0, &layout, &cfg.geometry, &cfg.physics, shots, seed))
        .map_err(err)?;
    to_py(py, &run)
}

/// Repair measured bitstrings (`{"0110": count, ...}`) into maximal
/// independent sets.
#[pyfunction]
fn refine<'py>(py: Python<'py>, g: &PyGraph, counts: BTreeMap<String, usize>) -> PyResult<Bound<'py, PyAny>> {
    let shots = ShotSet::new(counts, 0).map_err(err)?;
    to_py(py, &postprocess::refine(&shots, &g.0).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (seed, count, n_min = 5, n_max = 12))]
fn synth_suite(seed: u64, count: usize, n_min: usize, n_max: usize) -> PyResult<Vec<PyTriple>> {
    if n_min > n_max {
        return Err(PyValueError::new_err("n_min exceeds n_max"));
    }
    Ok(instance_gen::synth_suite(seed, count, [n_min, n_max])
        .into_iter()
        .map(PyTriple)
        .collect())
}

#[pyfunction]
fn read_suite(dir: &str) -> PyResult<Vec<PyTriple>> {
    Ok(instance_gen::read_suite(dir)
        .map_err(err)?
        .into_iter()
        .map(PyTriple)
        .collect())
}

fn solver(name: &str) -> PyResult<SolverKind> {
    name.parse().map_err(err)
}

/// Run the selection -> gateway -> spectrum chain with one solver
/// (`"qaa"`, `"exact"` or `"greedy"`).
#[pyfunction]
#[pyo3(signature = (triple, solver, seed = 0, config = None))]
fn run_pipeline<'py>(
    py: Python<'py>,
    triple: &PyTriple,
    solver: &str,
    seed: u64,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = self::config(config)?;
    let kind = self::solver(solver)?;
    let art = py
        .detach(|| pipeline::run_pipeline(&triple.0, kind, &cfg, seed))
        .map_err(err)?;
    to_py(py, &art.report)
}

/// Three-way comparison over a suite; returns `{"summary", "reports"}` and
/// writes the CSV tables when `out_dir` is given.
#[pyfunction]
#[pyo3(name = "bench", signature = (suite, solvers = None, seed = 0, config = None, out_dir = None))]
fn run_bench<'py>(
    py: Python<'py>,
    suite: Vec<PyRef<'py, PyTriple>>,
    solvers: Option<Vec<String>>,
    seed: u64,
    config: Option<&str>,
    out_dir: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = self::config(config)?;
    let kinds = match solvers {
        Some(names) => names.iter().map(|s| solver(s)).collect::<PyResult<Vec<_>>>()?,
        None => SolverKind::ALL.to_vec(),
    };
    let triples: Vec<InstanceTriple> = suite.iter().map(|t| t.0.clone()).collect();
    let out = py
        .detach(|| pipeline::bench(&triples, &kinds, &cfg, seed))
        .map_err(err)?;
    if let Some(dir) = out_dir {
        pipeline::write_bench(dir, &out).map_err(err)?;
    }
    let d = PyDict::new(py);
    d.set_item("summary", to_py(py, &out.summary)?)?;
    d.set_item("reports", to_py(py, &out.reports)?)?;
    Ok(d.into_any())
}

/// `(a - b) / b`.
#[pyfunction]
fn relative_improvement(a: f64, b: f64) -> PyResult<f64> {
    pipeline::relative_improvement(a, b).map_err(err)
}

/// Jensen-Shannon divergence in nats of two probability vectors.
#[pyfunction]
fn js_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    pipeline::js_divergence(&p, &q).map_err(err)
}

#[pymodule]
fn stin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyBipartite>()?;
    m.add_class::<PyColoring>()?;
    m.add_class::<PyTriple>()?;
    m.add_function(wrap_pyfunction!(mwis_exact, m)?)?;
    m.add_function(wrap_pyfunction!(mwis_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(mwis_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(gsp_solve, m)?)?;
    m.add_function(wrap_pyfunction!(sap_solve, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(validate_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    m.add_function(wrap_pyfunction!(synth_suite, m)?)?;
    m.add_function(wrap_pyfunction!(read_suite, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(relative_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(js_divergence, m)?)?;
    Ok(())
}
