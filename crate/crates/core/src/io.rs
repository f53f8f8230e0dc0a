//! JSON instance files.
//!
//! One object per file:
//!
//! ```json
//! {"kind": "ssp", "n": 3, "weights": ["0.5", "1", "0.25"], "edges": [[0, 1]], "labels": ["a", "b", "c"]}
//! ```
//!
//! Weights are decimal strings so values survive a round trip bit-exactly.
//! GSP files add `satellites`, `gateways`, `links` and optionally
//! `link_costs`; the base fields then describe the bipartite graph with
//! satellites first. SAP files add `paths`, `conflicts`, `bands` and
//! optionally `costs`; the base fields describe the conflict graph.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteInstance, ColoringInstance, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Ssp,
    Gsp,
    Sap,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssp" => Ok(Self::Ssp),
            "gsp" => Ok(Self::Gsp),
            "sap" => Ok(Self::Sap),
            other => Err(Error::Input(format!("unknown instance kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Ssp(WeightedGraph),
    Gsp(BipartiteInstance),
    Sap(ColoringInstance),
}

impl Instance {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Ssp(_) => InstanceKind::Ssp,
            Instance::Gsp(_) => InstanceKind::Gsp,
            Instance::Sap(_) => InstanceKind::Sap,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    kind: InstanceKind,
    n: usize,
    weights: Vec<String>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    satellites: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gateways: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    links: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    link_costs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    paths: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    conflicts: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bands: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    costs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

fn parse_weight(index: usize, s: &str) -> Result<f64> {
    let value: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Schema(format!("weight {index} is not a decimal number: {s:?}")))?;
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidWeight { index, value });
    }
    Ok(value)
}

fn require<T>(field: Option<T>, name: &str, kind: InstanceKind) -> Result<T> {
    field.ok_or_else(|| Error::Schema(format!("{kind:?} instance requires field {name:?}")))
}

fn pairs(p: &[[usize; 2]]) -> Vec<(usize, usize)> {
    p.iter().map(|e| (e[0], e[1])).collect()
}

/// Parse an instance from JSON text, checking it is of `kind`.
pub fn parse_instance(text: &str, kind: InstanceKind) -> Result<Instance> {
    let raw: RawInstance = serde_json::from_str(text)?;
    if raw.kind != kind {
        return Err(Error::Schema(format!(
            "expected kind {kind:?}, file has {:?}",
            raw.kind
        )));
    }
    if raw.weights.len() != raw.n {
        return Err(Error::WeightCount {
            n: raw.n,
            got: raw.weights.len(),
        });
    }
    let weights = raw
        .weights
        .iter()
        .enumerate()
        .map(|(i, w)| parse_weight(i, w))
        .collect::<Result<Vec<_>>>()?;
    let mut graph = WeightedGraph::new(weights, pairs(&raw.edges))?;
    if let Some(labels) = raw.labels {
        graph = graph.with_labels(labels)?;
    }
    match kind {
        InstanceKind::Ssp => Ok(Instance::Ssp(graph)),
        InstanceKind::Gsp => {
            let satellites = require(raw.satellites, "satellites", kind)?;
            let gateways = require(raw.gateways, "gateways", kind)?;
            let links = pairs(&require(raw.links, "links", kind)?);
            if raw.n != satellites.len() + gateways.len() {
                return Err(Error::Schema("gsp n must equal |satellites| + |gateways|".into()));
            }
            let mut inst = BipartiteInstance::new(satellites, gateways, links, raw.link_costs)?;
            inst.warnings = raw.warnings;
            Ok(Instance::Gsp(inst))
        }
        InstanceKind::Sap => {
            let paths = require(raw.paths, "paths", kind)?;
            let conflicts = pairs(&require(raw.conflicts, "conflicts", kind)?);
            let bands = require(raw.bands, "bands", kind)?;
            if raw.n != paths.len() {
                return Err(Error::Schema("sap n must equal |paths|".into()));
            }
            let mut inst = ColoringInstance::new(paths, conflicts, bands, raw.costs)?;
            inst.warnings = raw.warnings;
            Ok(Instance::Sap(inst))
        }
    }
}

fn weight_strings(w: &[f64]) -> Vec<String> {
    // `Display` for f64 prints the shortest string that parses back exactly.
    w.iter().map(|x| format!("{x}")).collect()
}

fn edge_arrays(e: &[(usize, usize)]) -> Vec<[usize; 2]> {
    e.iter().map(|&(a, b)| [a, b]).collect()
}

fn to_raw(inst: &Instance) -> RawInstance {
    let blank = |kind, n, weights, edges| RawInstance {
        kind,
        n,
        weights,
        edges,
        labels: None,
        satellites: None,
        gateways: None,
        links: None,
        link_costs: None,
        paths: None,
        conflicts: None,
        bands: None,
        costs: None,
        warnings: Vec::new(),
    };
    match inst {
        Instance::Ssp(g) => {
            let mut r = blank(
                InstanceKind::Ssp,
                g.n(),
                weight_strings(g.weights()),
                edge_arrays(g.edges()),
            );
            r.labels = g.labels().map(<[String]>::to_vec);
            r
        }
        Instance::Gsp(b) => {
            let ns = b.n_satellites();
            let n = ns + b.n_gateways();
            let edges = b.links.iter().map(|&(s, g)| [s, ns + g]).collect();
            let mut r = blank(InstanceKind::Gsp, n, vec!["0".to_string(); n], edges);
            r.satellites = Some(b.satellites.clone());
            r.gateways = Some(b.gateways.clone());
            r.links = Some(edge_arrays(&b.links));
            r.link_costs = b.link_costs.clone();
            r.warnings = b.warnings.clone();
            r
        }
        Instance::Sap(c) => {
            let n = c.n_paths();
            let mut r = blank(
                InstanceKind::Sap,
                n,
                vec!["0".to_string(); n],
                edge_arrays(&c.conflicts),
            );
            r.paths = Some(c.paths.clone());
            r.conflicts = Some(edge_arrays(&c.conflicts));
            r.bands = Some(c.bands.clone());
            r.costs = c.costs.clone();
            r.warnings = c.warnings.clone();
            r
        }
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&to_raw(inst)).expect("instance serialization cannot fail")
}

pub fn read_instance(path: impl AsRef<Path>, kind: InstanceKind) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text, kind)
}

/// Read an instance whose kind is taken from the file itself.
pub fn read_any_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    #[derive(Deserialize)]
    struct Probe {
        kind: InstanceKind,
    }
    let probe: Probe = serde_json::from_str(&text)?;
    parse_instance(&text, probe.kind)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(inst)).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_ssp() {
        let text = r#"{"kind":"ssp","n":1,"weights":["0.5"],"edges":[]}"#;
        match parse_instance(text, InstanceKind::Ssp).unwrap() {
            Instance::Ssp(g) => {
                assert_eq!(g.n(), 1);
                assert_eq!(g.weight(0), 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distinct_diagnostics() {
        let self_loop = r#"{"kind":"ssp","n":1,"weights":["1"],"edges":[[0,0]]}"#;
        assert!(matches!(
            parse_instance(self_loop, InstanceKind::Ssp),
            Err(Error::SelfLoop(0))
        ));
        let dup = r#"{"kind":"ssp","n":2,"weights":["1","1"],"edges":[[0,1],[1,0]]}"#;
        assert!(matches!(
            parse_instance(dup, InstanceKind::Ssp),
            Err(Error::DuplicateEdge(0, 1))
        ));
        let neg = r#"{"kind":"ssp","n":1,"weights":["-2"],"edges":[]}"#;
        assert!(matches!(
            parse_instance(neg, InstanceKind::Ssp),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(parse_instance("{", InstanceKind::Ssp), Err(Error::Json(_))));
        let missing = r#"{"kind":"gsp","n":0,"weights":[],"edges":[]}"#;
        assert!(matches!(
            parse_instance(missing, InstanceKind::Gsp),
            Err(Error::Schema(_))
        ));
        let wrong_kind = r#"{"kind":"sap","n":0,"weights":[],"edges":[],"paths":[],"conflicts":[],"bands":[]}"#;
        assert!(matches!(
            parse_instance(wrong_kind, InstanceKind::Ssp),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn gsp_and_sap_round_trip() {
        let b = BipartiteInstance::new(
            vec!["s0".into(), "s1".into()],
            vec!["g0".into()],
            vec![(0, 0), (1, 0)],
            Some(vec![1.5, 2.0]),
        )
        .unwrap();
        let inst = Instance::Gsp(b);
        assert_eq!(
            parse_instance(&instance_to_json(&inst), InstanceKind::Gsp).unwrap(),
            inst
        );

        let c = ColoringInstance::new(
            vec!["a".into(), "b".into()],
            vec![(0, 1)],
            vec!["1".into(), "2".into()],
            Some(vec![vec![1.0, 3.0], vec![2.0, 0.5]]),
        )
        .unwrap();
        let inst = Instance::Sap(c);
        assert_eq!(
            parse_instance(&instance_to_json(&inst), InstanceKind::Sap).unwrap(),
            inst
        );
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
        (0..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let np = pairs.len();
            (
                proptest::collection::vec(0.0f64..1e6, n),
                proptest::collection::vec(any::<bool>(), np),
            )
                .prop_map(move |(w, keep)| {
                    let e = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p);
                    WeightedGraph::new(w, e).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn ssp_round_trip_is_exact(g in arb_graph(20)) {
            let inst = Instance::Ssp(g);
            let back = parse_instance(&instance_to_json(&inst), InstanceKind::Ssp).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
