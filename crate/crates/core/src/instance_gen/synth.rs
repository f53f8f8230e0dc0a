//! Seeded synthetic instance suites.

use rand::Rng;

use super::network::{GroundNetwork, NetworkContext, Site, SiteKind};
use super::InstanceTriple;
use crate::graph::WeightedGraph;
use crate::seed;

/// Bands offered to every synthetic spectrum instance.
pub const SYNTH_BANDS: usize = 16;

fn ssp_graph(rng: &mut impl Rng, n: usize) -> WeightedGraph {
    // Random geometric graph at about 0.7 points per unit area, radius 1:
    // sparse, locally clustered, and unit-disk by construction.
    let side = (n as f64 / 0.7).sqrt();
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)])
        .collect();
    let weights = (0..n)
        .map(|_| (1.0 - rng.random::<f64>()) * 1000.0)
        .map(|w: f64| w.ceil() / 1000.0)
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]) < 1.0 {
                edges.push((i, j));
            }
        }
    }
    WeightedGraph::new(weights, edges)
        .expect("generated edges are valid")
        .with_labels((0..n).map(|i| format!("sat{i}")).collect())
        .expect("one label per vertex")
}

fn network(rng: &mut impl Rng, n: usize) -> NetworkContext {
    let ng = rng.random_range(2..=3);
    let nb = rng.random_range(1..=2);
    let mut site = |name: String, kind| Site {
        name,
        lat: rng.random_range(-5.0..5.0),
        lon: rng.random_range(0.0..10.0),
        kind,
    };
    let gateways: Vec<Site> = (0..ng).map(|j| site(format!("gw{j}"), SiteKind::Gateway)).collect();
    let stations: Vec<Site> = (0..nb).map(|b| site(format!("bs{b}"), SiteKind::BaseStation)).collect();
    let visible = (0..n)
        .map(|_| {
            let mut vis: Vec<usize> = (0..ng).filter(|_| rng.random_bool(0.6)).collect();
            if vis.is_empty() {
                vis.push(rng.random_range(0..ng));
            }
            vis
        })
        .collect();
    NetworkContext {
        satellites: (0..n).map(|i| format!("sat{i}")).collect(),
        visible,
        ground: GroundNetwork::nearest(&gateways, &stations, 2),
        bands: SYNTH_BANDS,
    }
}

/// `count` triples with SSP sizes drawn uniformly from `size_range`.
///
/// Instance `i` depends only on `(seed, i)`, so suites are reproducible and
/// prefixes of larger suites.
pub fn synth_suite(seed: u64, count: usize, size_range: [usize; 2]) -> Vec<InstanceTriple> {
    let [lo, hi] = size_range;
    let (lo, hi) = (lo.max(1), hi.max(lo.max(1)));
    (0..count)
        .map(|i| {
            let id = format!("synth-{seed}-{i:03}");
            let mut rng = seed::rng(seed::derive_path(seed, &["synth", &i.to_string()]));
            let n = rng.random_range(lo..=hi);
            let ssp = ssp_graph(&mut rng, n);
            let net = network(&mut rng, n);
            InstanceTriple::new(id, ssp, net).expect("synthetic networks are consistent")
        })
        .collect()
}
