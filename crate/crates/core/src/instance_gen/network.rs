//! Ground sites, satellite visibility and the physical link graph used to
//! derive gateway and spectrum instances.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use super::orbit::{central_angle, elevation, unit_vector, TrackPoint, EARTH_RADIUS_KM};
use crate::error::{Error, Result};
use crate::graph::{BipartiteInstance, ColoringInstance, VertexSet, WeightedGraph};
use crate::solvers::Assignment;

pub const DEFAULT_ELEVATION_MASK: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    Gateway,
    BaseStation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub kind: SiteKind,
}

/// Parse a `name,lat,lon,kind` CSV with header.
pub fn parse_sites(text: &str) -> Result<Vec<Site>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let site: Site = row?;
        if !(-90.0..=90.0).contains(&site.lat) || !(-180.0..=180.0).contains(&site.lon) {
            return Err(Error::Input(format!("site {} has coordinates out of range", site.name)));
        }
        out.push(site);
    }
    Ok(out)
}

pub fn read_sites(path: impl AsRef<Path>) -> Result<Vec<Site>> {
    let path = path.as_ref();
    parse_sites(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Gateways that see a ground track above `mask` degrees at some sample.
pub fn visible_gateways(points: &[TrackPoint], gateways: &[Site], mask: f64) -> Vec<usize> {
    (0..gateways.len())
        .filter(|&j| {
            let s = &gateways[j];
            points.iter().any(|p| elevation(s.lat, s.lon, &p.r_ecef) >= mask)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundNode {
    Gateway(usize),
    BaseStation(usize),
}

/// Terrestrial links between gateways and base stations, lengths in km.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundNetwork {
    pub gateways: Vec<String>,
    pub base_stations: Vec<String>,
    pub links: Vec<(GroundNode, GroundNode, f64)>,
}

impl GroundNetwork {
    /// Link every site to its `k` nearest neighbours by great-circle distance.
    pub fn nearest(gateways: &[Site], base_stations: &[Site], k: usize) -> Self {
        let nodes: Vec<(GroundNode, &Site)> = gateways
            .iter()
            .enumerate()
            .map(|(i, s)| (GroundNode::Gateway(i), s))
            .chain(
                base_stations
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (GroundNode::BaseStation(i), s)),
            )
            .collect();
        let pos: Vec<[f64; 3]> = nodes.iter().map(|(_, s)| unit_vector(s.lat, s.lon)).collect();
        let mut links = BTreeSet::new();
        for a in 0..nodes.len() {
            let mut others: Vec<(f64, usize)> = (0..nodes.len())
                .filter(|&b| b != a)
                .map(|b| (central_angle(&pos[a], &pos[b]) * EARTH_RADIUS_KM, b))
                .collect();
            others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            for &(_, b) in others.iter().take(k) {
                links.insert((a.min(b), a.max(b)));
            }
        }
        Self {
            gateways: gateways.iter().map(|s| s.name.clone()).collect(),
            base_stations: base_stations.iter().map(|s| s.name.clone()).collect(),
            links: links
                .into_iter()
                .map(|(a, b)| {
                    (
                        nodes[a].0,
                        nodes[b].0,
                        central_angle(&pos[a], &pos[b]) * EARTH_RADIUS_KM,
                    )
                })
                .collect(),
        }
    }
}

/// Everything needed to turn a satellite selection into downstream instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkContext {
    /// One name per SSP vertex.
    pub satellites: Vec<String>,
    /// Visible gateway indices per SSP vertex.
    pub visible: Vec<Vec<usize>>,
    pub ground: GroundNetwork,
    pub bands: usize,
}

impl NetworkContext {
    pub fn validate(&self, ssp: &WeightedGraph) -> Result<()> {
        if self.satellites.len() != ssp.n() || self.visible.len() != ssp.n() {
            return Err(Error::Contract(format!(
                "network context describes {} satellites, the selection graph has {}",
                self.satellites.len(),
                ssp.n()
            )));
        }
        let ng = self.ground.gateways.len();
        if self.visible.iter().flatten().any(|&j| j >= ng) {
            return Err(Error::Contract("visibility refers to an unknown gateway".into()));
        }
        Ok(())
    }
}

/// Links from the selected satellites to every gateway that sees them.
pub fn build_gsp_instance(ctx: &NetworkContext, selected: &VertexSet) -> Result<BipartiteInstance> {
    let mut links = Vec::new();
    for (s, &v) in selected.members().iter().enumerate() {
        let Some(vis) = ctx.visible.get(v) else {
            return Err(Error::IndexOutOfRange {
                index: v,
                n: ctx.visible.len(),
            });
        };
        links.extend(vis.iter().map(|&g| (s, g)));
    }
    BipartiteInstance::new(
        selected.members().iter().map(|&v| ctx.satellites[v].clone()).collect(),
        ctx.ground.gateways.clone(),
        links,
        None,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Link {
    Up(usize, usize),
    Ground(usize, usize),
}

/// One path per (satellite, base station) pair: the satellite's uplink to
/// its assigned gateway followed by the shortest terrestrial route to the
/// base station. Paths conflict when they share a physical link.
pub fn build_sap_instance(
    gsp: &BipartiteInstance,
    assignment: &Assignment,
    ground: &GroundNetwork,
    bands: usize,
) -> Result<ColoringInstance> {
    if !assignment.is_valid_for(gsp) {
        return Err(Error::Contract(
            "assignment is not valid for the gateway instance".into(),
        ));
    }
    if gsp.gateways != ground.gateways {
        return Err(Error::Contract(
            "gateway lists of the assignment and ground network differ".into(),
        ));
    }
    let ng = ground.gateways.len();
    let node = |n: GroundNode| match n {
        GroundNode::Gateway(i) => i,
        GroundNode::BaseStation(i) => ng + i,
    };
    let mut graph: UnGraph<(), f64> = UnGraph::default();
    for _ in 0..ng + ground.base_stations.len() {
        graph.add_node(());
    }
    for &(a, b, km) in &ground.links {
        let (a, b) = (node(a), node(b));
        if a >= graph.node_count() || b >= graph.node_count() {
            return Err(Error::Contract("ground link refers to an unknown site".into()));
        }
        graph.add_edge(NodeIndex::new(a), NodeIndex::new(b), km);
    }

    let mut paths = Vec::new();
    let mut used: Vec<Vec<Link>> = Vec::new();
    let mut warnings = Vec::new();
    let mut routes = HashMap::new();
    for (s, &g) in assignment.gateway_of.iter().enumerate() {
        for (b, bs) in ground.base_stations.iter().enumerate() {
            let route = routes.entry((g, b)).or_insert_with(|| {
                petgraph::algo::astar(
                    &graph,
                    NodeIndex::new(g),
                    |n| n.index() == ng + b,
                    |e| *e.weight(),
                    |_| 0.0,
                )
                .map(|(_, nodes)| nodes)
            });
            let Some(nodes) = route else {
                warnings.push(format!(
                    "base station {bs} is unreachable from gateway {}; path omitted",
                    ground.gateways[g]
                ));
                continue;
            };
            let mut links = vec![Link::Up(s, g)];
            links.extend(nodes.windows(2).map(|w| {
                let (x, y) = (w[0].index(), w[1].index());
                Link::Ground(x.min(y), x.max(y))
            }));
            paths.push(format!("{}>{}>{}", gsp.satellites[s], ground.gateways[g], bs));
            used.push(links);
        }
    }
    let mut conflicts = Vec::new();
    for p in 0..used.len() {
        for q in p + 1..used.len() {
            if used[p].iter().any(|l| used[q].contains(l)) {
                conflicts.push((p, q));
            }
        }
    }
    let mut inst = ColoringInstance::new(paths, conflicts, (1..=bands).map(|q| q.to_string()).collect(), None)?;
    inst.warnings = warnings;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bipartite(ns: usize, ng: usize, links: Vec<(usize, usize)>) -> BipartiteInstance {
        BipartiteInstance::new(
            (0..ns).map(|i| format!("s{i}")).collect(),
            (0..ng).map(|j| format!("g{j}")).collect(),
            links,
            None,
        )
        .unwrap()
    }

    fn ground(ng: usize, nb: usize, links: Vec<(GroundNode, GroundNode, f64)>) -> GroundNetwork {
        GroundNetwork {
            gateways: (0..ng).map(|j| format!("g{j}")).collect(),
            base_stations: (0..nb).map(|b| format!("b{b}")).collect(),
            links,
        }
    }

    use GroundNode::{BaseStation as B, Gateway as G};

    #[test]
    fn sites_csv() {
        let text = "name,lat,lon,kind\nalpha, 10.5, -3,gateway\nbeta,0,0,base_station\n";
        let s = parse_sites(text).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].kind, SiteKind::Gateway);
        assert_eq!(s[1].kind, SiteKind::BaseStation);
        assert!(parse_sites("name,lat,lon,kind\nx,91,0,gateway\n").is_err());
        assert!(parse_sites("name,lat,lon,kind\nx,0,0,tower\n").is_err());
    }

    fn pass_over(lat: f64, lon: f64) -> TrackPoint {
        let u = unit_vector(lat, lon);
        TrackPoint {
            t: 0.0,
            lat,
            lon,
            alt_km: 600.0,
            true_anomaly: 0.0,
            r_eci: [0.0; 3],
            v_eci: [0.0; 3],
            r_ecef: u.map(|x| x * (EARTH_RADIUS_KM + 600.0)),
        }
    }

    fn site(name: &str, lat: f64, lon: f64) -> Site {
        Site {
            name: name.into(),
            lat,
            lon,
            kind: SiteKind::Gateway,
        }
    }

    #[test]
    fn visibility() {
        let gws = [site("here", 20.0, 30.0), site("antipode", -20.0, -150.0)];
        assert_eq!(visible_gateways(&[pass_over(20.0, 30.0)], &gws, 10.0), vec![0]);
    }

    #[test]
    fn visibility_windows() {
        // Elevation at central angle c for a 600 km orbit: atan((cos c - R/r) / sin c).
        let gws = [site("west", 0.0, 0.0), site("east", 0.0, 20.0)];
        let r = EARTH_RADIUS_KM / (EARTH_RADIUS_KM + 600.0);
        let elev = |deg: f64| {
            let c = deg.to_radians();
            ((c.cos() - r) / c.sin()).atan().to_degrees()
        };
        assert!(elev(10.0) > 10.0 && elev(20.0) < 10.0);
        let tracks = [
            vec![pass_over(0.0, 2.0)],
            vec![pass_over(0.0, 10.0)],
            vec![pass_over(0.0, -30.0), pass_over(0.0, 19.0)],
        ];
        let vis: Vec<Vec<usize>> = tracks.iter().map(|t| visible_gateways(t, &gws, 10.0)).collect();
        assert_eq!(vis, vec![vec![0], vec![0, 1], vec![1]]);
    }

    #[test]
    fn gsp_from_selection() {
        let ssp = WeightedGraph::unweighted(3, []).unwrap();
        let ctx = NetworkContext {
            satellites: vec!["a".into(), "b".into(), "c".into()],
            visible: vec![vec![0], vec![], vec![0, 1]],
            ground: ground(2, 0, vec![]),
            bands: 3,
        };
        ctx.validate(&ssp).unwrap();
        let sel = VertexSet::new(&ssp, [0, 2]).unwrap();
        let inst = build_gsp_instance(&ctx, &sel).unwrap();
        assert_eq!(inst.satellites, vec!["a", "c"]);
        assert_eq!(inst.links, vec![(0, 0), (1, 0), (1, 1)]);
        assert!(inst.warnings.is_empty());
        let sel = VertexSet::new(&ssp, [1]).unwrap();
        assert_eq!(build_gsp_instance(&ctx, &sel).unwrap().warnings.len(), 1);
    }

    #[test]
    fn shared_uplink_conflicts() {
        let gsp = bipartite(1, 1, vec![(0, 0)]);
        let a = Assignment {
            gateway_of: vec![0],
            max_load: 1,
        };
        let net = ground(1, 2, vec![(G(0), B(0), 1.0), (G(0), B(1), 1.0)]);
        let inst = build_sap_instance(&gsp, &a, &net, 2).unwrap();
        assert_eq!(inst.n_paths(), 2);
        assert_eq!(inst.conflicts, vec![(0, 1)]);
    }

    #[test]
    fn disjoint_paths() {
        let gsp = bipartite(2, 2, vec![(0, 0), (1, 1)]);
        let a = Assignment {
            gateway_of: vec![0, 1],
            max_load: 1,
        };
        // b0 hangs off g0 and b1 off g1 with no link between the halves.
        let net = ground(2, 2, vec![(G(0), B(0), 1.0), (G(1), B(1), 1.0)]);
        let inst = build_sap_instance(&gsp, &a, &net, 2).unwrap();
        assert_eq!(inst.paths, vec!["s0>g0>b0", "s1>g1>b1"]);
        assert!(inst.conflicts.is_empty());
        assert_eq!(inst.warnings.len(), 2);
    }

    #[test]
    fn star_gives_clique() {
        let gsp = bipartite(4, 1, (0..4).map(|s| (s, 0)).collect());
        let a = Assignment {
            gateway_of: vec![0; 4],
            max_load: 4,
        };
        let net = ground(1, 1, vec![(G(0), B(0), 5.0)]);
        let inst = build_sap_instance(&gsp, &a, &net, 4).unwrap();
        assert_eq!(inst.n_paths(), 4);
        assert_eq!(inst.conflicts.len(), 6);
    }

    #[test]
    fn shortest_route_is_used() {
        let gsp = bipartite(2, 2, vec![(0, 0), (1, 1)]);
        let a = Assignment {
            gateway_of: vec![0, 1],
            max_load: 1,
        };
        // g0 reaches b0 directly (1 km); g1 goes through g0 (2 + 1) rather
        // than a long direct link (10), so both paths share g0-b0.
        let net = ground(2, 1, vec![(G(0), B(0), 1.0), (G(1), G(0), 2.0), (G(1), B(0), 10.0)]);
        let inst = build_sap_instance(&gsp, &a, &net, 2).unwrap();
        assert_eq!(inst.conflicts, vec![(0, 1)]);
    }

    #[test]
    fn nearest_neighbour_links() {
        let gws = [site("g", 0.0, 0.0)];
        let bss: Vec<Site> = [1.0, 2.0, 10.0].iter().map(|&lon| site("b", 0.0, lon)).collect();
        let net = GroundNetwork::nearest(&gws, &bss, 1);
        let pairs: Vec<_> = net.links.iter().map(|l| (l.0, l.1)).collect();
        assert_eq!(pairs, vec![(G(0), B(0)), (B(0), B(1)), (B(1), B(2))]);
        let km = net.links[0].2;
        assert!((km - EARTH_RADIUS_KM * 1f64.to_radians()).abs() < 1e-6);
    }
}
