//! Instance construction: orbital scenarios from TLE, region and site files,
//! and a seeded synthetic generator.

pub mod network;
pub mod orbit;
pub mod region;
pub mod synth;
pub mod tle;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use network::{
    build_gsp_instance, build_sap_instance, parse_sites, read_sites, visible_gateways, GroundNetwork, GroundNode,
    NetworkContext, Site, SiteKind,
};
pub use orbit::{propagate, TrackPoint};
pub use region::{build_ssp_instance, coverage_fraction, CoverageSample, CoverageTrack, Footprint, Region, RegionSpec};
pub use synth::synth_suite;
pub use tle::{parse_tle, TleRecord};

use crate::error::{Error, Result};
use crate::graph::{BipartiteInstance, ColoringInstance, VertexSet, WeightedGraph};
use crate::io::{self, Instance, InstanceKind};
use crate::solvers::{greedy_mwis, gsp_solve, Assignment, SolveResult};

/// SSP graph plus the network it lives in, with the gateway and spectrum
/// instances obtained from the greedy selection.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceTriple {
    pub id: String,
    pub ssp: WeightedGraph,
    pub gsp: BipartiteInstance,
    pub sap: ColoringInstance,
    pub network: NetworkContext,
}

/// Gateway instance, its solved assignment and the resulting spectrum
/// instance for one satellite selection. An infeasible gateway stage
/// yields an empty spectrum instance carrying a warning.
pub fn downstream(
    ctx: &NetworkContext,
    selected: &VertexSet,
) -> Result<(BipartiteInstance, SolveResult<Assignment>, ColoringInstance)> {
    let gsp = build_gsp_instance(ctx, selected)?;
    let solved = gsp_solve(&gsp);
    let sap = sap_for(ctx, &gsp, &solved)?;
    Ok((gsp, solved, sap))
}

/// Spectrum instance routed from a gateway solution.
pub fn sap_for(
    ctx: &NetworkContext,
    gsp: &BipartiteInstance,
    solved: &SolveResult<Assignment>,
) -> Result<ColoringInstance> {
    if !solved.is_feasible() {
        let mut sap = ColoringInstance::new(Vec::new(), Vec::new(), bands(ctx.bands), None)?;
        sap.warnings
            .push("gateway assignment infeasible; no paths routed".into());
        return Ok(sap);
    }
    build_sap_instance(gsp, &solved.solution, &ctx.ground, ctx.bands)
}

fn bands(k: usize) -> Vec<String> {
    (1..=k).map(|q| q.to_string()).collect()
}

impl InstanceTriple {
    pub fn new(id: impl Into<String>, ssp: WeightedGraph, network: NetworkContext) -> Result<Self> {
        network.validate(&ssp)?;
        let reference = greedy_mwis(&ssp).solution;
        let (gsp, _, sap) = downstream(&network, &reference)?;
        Ok(Self {
            id: id.into(),
            ssp,
            gsp,
            sap,
            network,
        })
    }

    /// Write `ssp.json`, `gsp.json`, `sap.json` and `network.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_instance(dir.join("ssp.json"), &Instance::Ssp(self.ssp.clone()))?;
        io::write_instance(dir.join("gsp.json"), &Instance::Gsp(self.gsp.clone()))?;
        io::write_instance(dir.join("sap.json"), &Instance::Sap(self.sap.clone()))?;
        io::write_json(dir.join("network.json"), &self.network)
    }

    /// Read a triple written by [`InstanceTriple::write_dir`]; the id is the
    /// directory name.
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let Instance::Ssp(ssp) = io::read_instance(dir.join("ssp.json"), InstanceKind::Ssp)? else {
            unreachable!()
        };
        let Instance::Gsp(gsp) = io::read_instance(dir.join("gsp.json"), InstanceKind::Gsp)? else {
            unreachable!()
        };
        let Instance::Sap(sap) = io::read_instance(dir.join("sap.json"), InstanceKind::Sap)? else {
            unreachable!()
        };
        let network: NetworkContext = io::read_json(dir.join("network.json"))?;
        network.validate(&ssp)?;
        Ok(Self {
            id: dir
                .file_name()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
            ssp,
            gsp,
            sap,
            network,
        })
    }
}

/// Write each triple into `dir/<id>/`.
pub fn write_suite(dir: impl AsRef<Path>, suite: &[InstanceTriple]) -> Result<()> {
    suite.iter().try_for_each(|t| t.write_dir(dir.as_ref().join(&t.id)))
}

/// Read every triple directory under `dir`, sorted by name.
pub fn read_suite(dir: impl AsRef<Path>) -> Result<Vec<InstanceTriple>> {
    let dir = dir.as_ref();
    let mut subdirs: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("ssp.json").is_file())
        .collect();
    subdirs.sort();
    subdirs.iter().map(InstanceTriple::read_dir).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub half_angle: f64,
    pub step_s: f64,
    pub overlap: f64,
    pub elevation_mask: f64,
    /// Each ground site links to this many nearest neighbours.
    pub ground_neighbors: usize,
    pub bands: usize,
    pub samples: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            half_angle: region::DEFAULT_HALF_ANGLE,
            step_s: 10.0,
            overlap: region::DEFAULT_OVERLAP,
            elevation_mask: network::DEFAULT_ELEVATION_MASK,
            ground_neighbors: 2,
            bands: 16,
            samples: region::DEFAULT_SAMPLES,
        }
    }
}

/// Build a triple from orbital elements, a region and ground sites.
///
/// Every satellite is propagated over the longest orbital period in the
/// set on a common grid; satellites that never cover the uncovered part of
/// the region are dropped.
pub fn build_orbital_triple(
    id: &str,
    tles: &[TleRecord],
    region: RegionSpec,
    sites: &[Site],
    cfg: &ScenarioConfig,
) -> Result<InstanceTriple> {
    let region = Region::with_samples(region, cfg.samples)?;
    let horizon = tles.iter().map(TleRecord::period_s).fold(0.0, f64::max);
    let tracks: Vec<(Vec<TrackPoint>, CoverageTrack)> = tles
        .par_iter()
        .map(|rec| {
            let pts = propagate(rec, [0.0, horizon], cfg.step_s)?;
            let cov = CoverageTrack::from_points(rec.name.clone(), &pts, &region, cfg.half_angle)?;
            Ok((pts, cov))
        })
        .collect::<Result<_>>()?;
    let coverage: Vec<CoverageTrack> = tracks.iter().map(|t| t.1.clone()).collect();
    let ssp = build_ssp_instance(&coverage, &region, cfg.overlap)?;
    let gateways: Vec<Site> = sites.iter().filter(|s| s.kind == SiteKind::Gateway).cloned().collect();
    let stations: Vec<Site> = sites
        .iter()
        .filter(|s| s.kind == SiteKind::BaseStation)
        .cloned()
        .collect();
    let visible = tracks
        .iter()
        .filter(|t| t.1.mean_fraction() > 0.0)
        .map(|t| visible_gateways(&t.0, &gateways, cfg.elevation_mask))
        .collect();
    let network = NetworkContext {
        satellites: ssp.labels().map(<[String]>::to_vec).unwrap_or_default(),
        visible,
        ground: GroundNetwork::nearest(&gateways, &stations, cfg.ground_neighbors),
        bands: cfg.bands,
    };
    InstanceTriple::new(id, ssp, network)
}
