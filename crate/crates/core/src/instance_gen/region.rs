//! Target regions, satellite footprints and coverage-overlap graphs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::orbit::{unit_vector, TrackPoint, EARTH_RADIUS_KM};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::seed;

pub const DEFAULT_SAMPLES: usize = 20_000;
pub const DEFAULT_HALF_ANGLE: f64 = 40.0;
pub const DEFAULT_OVERLAP: f64 = 0.90;
/// A region is remote when at most this share of its area is served terrestrially.
pub const REMOTE_COVERAGE: f64 = 0.60;
const SAMPLE_SEED: u64 = 0x005e_ed0f_a1ea;

/// Polygon vertices as `[lat, lon]` in degrees.
pub type Polygon = Vec<[f64; 2]>;

/// On-disk form: `{"boundary": [[lat, lon], ...], "covered": [[[lat, lon], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub boundary: Polygon,
    #[serde(default)]
    pub covered: Vec<Polygon>,
}

/// A region with a fixed Monte Carlo sample of its terrestrially uncovered part.
#[derive(Debug, Clone)]
pub struct Region {
    pub spec: RegionSpec,
    samples_in_region: usize,
    uncovered: Vec<[f64; 3]>,
}

fn contains(poly: &[[f64; 2]], lat: f64, lon: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let ([ai, oi], [aj, oj]) = (poly[i], poly[j]);
        if (oi > lon) != (oj > lon) && lat < (aj - ai) * (lon - oi) / (oj - oi) + ai {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn on_edge(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    (0..poly.len()).any(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let within = |k: usize| p[k] >= a[k].min(b[k]) - 1e-12 && p[k] <= a[k].max(b[k]) + 1e-12;
        orient(a, b, p).abs() <= 1e-9 && within(0) && within(1)
    })
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (d1, d2) = (orient(a, b, c), orient(a, b, d));
    let (d3, d4) = (orient(c, d, a), orient(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn check_polygon(poly: &[[f64; 2]], what: &str) -> Result<()> {
    if poly.len() < 3 {
        return Err(Error::Input(format!("{what} needs at least 3 vertices")));
    }
    if poly
        .iter()
        .any(|&[lat, lon]| !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon))
    {
        return Err(Error::Input(format!("{what} has a vertex outside lat/lon range")));
    }
    let n = poly.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return Err(Error::Input(format!("{what} is self-intersecting")));
            }
        }
    }
    Ok(())
}

impl Region {
    pub fn new(spec: RegionSpec) -> Result<Self> {
        Self::with_samples(spec, DEFAULT_SAMPLES)
    }

    /// Validate and draw `samples` area-uniform points inside the boundary.
    /// The sample stream is fixed, so fractions are reproducible.
    pub fn with_samples(spec: RegionSpec, samples: usize) -> Result<Self> {
        check_polygon(&spec.boundary, "region boundary")?;
        for (k, c) in spec.covered.iter().enumerate() {
            check_polygon(c, &format!("covered polygon {k}"))?;
            if c.iter()
                .any(|&[lat, lon]| !contains(&spec.boundary, lat, lon) && !on_edge(&spec.boundary, [lat, lon]))
            {
                return Err(Error::Input(format!("covered polygon {k} leaves the region boundary")));
            }
        }
        let fold = |f: fn(f64, f64) -> f64, k: usize, init: f64| spec.boundary.iter().map(|p| p[k]).fold(init, f);
        let (lat0, lat1) = (fold(f64::min, 0, 90.0), fold(f64::max, 0, -90.0));
        let (lon0, lon1) = (fold(f64::min, 1, 180.0), fold(f64::max, 1, -180.0));
        if !(lat1 > lat0 && lon1 > lon0) || samples == 0 {
            return Err(Error::Input("region has zero area".into()));
        }
        let (s0, s1) = (lat0.to_radians().sin(), lat1.to_radians().sin());
        let mut rng = seed::rng(SAMPLE_SEED);
        let mut uncovered = Vec::new();
        let mut hits = 0;
        let mut draws = 0usize;
        while hits < samples {
            draws += 1;
            if draws > samples * 1000 {
                return Err(Error::Input("region has zero area".into()));
            }
            let lat = rng.random_range(s0..=s1).asin().to_degrees();
            let lon = rng.random_range(lon0..=lon1);
            if !contains(&spec.boundary, lat, lon) {
                continue;
            }
            hits += 1;
            if !spec.covered.iter().any(|c| contains(c, lat, lon)) {
                uncovered.push(unit_vector(lat, lon));
            }
        }
        Ok(Self {
            spec,
            samples_in_region: hits,
            uncovered,
        })
    }

    /// Share of the region's area not served terrestrially.
    pub fn uncovered_fraction(&self) -> f64 {
        self.uncovered.len() as f64 / self.samples_in_region as f64
    }

    pub fn is_remote(&self) -> bool {
        1.0 - self.uncovered_fraction() <= REMOTE_COVERAGE
    }

    fn members(&self, fp: &Footprint) -> impl Iterator<Item = bool> + '_ {
        let c = unit_vector(fp.center[0], fp.center[1]);
        let threshold = fp.angle.cos();
        self.uncovered
            .iter()
            .map(move |p| c[0] * p[0] + c[1] * p[1] + c[2] * p[2] >= threshold)
    }

    /// Fraction of the uncovered area inside a footprint.
    pub fn cap_fraction(&self, fp: &Footprint) -> f64 {
        if self.uncovered.is_empty() {
            return 0.0;
        }
        self.members(fp).filter(|&b| b).count() as f64 / self.uncovered.len() as f64
    }

    fn membership(&self, fp: &Footprint) -> Vec<u64> {
        let mut bits = vec![0u64; self.uncovered.len().div_ceil(64)];
        for (k, inside) in self.members(fp).enumerate() {
            if inside {
                bits[k / 64] |= 1 << (k % 64);
            }
        }
        bits
    }
}

/// Spherical cap seen by a satellite: center `[lat, lon]` and Earth
/// central half-angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub center: [f64; 2],
    pub angle: f64,
}

impl Footprint {
    /// Cap of a nadir-pointing cone with the given half-angle, clipped at
    /// the horizon.
    pub fn of(point: &TrackPoint, half_angle: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle < 90.0) {
            return Err(Error::Input(format!(
                "footprint half-angle {half_angle} outside (0, 90)"
            )));
        }
        let ratio = (EARTH_RADIUS_KM + point.alt_km) / EARTH_RADIUS_KM;
        let eta = half_angle.to_radians();
        let horizon = (1.0 / ratio).acos();
        let s = ratio * eta.sin();
        let angle = if s >= 1.0 {
            horizon
        } else {
            (s.asin() - eta).min(horizon)
        };
        Ok(Self {
            center: [point.lat, point.lon],
            angle,
        })
    }
}

pub fn coverage_fraction(point: &TrackPoint, region: &Region, half_angle: f64) -> Result<f64> {
    Ok(region.cap_fraction(&Footprint::of(point, half_angle)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSample {
    pub t: f64,
    pub fraction: f64,
    pub footprint: Footprint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTrack {
    pub satellite: String,
    pub samples: Vec<CoverageSample>,
}

impl CoverageTrack {
    pub fn new(satellite: impl Into<String>, samples: Vec<CoverageSample>) -> Result<Self> {
        let satellite = satellite.into();
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::Input(format!(
                "track {satellite}: timestamps must increase strictly"
            )));
        }
        if samples.iter().any(|s| !(0.0..=1.0).contains(&s.fraction)) {
            return Err(Error::Input(format!("track {satellite}: fractions must lie in [0, 1]")));
        }
        Ok(Self { satellite, samples })
    }

    pub fn from_points(
        satellite: impl Into<String>,
        points: &[TrackPoint],
        region: &Region,
        half_angle: f64,
    ) -> Result<Self> {
        let samples = points
            .iter()
            .map(|p| {
                let footprint = Footprint::of(p, half_angle)?;
                Ok(CoverageSample {
                    t: p.t,
                    fraction: region.cap_fraction(&footprint),
                    footprint,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(satellite, samples)
    }

    pub fn mean_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.fraction).sum::<f64>() / self.samples.len() as f64
    }
}

/// Overlap graph of satellites covering the region.
///
/// Satellites with zero mean coverage are dropped. The remaining ones are
/// weighted by their mean covered fraction; two are adjacent when their
/// footprints, accumulated over the common time grid, share more than
/// `threshold` of the smaller one's covered area.
pub fn build_ssp_instance(tracks: &[CoverageTrack], region: &Region, threshold: f64) -> Result<WeightedGraph> {
    if let Some(first) = tracks.first() {
        for tr in tracks {
            let same = tr.samples.len() == first.samples.len()
                && tr
                    .samples
                    .iter()
                    .zip(&first.samples)
                    .all(|(a, b)| (a.t - b.t).abs() <= 1e-6);
            if !same {
                return Err(Error::Input(format!(
                    "track {} is not on the common time grid of {}",
                    tr.satellite, first.satellite
                )));
            }
        }
    }
    let kept: Vec<&CoverageTrack> = tracks.iter().filter(|t| t.mean_fraction() > 0.0).collect();
    let n = kept.len();
    let steps = kept.first().map_or(0, |t| t.samples.len());
    let mut area = vec![0u64; n];
    let mut shared = vec![0u64; n * n];
    for k in 0..steps {
        let active: Vec<(usize, Vec<u64>)> = (0..n)
            .filter(|&i| kept[i].samples[k].fraction > 0.0)
            .map(|i| (i, region.membership(&kept[i].samples[k].footprint)))
            .collect();
        for (a, (i, bi)) in active.iter().enumerate() {
            area[*i] += bi.iter().map(|w| w.count_ones() as u64).sum::<u64>();
            for (j, bj) in &active[a + 1..] {
                shared[i * n + j] += bi.iter().zip(bj).map(|(x, y)| (x & y).count_ones() as u64).sum::<u64>();
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let smaller = area[i].min(area[j]);
            if smaller > 0 && shared[i * n + j] as f64 / smaller as f64 > threshold {
                edges.push((i, j));
            }
        }
    }
    WeightedGraph::new(kept.iter().map(|t| t.mean_fraction()).collect(), edges)?
        .with_labels(kept.iter().map(|t| t.satellite.clone()).collect())
}
