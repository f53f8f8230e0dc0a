//! Two-body Keplerian propagation and ground tracks on a spherical Earth.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::tle::TleRecord;
use crate::error::{Error, Result};

/// Gravitational parameter, km^3/s^2.
pub const MU_EARTH: f64 = 398_600.441_8;
/// Mean Earth radius, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION: f64 = 7.292_115_146_706_979e-5;

/// One propagated sample. `t` is seconds since the element epoch; vectors
/// are in km and km/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub alt_km: f64,
    pub true_anomaly: f64,
    pub r_eci: [f64; 3],
    pub v_eci: [f64; 3],
    pub r_ecef: [f64; 3],
}

impl TrackPoint {
    /// Specific orbital energy `v^2/2 - mu/r`.
    pub fn energy(&self) -> f64 {
        let v2: f64 = self.v_eci.iter().map(|x| x * x).sum();
        let r = norm(&self.r_eci);
        v2 / 2.0 - MU_EARTH / r
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Greenwich mean sidereal angle in radians at a Julian date.
pub fn gmst(jd: f64) -> f64 {
    (280.460_618_37 + 360.985_647_366_29 * (jd - 2_451_545.0))
        .to_radians()
        .rem_euclid(TAU)
}

fn solve_kepler(m: f64, e: f64) -> f64 {
    let mut ea = if e < 0.8 { m } else { PI };
    for _ in 0..50 {
        let f = ea - e * ea.sin() - m;
        let step = f / (1.0 - e * ea.cos());
        ea -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    ea
}

/// Semi-major axis in km from the mean motion.
pub fn semi_major_axis(rec: &TleRecord) -> f64 {
    let n = rec.mean_motion * TAU / 86_400.0;
    (MU_EARTH / (n * n)).cbrt()
}

fn rotate(v: [f64; 2], raan: f64, inc: f64, argp: f64) -> [f64; 3] {
    let (so, co) = raan.sin_cos();
    let (si, ci) = inc.sin_cos();
    let (sw, cw) = argp.sin_cos();
    let r11 = co * cw - so * sw * ci;
    let r12 = -co * sw - so * cw * ci;
    let r21 = so * cw + co * sw * ci;
    let r22 = -so * sw + co * cw * ci;
    let r31 = sw * si;
    let r32 = cw * si;
    [
        r11 * v[0] + r12 * v[1],
        r21 * v[0] + r22 * v[1],
        r31 * v[0] + r32 * v[1],
    ]
}

fn state_at(rec: &TleRecord, t: f64) -> TrackPoint {
    let e = rec.eccentricity;
    let a = semi_major_axis(rec);
    let n = rec.mean_motion * TAU / 86_400.0;
    let m = (rec.mean_anomaly.to_radians() + n * t).rem_euclid(TAU);
    let ea = solve_kepler(m, e);
    let nu = 2.0 * ((1.0 + e).sqrt() * (ea / 2.0).sin()).atan2((1.0 - e).sqrt() * (ea / 2.0).cos());
    let r = a * (1.0 - e * ea.cos());
    let p = a * (1.0 - e * e);
    let vs = (MU_EARTH / p).sqrt();
    let (raan, inc, argp) = (
        rec.raan.to_radians(),
        rec.inclination.to_radians(),
        rec.arg_perigee.to_radians(),
    );
    let r_eci = rotate([r * nu.cos(), r * nu.sin()], raan, inc, argp);
    let v_eci = rotate([-vs * nu.sin(), vs * (e + nu.cos())], raan, inc, argp);
    let theta = gmst(rec.epoch_jd()) + EARTH_ROTATION * t;
    let (st, ct) = theta.sin_cos();
    let r_ecef = [ct * r_eci[0] + st * r_eci[1], -st * r_eci[0] + ct * r_eci[1], r_eci[2]];
    TrackPoint {
        t,
        lat: (r_ecef[2] / r).asin().to_degrees(),
        lon: r_ecef[1].atan2(r_ecef[0]).to_degrees(),
        alt_km: r - EARTH_RADIUS_KM,
        true_anomaly: nu.rem_euclid(TAU),
        r_eci,
        v_eci,
        r_ecef,
    }
}

/// Sample the orbit at `t0, t0 + step, ...` up to `t1`; `t1` itself is
/// always the last sample. Times are seconds since the element epoch.
pub fn propagate(rec: &TleRecord, window: [f64; 2], step: f64) -> Result<Vec<TrackPoint>> {
    let [t0, t1] = window;
    if !(t1 > t0) || !(step > 0.0) {
        return Err(Error::Input(format!(
            "propagation needs t1 > t0 and step > 0, got [{t0}, {t1}] step {step}"
        )));
    }
    if rec.eccentricity >= 1.0 {
        return Err(Error::UnsupportedOrbit(format!(
            "{}: eccentricity {} is not elliptic",
            rec.name, rec.eccentricity
        )));
    }
    let steps = ((t1 - t0) / step).floor() as usize;
    let mut times: Vec<f64> = (0..=steps).map(|k| t0 + k as f64 * step).collect();
    if t1 - times[steps] > 1e-9 * step {
        times.push(t1);
    }
    Ok(times.into_iter().map(|t| state_at(rec, t)).collect())
}

/// Unit vector of a geographic point on the spherical Earth.
pub fn unit_vector(lat: f64, lon: f64) -> [f64; 3] {
    let (sl, cl) = lat.to_radians().sin_cos();
    let (so, co) = lon.to_radians().sin_cos();
    [cl * co, cl * so, sl]
}

/// Elevation angle in degrees of an Earth-fixed position seen from a site.
pub fn elevation(site_lat: f64, site_lon: f64, r_ecef: &[f64; 3]) -> f64 {
    let u = unit_vector(site_lat, site_lon);
    let rel = [
        r_ecef[0] - EARTH_RADIUS_KM * u[0],
        r_ecef[1] - EARTH_RADIUS_KM * u[1],
        r_ecef[2] - EARTH_RADIUS_KM * u[2],
    ];
    let up = rel[0] * u[0] + rel[1] * u[1] + rel[2] * u[2];
    (up / norm(&rel)).clamp(-1.0, 1.0).asin().to_degrees()
}

/// Great-circle angle in radians between two unit vectors.
pub fn central_angle(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    dot.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circular(inclination: f64, mean_motion: f64) -> TleRecord {
        TleRecord {
            name: "T".into(),
            norad_id: 1,
            epoch_year: 2024,
            epoch_day: 1.0,
            inclination,
            raan: 30.0,
            eccentricity: 0.0,
            arg_perigee: 0.0,
            mean_anomaly: 10.0,
            mean_motion,
        }
    }

    #[test]
    fn one_period_returns_to_start() {
        let mut rec = circular(53.0, 15.1);
        rec.eccentricity = 0.05;
        rec.arg_perigee = 70.0;
        let t = rec.period_s();
        let pts = propagate(&rec, [0.0, t], 10.0).unwrap();
        let (first, last) = (pts[0], *pts.last().unwrap());
        assert_eq!(last.t, t);
        let d = (last.true_anomaly - first.true_anomaly).rem_euclid(TAU);
        assert!(d.min(TAU - d) < 1e-6);
        let e0 = first.energy();
        for p in &pts {
            assert!(((p.energy() - e0) / e0).abs() < 1e-9);
        }
    }

    #[test]
    fn equatorial_stays_on_equator() {
        let pts = propagate(&circular(0.0, 14.0), [0.0, 6000.0], 60.0).unwrap();
        assert!(pts.iter().all(|p| p.lat.abs() < 1e-9));
    }

    #[test]
    fn polar_orbit_reaches_pole() {
        let rec = circular(90.0, 13.15);
        let pts = propagate(&rec, [0.0, rec.period_s()], 10.0).unwrap();
        let max = pts.iter().map(|p| p.lat.abs()).fold(0.0, f64::max);
        assert!(max >= 89.0, "{max}");
    }

    #[test]
    fn altitude_of_circular_orbit() {
        let rec = circular(45.0, 15.0);
        let a = semi_major_axis(&rec);
        for p in propagate(&rec, [0.0, 3000.0], 100.0).unwrap() {
            assert!((p.alt_km - (a - EARTH_RADIUS_KM)).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut rec = circular(45.0, 15.0);
        assert!(propagate(&rec, [10.0, 10.0], 1.0).is_err());
        assert!(propagate(&rec, [0.0, 10.0], 0.0).is_err());
        rec.eccentricity = 1.0;
        assert!(matches!(
            propagate(&rec, [0.0, 10.0], 1.0),
            Err(Error::UnsupportedOrbit(_))
        ));
    }

    #[test]
    fn overhead_elevation() {
        let r = unit_vector(10.0, 20.0).map(|x| x * (EARTH_RADIUS_KM + 500.0));
        assert!((elevation(10.0, 20.0, &r) - 90.0).abs() < 1e-9);
        assert!(elevation(-10.0, -160.0, &r) < -80.0);
    }
}
