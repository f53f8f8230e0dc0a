//! Two-line element sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean orbital elements from one TLE record. Angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TleRecord {
    pub name: String,
    pub norad_id: u32,
    /// Four-digit epoch year.
    pub epoch_year: i32,
    /// Fractional day of year, 1.0 = January 1st 00:00 UTC.
    pub epoch_day: f64,
    pub inclination: f64,
    pub raan: f64,
    pub eccentricity: f64,
    pub arg_perigee: f64,
    pub mean_anomaly: f64,
    /// Revolutions per day.
    pub mean_motion: f64,
}

/// Modulo-10 checksum over the first 68 columns: digits count their value,
/// minus signs count one.
pub fn checksum(line: &str) -> u32 {
    line.bytes()
        .take(68)
        .map(|b| match b {
            b'0'..=b'9' => (b - b'0') as u32,
            b'-' => 1,
            _ => 0,
        })
        .sum::<u32>()
        % 10
}

fn field(line: &str, from: usize, to: usize) -> &str {
    line.get(from - 1..to).unwrap_or("").trim()
}

fn number<T: std::str::FromStr>(line: &str, no: usize, from: usize, to: usize, what: &str) -> Result<T> {
    field(line, from, to).parse().map_err(|_| Error::Tle {
        line: no,
        msg: format!("cannot parse {what} from {:?}", field(line, from, to)),
    })
}

fn check_line(line: &str, no: usize, tag: char) -> Result<()> {
    if line.len() < 69 {
        return Err(Error::Tle {
            line: no,
            msg: format!("expected 69 columns, got {}", line.len()),
        });
    }
    if !line.starts_with(tag) {
        return Err(Error::Tle {
            line: no,
            msg: format!("expected line number {tag}"),
        });
    }
    let want = checksum(line);
    let got = line.as_bytes()[68];
    if !got.is_ascii_digit() || (got - b'0') as u32 != want {
        return Err(Error::Tle {
            line: no,
            msg: format!("checksum mismatch: computed {want}, found {:?}", got as char),
        });
    }
    Ok(())
}

fn parse_record(name: &str, l1: &str, l2: &str, first: usize) -> Result<TleRecord> {
    let (n1, n2) = (first + 1, first + 2);
    check_line(l1, n1, '1')?;
    check_line(l2, n2, '2')?;
    let id1: u32 = number(l1, n1, 3, 7, "catalog number")?;
    let id2: u32 = number(l2, n2, 3, 7, "catalog number")?;
    if id1 != id2 {
        return Err(Error::Tle {
            line: n2,
            msg: format!("catalog number {id2} differs from line 1 ({id1})"),
        });
    }
    let yy: i32 = number(l1, n1, 19, 20, "epoch year")?;
    let epoch_day: f64 = number(l1, n1, 21, 32, "epoch day")?;
    let inclination: f64 = number(l2, n2, 9, 16, "inclination")?;
    let raan: f64 = number(l2, n2, 18, 25, "right ascension")?;
    let ecc_digits = field(l2, 27, 33);
    if ecc_digits.is_empty() || !ecc_digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Tle {
            line: n2,
            msg: format!("cannot parse eccentricity from {ecc_digits:?}"),
        });
    }
    let eccentricity: f64 = format!("0.{ecc_digits}").parse().expect("digits only");
    let arg_perigee: f64 = number(l2, n2, 35, 42, "argument of perigee")?;
    let mean_anomaly: f64 = number(l2, n2, 44, 51, "mean anomaly")?;
    let mean_motion: f64 = number(l2, n2, 53, 63, "mean motion")?;
    let range = |v: f64, lo: f64, hi: f64, what: &str| {
        if (lo..=hi).contains(&v) {
            Ok(())
        } else {
            Err(Error::Tle {
                line: n2,
                msg: format!("{what} {v} outside [{lo}, {hi}]"),
            })
        }
    };
    range(inclination, 0.0, 180.0, "inclination")?;
    range(raan, 0.0, 360.0, "right ascension")?;
    range(arg_perigee, 0.0, 360.0, "argument of perigee")?;
    range(mean_anomaly, 0.0, 360.0, "mean anomaly")?;
    if mean_motion <= 0.0 {
        return Err(Error::Tle {
            line: n2,
            msg: format!("mean motion must be positive, got {mean_motion}"),
        });
    }
    if !(1.0..367.0).contains(&epoch_day) {
        return Err(Error::Tle {
            line: n1,
            msg: format!("epoch day {epoch_day} outside [1, 367)"),
        });
    }
    Ok(TleRecord {
        name: if name.is_empty() {
            id1.to_string()
        } else {
            name.to_string()
        },
        norad_id: id1,
        epoch_year: if yy < 57 { 2000 + yy } else { 1900 + yy },
        epoch_day,
        inclination,
        raan,
        eccentricity,
        arg_perigee,
        mean_anomaly,
        mean_motion,
    })
}

/// Parse name + two-line records. A record may omit its name line, in which
/// case the catalog number is used. Blank lines are ignored.
pub fn parse_tle(text: &str) -> Result<Vec<TleRecord>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let (no, l) = lines[k];
        let (name, start) = if l.starts_with("1 ") {
            ("", k)
        } else {
            (l.trim(), k + 1)
        };
        let (Some(&(n1, l1)), Some(&(_, l2))) = (lines.get(start), lines.get(start + 1)) else {
            return Err(Error::Tle {
                line: no,
                msg: "truncated record".into(),
            });
        };
        out.push(parse_record(name, l1, l2, n1 - 1)?);
        k = start + 2;
    }
    Ok(out)
}

impl TleRecord {
    /// Format as a three-line record with valid checksums.
    pub fn to_lines(&self) -> String {
        let with_sum = |body: String| {
            let c = checksum(&body);
            format!("{body}{c}")
        };
        let l1 = with_sum(format!(
            "1 {:05}U {:<8} {:02}{:012.8}  .00000000  00000-0  00000-0 0  999",
            self.norad_id,
            "00000A",
            self.epoch_year.rem_euclid(100),
            self.epoch_day
        ));
        let ecc = (self.eccentricity * 1e7).round() as u32;
        let l2 = with_sum(format!(
            "2 {:05} {:>8.4} {:>8.4} {:07} {:>8.4} {:>8.4} {:>11.8}{:>5}",
            self.norad_id, self.inclination, self.raan, ecc, self.arg_perigee, self.mean_anomaly, self.mean_motion, 1
        ));
        format!("{}\n{l1}\n{l2}\n", self.name)
    }

    /// Julian date of the epoch.
    pub fn epoch_jd(&self) -> f64 {
        let y = self.epoch_year - 1;
        // Julian date of January 0.0 of the epoch year (proleptic Gregorian).
        let jan0 = 1721424.5 + 365.0 * y as f64 + (y / 4) as f64 - (y / 100) as f64 + (y / 400) as f64;
        jan0 + self.epoch_day
    }

    pub fn period_s(&self) -> f64 {
        86400.0 / self.mean_motion
    }
}
