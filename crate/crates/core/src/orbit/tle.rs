//! Two-line element set parsing.

use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};

use crate::{Error, Result};

/// A parsed two-line element set. Angles are stored in degrees as printed.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLineElements {
    pub name: Option<String>,
    pub catalog_number: u32,
    pub epoch: DateTime<Utc>,
    /// First derivative of mean motion / 2, rev/day².
    pub mean_motion_dot: f64,
    /// Second derivative of mean motion / 6, rev/day³.
    pub mean_motion_ddot: f64,
    /// Drag term, 1/earth radii.
    pub bstar: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    /// Revolutions per day.
    pub mean_motion: f64,
}

/// Modulo-10 checksum over the first 68 columns: digits count their value,
/// minus signs count one.
pub fn checksum(line: &str) -> u32 {
    line.chars()
        .take(68)
        .map(|c| match c {
            '0'..='9' => c as u32 - '0' as u32,
            '-' => 1,
            _ => 0,
        })
        .sum::<u32>()
        % 10
}

fn field(line: &str, from: usize, to: usize) -> &str {
    line.get(from..to.min(line.len())).unwrap_or("").trim()
}

fn number(line: &str, from: usize, to: usize, what: &str) -> Result<f64> {
    let s = field(line, from, to);
    s.parse::<f64>()
        .map_err(|_| Error::Tle(format!("{what}: cannot parse {s:?}")))
}

/// Parses the compact exponent notation used for B* and n̈, e.g. ` 33465-4`
/// for 0.33465e-4.
fn implied_decimal(s: &str, what: &str) -> Result<f64> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(0.0);
    }
    let (sign, body) = match s.as_bytes()[0] {
        b'-' => (-1.0, &s[1..]),
        b'+' => (1.0, &s[1..]),
        _ => (1.0, s),
    };
    let split = body
        .rfind(['-', '+'])
        .ok_or_else(|| Error::Tle(format!("{what}: missing exponent in {s:?}")))?;
    let mantissa: f64 = format!("0.{}", body[..split].trim())
        .parse()
        .map_err(|_| Error::Tle(format!("{what}: bad mantissa in {s:?}")))?;
    let exponent: i32 = body[split..]
        .parse()
        .map_err(|_| Error::Tle(format!("{what}: bad exponent in {s:?}")))?;
    Ok(sign * mantissa * 10f64.powi(exponent))
}

impl TwoLineElements {
    /// Parses lines 1 and 2 of an element set, verifying both checksums.
    pub fn from_lines(name: Option<&str>, line1: &str, line2: &str) -> Result<Self> {
        let line1 = line1.trim_end();
        let line2 = line2.trim_end();
        for (i, line) in [line1, line2].iter().enumerate() {
            if line.len() < 69 {
                return Err(Error::Tle(format!(
                    "line {} shorter than 69 columns",
                    i + 1
                )));
            }
            if !line.starts_with(['1', '2'][i]) {
                return Err(Error::Tle(format!("line {} has wrong line number", i + 1)));
            }
            let expected = line[68..69].parse::<u32>().map_err(|_| {
                Error::Tle(format!("line {} checksum column is not a digit", i + 1))
            })?;
            let got = checksum(line);
            if got != expected {
                return Err(Error::Tle(format!(
                    "line {} checksum mismatch: computed {got}, stated {expected}",
                    i + 1
                )));
            }
        }

        let catalog_number = number(line1, 2, 7, "catalog number")? as u32;
        if number(line2, 2, 7, "catalog number")? as u32 != catalog_number {
            return Err(Error::Tle("catalog numbers of the two lines differ".into()));
        }

        let yy = number(line1, 18, 20, "epoch year")? as i32;
        let year = if yy < 57 { 2000 + yy } else { 1900 + yy };
        let day = number(line1, 20, 32, "epoch day")?;
        let jan1 = Utc
            .with_ymd_and_hms(year, 1, 1, 0, 0, 0)
            .single()
            .ok_or_else(|| Error::Tle("invalid epoch year".into()))?;
        let epoch = jan1 + Duration::nanoseconds(((day - 1.0) * 86_400e9).round() as i64);

        let eccentricity = format!("0.{}", field(line2, 26, 33))
            .parse::<f64>()
            .map_err(|_| Error::Tle("eccentricity: cannot parse".into()))?;
        let mean_motion = number(line2, 52, 63, "mean motion")?;

        let tle = TwoLineElements {
            name: name.map(|s| s.trim().to_string()).filter(|s| !s.is_empty()),
            catalog_number,
            epoch,
            mean_motion_dot: number(line1, 33, 43, "mean motion derivative")?,
            mean_motion_ddot: implied_decimal(
                field(line1, 44, 52),
                "mean motion second derivative",
            )?,
            bstar: implied_decimal(field(line1, 53, 61), "B*")?,
            inclination_deg: number(line2, 8, 16, "inclination")?,
            raan_deg: number(line2, 17, 25, "right ascension")?,
            eccentricity,
            arg_perigee_deg: number(line2, 34, 42, "argument of perigee")?,
            mean_anomaly_deg: number(line2, 43, 51, "mean anomaly")?,
            mean_motion,
        };
        if !(0.0..1.0).contains(&tle.eccentricity) {
            return Err(Error::Tle(format!(
                "eccentricity {} outside [0, 1)",
                tle.eccentricity
            )));
        }
        if tle.mean_motion <= 0.0 {
            return Err(Error::Tle("mean motion must be positive".into()));
        }
        Ok(tle)
    }

    /// Parses every element set in a text block. Each set is two lines,
    /// optionally preceded by a name line.
    pub fn parse_all(text: &str) -> Result<Vec<Self>> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < lines.len() {
            let (name, l1) = if lines[i].starts_with("1 ") {
                (None, i)
            } else {
                (Some(lines[i]), i + 1)
            };
            let (Some(a), Some(b)) = (lines.get(l1), lines.get(l1 + 1)) else {
                return Err(Error::Tle("truncated element set".into()));
            };
            out.push(Self::from_lines(name, a, b)?);
            i = l1 + 2;
        }
        if out.is_empty() {
            return Err(Error::Tle("no element sets found".into()));
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::parse_all(text)?.remove(0))
    }
}

/// Loads the first element set from a file.
pub fn load_tle(path: impl AsRef<Path>) -> Result<TwoLineElements> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TwoLineElements::parse(&text)
}
