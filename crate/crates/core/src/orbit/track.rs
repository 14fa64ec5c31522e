//! Ground-track sampling inside the space study area.

use std::path::Path;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{Propagator, SatellitePose};
use crate::scene::{geodetic_to_ecef, ground_distance, EnuFrame, GeodeticPoint};
use crate::{Error, Result};

/// A square in the tangent plane at `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceStudyArea {
    pub center: GeodeticPoint,
    /// Meters.
    pub side_length: f64,
}

impl SpaceStudyArea {
    pub const DEFAULT_SIDE_M: f64 = 2_343_000.0;

    pub fn new(center: GeodeticPoint, side_length: f64) -> Result<Self> {
        if !(side_length > 0.0) {
            return Err(Error::InvalidArgument(
                "study area side must be positive".into(),
            ));
        }
        center.validate()?;
        Ok(SpaceStudyArea {
            center,
            side_length,
        })
    }

    /// Tests a ground point by projecting it onto the tangent plane.
    pub fn contains(&self, p: &GeodeticPoint) -> bool {
        let frame = EnuFrame::at(&GeodeticPoint {
            altitude: 0.0,
            ..self.center
        });
        let ground = GeodeticPoint {
            altitude: 0.0,
            ..*p
        };
        let enu = frame.point_to_enu(&geodetic_to_ecef(&ground));
        let half = self.side_length / 2.0;
        // the far side of the globe also projects into the square
        enu.z > -self.side_length && enu.x.abs() <= half && enu.y.abs() <= half
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub start: DateTime<Utc>,
    pub span: Duration,
    /// Along-track arc between consecutive samples, meters.
    pub spacing_m: f64,
    /// Coarse step used to detect area entries.
    pub scan_step: Duration,
    /// Allowed altitude range for every sample, meters.
    pub altitude_band_m: (f64, f64),
}

impl TrackOptions {
    pub fn new(start: DateTime<Utc>, span: Duration) -> Self {
        TrackOptions {
            start,
            span,
            spacing_m: 50_000.0,
            scan_step: Duration::seconds(3),
            altitude_band_m: (700e3, 900e3),
        }
    }
}

fn offset(t0: DateTime<Utc>, seconds: f64) -> DateTime<Utc> {
    t0 + Duration::nanoseconds((seconds * 1e9).round() as i64)
}

struct Sampler<'a> {
    prop: &'a dyn Propagator,
    area: &'a SpaceStudyArea,
    t0: DateTime<Utc>,
}

impl Sampler<'_> {
    fn pose(&self, s: f64) -> Result<SatellitePose> {
        self.prop.pose(offset(self.t0, s))
    }

    fn inside(&self, s: f64) -> Result<bool> {
        Ok(self.area.contains(&self.pose(s)?.subsatellite_point()))
    }

    /// Bisects a transition between `lo` (outside) and `hi` (inside).
    fn entry(&self, mut lo: f64, mut hi: f64) -> Result<f64> {
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if self.inside(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Time after `s` whose subsatellite point is `spacing` away along the
    /// ground, found by bracketing and bisection.
    fn next_at_spacing(&self, s: f64, from: &GeodeticPoint, spacing: f64) -> Result<f64> {
        let dist = |x: f64| -> Result<f64> {
            Ok(ground_distance(from, &self.pose(x)?.subsatellite_point()))
        };
        let mut step = spacing / 6_500.0;
        let mut hi = s + step;
        while dist(hi)? < spacing {
            step *= 1.5;
            hi = s + step;
            if step > 3_000.0 {
                return Err(Error::Propagation("ground track does not advance".into()));
            }
        }
        let mut lo = s;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let d = dist(mid)?;
            if (d - spacing).abs() < spacing * 1e-6 {
                return Ok(mid);
            }
            if d < spacing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Samples every pass over the area during the span, one vector per pass in
/// time order.
pub fn sample_passes(
    prop: &dyn Propagator,
    area: &SpaceStudyArea,
    opts: &TrackOptions,
) -> Result<Vec<Vec<SatellitePose>>> {
    if !(opts.spacing_m > 0.0) {
        return Err(Error::InvalidArgument("spacing must be positive".into()));
    }
    let sampler = Sampler {
        prop,
        area,
        t0: opts.start,
    };
    let span = opts.span.num_milliseconds() as f64 / 1000.0;
    let step = (opts.scan_step.num_milliseconds() as f64 / 1000.0).max(0.1);

    let mut passes = Vec::new();
    let mut s = 0.0;
    let mut was_inside = sampler.inside(0.0)?;
    let mut entry = was_inside.then_some(0.0);
    loop {
        if let Some(e) = entry.take() {
            let mut pass = Vec::new();
            let mut t = e;
            let mut pose = sampler.pose(t)?;
            loop {
                check_altitude(&pose, opts.altitude_band_m)?;
                pass.push(pose);
                let sub = pose.subsatellite_point();
                let next = sampler.next_at_spacing(t, &sub, opts.spacing_m)?;
                if next > span {
                    break;
                }
                let next_pose = sampler.pose(next)?;
                if !area.contains(&next_pose.subsatellite_point()) {
                    break;
                }
                t = next;
                pose = next_pose;
            }
            passes.push(pass);
            // resume the coarse scan after the last sample
            s = t;
            was_inside = true;
        }
        let next = s + step;
        if next > span {
            break;
        }
        let inside = sampler.inside(next)?;
        if inside && !was_inside {
            entry = Some(sampler.entry(s, next)?);
        }
        was_inside = inside;
        s = next;
    }
    Ok(passes)
}

fn check_altitude(p: &SatellitePose, band: (f64, f64)) -> Result<()> {
    if p.altitude < band.0 || p.altitude > band.1 {
        return Err(Error::Propagation(format!(
            "altitude {:.1} km at {} outside [{:.0}, {:.0}] km",
            p.altitude / 1e3,
            p.time,
            band.0 / 1e3,
            band.1 / 1e3
        )));
    }
    Ok(())
}

/// All samples of [`sample_passes`] flattened in time order.
pub fn sample_track_in_area(
    prop: &dyn Propagator,
    area: &SpaceStudyArea,
    opts: &TrackOptions,
) -> Result<Vec<SatellitePose>> {
    Ok(sample_passes(prop, area, opts)?
        .into_iter()
        .flatten()
        .collect())
}

pub fn write_poses_csv(path: impl AsRef<Path>, poses: &[SatellitePose]) -> Result<()> {
    let path = path.as_ref();
    let mut w =
        csv::Writer::from_path(path).map_err(|e| Error::parse(path.display().to_string(), e))?;
    let io = |e: csv::Error| Error::parse(path.display().to_string(), e);
    w.write_record([
        "time_iso8601",
        "ecef_x_m",
        "ecef_y_m",
        "ecef_z_m",
        "lat_deg",
        "lon_deg",
        "alt_m",
    ])
    .map_err(io)?;
    for p in poses {
        let g = p.geodetic();
        w.write_record([
            p.time.to_rfc3339_opts(SecondsFormat::Millis, true),
            p.position.x().to_string(),
            p.position.y().to_string(),
            p.position.z().to_string(),
            g.latitude.to_string(),
            g.longitude.to_string(),
            p.altitude.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
