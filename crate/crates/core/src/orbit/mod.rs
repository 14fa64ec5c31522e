//! Victim satellite orbit: element sets, propagation and ground-track sampling
//! inside the space study area.

mod sgp4;
mod time;
mod tle;
mod track;
mod twobody;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use sgp4::Sgp4;
pub use time::{gmst, julian_date};
pub use tle::{checksum, load_tle, TwoLineElements};
pub use track::{
    sample_passes, sample_track_in_area, write_poses_csv, SpaceStudyArea, TrackOptions,
};
pub use twobody::{kepler_period, KeplerElements, TwoBody, MU_EARTH};

use crate::geometry::Vec3;
use crate::scene::{ecef_to_geodetic, EcefVector, GeodeticPoint};
use crate::{Error, Result};

/// Earth rotation rate, rad/s.
const OMEGA_EARTH: f64 = 7.292_115_146_706_979e-5;

/// How far from the element epoch propagation is allowed, days.
pub const MAX_EPOCH_OFFSET_DAYS: f64 = 45.0;

/// Inertial (TEME) state in kilometers and km/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub position_km: [f64; 3],
    pub velocity_km_s: [f64; 3],
}

/// One satellite position with its Earth-relative flight direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatellitePose {
    pub time: DateTime<Utc>,
    pub position: EcefVector,
    /// Unit ECEF velocity (Earth-fixed frame).
    pub velocity_direction: EcefVector,
    /// Geodetic height, meters.
    pub altitude: f64,
}

impl SatellitePose {
    pub fn geodetic(&self) -> GeodeticPoint {
        ecef_to_geodetic(&self.position)
    }

    /// Geodetic point directly below the satellite at zero height.
    pub fn subsatellite_point(&self) -> GeodeticPoint {
        let g = self.geodetic();
        GeodeticPoint { altitude: 0.0, ..g }
    }
}

/// Rotates a TEME state into the Earth-fixed frame (polar motion neglected).
pub fn teme_to_ecef(state: &StateVector, time: &DateTime<Utc>) -> (Vec3, Vec3) {
    let g = gmst(julian_date(time));
    let (s, c) = g.sin_cos();
    let [x, y, z] = state.position_km.map(|v| v * 1000.0);
    let [vx, vy, vz] = state.velocity_km_s.map(|v| v * 1000.0);
    let r = Vec3::new(c * x + s * y, -s * x + c * y, z);
    let v_rot = Vec3::new(c * vx + s * vy, -s * vx + c * vy, vz);
    let v = v_rot - Vec3::new(0.0, 0.0, OMEGA_EARTH).cross(r);
    (r, v)
}

/// Anything that yields satellite poses for UTC instants.
pub trait Propagator: Send + Sync {
    fn epoch(&self) -> DateTime<Utc>;

    /// TEME state at an offset from the epoch, in minutes.
    fn state(&self, minutes: f64) -> Result<StateVector>;

    fn pose(&self, t: DateTime<Utc>) -> Result<SatellitePose> {
        let minutes = (t - self.epoch()).num_nanoseconds().unwrap_or(i64::MAX) as f64 / 60e9;
        if minutes.abs() > MAX_EPOCH_OFFSET_DAYS * 1440.0 {
            return Err(Error::Propagation(format!(
                "{t} is {:.1} days from the element epoch (limit {MAX_EPOCH_OFFSET_DAYS})",
                minutes / 1440.0
            )));
        }
        let st = self.state(minutes)?;
        let (r, v) = teme_to_ecef(&st, &t);
        let position = EcefVector(r);
        Ok(SatellitePose {
            time: t,
            position,
            velocity_direction: EcefVector(v.normalized()),
            altitude: ecef_to_geodetic(&position).altitude,
        })
    }
}

impl Propagator for Sgp4Propagator {
    fn epoch(&self) -> DateTime<Utc> {
        self.epoch
    }
    fn state(&self, minutes: f64) -> Result<StateVector> {
        self.model.propagate(minutes)
    }
}

impl Propagator for TwoBody {
    fn epoch(&self) -> DateTime<Utc> {
        TwoBody::epoch(self)
    }
    fn state(&self, minutes: f64) -> Result<StateVector> {
        self.propagate(minutes * 60.0)
    }
}

/// SGP4 bound to the epoch of its element set.
#[derive(Debug, Clone)]
pub struct Sgp4Propagator {
    model: Sgp4,
    epoch: DateTime<Utc>,
}

impl Sgp4Propagator {
    pub fn new(tle: &TwoLineElements) -> Result<Self> {
        Ok(Sgp4Propagator {
            model: Sgp4::new(tle)?,
            epoch: tle.epoch,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorKind {
    #[default]
    Sgp4,
    TwoBodyJ2,
}

pub fn make_propagator(tle: &TwoLineElements, kind: PropagatorKind) -> Result<Box<dyn Propagator>> {
    Ok(match kind {
        PropagatorKind::Sgp4 => Box::new(Sgp4Propagator::new(tle)?),
        PropagatorKind::TwoBodyJ2 => Box::new(TwoBody::from_tle(tle, true)),
    })
}

/// Single-pose propagation straight from an element set with SGP4.
pub fn propagate(tle: &TwoLineElements, t: DateTime<Utc>) -> Result<SatellitePose> {
    Sgp4Propagator::new(tle)?.pose(t)
}
