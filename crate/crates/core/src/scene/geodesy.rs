//! WGS84 geodetic ↔ ECEF conversion and local east-north-up frames.

use serde::{Deserialize, Serialize};

use crate::geometry::{Mat3, Vec3};
use crate::{Error, Result};

/// WGS84 semi-major axis, m.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// WGS84 semi-minor axis, m.
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
const E2: f64 = WGS84_F * (2.0 - WGS84_F);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPoint {
    /// Degrees, [−90, 90].
    pub latitude: f64,
    /// Degrees, [−180, 180].
    pub longitude: f64,
    /// Meters above the ellipsoid.
    pub altitude: f64,
}

impl GeodeticPoint {
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self> {
        let p = GeodeticPoint {
            latitude,
            longitude,
            altitude,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::InvalidArgument(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::InvalidArgument(format!(
                "longitude {} outside [-180, 180]",
                self.longitude
            )));
        }
        if !self.altitude.is_finite() {
            return Err(Error::InvalidArgument("altitude must be finite".into()));
        }
        Ok(())
    }
}

/// Earth-centered Earth-fixed position or direction, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EcefVector(pub Vec3);

impl EcefVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        EcefVector(Vec3::new(x, y, z))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }
}

pub fn geodetic_to_ecef(p: &GeodeticPoint) -> EcefVector {
    let (slat, clat) = p.latitude.to_radians().sin_cos();
    let (slon, clon) = p.longitude.to_radians().sin_cos();
    let n = WGS84_A / (1.0 - E2 * slat * slat).sqrt();
    EcefVector::new(
        (n + p.altitude) * clat * clon,
        (n + p.altitude) * clat * slon,
        (n * (1.0 - E2) + p.altitude) * slat,
    )
}

/// Inverse of [`geodetic_to_ecef`] by fixed-point iteration on latitude.
pub fn ecef_to_geodetic(v: &EcefVector) -> GeodeticPoint {
    let (x, y, z) = (v.0.x, v.0.y, v.0.z);
    let lon = y.atan2(x);
    let p = x.hypot(y);
    let mut lat = z.atan2(p * (1.0 - E2));
    let mut h;
    for _ in 0..12 {
        let (s, c) = lat.sin_cos();
        let n = WGS84_A / (1.0 - E2 * s * s).sqrt();
        h = p * c + z * s - WGS84_A * (1.0 - E2 * s * s).sqrt();
        let next = z.atan2(p * (1.0 - E2 * n / (n + h)));
        if (next - lat).abs() < 1e-14 {
            lat = next;
            break;
        }
        lat = next;
    }
    let (s, c) = lat.sin_cos();
    h = p * c + z * s - WGS84_A * (1.0 - E2 * s * s).sqrt();
    GeodeticPoint {
        latitude: lat.to_degrees(),
        longitude: lon.to_degrees(),
        altitude: h,
    }
}

/// A local east-north-up tangent frame anchored at a geodetic point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnuFrame {
    origin: EcefVector,
    /// Rows are the east, north and up unit vectors in ECEF.
    to_enu: Mat3,
}

impl EnuFrame {
    pub fn at(origin: &GeodeticPoint) -> Self {
        let (slat, clat) = origin.latitude.to_radians().sin_cos();
        let (slon, clon) = origin.longitude.to_radians().sin_cos();
        let east = Vec3::new(-slon, clon, 0.0);
        let north = Vec3::new(-slat * clon, -slat * slon, clat);
        let up = Vec3::new(clat * clon, clat * slon, slat);
        EnuFrame {
            origin: geodetic_to_ecef(origin),
            to_enu: Mat3::from_rows(east, north, up),
        }
    }

    pub fn origin(&self) -> EcefVector {
        self.origin
    }

    pub fn up(&self) -> Vec3 {
        let m = &self.to_enu.0;
        Vec3::new(m[2][0], m[2][1], m[2][2])
    }

    pub fn point_to_enu(&self, p: &EcefVector) -> Vec3 {
        self.to_enu.apply(p.0 - self.origin.0)
    }

    pub fn point_to_ecef(&self, p: Vec3) -> EcefVector {
        EcefVector(self.to_enu.transpose().apply(p) + self.origin.0)
    }

    pub fn direction_to_enu(&self, d: Vec3) -> Vec3 {
        self.to_enu.apply(d)
    }

    pub fn direction_to_ecef(&self, d: Vec3) -> Vec3 {
        self.to_enu.transpose().apply(d)
    }
}

/// Great-circle distance between two geodetic points on a sphere of the WGS84
/// mean radius, meters.
pub fn ground_distance(a: &GeodeticPoint, b: &GeodeticPoint) -> f64 {
    const MEAN_RADIUS: f64 = 6_371_008.8;
    let (la1, la2) = (a.latitude.to_radians(), b.latitude.to_radians());
    let dlat = la2 - la1;
    let dlon = (b.longitude - a.longitude).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la1.cos() * la2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * MEAN_RADIUS * h.sqrt().min(1.0).asin()
}
