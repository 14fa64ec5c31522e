//! Cross-track step-and-stare scan geometry of the microwave sounder.
//!
//! The sensor sweeps 30 pixels uniformly from −48.33° to +48.33° off nadir in
//! the plane containing nadir and perpendicular to the horizontal flight
//! direction. Positive scan angles look to the right of the ground track.

use serde::{Deserialize, Serialize};

use crate::geometry::{Orientation, Vec3};
use crate::orbit::SatellitePose;
use crate::scene::EnuFrame;

pub const PIXEL_COUNT: usize = 30;
/// Largest off-nadir scan angle, degrees.
pub const MAX_SCAN_ANGLE_DEG: f64 = 48.33;
/// Pixel beam width, degrees.
pub const PIXEL_BEAMWIDTH_DEG: f64 = 3.3;

/// Angular step between adjacent pixels, degrees.
pub fn scan_step_deg() -> f64 {
    2.0 * MAX_SCAN_ANGLE_DEG / (PIXEL_COUNT - 1) as f64
}

/// Signed off-nadir angle of a 1-based pixel index.
pub fn scan_angle_deg(pixel_index: usize) -> f64 {
    -MAX_SCAN_ANGLE_DEG + (pixel_index - 1) as f64 * scan_step_deg()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOrientation {
    /// Azimuth in the satellite's local east-north-up frame, degrees.
    pub theta_s: f64,
    /// Elevation from the satellite's local horizontal, degrees.
    pub phi_s: f64,
    /// 1 to 30.
    pub pixel_index: usize,
    /// Signed off-nadir angle, degrees.
    pub scan_angle: f64,
}

impl ScanOrientation {
    pub fn orientation(&self) -> Orientation {
        Orientation::new(self.theta_s, self.phi_s)
    }
}

/// Local frame, nadir and cross-track unit vectors (ENU) of a pose.
fn scan_basis(pose: &SatellitePose) -> (EnuFrame, Vec3, Vec3) {
    let frame = EnuFrame::at(&pose.geodetic());
    let nadir = Vec3::new(0.0, 0.0, -1.0);
    let v = frame.direction_to_enu(pose.velocity_direction.0);
    let along = Vec3::new(v.x, v.y, 0.0).normalized();
    let cross = nadir.cross(along);
    (frame, nadir, cross)
}

pub fn scan_orientations(pose: &SatellitePose) -> Vec<ScanOrientation> {
    let (_, nadir, cross) = scan_basis(pose);
    (1..=PIXEL_COUNT)
        .map(|i| {
            let alpha = scan_angle_deg(i);
            let (s, c) = alpha.to_radians().sin_cos();
            let o = Orientation::from_vector(nadir * c + cross * s);
            ScanOrientation {
                theta_s: o.theta,
                phi_s: o.phi,
                pixel_index: i,
                scan_angle: alpha,
            }
        })
        .collect()
}

/// Ground arc covered by the pixel's 3.3° beam, on a sphere through the
/// subsatellite point, meters.
pub fn pixel_ground_diameter(pose: &SatellitePose, orientation: &ScanOrientation) -> f64 {
    let (_, nadir, _) = scan_basis(pose);
    let off_nadir = orientation.orientation().unit_vector().angle_deg(nadir);
    let rs = pose.position.0.norm();
    let r = rs - pose.altitude;
    let half = PIXEL_BEAMWIDTH_DEG / 2.0;
    // Earth central angle from nadir to where a ray at off-nadir angle b lands
    let central = |b: f64| -> f64 {
        let b = b.to_radians();
        (rs / r * b.sin()).clamp(-1.0, 1.0).asin() - b
    };
    r * (central(off_nadir + half) - central(off_nadir - half))
}
