//! Shoot-and-bounce specular ray tracing from a ground transmitter to a
//! satellite capture sphere.
//!
//! Tracing is split in two stages. [`Tracer::escapes`] launches the full grid
//! and follows each ray until it leaves the scene upward; that set depends
//! only on the scene and transmitter. [`Tracer::capture`] then selects, for
//! one satellite position, the escaped rays whose final segment passes within
//! the capture radius, and keeps one ray per reflection-face sequence.

mod bvh;
mod dump;
mod faces;
mod tracer;

use serde::{Deserialize, Serialize};

pub use dump::{read_ray_dump, write_ray_dump, RAY_DUMP_HEADER};
pub use faces::FaceId;
pub use tracer::{EscapeSet, EscapedRay, Tracer};

use crate::geometry::{Orientation, Vec3};
use crate::scene::{EcefVector, UrbanScene};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Free-space path loss 20·log10(4π·d·f/c), dB.
pub fn friis_loss(distance_m: f64, frequency_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * distance_m * frequency_hz / SPEED_OF_LIGHT).log10()
}

/// Launch directions on a regular elevation × azimuth grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaunchGrid {
    pub elevation_step: f64,
    pub azimuth_step: f64,
    pub elevation_range: (f64, f64),
    pub azimuth_range: (f64, f64),
}

impl Default for LaunchGrid {
    fn default() -> Self {
        LaunchGrid::coarse()
    }
}

impl LaunchGrid {
    /// 2° × 1° over the full sphere.
    pub fn coarse() -> Self {
        LaunchGrid::full_sphere(2.0, 1.0)
    }

    /// 0.5° × 0.1° over the full sphere.
    pub fn fine() -> Self {
        LaunchGrid::full_sphere(0.5, 0.1)
    }

    pub fn full_sphere(elevation_step: f64, azimuth_step: f64) -> Self {
        LaunchGrid {
            elevation_step,
            azimuth_step,
            elevation_range: (-90.0, 90.0),
            azimuth_range: (-180.0, 180.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (e0, e1) = self.elevation_range;
        let (a0, a1) = self.azimuth_range;
        if !(self.elevation_step > 0.0 && self.azimuth_step > 0.0) {
            return Err(Error::InvalidArgument(
                "launch grid steps must be positive".into(),
            ));
        }
        if !(-90.0 <= e0 && e0 <= e1 && e1 <= 90.0) {
            return Err(Error::InvalidArgument(
                "elevation range must lie in [-90, 90]".into(),
            ));
        }
        if !(a0 <= a1 && a1 - a0 <= 360.0) {
            return Err(Error::InvalidArgument(
                "azimuth range must span at most 360 degrees".into(),
            ));
        }
        Ok(())
    }

    pub fn elevations(&self) -> Vec<f64> {
        let (e0, e1) = self.elevation_range;
        let n = ((e1 - e0) / self.elevation_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| e0 + i as f64 * self.elevation_step)
            .collect()
    }

    /// Azimuths launched at one elevation; a pole gets a single ray.
    pub fn azimuths(&self, elevation: f64) -> Vec<f64> {
        let (a0, a1) = self.azimuth_range;
        if elevation.abs() >= 90.0 {
            return vec![a0];
        }
        let span = a1 - a0;
        let n = if span >= 360.0 - 1e-9 {
            (360.0 / self.azimuth_step).round() as usize
        } else {
            (span / self.azimuth_step + 1e-9).floor() as usize + 1
        };
        (0..n).map(|j| a0 + j as f64 * self.azimuth_step).collect()
    }

    pub fn direction_count(&self) -> usize {
        self.elevations()
            .iter()
            .map(|&e| self.azimuths(e).len())
            .sum()
    }
}

/// Receiver proxy: a sphere around the satellite position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureSphere {
    pub center: EcefVector,
    /// Meters.
    pub diameter: f64,
}

impl CaptureSphere {
    pub const DEFAULT_DIAMETER_M: f64 = 50_000.0;

    pub fn new(center: EcefVector, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0) {
            return Err(Error::InvalidArgument(
                "capture diameter must be positive".into(),
            ));
        }
        Ok(CaptureSphere { center, diameter })
    }

    /// Sphere centered on a point given in the scene's local frame.
    pub fn from_local(scene: &UrbanScene, center: Vec3, diameter: f64) -> Result<Self> {
        CaptureSphere::new(scene.frame().point_to_ecef(center), diameter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub max_bounces: usize,
    /// Carrier used for free-space loss, Hz.
    pub frequency_hz: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            max_bounces: 6,
            frequency_hz: 23.8e9,
        }
    }
}

/// One captured interfering ray with its loss decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayPath {
    /// Launch direction at the transmitter, scene frame.
    pub aod: Orientation,
    /// Direction from the satellite toward the arriving ray, in the
    /// satellite's local east-north-up frame.
    pub aoa: Orientation,
    pub bounce_count: usize,
    pub path_length: f64,
    pub l_fs: f64,
    pub l_gl: f64,
    pub l_bl: f64,
    /// Transmitter, each reflection point, then the satellite. Empty when
    /// loaded from a dump.
    pub vertices: Vec<Vec3>,
    /// Reflecting face per bounce. Empty when loaded from a dump.
    pub faces: Vec<FaceId>,
}

impl RayPath {
    /// l_fs + l_gl + l_bl, dB.
    pub fn total_loss_db(&self) -> f64 {
        self.l_fs + self.l_gl + self.l_bl
    }
}

/// Traces one transmitter against one capture sphere.
pub fn trace(
    scene: &UrbanScene,
    tx: Vec3,
    grid: &LaunchGrid,
    capture: &CaptureSphere,
    opts: &TraceOptions,
) -> Result<Vec<RayPath>> {
    let tracer = Tracer::new(scene, *opts);
    let escapes = tracer.escapes(tx, grid)?;
    Ok(tracer.capture(&escapes, capture))
}
