//! Antenna gain patterns: synthesized URAs for base stations and user
//! equipment, and the rotationally symmetric satellite reflector.
//!
//! Pattern coordinates are (azimuth, elevation) offsets from boresight in
//! degrees; boresight is (0, 0).

mod reflector;
mod ura;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use reflector::{load_reflector_pattern, RadialPattern};
pub use ura::{synthesize_ura, synthesize_ura_with_step, AnalyticUra, UraSpec};

use crate::geometry::{wrap_deg, Orientation, Vec3};
use crate::{Error, Result};

/// Lowest stored gain; exact pattern zeros map here.
pub const GAIN_FLOOR_DBI: f64 = -300.0;
/// Default tabulation step of grid patterns, degrees.
pub const GRID_STEP_DEG: f64 = 0.1;

/// Gain sampled on a regular (azimuth, elevation) grid covering the sphere.
#[derive(Debug, Clone)]
pub struct GridPattern {
    step: f64,
    n_az: usize,
    n_el: usize,
    /// Row-major by elevation, dBi.
    data: Vec<f32>,
}

impl GridPattern {
    pub fn tabulate<F>(step: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let n_az = (360.0 / step).round() as usize + 1;
        let n_el = (180.0 / step).round() as usize + 1;
        if !(step > 0.0)
            || ((n_az - 1) as f64 * step - 360.0).abs() > 1e-9
            || ((n_el - 1) as f64 * step - 180.0).abs() > 1e-9
        {
            return Err(Error::Pattern(format!(
                "grid step {step} must divide 180 degrees"
            )));
        }
        let data = (0..n_el)
            .into_par_iter()
            .flat_map_iter(|i| {
                let el = -90.0 + i as f64 * step;
                let f = &f;
                (0..n_az).map(move |j| f(-180.0 + j as f64 * step, el) as f32)
            })
            .collect();
        Ok(GridPattern {
            step,
            n_az,
            n_el,
            data,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn sample(&self, az_index: usize, el_index: usize) -> f64 {
        f64::from(self.data[el_index * self.n_az + az_index])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_az, self.n_el)
    }

    /// Bilinear interpolation in dB.
    pub fn lookup(&self, az: f64, el: f64) -> f64 {
        let fa = ((wrap_deg(az) + 180.0) / self.step).clamp(0.0, (self.n_az - 1) as f64);
        let fe = ((el.clamp(-90.0, 90.0) + 90.0) / self.step).clamp(0.0, (self.n_el - 1) as f64);
        let i = (fa.floor() as usize).min(self.n_az - 2);
        let k = (fe.floor() as usize).min(self.n_el - 2);
        let (ta, te) = (fa - i as f64, fe - k as f64);
        let g00 = self.sample(i, k);
        let g10 = self.sample(i + 1, k);
        let g01 = self.sample(i, k + 1);
        let g11 = self.sample(i + 1, k + 1);
        let exact = |t: f64| t == 0.0;
        match (exact(ta), exact(te)) {
            (true, true) => g00,
            (true, false) => g00 + (g01 - g00) * te,
            (false, true) => g00 + (g10 - g00) * ta,
            _ => (g00 * (1.0 - ta) + g10 * ta) * (1.0 - te) + (g01 * (1.0 - ta) + g11 * ta) * te,
        }
    }
}

#[derive(Debug, Clone)]
pub enum PatternShape {
    Grid(GridPattern),
    Radial(RadialPattern),
}

/// How a world direction is turned into pattern coordinates relative to an
/// antenna mount.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// Separate azimuth and elevation differences, azimuth wrapped into
    /// [−180, 180]. Elevation differences beyond ±90° fold over the pole.
    #[default]
    PerAxis,
    /// Direction expressed in the mount's own frame (exact rotation).
    Rotated,
}

#[derive(Debug, Clone)]
pub struct AntennaPattern {
    name: String,
    shape: PatternShape,
    peak_gain: f64,
    hpbw_azimuth: f64,
}

impl AntennaPattern {
    pub fn new(name: impl Into<String>, shape: PatternShape, hpbw_azimuth: f64) -> Self {
        let mut p = AntennaPattern {
            name: name.into(),
            shape,
            peak_gain: 0.0,
            hpbw_azimuth,
        };
        p.peak_gain = p.gain(0.0, 0.0);
        p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &PatternShape {
        &self.shape
    }

    pub fn peak_gain(&self) -> f64 {
        self.peak_gain
    }

    pub fn hpbw_azimuth(&self) -> f64 {
        self.hpbw_azimuth
    }

    /// Gain at a boresight offset in pattern coordinates, dBi.
    pub fn gain(&self, d_az: f64, d_el: f64) -> f64 {
        match &self.shape {
            PatternShape::Grid(g) => g.lookup(d_az, d_el),
            PatternShape::Radial(r) => r.gain_at(off_axis_deg(d_az, d_el)),
        }
    }

    /// Gain toward `direction` for an antenna whose boresight is `mount`.
    pub fn gain_toward(&self, mount: Orientation, direction: Orientation, mode: GainMode) -> f64 {
        match mode {
            GainMode::PerAxis => {
                let (d_az, d_el) = per_axis_offset(mount, direction);
                self.gain(d_az, d_el)
            }
            GainMode::Rotated => {
                if let PatternShape::Radial(r) = &self.shape {
                    return r.gain_at(mount.angle_to(direction));
                }
                let (d_az, d_el) = rotated_offset(mount, direction);
                self.gain(d_az, d_el)
            }
        }
    }

    /// Writes the pattern sampled every `step` degrees as
    /// `az_deg, el_deg, gain_dbi`.
    pub fn write_csv(&self, path: impl AsRef<Path>, step: f64) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let n_az = (360.0 / step).round() as usize;
        let n_el = (180.0 / step).round() as usize;
        let mut body = String::from("az_deg,el_deg,gain_dbi\n");
        for i in 0..=n_el {
            let el = -90.0 + i as f64 * step;
            for j in 0..=n_az {
                let az = -180.0 + j as f64 * step;
                body.push_str(&format!("{az},{el},{}\n", self.gain(az, el)));
            }
        }
        w.write_all(body.as_bytes())
            .map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Angle between boresight and the pattern direction (az, el), degrees.
pub fn off_axis_deg(az: f64, el: f64) -> f64 {
    Orientation::new(0.0, 0.0).angle_to(Orientation::new(az, el))
}

pub fn per_axis_offset(mount: Orientation, direction: Orientation) -> (f64, f64) {
    let mut d_az = wrap_deg(direction.theta - mount.theta);
    let mut d_el = direction.phi - mount.phi;
    if d_el > 90.0 {
        d_el = 180.0 - d_el;
        d_az = wrap_deg(d_az + 180.0);
    } else if d_el < -90.0 {
        d_el = -180.0 - d_el;
        d_az = wrap_deg(d_az + 180.0);
    }
    (d_az, d_el)
}

/// Pattern coordinates of `direction` in the frame of an antenna pointed at
/// `mount` with its horizontal axis kept level.
pub fn rotated_offset(mount: Orientation, direction: Orientation) -> (f64, f64) {
    let f = mount.unit_vector();
    let (st, ct) = mount.theta.to_radians().sin_cos();
    let right = Vec3::new(ct, -st, 0.0);
    let up = right.cross(f);
    let d = direction.unit_vector();
    let (x, y, z) = (d.dot(f), d.dot(right), d.dot(up));
    let el = z.clamp(-1.0, 1.0).asin().to_degrees();
    let az = if x == 0.0 && y == 0.0 {
        0.0
    } else {
        wrap_deg(y.atan2(x).to_degrees())
    };
    (az, el)
}

/// Samples on either side of a jump searched for a pattern null.
pub const NULL_WINDOW: usize = 8;

/// A pair of adjacent grid samples whose gains differ by 3 dB or more.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityException {
    pub az: f64,
    pub el: f64,
    /// True when the step is along azimuth, false for elevation.
    pub along_azimuth: bool,
    pub delta_db: f64,
    /// Whether `null_between` reported a pattern null within
    /// [`NULL_WINDOW`] samples of the pair.
    pub at_null: bool,
}

/// Lists every adjacent-sample jump of at least 3 dB in a grid pattern.
/// `null_between(a, b)` tells whether the underlying pattern has a null on
/// the segment between two (az, el) points.
pub fn continuity_exceptions<F>(grid: &GridPattern, null_between: F) -> Vec<ContinuityException>
where
    F: Fn((f64, f64), (f64, f64)) -> bool + Sync,
{
    let (n_az, n_el) = grid.dims();
    let step = grid.step;
    let jumps = |along_azimuth: bool, line: usize| {
        let len = if along_azimuth { n_az } else { n_el };
        let at = |i: usize| -> (f64, f64) {
            if along_azimuth {
                (-180.0 + i as f64 * step, -90.0 + line as f64 * step)
            } else {
                (-180.0 + line as f64 * step, -90.0 + i as f64 * step)
            }
        };
        let get = |i: usize| {
            if along_azimuth {
                grid.sample(i, line)
            } else {
                grid.sample(line, i)
            }
        };
        let mut out = Vec::new();
        for i in 0..len - 1 {
            let delta = (get(i) - get(i + 1)).abs();
            if delta < 3.0 {
                continue;
            }
            let (az, el) = at(i);
            let at_null = null_between(
                at(i.saturating_sub(NULL_WINDOW)),
                at((i + 1 + NULL_WINDOW).min(len - 1)),
            );
            out.push(ContinuityException {
                az,
                el,
                along_azimuth,
                delta_db: delta,
                at_null,
            });
        }
        out
    };
    let rows: Vec<_> = (0..n_el)
        .into_par_iter()
        .flat_map_iter(|k| jumps(true, k))
        .collect();
    let cols: Vec<_> = (0..n_az)
        .into_par_iter()
        .flat_map_iter(|i| jumps(false, i))
        .collect();
    rows.into_iter().chain(cols).collect()
}
