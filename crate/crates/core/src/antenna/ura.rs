//! Uniform rectangular array synthesis.
//!
//! The array lies in the pattern frame's y–z plane with broadside along +x;
//! `nx` elements run horizontally (azimuth) and `ny` vertically (elevation).
//! Each element radiates a field cosᵐ(el)·cosⁿ(az) toward the front half-space
//! and nothing behind it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AntennaPattern, GridPattern, PatternShape, GAIN_FLOOR_DBI};
use crate::{Error, Result};

fn default_spacing() -> f64 {
    0.5
}
fn default_exponents() -> (f64, f64) {
    (0.5, 0.5)
}
fn default_frequency() -> f64 {
    23.8e9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UraSpec {
    pub nx: usize,
    pub ny: usize,
    /// Element pitch in wavelengths.
    #[serde(default = "default_spacing")]
    pub element_spacing: f64,
    /// (m, n): elevation and azimuth exponents of the element field.
    #[serde(default = "default_exponents")]
    pub element_exponents: (f64, f64),
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
}

impl UraSpec {
    pub fn square(n: usize) -> Self {
        UraSpec {
            nx: n,
            ny: n,
            element_spacing: default_spacing(),
            element_exponents: default_exponents(),
            frequency_hz: default_frequency(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Pattern(
                "array needs at least one element per axis".into(),
            ));
        }
        if !(self.element_spacing > 0.0) {
            return Err(Error::Pattern("element spacing must be positive".into()));
        }
        let (m, n) = self.element_exponents;
        if !(m >= 0.0 && n >= 0.0) {
            return Err(Error::Pattern(
                "element exponents must be non-negative".into(),
            ));
        }
        if !(self.frequency_hz > 0.0) {
            return Err(Error::Pattern("frequency must be positive".into()));
        }
        Ok(())
    }
}

/// |sin(N x) / sin(x)|², the power array factor of N in-phase elements.
fn array_factor_sq(count: usize, x: f64) -> f64 {
    let n = count as f64;
    let s = x.sin();
    if s.abs() < 1e-12 {
        return n * n;
    }
    let r = (n * x).sin() / s;
    r * r
}

/// sin(N x) / sin(x), the signed field array factor.
fn array_factor(count: usize, x: f64) -> f64 {
    let n = count as f64;
    let s = x.sin();
    if s.abs() < 1e-12 {
        // limit is ±N depending on the parity of the lobe
        return n * ((n * x).cos() / x.cos()).signum();
    }
    (n * x).sin() / s
}

/// Signed far field of the array toward (az, el), degrees.
fn field(spec: &UraSpec, az_deg: f64, el_deg: f64) -> f64 {
    if az_deg.abs() > 90.0 {
        return 0.0;
    }
    let (saz, caz) = az_deg.to_radians().sin_cos();
    let (sel, cel) = el_deg.to_radians().sin_cos();
    let (m, n) = spec.element_exponents;
    if caz < 1e-12 || cel < 1e-12 {
        return 0.0;
    }
    let element = cel.powf(m) * caz.powf(n);
    let k = std::f64::consts::PI * spec.element_spacing;
    element * array_factor(spec.nx, k * cel * saz) * array_factor(spec.ny, k * sel)
}

/// Unnormalized radiated power of the array toward (az, el), degrees.
pub(crate) fn raw_power(spec: &UraSpec, az_deg: f64, el_deg: f64) -> f64 {
    if az_deg.abs() > 90.0 {
        return 0.0;
    }
    let (saz, caz) = az_deg.to_radians().sin_cos();
    let (sel, cel) = el_deg.to_radians().sin_cos();
    let (m, n) = spec.element_exponents;
    let element = cel.max(0.0).powf(m) * caz.max(0.0).powf(n);
    let k = std::f64::consts::PI * spec.element_spacing;
    element * element * array_factor_sq(spec.nx, k * cel * saz) * array_factor_sq(spec.ny, k * sel)
}

/// Total radiated power over the sphere by the midpoint rule on a 0.05° grid.
fn total_power(spec: &UraSpec) -> f64 {
    const STEP: f64 = 0.05;
    let n = (180.0 / STEP) as usize;
    let d = STEP.to_radians();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let el = -90.0 + (i as f64 + 0.5) * STEP;
            let w = el.to_radians().cos() * d * d;
            (0..n)
                .map(|j| raw_power(spec, -90.0 + (j as f64 + 0.5) * STEP, el))
                .sum::<f64>()
                * w
        })
        .sum()
}

/// Directivity in dBi toward (az, el) using the analytic expression.
pub struct AnalyticUra {
    spec: UraSpec,
    norm: f64,
}

impl AnalyticUra {
    pub fn new(spec: &UraSpec) -> Result<Self> {
        spec.validate()?;
        let norm = 4.0 * std::f64::consts::PI / total_power(spec);
        Ok(AnalyticUra {
            spec: spec.clone(),
            norm,
        })
    }

    pub fn gain_dbi(&self, az: f64, el: f64) -> f64 {
        let p = raw_power(&self.spec, az, el) * self.norm;
        if p > 0.0 {
            (10.0 * p.log10()).max(GAIN_FLOOR_DBI)
        } else {
            GAIN_FLOOR_DBI
        }
    }

    /// True if the field vanishes, changes sign, or has a local minimum of
    /// magnitude strictly inside the straight segment between two (az, el)
    /// points.
    pub fn null_between(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        const SUB: usize = 160;
        let f: Vec<f64> = (0..=SUB)
            .map(|s| {
                let t = s as f64 / SUB as f64;
                field(&self.spec, a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)
            })
            .collect();
        if f.contains(&0.0) || f.windows(2).any(|w| w[0].signum() != w[1].signum()) {
            return true;
        }
        let (idx, _) = f
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .unwrap();
        idx > 0 && idx < SUB
    }

    /// Full azimuth width at half power in the boresight elevation cut.
    pub fn hpbw_azimuth(&self) -> f64 {
        let target = self.gain_dbi(0.0, 0.0) - 10.0 * 2f64.log10();
        let mut hi = 0.0;
        while self.gain_dbi(hi, 0.0) > target {
            hi += 0.01;
            if hi > 90.0 {
                return 180.0;
            }
        }
        let mut lo = hi - 0.01;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.gain_dbi(mid, 0.0) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo + hi
    }
}

/// Synthesizes a directivity-normalized URA pattern on the default 0.1° grid.
pub fn synthesize_ura(spec: &UraSpec) -> Result<AntennaPattern> {
    synthesize_ura_with_step(spec, super::GRID_STEP_DEG)
}

pub fn synthesize_ura_with_step(spec: &UraSpec, step: f64) -> Result<AntennaPattern> {
    let analytic = AnalyticUra::new(spec)?;
    let grid = GridPattern::tabulate(step, |az, el| analytic.gain_dbi(az, el))?;
    let hpbw = analytic.hpbw_azimuth();
    Ok(AntennaPattern::new(
        format!("ura_{}x{}", spec.nx, spec.ny),
        PatternShape::Grid(grid),
        hpbw,
    ))
}
