//! Rotationally symmetric pattern built from a single principal-plane cut.

use std::path::Path;

use super::{AntennaPattern, PatternShape};
use crate::{Error, Result};

/// Gain as a function of off-boresight angle only.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPattern {
    offsets: Vec<f64>,
    gains: Vec<f64>,
}

impl RadialPattern {
    /// Requires strictly increasing offsets covering [0°, 180°].
    pub fn new(offsets: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        if offsets.len() != gains.len() || offsets.len() < 2 {
            return Err(Error::Pattern(
                "cut needs at least two (offset, gain) rows".into(),
            ));
        }
        if offsets.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Pattern(
                "cut offsets must be strictly increasing".into(),
            ));
        }
        if offsets[0] != 0.0 || offsets[offsets.len() - 1] != 180.0 {
            return Err(Error::Pattern(format!(
                "cut covers [{}, {}] degrees; [0, 180] is required",
                offsets[0],
                offsets[offsets.len() - 1]
            )));
        }
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(Error::Pattern("cut gains must be finite".into()));
        }
        Ok(RadialPattern { offsets, gains })
    }

    /// Linear interpolation in dB over off-axis angle.
    pub fn gain_at(&self, off_axis: f64) -> f64 {
        let x = off_axis.abs().min(180.0);
        let i = self.offsets.partition_point(|&o| o <= x);
        if i == 0 {
            return self.gains[0];
        }
        if i == self.offsets.len() {
            return self.gains[i - 1];
        }
        let (x0, x1) = (self.offsets[i - 1], self.offsets[i]);
        let (g0, g1) = (self.gains[i - 1], self.gains[i]);
        if x == x0 {
            return g0;
        }
        g0 + (g1 - g0) * (x - x0) / (x1 - x0)
    }

    /// Full width between the half-power points.
    pub fn hpbw(&self) -> f64 {
        let target = self.gains[0] - 10.0 * 2f64.log10();
        for i in 1..self.offsets.len() {
            if self.gains[i] <= target {
                let (x0, x1) = (self.offsets[i - 1], self.offsets[i]);
                let (g0, g1) = (self.gains[i - 1], self.gains[i]);
                return 2.0 * (x0 + (target - g0) / (g1 - g0) * (x1 - x0));
            }
        }
        360.0
    }
}

/// Loads a `offaxis_deg, gain_dbi` cut and spins it about boresight.
pub fn load_reflector_pattern(path: impl AsRef<Path>) -> Result<AntennaPattern> {
    let path = path.as_ref();
    let ctx = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&ctx, e))?;
    let (mut offsets, mut gains) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(&ctx, e))?;
        let get = |k: usize| -> Result<f64> {
            rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::parse(
                    &ctx,
                    format!("row {}: column {} is not a number", i + 1, k + 1),
                )
            })
        };
        offsets.push(get(0)?);
        gains.push(get(1)?);
    }
    let radial = RadialPattern::new(offsets, gains)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "reflector".into());
    let hpbw = radial.hpbw();
    Ok(AntennaPattern::new(
        name,
        PatternShape::Radial(radial),
        hpbw,
    ))
}
