//! CSV writers for the risk reports.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Ccdf, HeatmapCell, Misalignment};
use crate::{Error, Result};

pub const CCDF_HEADER: &str = "power_dbm,ccdf_percent";
pub const EXCEEDANCE_HEADER: &str = "scenario,cell,density,p,gamma,percent,harmful";
pub const HEATMAP_HEADER: &str =
    "pose_lat,pose_lon,max_dbm,exceeds_g1,exceeds_g2,exceeds_g3,exceeds_g4";
pub const MISALIGNMENT_HEADER: &str = "pose_lat,pose_lon,degrees";

/// One line of an exceedance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceRow {
    pub scenario: String,
    pub cell: String,
    /// Cells/km²; `None` for single-transmitter scenarios.
    pub density: Option<f64>,
    pub p: f64,
    pub gamma: f64,
    pub percent: f64,
    pub harmful: bool,
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Spacing of the written CCDF curves, dB.
pub const CCDF_GRID_DB: f64 = 0.1;

/// CCDF sampled every [`CCDF_GRID_DB`].
pub fn write_ccdf_csv(path: impl AsRef<Path>, c: &Ccdf) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "{CCDF_HEADER}")?;
        for (x, pct) in c.on_grid(CCDF_GRID_DB) {
            writeln!(w, "{x:.1},{pct}")?;
        }
        Ok(())
    })
}

pub fn write_exceedance_csv(path: impl AsRef<Path>, rows: &[ExceedanceRow]) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "{EXCEEDANCE_HEADER}")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.scenario,
                r.cell,
                opt(r.density),
                r.p,
                r.gamma,
                r.percent,
                r.harmful
            )?;
        }
        Ok(())
    })
}

pub fn write_heatmap_csv(path: impl AsRef<Path>, cells: &[HeatmapCell]) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "{HEATMAP_HEADER}")?;
        for c in cells {
            let [a, b, d, e] = c.exceeds;
            writeln!(
                w,
                "{},{},{},{a},{b},{d},{e}",
                c.latitude,
                c.longitude,
                opt(c.max_dbm)
            )?;
        }
        Ok(())
    })
}

/// Poses without coupled samples are left out.
pub fn write_misalignment_csv(path: impl AsRef<Path>, rows: &[Misalignment]) -> Result<()> {
    write_file(path.as_ref(), |w| {
        writeln!(w, "{MISALIGNMENT_HEADER}")?;
        for r in rows {
            if let Some(d) = r.degrees {
                writeln!(w, "{},{},{d}", r.latitude, r.longitude)?;
            }
        }
        Ok(())
    })
}
