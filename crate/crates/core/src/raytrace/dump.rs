//! Ray dump CSV: one row per captured ray, vertices omitted.

use std::io::{BufRead, Write};

use super::RayPath;
use crate::geometry::Orientation;
use crate::{Error, Result};

pub const RAY_DUMP_HEADER: &str =
    "aod_theta_deg,aod_phi_deg,aoa_theta_deg,aoa_phi_deg,bounces,path_m,l_fs_db,l_gl_db,l_bl_db";

/// Writes the header and one row per ray. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_ray_dump<W: Write>(mut w: W, rays: &[RayPath]) -> std::io::Result<()> {
    writeln!(w, "{RAY_DUMP_HEADER}")?;
    for r in rays {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.aod.theta,
            r.aod.phi,
            r.aoa.theta,
            r.aoa.phi,
            r.bounce_count,
            r.path_length,
            r.l_fs,
            r.l_gl,
            r.l_bl
        )?;
    }
    Ok(())
}

pub fn read_ray_dump<R: BufRead>(r: R) -> Result<Vec<RayPath>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::parse("ray dump", e))?
        .unwrap_or_default();
    if header.trim() != RAY_DUMP_HEADER {
        return Err(Error::parse(
            "ray dump",
            format!("unexpected header {header:?}"),
        ));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::parse("ray dump", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(Error::parse(
                "ray dump",
                format!("row {}: expected 9 columns", n + 1),
            ));
        }
        let f = |i: usize| -> Result<f64> {
            cols[i].trim().parse().map_err(|_| {
                Error::parse(
                    "ray dump",
                    format!("row {}: bad number {:?}", n + 1, cols[i]),
                )
            })
        };
        let bounces: usize = cols[4]
            .trim()
            .parse()
            .map_err(|_| Error::parse("ray dump", format!("row {}: bad bounce count", n + 1)))?;
        out.push(RayPath {
            aod: Orientation::new(f(0)?, f(1)?),
            aoa: Orientation::new(f(2)?, f(3)?),
            bounce_count: bounces,
            path_length: f(5)?,
            l_fs: f(6)?,
            l_gl: f(7)?,
            l_bl: f(8)?,
            vertices: Vec::new(),
            faces: Vec::new(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let r = RayPath {
            aod: Orientation::new(12.0, 34.000000000000014),
            aoa: Orientation::new(-0.1, -89.99),
            bounce_count: 3,
            path_length: 823_456.789_012_345_6,
            l_fs: 178.123_456_789,
            l_gl: 4.7,
            l_bl: 6.0,
            vertices: Vec::new(),
            faces: Vec::new(),
        };
        let mut buf = Vec::new();
        write_ray_dump(&mut buf, std::slice::from_ref(&r)).unwrap();
        let back = read_ray_dump(&buf[..]).unwrap();
        assert_eq!(back, vec![r]);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_ray_dump(&b"a,b\n1,2\n"[..]).is_err());
    }
}
