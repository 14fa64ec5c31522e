//! `validate` and `thresholds` reports.

use std::fmt::Write as _;
use std::path::Path;

use coexist_core::antenna::{load_reflector_pattern, synthesize_ura, AntennaPattern};
use coexist_core::atmosphere::{load_atmosphere_table, ScintillationExponent};
use coexist_core::interference::CellSite;
use coexist_core::orbit::load_tle;
use coexist_core::risk::ThresholdSet;
use coexist_core::scene::SceneFile;

use crate::config::RunConfig;
use crate::pipeline::ura_spec;

/// Nominal antenna figures: (peak dBi, azimuth HPBW degrees).
pub const NOMINAL_BS: (f64, f64) = (29.0, 6.4);
pub const NOMINAL_UE: (f64, f64) = (17.0, 25.8);
pub const NOMINAL_REFLECTOR_PEAK_DBI: f64 = 34.4;
pub const PEAK_TOLERANCE_DB: f64 = 1.0;
pub const HPBW_TOLERANCE_DEG: f64 = 1.0;

#[derive(Debug, Default)]
pub struct Validation {
    pub findings: Vec<String>,
    pub notes: Vec<String>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for n in &self.notes {
            let _ = writeln!(s, "ok    {n}");
        }
        for f in &self.findings {
            let _ = writeln!(s, "FAIL  {f}");
        }
        let _ = writeln!(s, "{} finding(s)", self.findings.len());
        s
    }
}

fn check_antenna(v: &mut Validation, label: &str, a: &AntennaPattern, nominal: (f64, f64)) {
    let (peak, hpbw) = (a.peak_gain(), a.hpbw_azimuth());
    let msg = format!("{label}: peak {peak:.2} dBi, azimuth HPBW {hpbw:.2}°");
    if (peak - nominal.0).abs() > PEAK_TOLERANCE_DB || (hpbw - nominal.1).abs() > HPBW_TOLERANCE_DEG
    {
        v.findings.push(format!(
            "{msg}, expected {} dBi and {}°",
            nominal.0, nominal.1
        ));
    } else {
        v.notes.push(msg);
    }
}

/// Checks every input of a run without tracing.
pub fn validate(config: &RunConfig) -> Validation {
    let mut v = Validation {
        findings: config.findings(),
        ..Default::default()
    };
    if !v.is_ok() {
        return v;
    }
    let path = |p: &Path| config.resolve(p);

    let scene = match std::fs::read_to_string(path(&config.scene))
        .map_err(anyhow::Error::from)
        .and_then(|t| Ok(SceneFile::from_json(&t)?))
    {
        Ok(file) => {
            let f = file.findings();
            if f.is_empty() {
                v.notes
                    .push(format!("scene: {} buildings", file.buildings.len()));
            }
            v.findings
                .extend(f.into_iter().map(|m| format!("scene: {m}")));
            file.into_scene().ok()
        }
        Err(e) => {
            v.findings.push(format!("scene: {e:#}"));
            None
        }
    };

    match load_tle(path(&config.tle)) {
        Ok(t) => v.notes.push(format!(
            "tle: {} epoch {}",
            t.name.as_deref().unwrap_or("unnamed"),
            t.epoch.format("%Y-%m-%dT%H:%M:%SZ")
        )),
        Err(e) => v.findings.push(format!("tle: {e}")),
    }

    match ScintillationExponent::from_int(config.scintillation_exponent)
        .and_then(|k| load_atmosphere_table(path(&config.atmosphere), k))
    {
        Ok(t) => {
            for &p in &config.p_percent {
                match t.l_atm(p) {
                    Ok(l) => v.notes.push(format!("atmosphere: L({p}%) = {l:.4} dB")),
                    Err(e) => v.findings.push(format!("atmosphere: {e}")),
                }
            }
        }
        Err(e) => v.findings.push(format!("atmosphere: {e}")),
    }

    for (label, n, nominal) in [
        ("base station URA", config.antenna.bs_elements, NOMINAL_BS),
        ("user equipment URA", config.antenna.ue_elements, NOMINAL_UE),
    ] {
        match synthesize_ura(&ura_spec(config, n)) {
            Ok(a) => check_antenna(&mut v, label, &a, nominal),
            Err(e) => v.findings.push(format!("{label}: {e}")),
        }
    }
    match load_reflector_pattern(path(&config.reflector)) {
        Ok(r) => {
            let peak = r.peak_gain();
            let msg = format!("reflector: peak {peak:.2} dBi");
            if (peak - NOMINAL_REFLECTOR_PEAK_DBI).abs() > PEAK_TOLERANCE_DB {
                v.findings
                    .push(format!("{msg}, expected {NOMINAL_REFLECTOR_PEAK_DBI} dBi"));
            } else {
                v.notes.push(msg);
            }
        }
        Err(e) => v.findings.push(format!("reflector: {e}")),
    }

    if let Some(scene) = scene {
        for c in &config.cells {
            match CellSite::with_height(&c.id, c.x, c.y, c.bs_height_m, c.r_cell) {
                Ok(site) => {
                    let p = site.bs_position;
                    if !scene.ground().contains_xy(p.x, p.y) {
                        v.findings.push(format!(
                            "cell {}: base station outside the ground extent",
                            c.id
                        ));
                    } else if scene.is_inside_building(p) {
                        v.findings
                            .push(format!("cell {}: base station inside a building", c.id));
                    } else {
                        v.notes.push(format!(
                            "cell {}: base station at ({}, {}, {}), r_cell {} m",
                            c.id, p.x, p.y, p.z, c.r_cell
                        ));
                    }
                }
                Err(e) => v.findings.push(format!("cell {}: {e}", c.id)),
            }
        }
    }
    v
}

/// Text table of the detection thresholds.
pub fn thresholds_report(t: &ThresholdSet) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "NEΔT = {} K, B = {} MHz, kB·NEΔT·B = {:.4e} W",
        t.ne_delta_t,
        t.bandwidth / 1e6,
        t.noise_equivalent_power_w()
    );
    for (name, dbm) in t.gammas() {
        let _ = writeln!(s, "{name} = {dbm:.4} dBm");
    }
    let _ = writeln!(
        s,
        "gamma1 raises the noise floor by {:.4} K ({:.2}% of NEΔT)",
        t.gamma1_degradation_k(),
        100.0 * t.gamma1_fraction()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_threshold_table() {
        let r = thresholds_report(&ThresholdSet::default());
        assert!(r.contains("= -136.0000 dBm"), "{r}");
        assert!(r.contains("= -140.8177 dBm"), "{r}");
        assert!(r.contains("= -160.8177 dBm"), "{r}");
        assert!(r.contains("0.0091 K (3.03% of NEΔT)"), "{r}");
    }
}
