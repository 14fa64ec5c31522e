//! Interference scenarios and received power at the satellite.
//!
//! A single transmitter's contribution sums every captured ray in the linear
//! domain: P_TX · G_TX · G_RX / (L_FS · L_GL · L_BL · L_atm). A homogeneous
//! network of N cells multiplies that by N.

mod run;
mod sets;

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaPattern, GainMode};
use crate::geometry::{Orientation, Vec3};
use crate::raytrace::RayPath;
use crate::scan::ScanOrientation;
use crate::{db_to_linear, linear_to_db, Error, Result};

pub use run::{run_scenario, EvaluationContext, RaySource, TracingRaySource};
pub use sets::{
    downlink_orientation_set, downlink_transmitters, uplink_transmitter_set, MAX_DRAWS_PER_UE,
};

/// Base station antenna height above ground, m.
pub const BS_HEIGHT_M: f64 = 6.0;
/// User equipment antenna height above ground, m.
pub const UE_HEIGHT_M: f64 = 1.5;
/// Out-of-band transmit power of a base station, dBm per 200 MHz.
pub const DOWNLINK_PTX_DBM: f64 = -3.0;
/// Out-of-band transmit power of a UE, dBm per 200 MHz.
pub const UPLINK_PTX_DBM: f64 = 1.0;
/// Area of the city-wide network, km².
pub const DEFAULT_NETWORK_AREA_KM2: f64 = 60.0;
/// Cell radius used for the single-cell orientation sets, m.
pub const DEFAULT_CELL_RADIUS_M: f64 = 108.0;
/// Tabulated density (cells/km²) to cell radius (m) pairs.
pub const CELL_RADIUS_TABLE: [(f64, f64); 4] =
    [(25.0, 108.0), (50.0, 74.0), (100.0, 52.0), (200.0, 36.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Uplink,
    Downlink,
}

impl Role {
    pub fn default_ptx_dbm(self) -> f64 {
        match self {
            Role::Uplink => UPLINK_PTX_DBM,
            Role::Downlink => DOWNLINK_PTX_DBM,
        }
    }
}

/// A base station on a building corner and the disc it serves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSite {
    pub id: String,
    pub bs_position: Vec3,
    /// Meters.
    pub r_cell: f64,
}

impl CellSite {
    /// A site with its antenna at [`BS_HEIGHT_M`] above (x, y).
    pub fn new(id: impl Into<String>, x: f64, y: f64, r_cell: f64) -> Result<Self> {
        CellSite::with_height(id, x, y, BS_HEIGHT_M, r_cell)
    }

    pub fn with_height(
        id: impl Into<String>,
        x: f64,
        y: f64,
        height: f64,
        r_cell: f64,
    ) -> Result<Self> {
        if !(r_cell > 0.0 && r_cell.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cell radius must be positive, got {r_cell}"
            )));
        }
        if !(height > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "base station height must be positive, got {height}"
            )));
        }
        Ok(CellSite {
            id: id.into(),
            bs_position: Vec3::new(x, y, height),
            r_cell,
        })
    }
}

/// One ground transmitter with its beam pointed at its link partner.
#[derive(Debug, Clone)]
pub struct TransmitterInstance {
    pub role: Role,
    pub position: Vec3,
    /// The other end of the link (UE for downlink, BS for uplink).
    pub partner: Vec3,
    pub p_tx_dbm: f64,
    pub pattern: Arc<AntennaPattern>,
    pub mount: Orientation,
}

impl TransmitterInstance {
    /// Transmitter at `position` beamformed toward `partner`.
    pub fn pointed(
        role: Role,
        position: Vec3,
        partner: Vec3,
        pattern: Arc<AntennaPattern>,
    ) -> Self {
        TransmitterInstance {
            role,
            position,
            partner,
            p_tx_dbm: role.default_ptx_dbm(),
            pattern,
            mount: Orientation::from_vector(partner - position),
        }
    }

    /// Horizontal distance between the BS and the UE of this link, m.
    pub fn link_ground_range(&self) -> f64 {
        let d = self.partner - self.position;
        d.x.hypot(d.y)
    }

    pub fn with_ptx_offset(mut self, offset_db: f64) -> Self {
        self.p_tx_dbm += offset_db;
        self
    }
}

/// Cell density and the homogeneous network it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    /// Cells per km².
    pub density: f64,
    /// km².
    pub area_km2: f64,
    /// Meters.
    pub r_cell: f64,
}

impl NetworkScenario {
    /// Uses the tabulated radius for the density, or half the inter-site
    /// distance of a square grid (500/√λ m) when the density is not listed.
    pub fn new(density: f64, area_km2: f64) -> Result<Self> {
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {density}"
            )));
        }
        NetworkScenario::with_radius(density, area_km2, cell_radius_for_density(density))
    }

    pub fn with_radius(density: f64, area_km2: f64, r_cell: f64) -> Result<Self> {
        let s = NetworkScenario {
            density,
            area_km2,
            r_cell,
        };
        if !(r_cell > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cell radius must be positive, got {r_cell}"
            )));
        }
        s.cell_count()?;
        Ok(s)
    }

    /// N = λ · A_M, required to be a positive integer.
    pub fn cell_count(&self) -> Result<u64> {
        let n = self.density * self.area_km2;
        let rounded = n.round();
        if !(rounded >= 1.0) || (n - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "density {} × area {} km² does not give a positive whole number of cells",
                self.density, self.area_km2
            )));
        }
        Ok(rounded as u64)
    }

    /// 10·log10(N), dB.
    pub fn aggregate_gain_db(&self) -> Result<f64> {
        Ok(10.0 * (self.cell_count()? as f64).log10())
    }
}

pub fn cell_radius_for_density(density: f64) -> f64 {
    CELL_RADIUS_TABLE
        .iter()
        .find(|(d, _)| *d == density)
        .map(|&(_, r)| r)
        .unwrap_or_else(|| 500.0 / density.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleUl,
    SingleDl,
    NetworkUl,
    NetworkDl,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::SingleUl,
        ScenarioKind::SingleDl,
        ScenarioKind::NetworkUl,
        ScenarioKind::NetworkDl,
    ];

    pub fn role(self) -> Role {
        match self {
            ScenarioKind::SingleUl | ScenarioKind::NetworkUl => Role::Uplink,
            ScenarioKind::SingleDl | ScenarioKind::NetworkDl => Role::Downlink,
        }
    }

    pub fn is_network(self) -> bool {
        matches!(self, ScenarioKind::NetworkUl | ScenarioKind::NetworkDl)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::SingleUl => "single_ul",
            ScenarioKind::SingleDl => "single_dl",
            ScenarioKind::NetworkUl => "network_ul",
            ScenarioKind::NetworkDl => "network_dl",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario kind '{s}'")))
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How gains are looked up at each end of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GainModes {
    pub tx: GainMode,
    pub rx: GainMode,
}

impl Default for GainModes {
    fn default() -> Self {
        GainModes {
            tx: GainMode::PerAxis,
            rx: GainMode::Rotated,
        }
    }
}

/// One (pose, scan orientation, transmitter) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceSample {
    pub pose_id: usize,
    pub scan: ScanOrientation,
    pub tx_index: usize,
    pub mount: Orientation,
    pub m_rays: usize,
    /// dBm per 200 MHz; `None` when no ray couples into the satellite.
    pub power_dbm: Option<f64>,
    /// Arrival direction of the strongest ray, satellite frame.
    pub strongest_aoa: Option<Orientation>,
}

impl InterferenceSample {
    pub fn is_coupled(&self) -> bool {
        self.power_dbm.is_some()
    }

    /// Same sample with its power moved by `db`. Sentinels stay sentinels.
    pub fn shifted(&self, db: f64) -> Self {
        InterferenceSample {
            power_dbm: self.power_dbm.map(|p| p + db),
            ..self.clone()
        }
    }
}

/// Received power of one ray, dBm.
#[inline]
pub fn ray_power_dbm(p_tx_dbm: f64, g_tx: f64, g_rx: f64, ray_loss_db: f64, atm_db: f64) -> f64 {
    p_tx_dbm + g_tx + g_rx - (ray_loss_db + atm_db)
}

/// Sums per-ray dBm values in the linear domain, in order. Returns the total
/// and the index of the strongest ray.
pub fn combine_rays(powers_dbm: impl IntoIterator<Item = f64>) -> Option<(f64, usize)> {
    let mut sum = 0.0;
    let mut best: Option<(f64, usize)> = None;
    for (i, p) in powers_dbm.into_iter().enumerate() {
        let lin = db_to_linear(p);
        sum += lin;
        if best.map_or(true, |(b, _)| lin > b) {
            best = Some((lin, i));
        }
    }
    best.map(|(_, i)| (linear_to_db(sum), i))
}

/// Received power at the satellite from one transmitter in one scan
/// orientation. `atm_db` is added to every ray's loss.
pub fn evaluate_single(
    rays: &[RayPath],
    tx: &TransmitterInstance,
    scan: &ScanOrientation,
    rx_pattern: &AntennaPattern,
    atm_db: f64,
    modes: GainModes,
) -> InterferenceSample {
    let look = scan.orientation();
    let combined = combine_rays(rays.iter().map(|r| {
        let g_tx = tx.pattern.gain_toward(tx.mount, r.aod, modes.tx);
        let g_rx = rx_pattern.gain_toward(look, r.aoa, modes.rx);
        ray_power_dbm(tx.p_tx_dbm, g_tx, g_rx, r.total_loss_db(), atm_db)
    }));
    InterferenceSample {
        pose_id: 0,
        scan: *scan,
        tx_index: 0,
        mount: tx.mount,
        m_rays: rays.len(),
        power_dbm: combined.map(|(p, _)| p),
        strongest_aoa: combined.map(|(_, i)| rays[i].aoa),
    }
}

/// Network aggregate of a single-cell sample: power + 10·log10(N).
pub fn aggregate(
    sample: &InterferenceSample,
    scenario: &NetworkScenario,
) -> Result<InterferenceSample> {
    Ok(sample.shifted(scenario.aggregate_gain_db()?))
}

pub const SAMPLES_HEADER: &str =
    "scenario,pose_id,pixel_index,theta_s,phi_s,theta_g,phi_g,m_rays,power_dbm";

/// Writes samples as CSV. Uncoupled samples have an empty power field.
pub fn write_samples<W: Write>(
    mut w: W,
    scenario: &str,
    samples: &[InterferenceSample],
) -> std::io::Result<()> {
    writeln!(w, "{SAMPLES_HEADER}")?;
    for s in samples {
        let power = s.power_dbm.map(|p| p.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{scenario},{},{},{},{},{},{},{},{power}",
            s.pose_id,
            s.scan.pixel_index,
            s.scan.theta_s,
            s.scan.phi_s,
            s.mount.theta,
            s.mount.phi,
            s.m_rays
        )?;
    }
    Ok(())
}

pub fn write_samples_csv(
    path: impl AsRef<Path>,
    scenario: &str,
    samples: &[InterferenceSample],
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_samples(&mut w, scenario, samples)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_ray_arithmetic() {
        assert!((ray_power_dbm(1.0, 17.0, 34.4, 230.0, 0.0) - -177.6).abs() < 1e-9);
        let (p, i) = combine_rays([-177.6]).unwrap();
        assert!((p - -177.6).abs() < 1e-9 && i == 0);
    }

    #[test]
    fn two_equal_rays_add_three_db() {
        let (p, _) = combine_rays([-177.6, -177.6]).unwrap();
        assert!((p - (-177.6 + 10.0 * 2f64.log10())).abs() < 1e-9);
        assert!(combine_rays([]).is_none());
    }

    #[test]
    fn strongest_ray_index() {
        assert_eq!(combine_rays([-150.0, -140.0, -140.0, -160.0]).unwrap().1, 1);
    }

    #[test]
    fn network_cell_counts() {
        let s = NetworkScenario::new(25.0, 60.0).unwrap();
        assert_eq!(s.cell_count().unwrap(), 1500);
        assert_eq!(s.r_cell, 108.0);
        assert!((s.aggregate_gain_db().unwrap() - 31.760_912_590_556_81).abs() < 1e-9);
        assert_eq!(NetworkScenario::new(200.0, 60.0).unwrap().r_cell, 36.0);
        assert!(NetworkScenario::new(0.0, 60.0).is_err());
        assert!(NetworkScenario::new(0.3, 1.0).is_err());
        assert_eq!(
            NetworkScenario::new(1.0 / 60.0, 60.0)
                .unwrap()
                .cell_count()
                .unwrap(),
            1
        );
    }

    #[test]
    fn untabulated_density_uses_half_grid_spacing() {
        assert!((cell_radius_for_density(400.0) - 25.0).abs() < 1e-12);
        // the table sits about 8% above the formula
        assert!((cell_radius_for_density(25.0) / (500.0 / 5.0) - 1.08).abs() < 1e-12);
    }

    #[test]
    fn scenario_names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(ScenarioKind::parse(k.as_str()).unwrap(), k);
        }
        assert!(ScenarioKind::parse("multi").is_err());
    }

    #[test]
    fn sentinel_survives_shift() {
        let s = InterferenceSample {
            pose_id: 0,
            scan: ScanOrientation {
                theta_s: 0.0,
                phi_s: -90.0,
                pixel_index: 15,
                scan_angle: -1.6,
            },
            tx_index: 0,
            mount: Orientation::new(0.0, 0.0),
            m_rays: 0,
            power_dbm: None,
            strongest_aoa: None,
        };
        assert_eq!(s.shifted(30.0).power_dbm, None);
    }
}
