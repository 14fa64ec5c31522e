//! Run configuration file (TOML) and command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use coexist_core::antenna::GainMode;
use coexist_core::interference::{ScenarioKind, DEFAULT_CELL_RADIUS_M, DEFAULT_NETWORK_AREA_KM2};
use coexist_core::orbit::{PropagatorKind, SpaceStudyArea};
use coexist_core::raytrace::LaunchGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GridChoice {
    /// 2° elevation × 1° azimuth.
    #[default]
    Coarse,
    /// 0.5° elevation × 0.1° azimuth.
    Paper,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: PathBuf,
    pub tle: PathBuf,
    pub atmosphere: PathBuf,
    pub reflector: PathBuf,
    /// Where reports go unless `--out` is given.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    /// Ray cache directory; defaults to `<output>/cache`.
    #[serde(default, skip_serializing)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_p")]
    pub p_percent: Vec<f64>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<ScenarioKind>,
    #[serde(default = "default_densities")]
    pub densities: Vec<f64>,
    #[serde(default = "default_area_km2")]
    pub network_area_km2: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ptx_offset_db: f64,
    #[serde(default = "default_exponent")]
    pub scintillation_exponent: u8,
    #[serde(default = "yes")]
    pub write_samples: bool,
    #[serde(default)]
    pub area: AreaConfig,
    #[serde(default)]
    pub track: TrackConfig,
    #[serde(default)]
    pub launch: LaunchConfig,
    #[serde(default)]
    pub trace: TraceConfig,
    #[serde(default)]
    pub antenna: AntennaConfig,
    #[serde(default)]
    pub uplink: UplinkConfig,
    #[serde(default)]
    pub downlink: DownlinkConfig,
    pub cells: Vec<CellConfig>,
    /// Directory the relative paths above are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    /// Defaults to the scene origin.
    pub center_lat: Option<f64>,
    pub center_lon: Option<f64>,
    #[serde(default = "default_side")]
    pub side_m: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        AreaConfig {
            center_lat: None,
            center_lon: None,
            side_m: default_side(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackConfig {
    /// Defaults to the element set epoch.
    pub start: Option<DateTime<Utc>>,
    #[serde(default = "default_span_days")]
    pub span_days: f64,
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
    /// Keep at most this many poses, spread evenly over the sampled track.
    pub max_poses: Option<usize>,
    #[serde(default)]
    pub propagator: PropagatorKind,
    #[serde(default = "default_band")]
    pub altitude_band_km: [f64; 2],
}

impl Default for TrackConfig {
    fn default() -> Self {
        TrackConfig {
            start: None,
            span_days: default_span_days(),
            spacing_m: default_spacing(),
            max_poses: None,
            propagator: PropagatorKind::default(),
            altitude_band_km: default_band(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaunchConfig {
    #[serde(default)]
    pub grid: GridChoice,
    /// Overrides the preset's steps, degrees.
    pub elevation_step: Option<f64>,
    pub azimuth_step: Option<f64>,
}

impl LaunchConfig {
    pub fn launch_grid(&self) -> LaunchGrid {
        let base = match self.grid {
            GridChoice::Coarse => LaunchGrid::coarse(),
            GridChoice::Paper => LaunchGrid::fine(),
        };
        LaunchGrid {
            elevation_step: self.elevation_step.unwrap_or(base.elevation_step),
            azimuth_step: self.azimuth_step.unwrap_or(base.azimuth_step),
            ..base
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    #[serde(default = "default_bounces")]
    pub max_bounces: usize,
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    #[serde(default = "default_capture")]
    pub capture_diameter_m: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            max_bounces: default_bounces(),
            frequency_hz: default_frequency(),
            capture_diameter_m: default_capture(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaConfig {
    #[serde(default = "default_bs_elements")]
    pub bs_elements: usize,
    #[serde(default = "default_ue_elements")]
    pub ue_elements: usize,
    /// Wavelengths.
    #[serde(default = "default_element_spacing")]
    pub element_spacing: f64,
    #[serde(default = "default_element_exponents")]
    pub element_exponents: [f64; 2],
    #[serde(default)]
    pub tx_gain_mode: GainMode,
    #[serde(default = "default_rx_mode")]
    pub rx_gain_mode: GainMode,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig {
            bs_elements: default_bs_elements(),
            ue_elements: default_ue_elements(),
            element_spacing: default_element_spacing(),
            element_exponents: default_element_exponents(),
            tx_gain_mode: GainMode::PerAxis,
            rx_gain_mode: default_rx_mode(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UplinkConfig {
    #[serde(default = "default_ue_count")]
    pub count: usize,
}

impl Default for UplinkConfig {
    fn default() -> Self {
        UplinkConfig {
            count: default_ue_count(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownlinkConfig {
    #[serde(default = "default_dl_step")]
    pub grid_step_m: f64,
}

impl Default for DownlinkConfig {
    fn default() -> Self {
        DownlinkConfig {
            grid_step_m: default_dl_step(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub id: String,
    /// Base station east/north position in the scene frame, m.
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_r_cell")]
    pub r_cell: f64,
    #[serde(default = "default_bs_height")]
    pub bs_height_m: f64,
}

fn default_p() -> Vec<f64> {
    vec![50.0]
}
fn default_scenarios() -> Vec<ScenarioKind> {
    ScenarioKind::ALL.to_vec()
}
fn default_densities() -> Vec<f64> {
    vec![25.0, 50.0, 100.0, 200.0]
}
fn default_area_km2() -> f64 {
    DEFAULT_NETWORK_AREA_KM2
}
fn default_exponent() -> u8 {
    3
}
fn yes() -> bool {
    true
}
fn default_side() -> f64 {
    SpaceStudyArea::DEFAULT_SIDE_M
}
fn default_span_days() -> f64 {
    29.0
}
fn default_spacing() -> f64 {
    50_000.0
}
fn default_band() -> [f64; 2] {
    [700.0, 900.0]
}
fn default_bounces() -> usize {
    6
}
fn default_frequency() -> f64 {
    23.8e9
}
fn default_capture() -> f64 {
    50_000.0
}
fn default_bs_elements() -> usize {
    16
}
fn default_ue_elements() -> usize {
    4
}
fn default_element_spacing() -> f64 {
    0.5
}
fn default_element_exponents() -> [f64; 2] {
    [0.5, 0.5]
}
fn default_rx_mode() -> GainMode {
    GainMode::Rotated
}
fn default_ue_count() -> usize {
    100
}
fn default_dl_step() -> f64 {
    1.0
}
fn default_r_cell() -> f64 {
    DEFAULT_CELL_RADIUS_M
}
fn default_bs_height() -> f64 {
    coexist_core::interference::BS_HEIGHT_M
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub grid: Option<GridChoice>,
    pub seed: Option<u64>,
    pub ptx_offset_db: Option<f64>,
    pub scintillation_exponent: Option<u8>,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: RunConfig = toml::from_str(text).context("parsing run config")?;
        c.base_dir = base_dir.to_path_buf();
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::from_toml(&text, &base)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output = Some(out.clone());
        }
        if let Some(g) = o.grid {
            self.launch.grid = g;
            self.launch.elevation_step = None;
            self.launch.azimuth_step = None;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = o.ptx_offset_db {
            self.ptx_offset_db = d;
        }
        if let Some(k) = o.scintillation_exponent {
            self.scintillation_exponent = k;
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> Result<PathBuf> {
        match &self.output {
            Some(p) => Ok(self.resolve(p)),
            None => bail!("no output directory: set `output` in the config or pass --out"),
        }
    }

    pub fn cache_dir(&self) -> Result<PathBuf> {
        match &self.cache_dir {
            Some(p) => Ok(self.resolve(p)),
            None => Ok(self.output_dir()?.join("cache")),
        }
    }

    /// Problems that make the config unusable, one message each.
    pub fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, p) in [
            ("scene", &self.scene),
            ("tle", &self.tle),
            ("atmosphere", &self.atmosphere),
            ("reflector", &self.reflector),
        ] {
            if !self.resolve(p).is_file() {
                out.push(format!(
                    "{name} file {} does not exist",
                    self.resolve(p).display()
                ));
            }
        }
        if self.p_percent.is_empty() {
            out.push("p_percent is empty".into());
        }
        for &p in &self.p_percent {
            if !(0.001..=50.0).contains(&p) {
                out.push(format!("p = {p}% is outside [0.001, 50]"));
            }
        }
        if self.scenarios.iter().any(|k| k.is_network()) && self.densities.is_empty() {
            out.push("network scenarios requested without densities".into());
        }
        for &d in &self.densities {
            if !(d > 0.0 && d.is_finite()) {
                out.push(format!("density {d} must be positive"));
            }
        }
        if ![2, 3].contains(&self.scintillation_exponent) {
            out.push(format!(
                "scintillation_exponent must be 2 or 3, got {}",
                self.scintillation_exponent
            ));
        }
        if self.cells.is_empty() {
            out.push("no cells configured".into());
        }
        let mut ids: Vec<&str> = self.cells.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            out.push("cell ids must be unique".into());
        }
        for c in &self.cells {
            if c.id.is_empty()
                || !c
                    .id
                    .chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || ch == '-' || ch == '_')
            {
                out.push(format!(
                    "cell id {:?} must be non-empty and use only letters, digits, '-' or '_'",
                    c.id
                ));
            }
        }
        if !(self.track.span_days > 0.0) {
            out.push("track.span_days must be positive".into());
        }
        if self.track.max_poses == Some(0) {
            out.push("track.max_poses must be at least 1".into());
        }
        if !(self.downlink.grid_step_m > 0.0) {
            out.push("downlink.grid_step_m must be positive".into());
        }
        if self.uplink.count == 0 {
            out.push("uplink.count must be at least 1".into());
        }
        out
    }
}
