//! End-to-end run: scene → orbit → scan → trace → interference → risk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::Duration;
use coexist_core::antenna::{load_reflector_pattern, synthesize_ura, AntennaPattern, UraSpec};
use coexist_core::atmosphere::{load_atmosphere_table, AtmosphereTable, ScintillationExponent};
use coexist_core::geometry::Vec3;
use coexist_core::interference::{
    downlink_transmitters, run_scenario, uplink_transmitter_set, write_samples_csv, CellSite,
    EvaluationContext, GainModes, NetworkScenario, Role, ScenarioKind, TransmitterInstance,
};
use coexist_core::orbit::{
    load_tle, make_propagator, sample_track_in_area, write_poses_csv, SatellitePose,
    SpaceStudyArea, TrackOptions, TwoLineElements,
};
use coexist_core::raytrace::{LaunchGrid, TraceOptions};
use coexist_core::risk::{
    ccdf, exceedance_of, misalignment_map, position_heatmap, write_ccdf_csv, write_exceedance_csv,
    write_heatmap_csv, write_misalignment_csv, ExceedanceRow, ThresholdSet,
};
use coexist_core::scene::{load_scene, GeodeticPoint, UrbanScene};
use serde::Serialize;

use crate::cache::{sha256_hex, write_atomic, CachedRaySource};
use crate::config::RunConfig;

/// Everything loaded from the config before any tracing.
pub struct Prepared {
    pub config: RunConfig,
    pub scene: UrbanScene,
    pub tle: TwoLineElements,
    pub atmosphere: AtmosphereTable,
    pub poses: Vec<SatellitePose>,
    pub bs_pattern: Arc<AntennaPattern>,
    pub ue_pattern: Arc<AntennaPattern>,
    pub rx_pattern: AntennaPattern,
    pub thresholds: ThresholdSet,
    pub fixtures: BTreeMap<&'static str, String>,
}

/// Transmitter sets of one cell, with the run's power offset applied.
pub struct CellTransmitters {
    pub site: CellSite,
    pub downlink: Vec<TransmitterInstance>,
    pub uplink: Vec<TransmitterInstance>,
}

/// `k` indices spread evenly over `0..n`, first and last included.
pub fn spread_indices(n: usize, k: usize) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    if k == 1 {
        return vec![0];
    }
    (0..k)
        .map(|i| (i * (n - 1) + (k - 1) / 2) / (k - 1))
        .collect()
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

pub fn ura_spec(config: &RunConfig, n: usize) -> UraSpec {
    UraSpec {
        element_spacing: config.antenna.element_spacing,
        element_exponents: (
            config.antenna.element_exponents[0],
            config.antenna.element_exponents[1],
        ),
        frequency_hz: config.trace.frequency_hz,
        ..UraSpec::square(n)
    }
}

pub fn sample_poses(
    config: &RunConfig,
    scene: &UrbanScene,
    tle: &TwoLineElements,
) -> Result<Vec<SatellitePose>> {
    let origin = scene.origin();
    let center = GeodeticPoint::new(
        config.area.center_lat.unwrap_or(origin.latitude),
        config.area.center_lon.unwrap_or(origin.longitude),
        0.0,
    )?;
    let area = SpaceStudyArea::new(center, config.area.side_m)?;
    let prop = make_propagator(tle, config.track.propagator)?;
    let span = Duration::milliseconds((config.track.span_days * 86_400_000.0).round() as i64);
    let opts = TrackOptions {
        spacing_m: config.track.spacing_m,
        altitude_band_m: (
            config.track.altitude_band_km[0] * 1e3,
            config.track.altitude_band_km[1] * 1e3,
        ),
        ..TrackOptions::new(config.track.start.unwrap_or(tle.epoch), span)
    };
    let all = sample_track_in_area(prop.as_ref(), &area, &opts)?;
    if all.is_empty() {
        bail!(
            "no pass of {} crosses the space study area during the span",
            tle.name.as_deref().unwrap_or("the satellite")
        );
    }
    Ok(match config.track.max_poses {
        Some(k) => spread_indices(all.len(), k)
            .into_iter()
            .map(|i| all[i])
            .collect(),
        None => all,
    })
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let findings = config.findings();
    if !findings.is_empty() {
        bail!("invalid config:\n  {}", findings.join("\n  "));
    }
    let paths = [
        ("scene", config.resolve(&config.scene)),
        ("tle", config.resolve(&config.tle)),
        ("atmosphere", config.resolve(&config.atmosphere)),
        ("reflector", config.resolve(&config.reflector)),
    ];
    let mut fixtures = BTreeMap::new();
    for (name, p) in &paths {
        fixtures.insert(*name, file_hash(p)?);
    }
    let scene = load_scene(&paths[0].1)?;
    let tle = load_tle(&paths[1].1)?;
    let exponent = ScintillationExponent::from_int(config.scintillation_exponent)?;
    let atmosphere = load_atmosphere_table(&paths[2].1, exponent)?;
    let rx_pattern = load_reflector_pattern(&paths[3].1)?;
    let poses = sample_poses(config, &scene, &tle)?;
    let bs_pattern = Arc::new(synthesize_ura(&ura_spec(
        config,
        config.antenna.bs_elements,
    ))?);
    let ue_pattern = Arc::new(synthesize_ura(&ura_spec(
        config,
        config.antenna.ue_elements,
    ))?);
    Ok(Prepared {
        config: config.clone(),
        scene,
        tle,
        atmosphere,
        poses,
        bs_pattern,
        ue_pattern,
        rx_pattern,
        thresholds: ThresholdSet::default(),
        fixtures,
    })
}

impl Prepared {
    pub fn launch_grid(&self) -> LaunchGrid {
        self.config.launch.launch_grid()
    }

    pub fn trace_options(&self) -> TraceOptions {
        TraceOptions {
            max_bounces: self.config.trace.max_bounces,
            frequency_hz: self.config.trace.frequency_hz,
        }
    }

    pub fn ray_source(&self) -> Result<CachedRaySource<'_>> {
        Ok(CachedRaySource::new(
            &self.scene,
            &self.poses,
            self.launch_grid(),
            self.config.trace.capture_diameter_m,
            self.trace_options(),
            self.config.cache_dir()?,
        )?)
    }

    fn roles(&self) -> (bool, bool) {
        let s = &self.config.scenarios;
        (
            s.iter().any(|k| k.role() == Role::Downlink),
            s.iter().any(|k| k.role() == Role::Uplink),
        )
    }

    /// Builds the requested transmitter sets of every cell. UE draws use
    /// `seed + cell index`.
    pub fn transmitters(&self) -> Result<Vec<CellTransmitters>> {
        let (dl, ul) = self.roles();
        let offset = self.config.ptx_offset_db;
        self.config
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let site = CellSite::with_height(&c.id, c.x, c.y, c.bs_height_m, c.r_cell)?;
                let bs = site.bs_position;
                if !self.scene.ground().contains_xy(bs.x, bs.y) || self.scene.is_inside_building(bs)
                {
                    bail!(
                        "cell {}: base station is outside the ground or inside a building",
                        c.id
                    );
                }
                let downlink = if dl {
                    downlink_transmitters(
                        &site,
                        &self.scene,
                        self.config.downlink.grid_step_m,
                        Arc::clone(&self.bs_pattern),
                    )?
                } else {
                    Vec::new()
                };
                let uplink = if ul {
                    let seed = self.config.seed.wrapping_add(i as u64);
                    uplink_transmitter_set(
                        &site,
                        &self.scene,
                        self.config.uplink.count,
                        seed,
                        Arc::clone(&self.ue_pattern),
                    )
                    .with_context(|| format!("cell {}", c.id))?
                } else {
                    Vec::new()
                };
                if dl && downlink.is_empty() {
                    bail!(
                        "cell {}: no line-of-sight UE grid point inside the cell",
                        c.id
                    );
                }
                let shift = |v: Vec<TransmitterInstance>| {
                    v.into_iter().map(|t| t.with_ptx_offset(offset)).collect()
                };
                Ok(CellTransmitters {
                    site,
                    downlink: shift(downlink),
                    uplink: shift(uplink),
                })
            })
            .collect()
    }

    pub fn networks(&self) -> Result<Vec<NetworkScenario>> {
        Ok(self
            .config
            .densities
            .iter()
            .map(|&d| NetworkScenario::new(d, self.config.network_area_km2))
            .collect::<coexist_core::Result<_>>()?)
    }
}

/// Distinct transmitter positions of all cells, in first-seen order.
pub fn unique_positions(cells: &[CellTransmitters]) -> Vec<Vec3> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for c in cells {
        for t in c.downlink.iter().chain(&c.uplink) {
            if seen.insert([
                t.position.x.to_bits(),
                t.position.y.to_bits(),
                t.position.z.to_bits(),
            ]) {
                out.push(t.position);
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct AntennaSummary {
    name: String,
    peak_dbi: f64,
    hpbw_deg: f64,
}

#[derive(Debug, Serialize)]
struct CellSummary {
    id: String,
    bs_position: Vec3,
    r_cell: f64,
    downlink_transmitters: usize,
    uplink_transmitters: usize,
}

#[derive(Debug, Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    fixtures: &'a BTreeMap<&'static str, String>,
    satellite: Option<String>,
    launch_grid: LaunchGrid,
    pose_count: usize,
    thresholds: ThresholdSet,
    antennas: Vec<AntennaSummary>,
    atmosphere_db: Vec<(f64, f64)>,
    networks: Vec<NetworkScenario>,
    cells: Vec<CellSummary>,
    outputs: Vec<OutputEntry>,
}

/// Manifest of a prepared run; `outputs` is filled by [`run`].
pub fn manifest<'a>(p: &'a Prepared, cells: &[CellTransmitters]) -> Result<Manifest<'a>> {
    let antennas = [p.bs_pattern.as_ref(), p.ue_pattern.as_ref(), &p.rx_pattern]
        .into_iter()
        .map(|a| AntennaSummary {
            name: a.name().to_string(),
            peak_dbi: a.peak_gain(),
            hpbw_deg: a.hpbw_azimuth(),
        })
        .collect();
    Ok(Manifest {
        tool: "coexist",
        version: env!("CARGO_PKG_VERSION"),
        config: &p.config,
        fixtures: &p.fixtures,
        satellite: p.tle.name.clone(),
        launch_grid: p.launch_grid(),
        pose_count: p.poses.len(),
        thresholds: p.thresholds,
        antennas,
        atmosphere_db: p
            .config
            .p_percent
            .iter()
            .map(|&x| Ok((x, p.atmosphere.l_atm(x)?)))
            .collect::<coexist_core::Result<_>>()?,
        networks: if p.config.scenarios.iter().any(|k| k.is_network()) {
            p.networks()?
        } else {
            Vec::new()
        },
        cells: cells
            .iter()
            .map(|c| CellSummary {
                id: c.site.id.clone(),
                bs_position: c.site.bs_position,
                r_cell: c.site.r_cell,
                downlink_transmitters: c.downlink.len(),
                uplink_transmitters: c.uplink.len(),
            })
            .collect(),
        outputs: Vec::new(),
    })
}

impl Manifest<'_> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// Writes through a temporary file and records the final name and hash.
struct Emitter {
    dir: PathBuf,
    written: Vec<OutputEntry>,
}

impl Emitter {
    fn emit(
        &mut self,
        name: &str,
        write: impl FnOnce(&Path) -> coexist_core::Result<()>,
    ) -> Result<()> {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        write(&tmp).with_context(|| format!("writing {name}"))?;
        let bytes = std::fs::read(&tmp)?;
        std::fs::rename(&tmp, self.dir.join(name))?;
        self.written.push(OutputEntry {
            file: name.to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }
}

pub fn scenario_tag(kind: ScenarioKind, cell: &str, network: Option<&NetworkScenario>) -> String {
    match network {
        Some(n) => format!("{kind}_{cell}_d{}", n.density),
        None => format!("{kind}_{cell}"),
    }
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub poses: usize,
    pub files: Vec<String>,
    pub cache: (usize, usize, usize),
}

pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let out = config.output_dir()?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let p = prepare(config)?;
    let cells = p.transmitters()?;
    let networks = p.networks()?;
    let source = p.ray_source()?;
    let modes = GainModes {
        tx: config.antenna.tx_gain_mode,
        rx: config.antenna.rx_gain_mode,
    };
    let mut em = Emitter {
        dir: out.clone(),
        written: Vec::new(),
    };
    em.emit("poses.csv", |path| write_poses_csv(path, &p.poses))?;

    for &pct in &config.p_percent {
        let atm = p.atmosphere.l_atm(pct)?;
        let mut ctx = EvaluationContext::new(&p.poses, &p.rx_pattern, atm);
        ctx.modes = modes;
        let mut rows = Vec::new();
        for cell in &cells {
            for &kind in &config.scenarios {
                let txs = match kind.role() {
                    Role::Downlink => &cell.downlink,
                    Role::Uplink => &cell.uplink,
                };
                let variants: Vec<Option<&NetworkScenario>> = if kind.is_network() {
                    networks.iter().map(Some).collect()
                } else {
                    vec![None]
                };
                for net in variants {
                    let samples = run_scenario(kind, net, txs, &ctx, &source)
                        .with_context(|| format!("{kind} for cell {}", cell.site.id))?;
                    let tag = scenario_tag(kind, &cell.site.id, net);
                    let suffix = format!("{tag}_p{pct}.csv");
                    if config.write_samples {
                        em.emit(&format!("samples_{suffix}"), |path| {
                            write_samples_csv(path, &tag, &samples)
                        })?;
                    }
                    let curve = ccdf(&samples)?;
                    em.emit(&format!("ccdf_{suffix}"), |path| {
                        write_ccdf_csv(path, &curve)
                    })?;
                    let heat = position_heatmap(&samples, &p.poses, &p.thresholds);
                    em.emit(&format!("heatmap_{suffix}"), |path| {
                        write_heatmap_csv(path, &heat)
                    })?;
                    let mis = misalignment_map(&samples, &p.poses);
                    em.emit(&format!("misalignment_{suffix}"), |path| {
                        write_misalignment_csv(path, &mis)
                    })?;
                    for (_, gamma) in p.thresholds.gammas() {
                        let e = exceedance_of(&curve, gamma);
                        rows.push(ExceedanceRow {
                            scenario: kind.to_string(),
                            cell: cell.site.id.clone(),
                            density: net.map(|n| n.density),
                            p: pct,
                            gamma,
                            percent: e.percent,
                            harmful: e.harmful,
                        });
                    }
                }
            }
        }
        em.emit(&format!("exceedance_p{pct}.csv"), |path| {
            write_exceedance_csv(path, &rows)
        })?;
    }

    let mut m = manifest(&p, &cells)?;
    m.outputs = std::mem::take(&mut em.written);
    let files = m
        .outputs
        .iter()
        .map(|o| o.file.clone())
        .chain(["manifest.json".to_string()])
        .collect();
    write_atomic(&out.join("manifest.json"), m.to_json().as_bytes())?;
    Ok(RunSummary {
        poses: p.poses.len(),
        files,
        cache: source.stats.snapshot(),
    })
}

#[derive(Debug, Default)]
pub struct TraceSummary {
    pub transmitters: usize,
    pub poses: usize,
    pub cache: (usize, usize, usize),
}

/// Fills the ray cache for every transmitter position of the run.
pub fn trace(config: &RunConfig) -> Result<TraceSummary> {
    let p = prepare(config)?;
    let cells = p.transmitters()?;
    let source = p.ray_source()?;
    let positions = unique_positions(&cells);
    for tx in &positions {
        source.load_or_trace(*tx)?;
    }
    Ok(TraceSummary {
        transmitters: positions.len(),
        poses: p.poses.len(),
        cache: source.stats.snapshot(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_keeps_ends() {
        assert_eq!(spread_indices(5, 10), vec![0, 1, 2, 3, 4]);
        assert_eq!(spread_indices(100, 1), vec![0]);
        assert_eq!(spread_indices(100, 2), vec![0, 99]);
        let s = spread_indices(101, 5);
        assert_eq!(s, vec![0, 25, 50, 75, 100]);
        assert!(spread_indices(1000, 37).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tags() {
        let n = NetworkScenario::new(25.0, 60.0).unwrap();
        assert_eq!(
            scenario_tag(ScenarioKind::NetworkDl, "cell1", Some(&n)),
            "network_dl_cell1_d25"
        );
        assert_eq!(
            scenario_tag(ScenarioKind::SingleUl, "c", None),
            "single_ul_c"
        );
    }
}
