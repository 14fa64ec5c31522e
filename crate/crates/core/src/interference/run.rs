//! Cartesian evaluation of poses × scan orientations × transmitters.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{
    combine_rays, ray_power_dbm, GainModes, InterferenceSample, NetworkScenario, ScenarioKind,
    TransmitterInstance,
};
use crate::antenna::AntennaPattern;
use crate::geometry::Vec3;
use crate::orbit::SatellitePose;
use crate::raytrace::{CaptureSphere, LaunchGrid, RayPath, TraceOptions, Tracer};
use crate::scan::{scan_orientations, ScanOrientation};
use crate::scene::UrbanScene;
use crate::{Error, Result};

/// Supplies captured rays for a transmitter position.
pub trait RaySource: Sync {
    /// Rays from `tx` to each pose of the run, in pose order.
    fn rays(&self, tx: Vec3) -> Result<Vec<Vec<RayPath>>>;
}

/// Traces on demand without caching.
pub struct TracingRaySource<'a> {
    tracer: Tracer<'a>,
    grid: LaunchGrid,
    spheres: Vec<CaptureSphere>,
}

impl<'a> TracingRaySource<'a> {
    pub fn new(
        scene: &'a UrbanScene,
        poses: &[SatellitePose],
        grid: LaunchGrid,
        capture_diameter: f64,
        opts: TraceOptions,
    ) -> Result<Self> {
        grid.validate()?;
        let spheres = poses
            .iter()
            .map(|p| CaptureSphere::new(p.position, capture_diameter))
            .collect::<Result<_>>()?;
        Ok(TracingRaySource {
            tracer: Tracer::new(scene, opts),
            grid,
            spheres,
        })
    }
}

impl RaySource for TracingRaySource<'_> {
    fn rays(&self, tx: Vec3) -> Result<Vec<Vec<RayPath>>> {
        let escapes = self.tracer.escapes(tx, &self.grid)?;
        Ok(self
            .spheres
            .iter()
            .map(|s| self.tracer.capture(&escapes, s))
            .collect())
    }
}

/// Satellite side of an evaluation: poses, their scan orientations, the
/// receive pattern and the atmospheric loss applied to every ray.
pub struct EvaluationContext<'a> {
    pub poses: &'a [SatellitePose],
    pub scans: Vec<Vec<ScanOrientation>>,
    pub rx_pattern: &'a AntennaPattern,
    pub atm_db: f64,
    pub modes: GainModes,
}

impl<'a> EvaluationContext<'a> {
    pub fn new(poses: &'a [SatellitePose], rx_pattern: &'a AntennaPattern, atm_db: f64) -> Self {
        EvaluationContext {
            poses,
            scans: poses.iter().map(scan_orientations).collect(),
            rx_pattern,
            atm_db,
            modes: GainModes::default(),
        }
    }
}

/// Indices of the transmitters a scenario uses.
fn active_transmitters(
    kind: ScenarioKind,
    network: Option<&NetworkScenario>,
    transmitters: &[TransmitterInstance],
) -> Result<Vec<usize>> {
    if let Some(t) = transmitters.iter().find(|t| t.role != kind.role()) {
        return Err(Error::InvalidArgument(format!(
            "{kind} needs {:?} transmitters, got {:?}",
            kind.role(),
            t.role
        )));
    }
    let all = 0..transmitters.len();
    let active: Vec<usize> = match (kind.is_network(), network) {
        (false, _) => all.collect(),
        (true, None) => {
            return Err(Error::InvalidArgument(format!(
                "{kind} needs a network density"
            )))
        }
        (true, Some(n)) => all
            .filter(|&i| transmitters[i].link_ground_range() <= n.r_cell)
            .collect(),
    };
    if active.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{kind}: no transmitter inside the cell radius"
        )));
    }
    Ok(active)
}

fn position_key(p: Vec3) -> [u64; 3] {
    [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]
}

/// Evaluates every (pose, scan orientation, transmitter) triple of a scenario.
///
/// Network kinds keep the transmitters whose link spans at most the
/// density's r_cell and add 10·log10(N). Samples are ordered by pose, then
/// transmitter index, then pixel.
pub fn run_scenario(
    kind: ScenarioKind,
    network: Option<&NetworkScenario>,
    transmitters: &[TransmitterInstance],
    ctx: &EvaluationContext,
    source: &dyn RaySource,
) -> Result<Vec<InterferenceSample>> {
    let active = active_transmitters(kind, network, transmitters)?;
    let mut groups: Vec<(Vec3, Vec<usize>)> = Vec::new();
    let mut by_key: HashMap<[u64; 3], usize> = HashMap::new();
    for &i in &active {
        let p = transmitters[i].position;
        let g = *by_key.entry(position_key(p)).or_insert_with(|| {
            groups.push((p, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(i);
    }

    let per_group: Vec<Vec<InterferenceSample>> = groups
        .par_iter()
        .map(|(pos, members)| -> Result<Vec<InterferenceSample>> {
            let rays = source.rays(*pos)?;
            if rays.len() != ctx.poses.len() {
                return Err(Error::InvalidArgument(format!(
                    "ray source returned {} pose sets for {} poses",
                    rays.len(),
                    ctx.poses.len()
                )));
            }
            let mut out = Vec::with_capacity(members.len() * rays.len() * crate::scan::PIXEL_COUNT);
            for (pose_id, pose_rays) in rays.iter().enumerate() {
                let scans = &ctx.scans[pose_id];
                let losses: Vec<f64> = pose_rays.iter().map(|r| r.total_loss_db()).collect();
                let rx_gain: Vec<Vec<f64>> = scans
                    .iter()
                    .map(|s| {
                        pose_rays
                            .iter()
                            .map(|r| {
                                ctx.rx_pattern
                                    .gain_toward(s.orientation(), r.aoa, ctx.modes.rx)
                            })
                            .collect()
                    })
                    .collect();
                for &ti in members {
                    let tx = &transmitters[ti];
                    let tx_gain: Vec<f64> = pose_rays
                        .iter()
                        .map(|r| tx.pattern.gain_toward(tx.mount, r.aod, ctx.modes.tx))
                        .collect();
                    for (s, g_rx) in scans.iter().zip(&rx_gain) {
                        let combined = combine_rays((0..pose_rays.len()).map(|k| {
                            ray_power_dbm(tx.p_tx_dbm, tx_gain[k], g_rx[k], losses[k], ctx.atm_db)
                        }));
                        out.push(InterferenceSample {
                            pose_id,
                            scan: *s,
                            tx_index: ti,
                            mount: tx.mount,
                            m_rays: pose_rays.len(),
                            power_dbm: combined.map(|(p, _)| p),
                            strongest_aoa: combined.map(|(_, k)| pose_rays[k].aoa),
                        });
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut samples: Vec<InterferenceSample> = per_group.into_iter().flatten().collect();
    samples.sort_by_key(|s| (s.pose_id, s.tx_index, s.scan.pixel_index));
    if let (true, Some(n)) = (kind.is_network(), network) {
        let shift = n.aggregate_gain_db()?;
        for s in &mut samples {
            s.power_dbm = s.power_dbm.map(|p| p + shift);
        }
    }
    Ok(samples)
}
