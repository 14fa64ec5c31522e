//! Transmitter orientation sets for one cell.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CellSite, Role, TransmitterInstance, UE_HEIGHT_M};
use crate::antenna::AntennaPattern;
use crate::geometry::{Orientation, Vec3};
use crate::scene::UrbanScene;
use crate::{Error, Result};

/// Rejection budget per requested UE position.
pub const MAX_DRAWS_PER_UE: usize = 1000;

fn usable_ue_point(site: &CellSite, scene: &UrbanScene, p: Vec3) -> bool {
    scene.ground().contains_xy(p.x, p.y)
        && !scene.is_inside_building(p)
        && scene.los_clear(site.bs_position, p)
}

/// UE points on a square grid of `step` meters centered under the BS,
/// within r_cell and in line of sight of the BS. Row-major by y then x.
fn downlink_ue_points(site: &CellSite, scene: &UrbanScene, step: f64) -> Result<Vec<Vec3>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive, got {step}"
        )));
    }
    let bs = site.bs_position;
    let n = (site.r_cell / step).floor() as i64;
    let r2 = site.r_cell * site.r_cell;
    let mut out = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            let (dx, dy) = (i as f64 * step, j as f64 * step);
            if dx * dx + dy * dy > r2 {
                continue;
            }
            let p = Vec3::new(bs.x + dx, bs.y + dy, UE_HEIGHT_M);
            if usable_ue_point(site, scene, p) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// BS mount orientations toward every LOS grid point in the cell.
pub fn downlink_orientation_set(
    site: &CellSite,
    scene: &UrbanScene,
    step: f64,
) -> Result<Vec<Orientation>> {
    Ok(downlink_ue_points(site, scene, step)?
        .into_iter()
        .map(|p| Orientation::from_vector(p - site.bs_position))
        .collect())
}

/// Downlink transmitters: the BS beamformed toward each LOS grid point.
pub fn downlink_transmitters(
    site: &CellSite,
    scene: &UrbanScene,
    step: f64,
    pattern: Arc<AntennaPattern>,
) -> Result<Vec<TransmitterInstance>> {
    Ok(downlink_ue_points(site, scene, step)?
        .into_iter()
        .map(|p| {
            TransmitterInstance::pointed(Role::Downlink, site.bs_position, p, Arc::clone(&pattern))
        })
        .collect())
}

/// `count` LOS UE positions drawn uniformly over the cell disc, each pointed
/// at the BS. Deterministic for a given seed.
pub fn uplink_transmitter_set(
    site: &CellSite,
    scene: &UrbanScene,
    count: usize,
    seed: u64,
    pattern: Arc<AntennaPattern>,
) -> Result<Vec<TransmitterInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = count.saturating_mul(MAX_DRAWS_PER_UE);
    let bs = site.bs_position;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == budget {
            return Err(Error::InsufficientLineOfSight {
                found: out.len(),
                wanted: count,
                attempts,
            });
        }
        attempts += 1;
        let r = site.r_cell * rng.gen::<f64>().sqrt();
        let a = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = Vec3::new(bs.x + r * a.cos(), bs.y + r * a.sin(), UE_HEIGHT_M);
        if usable_ue_point(site, scene, p) {
            out.push(TransmitterInstance::pointed(
                Role::Uplink,
                p,
                bs,
                Arc::clone(&pattern),
            ));
        }
    }
    Ok(out)
}
