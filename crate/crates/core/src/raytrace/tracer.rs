use std::collections::BTreeMap;

use rayon::prelude::*;

use super::bvh::Bvh;
use super::faces::{scene_faces, Face, FaceId};
use super::{friis_loss, CaptureSphere, LaunchGrid, RayPath, TraceOptions};
use crate::geometry::{Orientation, Vec3};
use crate::scene::{EcefVector, EnuFrame, UrbanScene};
use crate::{Error, Result};

/// A ray that left the scene upward after at most `max_bounces` reflections.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapedRay {
    pub launch: Orientation,
    /// Last reflection point, or the transmitter for a direct ray.
    pub origin: Vec3,
    /// Unit direction of the final segment.
    pub direction: Vec3,
    /// Reflection points in order.
    pub bounces: Vec<Vec3>,
    /// Index into the tracer's face list per reflection.
    pub faces: Vec<u32>,
    /// Length from the transmitter to `origin`.
    pub path_to_origin: f64,
    pub ground_bounces: u32,
    pub building_loss_db: f64,
}

/// Escaped rays of one transmitter with a coarse direction index.
#[derive(Debug, Clone)]
pub struct EscapeSet {
    pub tx: Vec3,
    pub rays: Vec<EscapedRay>,
    /// 1° cells, row-major by elevation (0..=180) then azimuth (0..360).
    cells: Vec<Vec<u32>>,
}

const CELL_ROWS: usize = 181;
const CELL_COLS: usize = 360;

fn cell_of(o: Orientation) -> (usize, usize) {
    let row = ((o.phi + 90.0).floor() as isize).clamp(0, CELL_ROWS as isize - 1) as usize;
    let col = ((o.theta + 180.0).floor() as isize).rem_euclid(CELL_COLS as isize) as usize;
    (row, col)
}

impl EscapeSet {
    fn new(tx: Vec3, rays: Vec<EscapedRay>) -> Self {
        let mut cells = vec![Vec::new(); CELL_ROWS * CELL_COLS];
        for (i, r) in rays.iter().enumerate() {
            let (row, col) = cell_of(Orientation::from_vector(r.direction));
            cells[row * CELL_COLS + col].push(i as u32);
        }
        EscapeSet { tx, rays, cells }
    }

    /// Indices of rays whose final direction is within roughly `radius_deg`
    /// of `toward`, in launch order. May include extra rays.
    fn candidates(&self, toward: Orientation, radius_deg: f64) -> Vec<u32> {
        let r = radius_deg + 1.0;
        let lo = ((toward.phi - r + 90.0).floor().max(0.0)) as usize;
        let hi = ((toward.phi + r + 90.0).floor().min((CELL_ROWS - 1) as f64)) as usize;
        let worst_lat = (toward.phi.abs() + r).min(90.0);
        let all_cols = worst_lat >= 89.0;
        let half_cols = if all_cols {
            CELL_COLS
        } else {
            ((r / worst_lat.to_radians().cos()).ceil() as usize + 1).min(CELL_COLS)
        };
        let mut out = Vec::new();
        let center = ((toward.theta + 180.0).floor() as isize).rem_euclid(CELL_COLS as isize);
        for row in lo..=hi {
            if all_cols || 2 * half_cols + 1 >= CELL_COLS {
                for col in 0..CELL_COLS {
                    out.extend_from_slice(&self.cells[row * CELL_COLS + col]);
                }
            } else {
                for dc in -(half_cols as isize)..=half_cols as isize {
                    let col = (center + dc).rem_euclid(CELL_COLS as isize) as usize;
                    out.extend_from_slice(&self.cells[row * CELL_COLS + col]);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Scene faces and acceleration structure, shared by every trace.
pub struct Tracer<'a> {
    scene: &'a UrbanScene,
    frame: EnuFrame,
    faces: Vec<Face>,
    bvh: Bvh,
    opts: TraceOptions,
}

impl<'a> Tracer<'a> {
    pub fn new(scene: &'a UrbanScene, opts: TraceOptions) -> Self {
        let faces = scene_faces(scene);
        let bvh = Bvh::build(&faces);
        Tracer {
            scene,
            frame: scene.frame(),
            faces,
            bvh,
            opts,
        }
    }

    pub fn options(&self) -> &TraceOptions {
        &self.opts
    }

    pub fn face_id(&self, index: u32) -> FaceId {
        self.faces[index as usize].id
    }

    /// Follows one launch direction; `None` if the ray is lost.
    fn follow(&self, tx: Vec3, launch: Orientation) -> Option<EscapedRay> {
        let mut o = tx;
        let mut d = launch.unit_vector();
        let mut bounces = Vec::new();
        let mut faces = Vec::new();
        let mut length = 0.0;
        let mut ground = 0;
        let mut building_loss = 0.0;
        let mut last: Option<usize> = None;
        loop {
            match self.bvh.nearest(&self.faces, o, d, last) {
                Some((f, t)) => {
                    if bounces.len() == self.opts.max_bounces {
                        return None;
                    }
                    let face = &self.faces[f];
                    o += d * t;
                    length += t;
                    d = d.reflect(face.normal).normalized();
                    bounces.push(o);
                    faces.push(f as u32);
                    if face.id.is_ground() {
                        ground += 1;
                    } else {
                        building_loss += face.loss_db;
                    }
                    last = Some(f);
                }
                None => {
                    // downward or level rays leave the modelled ground and are lost
                    if d.z <= 0.0 {
                        return None;
                    }
                    return Some(EscapedRay {
                        launch,
                        origin: o,
                        direction: d,
                        bounces,
                        faces,
                        path_to_origin: length,
                        ground_bounces: ground,
                        building_loss_db: building_loss,
                    });
                }
            }
        }
    }

    /// Launches every grid direction from `tx` and keeps the rays that escape.
    /// Output is ordered by launch elevation, then azimuth.
    pub fn escapes(&self, tx: Vec3, grid: &LaunchGrid) -> Result<EscapeSet> {
        grid.validate()?;
        if !tx.is_finite() || !self.scene.ground().contains_xy(tx.x, tx.y) || tx.z < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "transmitter {tx:?} is outside the scene"
            )));
        }
        if self.scene.is_inside_building(tx) {
            return Err(Error::InvalidArgument(format!(
                "transmitter {tx:?} is inside a building"
            )));
        }
        let rows: Vec<Vec<EscapedRay>> = grid
            .elevations()
            .into_par_iter()
            .map(|el| {
                grid.azimuths(el)
                    .into_iter()
                    .filter_map(|az| self.follow(tx, Orientation::new(az, el)))
                    .collect()
            })
            .collect();
        Ok(EscapeSet::new(tx, rows.into_iter().flatten().collect()))
    }

    /// Selects and de-duplicates the escaped rays reaching one capture sphere.
    pub fn capture(&self, set: &EscapeSet, sphere: &CaptureSphere) -> Vec<RayPath> {
        let sat = self.frame.point_to_enu(&sphere.center);
        let earth = self.frame.point_to_enu(&EcefVector::default());
        let shell = sat.distance(earth);
        let radius = sphere.diameter / 2.0;
        let to_sat = sat - set.tx;
        let range = to_sat.norm();
        let cone = (radius / range).min(1.0).asin().to_degrees();

        let mut hits = Vec::new();
        for i in set.candidates(Orientation::from_vector(to_sat), cone) {
            let r = &set.rays[i as usize];
            let rel = r.origin - earth;
            let b = r.direction.dot(rel);
            let c = rel.norm_squared() - shell * shell;
            let disc = b * b - c;
            if disc < 0.0 {
                continue;
            }
            let t = -b + disc.sqrt();
            if t <= 0.0 {
                continue;
            }
            let hit = r.origin + r.direction * t;
            if hit.distance(sat) <= radius {
                hits.push(i);
            }
        }

        // one ray per face sequence: the one launched closest to the exact
        // specular direction
        let mut best: BTreeMap<&[u32], (f64, u32)> = BTreeMap::new();
        for &i in &hits {
            let r = &set.rays[i as usize];
            let ideal = self.image_direction(set.tx, &r.faces, sat);
            let miss = r.launch.unit_vector().angle_deg(ideal);
            best.entry(&r.faces[..])
                .and_modify(|e| {
                    if miss < e.0 {
                        *e = (miss, i);
                    }
                })
                .or_insert((miss, i));
        }
        let mut keep: Vec<u32> = best.values().map(|&(_, i)| i).collect();
        keep.sort_unstable();

        let sat_frame = EnuFrame::at(&crate::scene::ecef_to_geodetic(&sphere.center));
        keep.into_iter()
            .map(|i| {
                let r = &set.rays[i as usize];
                let path_length = r.path_to_origin + r.origin.distance(sat);
                let arrival = self.frame.direction_to_ecef(-r.direction);
                let mut vertices = Vec::with_capacity(r.bounces.len() + 2);
                vertices.push(set.tx);
                vertices.extend_from_slice(&r.bounces);
                vertices.push(sat);
                RayPath {
                    aod: r.launch,
                    aoa: Orientation::from_vector(sat_frame.direction_to_enu(arrival)),
                    bounce_count: r.bounces.len(),
                    path_length,
                    l_fs: friis_loss(path_length, self.opts.frequency_hz),
                    l_gl: f64::from(r.ground_bounces) * self.scene.ground_reflection_loss_db(),
                    l_bl: r.building_loss_db,
                    vertices,
                    faces: self.face_ids(&r.faces),
                }
            })
            .collect()
    }

    /// Launch direction of the exact specular path through `faces` toward
    /// `target`, from the image of the target.
    fn image_direction(&self, tx: Vec3, faces: &[u32], target: Vec3) -> Vec3 {
        let mut img = target;
        for &f in faces.iter().rev() {
            img = self.faces[f as usize].mirror(img);
        }
        (img - tx).normalized()
    }

    /// Exact specular path from `from` to `to` reflecting off `faces` in
    /// order, built by the image method. `None` if any reflection point falls
    /// off its face or a segment is blocked.
    pub fn specular_path(&self, from: Vec3, faces: &[FaceId], to: Vec3) -> Option<Vec<Vec3>> {
        let idx: Vec<usize> = faces
            .iter()
            .map(|id| self.faces.iter().position(|f| f.id == *id))
            .collect::<Option<_>>()?;
        // images of the source through each successive face
        let mut images = vec![from];
        for &f in &idx {
            let prev = *images.last().unwrap();
            images.push(self.faces[f].mirror(prev));
        }
        let mut points = vec![to];
        let mut target = to;
        for k in (0..idx.len()).rev() {
            let face = &self.faces[idx[k]];
            let src = images[k + 1];
            let d = target - src;
            let dn = d.dot(face.normal);
            if dn.abs() < 1e-12 {
                return None;
            }
            let t = (face.anchor - src).dot(face.normal) / dn;
            if !(0.0..=1.0).contains(&t) {
                return None;
            }
            let p = src + d * t;
            if !face.contains_planar(p) {
                return None;
            }
            points.push(p);
            target = p;
        }
        points.push(from);
        points.reverse();
        // every segment must be clear apart from its own end faces
        for (k, w) in points.windows(2).enumerate() {
            let mut skip = Vec::new();
            if k > 0 {
                skip.push(idx[k - 1]);
            }
            if k < idx.len() {
                skip.push(idx[k]);
            }
            let seg = w[1] - w[0];
            let len = seg.norm();
            if self.bvh.occluded(&self.faces, w[0], seg / len, len, &skip) {
                return None;
            }
        }
        Some(points)
    }

    /// Face identifiers for a sequence of face indices.
    pub fn face_ids(&self, faces: &[u32]) -> Vec<FaceId> {
        faces.iter().map(|&f| self.face_id(f)).collect()
    }
}
