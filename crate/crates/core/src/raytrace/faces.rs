//! Reflecting surfaces of a scene and ray–face intersection.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::scene::{point_in_polygon, UrbanScene};

/// Identifies one planar reflecting surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceId {
    Ground,
    Wall { building: u32, edge: u32 },
    Roof { building: u32 },
}

impl FaceId {
    pub fn is_ground(self) -> bool {
        matches!(self, FaceId::Ground)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum FaceGeom {
    Ground {
        min: [f64; 2],
        max: [f64; 2],
    },
    Wall {
        p: [f64; 2],
        q: [f64; 2],
        height: f64,
    },
    Roof {
        footprint: Vec<[f64; 2]>,
        height: f64,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Face {
    pub id: FaceId,
    pub geom: FaceGeom,
    pub normal: Vec3,
    /// A point on the face plane.
    pub anchor: Vec3,
    pub loss_db: f64,
    pub bbox: (Vec3, Vec3),
}

impl Face {
    /// Distance along a unit ray to this face, if hit beyond `t_min`.
    pub fn intersect(&self, o: Vec3, d: Vec3, t_min: f64) -> Option<f64> {
        match &self.geom {
            FaceGeom::Ground { min, max } => {
                if d.z >= 0.0 {
                    return None;
                }
                let t = -o.z / d.z;
                if t <= t_min {
                    return None;
                }
                let (x, y) = (o.x + t * d.x, o.y + t * d.y);
                (x >= min[0] && x <= max[0] && y >= min[1] && y <= max[1]).then_some(t)
            }
            FaceGeom::Wall { p, q, height } => {
                let dn = d.dot(self.normal);
                if dn.abs() < 1e-12 {
                    return None;
                }
                let t = (self.anchor - o).dot(self.normal) / dn;
                if t <= t_min {
                    return None;
                }
                let x = o + d * t;
                if x.z < 0.0 || x.z > *height {
                    return None;
                }
                let e = [q[0] - p[0], q[1] - p[1]];
                let s = ((x.x - p[0]) * e[0] + (x.y - p[1]) * e[1]) / (e[0] * e[0] + e[1] * e[1]);
                (0.0..=1.0).contains(&s).then_some(t)
            }
            FaceGeom::Roof { footprint, height } => {
                if d.z.abs() < 1e-15 {
                    return None;
                }
                let t = (height - o.z) / d.z;
                if t <= t_min {
                    return None;
                }
                let x = o + d * t;
                point_in_polygon(footprint, x.x, x.y).then_some(t)
            }
        }
    }

    /// Mirror image of a point across the face plane.
    pub fn mirror(&self, p: Vec3) -> Vec3 {
        p - self.normal * (2.0 * (p - self.anchor).dot(self.normal))
    }

    /// Whether a point on the face plane lies within the face bounds.
    pub fn contains_planar(&self, x: Vec3) -> bool {
        const EPS: f64 = 1e-6;
        match &self.geom {
            FaceGeom::Ground { min, max } => {
                x.x >= min[0] - EPS
                    && x.x <= max[0] + EPS
                    && x.y >= min[1] - EPS
                    && x.y <= max[1] + EPS
            }
            FaceGeom::Wall { p, q, height } => {
                let e = [q[0] - p[0], q[1] - p[1]];
                let s = ((x.x - p[0]) * e[0] + (x.y - p[1]) * e[1]) / (e[0] * e[0] + e[1] * e[1]);
                (-EPS..=1.0 + EPS).contains(&s) && x.z >= -EPS && x.z <= height + EPS
            }
            FaceGeom::Roof { footprint, .. } => point_in_polygon(footprint, x.x, x.y),
        }
    }
}

/// Ground, every wall and every roof of a scene.
pub(crate) fn scene_faces(scene: &UrbanScene) -> Vec<Face> {
    let g = scene.ground();
    let mut faces = vec![Face {
        id: FaceId::Ground,
        geom: FaceGeom::Ground {
            min: [g.x_min, g.y_min],
            max: [g.x_max, g.y_max],
        },
        normal: Vec3::new(0.0, 0.0, 1.0),
        anchor: Vec3::ZERO,
        loss_db: scene.ground_reflection_loss_db(),
        bbox: (
            Vec3::new(g.x_min, g.y_min, 0.0),
            Vec3::new(g.x_max, g.y_max, 0.0),
        ),
    }];
    for (bi, b) in scene.buildings().iter().enumerate() {
        let h = b.height();
        for (ei, (p, q)) in b.edges().enumerate() {
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            // footprints are counterclockwise, so the outward normal is on the right
            let normal = Vec3::new(dy, -dx, 0.0).normalized();
            faces.push(Face {
                id: FaceId::Wall {
                    building: bi as u32,
                    edge: ei as u32,
                },
                geom: FaceGeom::Wall { p, q, height: h },
                normal,
                anchor: Vec3::new(p[0], p[1], 0.0),
                loss_db: b.reflection_loss_db(),
                bbox: (
                    Vec3::new(p[0].min(q[0]), p[1].min(q[1]), 0.0),
                    Vec3::new(p[0].max(q[0]), p[1].max(q[1]), h),
                ),
            });
        }
        let (lo, hi) = b.bounds();
        faces.push(Face {
            id: FaceId::Roof {
                building: bi as u32,
            },
            geom: FaceGeom::Roof {
                footprint: b.footprint().to_vec(),
                height: h,
            },
            normal: Vec3::new(0.0, 0.0, 1.0),
            anchor: Vec3::new(0.0, 0.0, h),
            loss_db: b.reflection_loss_db(),
            bbox: (Vec3::new(lo[0], lo[1], h), Vec3::new(hi[0], hi[1], h)),
        });
    }
    faces
}
