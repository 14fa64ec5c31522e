//! Urban scene: vertical building prisms on a flat ground plane in a local
//! east-north-up frame anchored at a geodetic origin.

mod geodesy;
mod los;
mod polygon;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use geodesy::{
    ecef_to_geodetic, geodetic_to_ecef, ground_distance, EcefVector, EnuFrame, GeodeticPoint,
    WGS84_A, WGS84_B, WGS84_F,
};
pub use los::los_clear;
pub use polygon::{point_in_polygon, segments_intersect, signed_area};

use crate::geometry::Vec3;
use crate::{Error, Result};

pub const DEFAULT_BUILDING_LOSS_DB: f64 = 3.0;
pub const DEFAULT_GROUND_LOSS_DB: f64 = 4.7;

/// A vertical prism with a flat reflective roof.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingPrism {
    footprint: Vec<[f64; 2]>,
    height: f64,
    reflection_loss_db: f64,
    bounds: ([f64; 2], [f64; 2]),
}

impl BuildingPrism {
    /// Builds a prism, normalizing the footprint to counterclockwise order.
    pub fn new(footprint: Vec<[f64; 2]>, height: f64, reflection_loss_db: f64) -> Result<Self> {
        Self::check(&footprint, height, reflection_loss_db)
            .map_err(|reason| Error::InvalidBuilding { index: 0, reason })?;
        let mut footprint = footprint;
        if signed_area(&footprint) < 0.0 {
            footprint.reverse();
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &footprint {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Ok(BuildingPrism {
            footprint,
            height,
            reflection_loss_db,
            bounds: (lo, hi),
        })
    }

    fn check(footprint: &[[f64; 2]], height: f64, loss: f64) -> std::result::Result<(), String> {
        if footprint.len() < 3 {
            return Err(format!(
                "footprint has {} vertices, need at least 3",
                footprint.len()
            ));
        }
        if footprint
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err("footprint has non-finite coordinates".into());
        }
        if !(height > 0.0) || !height.is_finite() {
            return Err(format!("height {height} must be positive"));
        }
        if !(loss >= 0.0) {
            return Err(format!("reflection loss {loss} dB must be non-negative"));
        }
        if signed_area(footprint).abs() < 1e-9 {
            return Err("footprint is degenerate (zero area)".into());
        }
        if !polygon::is_simple(footprint) {
            return Err("footprint is self-intersecting".into());
        }
        Ok(())
    }

    /// Counterclockwise footprint vertices, local east-north meters.
    pub fn footprint(&self) -> &[[f64; 2]] {
        &self.footprint
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn reflection_loss_db(&self) -> f64 {
        self.reflection_loss_db
    }

    /// Footprint bounding box as (min, max) corners.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        self.bounds
    }

    /// Whether an east-north point lies strictly inside the footprint.
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        let (lo, hi) = self.bounds;
        x > lo[0] && x < hi[0] && y > lo[1] && y < hi[1] && point_in_polygon(&self.footprint, x, y)
    }

    /// Whether a point lies strictly inside the prism volume.
    pub fn contains(&self, p: Vec3) -> bool {
        p.z > 0.0 && p.z < self.height && self.contains_xy(p.x, p.y)
    }

    /// Footprint edges as (start, end) pairs in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.footprint.len();
        (0..n).map(move |i| (self.footprint[i], self.footprint[(i + 1) % n]))
    }
}

/// Axis-aligned ground rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundExtent {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl GroundExtent {
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn depth(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// The ray-tracing world. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct UrbanScene {
    buildings: Vec<BuildingPrism>,
    ground: GroundExtent,
    ground_reflection_loss_db: f64,
    origin: GeodeticPoint,
}

impl UrbanScene {
    pub fn new(
        buildings: Vec<BuildingPrism>,
        ground: GroundExtent,
        ground_reflection_loss_db: f64,
        origin: GeodeticPoint,
    ) -> Result<Self> {
        origin.validate()?;
        if !(ground.x_max > ground.x_min && ground.y_max > ground.y_min) {
            return Err(Error::InvalidScene(format!(
                "ground extent {ground:?} is empty"
            )));
        }
        if !(ground_reflection_loss_db >= 0.0) {
            return Err(Error::InvalidScene(format!(
                "ground reflection loss {ground_reflection_loss_db} dB must be non-negative"
            )));
        }
        for (index, b) in buildings.iter().enumerate() {
            if b.footprint.iter().any(|p| !ground.contains_xy(p[0], p[1])) {
                return Err(Error::InvalidBuilding {
                    index,
                    reason: "footprint extends outside the ground extent".into(),
                });
            }
        }
        Ok(UrbanScene {
            buildings,
            ground,
            ground_reflection_loss_db,
            origin,
        })
    }

    pub fn buildings(&self) -> &[BuildingPrism] {
        &self.buildings
    }

    pub fn ground(&self) -> &GroundExtent {
        &self.ground
    }

    pub fn ground_reflection_loss_db(&self) -> f64 {
        self.ground_reflection_loss_db
    }

    pub fn origin(&self) -> &GeodeticPoint {
        &self.origin
    }

    pub fn frame(&self) -> EnuFrame {
        EnuFrame::at(&self.origin)
    }

    /// Whether a point is inside any building volume.
    pub fn is_inside_building(&self, p: Vec3) -> bool {
        self.buildings.iter().any(|b| b.contains(p))
    }

    pub fn los_clear(&self, a: Vec3, b: Vec3) -> bool {
        los_clear(a, b, self)
    }

    pub fn max_building_height(&self) -> f64 {
        self.buildings.iter().map(|b| b.height).fold(0.0, f64::max)
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            origin: OriginSpec {
                lat: self.origin.latitude,
                lon: self.origin.longitude,
            },
            ground: GroundSpec {
                x_min: self.ground.x_min,
                y_min: self.ground.y_min,
                x_max: self.ground.x_max,
                y_max: self.ground.y_max,
                reflection_loss_db: self.ground_reflection_loss_db,
            },
            buildings: self
                .buildings
                .iter()
                .map(|b| BuildingSpec {
                    footprint: b.footprint.clone(),
                    height_m: b.height,
                    reflection_loss_db: b.reflection_loss_db,
                })
                .collect(),
        }
    }
}

/// On-disk scene representation (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub origin: OriginSpec,
    pub ground: GroundSpec,
    #[serde(default)]
    pub buildings: Vec<BuildingSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginSpec {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSpec {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    #[serde(default = "default_ground_loss")]
    pub reflection_loss_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingSpec {
    pub footprint: Vec<[f64; 2]>,
    pub height_m: f64,
    #[serde(default = "default_building_loss")]
    pub reflection_loss_db: f64,
}

fn default_ground_loss() -> f64 {
    DEFAULT_GROUND_LOSS_DB
}

fn default_building_loss() -> f64 {
    DEFAULT_BUILDING_LOSS_DB
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("scene file", e))
    }

    /// Validates every invariant and builds the scene. The first offending
    /// building is reported by index.
    pub fn into_scene(self) -> Result<UrbanScene> {
        let origin = GeodeticPoint::new(self.origin.lat, self.origin.lon, 0.0)?;
        let mut buildings = Vec::with_capacity(self.buildings.len());
        for (index, b) in self.buildings.into_iter().enumerate() {
            let prism =
                BuildingPrism::new(b.footprint, b.height_m, b.reflection_loss_db).map_err(|e| {
                    match e {
                        Error::InvalidBuilding { reason, .. } => {
                            Error::InvalidBuilding { index, reason }
                        }
                        other => other,
                    }
                })?;
            buildings.push(prism);
        }
        let g = self.ground;
        UrbanScene::new(
            buildings,
            GroundExtent {
                x_min: g.x_min,
                y_min: g.y_min,
                x_max: g.x_max,
                y_max: g.y_max,
            },
            g.reflection_loss_db,
            origin,
        )
    }

    /// Every invariant violation, instead of stopping at the first.
    pub fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = GeodeticPoint::new(self.origin.lat, self.origin.lon, 0.0) {
            out.push(format!("origin: {e}"));
        }
        let g = &self.ground;
        if !(g.x_max > g.x_min && g.y_max > g.y_min) {
            out.push("ground extent is empty".into());
        }
        if !(g.reflection_loss_db >= 0.0) {
            out.push(format!(
                "ground reflection loss {} dB is negative",
                g.reflection_loss_db
            ));
        }
        let extent = GroundExtent {
            x_min: g.x_min,
            y_min: g.y_min,
            x_max: g.x_max,
            y_max: g.y_max,
        };
        for (i, b) in self.buildings.iter().enumerate() {
            if let Err(reason) =
                BuildingPrism::check(&b.footprint, b.height_m, b.reflection_loss_db)
            {
                out.push(format!("building {i}: {reason}"));
            }
            if b.footprint.iter().any(|p| !extent.contains_xy(p[0], p[1])) {
                out.push(format!(
                    "building {i}: footprint extends outside the ground extent"
                ));
            }
        }
        out
    }
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<UrbanScene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SceneFile::from_json(&text)?.into_scene()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64, side: f64) -> Vec<[f64; 2]> {
        vec![[x, y], [x + side, y], [x + side, y + side], [x, y + side]]
    }

    fn origin() -> GeodeticPoint {
        GeodeticPoint::new(40.758, -73.985, 0.0).unwrap()
    }

    fn extent(half: f64) -> GroundExtent {
        GroundExtent {
            x_min: -half,
            y_min: -half,
            x_max: half,
            y_max: half,
        }
    }

    #[test]
    fn empty_scene_is_valid() {
        let json = r#"{"origin":{"lat":40.7,"lon":-74.0},
            "ground":{"x_min":0,"y_min":0,"x_max":1000,"y_max":1000,"reflection_loss_db":4.7},
            "buildings":[]}"#;
        let scene = SceneFile::from_json(json).unwrap().into_scene().unwrap();
        assert!(scene.buildings().is_empty());
        assert_eq!(scene.ground().width(), 1000.0);
    }

    #[test]
    fn negative_height_reports_index() {
        let json = r#"{"origin":{"lat":40.7,"lon":-74.0},
            "ground":{"x_min":-100,"y_min":-100,"x_max":100,"y_max":100},
            "buildings":[
              {"footprint":[[0,0],[20,0],[20,20],[0,20]],"height_m":10},
              {"footprint":[[30,0],[50,0],[50,20],[30,20]],"height_m":-5}]}"#;
        let err = SceneFile::from_json(json)
            .unwrap()
            .into_scene()
            .unwrap_err();
        match err {
            Error::InvalidBuilding { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_missing_losses() {
        let json = r#"{"origin":{"lat":40.7,"lon":-74.0},
            "ground":{"x_min":-100,"y_min":-100,"x_max":100,"y_max":100},
            "buildings":[{"footprint":[[0,0],[20,0],[20,20],[0,20]],"height_m":10}]}"#;
        let scene = SceneFile::from_json(json).unwrap().into_scene().unwrap();
        assert_eq!(scene.ground_reflection_loss_db(), DEFAULT_GROUND_LOSS_DB);
        assert_eq!(
            scene.buildings()[0].reflection_loss_db(),
            DEFAULT_BUILDING_LOSS_DB
        );
    }

    #[test]
    fn clockwise_footprint_is_normalized() {
        let mut fp = square(0.0, 0.0, 10.0);
        fp.reverse();
        assert!(signed_area(&fp) < 0.0);
        let b = BuildingPrism::new(fp, 5.0, 3.0).unwrap();
        assert!(signed_area(b.footprint()) > 0.0);
    }

    #[test]
    fn bow_tie_is_rejected() {
        let fp = vec![[0.0, 0.0], [10.0, 10.0], [10.0, 0.0], [0.0, 10.0]];
        assert!(BuildingPrism::new(fp, 5.0, 3.0).is_err());
    }

    #[test]
    fn footprint_outside_ground_is_rejected() {
        let b = BuildingPrism::new(square(90.0, 0.0, 20.0), 5.0, 3.0).unwrap();
        let err = UrbanScene::new(vec![b], extent(100.0), 4.7, origin()).unwrap_err();
        assert!(matches!(err, Error::InvalidBuilding { index: 0, .. }));
    }

    #[test]
    fn findings_collect_every_problem() {
        let file = SceneFile {
            origin: OriginSpec {
                lat: 40.0,
                lon: -74.0,
            },
            ground: GroundSpec {
                x_min: -10.0,
                y_min: -10.0,
                x_max: 10.0,
                y_max: 10.0,
                reflection_loss_db: -1.0,
            },
            buildings: vec![
                BuildingSpec {
                    footprint: vec![[0.0, 0.0], [1.0, 0.0]],
                    height_m: 3.0,
                    reflection_loss_db: 3.0,
                },
                BuildingSpec {
                    footprint: square(0.0, 0.0, 5.0),
                    height_m: 0.0,
                    reflection_loss_db: 3.0,
                },
            ],
        };
        let f = file.findings();
        assert_eq!(f.len(), 3, "{f:?}");
        assert!(f[1].starts_with("building 0"));
        assert!(f[2].starts_with("building 1"));
    }

    #[test]
    fn file_round_trip() {
        let b = BuildingPrism::new(square(0.0, 0.0, 10.0), 5.0, 2.0).unwrap();
        let scene = UrbanScene::new(vec![b], extent(50.0), 4.7, origin()).unwrap();
        let text = serde_json::to_string(&scene.to_file()).unwrap();
        let back = SceneFile::from_json(&text).unwrap().into_scene().unwrap();
        assert_eq!(back, scene);
    }
}
