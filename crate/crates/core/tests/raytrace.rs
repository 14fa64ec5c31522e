use std::collections::BTreeSet;

use coexist_core::geometry::{Orientation, Vec3};
use coexist_core::raytrace::{
    friis_loss, trace, CaptureSphere, FaceId, LaunchGrid, RayPath, TraceOptions, Tracer,
};
use coexist_core::scene::{load_scene, BuildingPrism, GeodeticPoint, GroundExtent, UrbanScene};
use proptest::prelude::*;

const RANGE: f64 = 820e3;

fn ground_only() -> UrbanScene {
    UrbanScene::new(
        vec![],
        GroundExtent {
            x_min: -500.0,
            y_min: -500.0,
            x_max: 500.0,
            y_max: 500.0,
        },
        4.7,
        GeodeticPoint::new(40.758, -73.985, 0.0).unwrap(),
    )
    .unwrap()
}

fn single_slab() -> UrbanScene {
    let slab = BuildingPrism::new(
        vec![[20.0, -200.0], [30.0, -200.0], [30.0, 200.0], [20.0, 200.0]],
        40.0,
        3.0,
    )
    .unwrap();
    UrbanScene::new(
        vec![slab],
        *ground_only().ground(),
        4.7,
        *ground_only().origin(),
    )
    .unwrap()
}

fn canyon() -> UrbanScene {
    load_scene(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/scenes/canyon.json"
    ))
    .unwrap()
}

fn sphere_at(scene: &UrbanScene, p: Vec3) -> CaptureSphere {
    CaptureSphere::from_local(scene, p, CaptureSphere::DEFAULT_DIAMETER_M).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b
}

#[test]
fn free_space_overhead_gives_one_direct_ray() {
    let scene = ground_only();
    let tx = Vec3::new(0.0, 0.0, 1.5);
    let grid = LaunchGrid {
        elevation_range: (0.0, 90.0),
        ..LaunchGrid::coarse()
    };
    let sat = tx + Vec3::new(0.0, 0.0, RANGE);
    let rays = trace(
        &scene,
        tx,
        &grid,
        &sphere_at(&scene, sat),
        &TraceOptions::default(),
    )
    .unwrap();
    assert_eq!(rays.len(), 1);
    let r = &rays[0];
    assert_eq!(r.bounce_count, 0);
    assert_eq!((r.l_gl, r.l_bl), (0.0, 0.0));
    assert_eq!(r.l_fs, friis_loss(r.path_length, 23.8e9));
    assert!(rel_err(r.path_length, RANGE) < 1e-9);
    // arriving from directly below the satellite
    assert!(r.aoa.phi < -89.9);
}

#[test]
fn ground_bounce_matches_image_source() {
    let scene = ground_only();
    let tx = Vec3::new(3.0, -2.0, 10.0);
    let image = Vec3::new(tx.x, tx.y, -tx.z);
    let sat = image + Orientation::new(0.0, 40.0).unit_vector() * RANGE;
    let rays = trace(
        &scene,
        tx,
        &LaunchGrid::coarse(),
        &sphere_at(&scene, sat),
        &TraceOptions::default(),
    )
    .unwrap();
    let bounced: Vec<&RayPath> = rays.iter().filter(|r| r.bounce_count == 1).collect();
    assert_eq!(bounced.len(), 1, "{rays:?}");
    let r = bounced[0];
    assert_eq!(r.faces, vec![FaceId::Ground]);
    assert!(rel_err(r.path_length, sat.distance(image)) < 1e-3);
    assert_eq!(r.l_gl, 4.7);
    assert_eq!(r.l_bl, 0.0);
    assert!(r.aod.phi < 0.0);
    // the direct ray is there too
    let direct = rays.iter().find(|r| r.bounce_count == 0).unwrap();
    assert!(rel_err(direct.path_length, sat.distance(tx)) < 1e-3);
}

#[test]
fn wall_bounce_matches_image_source() {
    let scene = single_slab();
    let tx = Vec3::new(0.0, 0.0, 1.5);
    let image = Vec3::new(40.0, 0.0, 1.5);
    let sat = image + Orientation::new(-90.0, 30.0).unit_vector() * RANGE;
    let rays = trace(
        &scene,
        tx,
        &LaunchGrid::coarse(),
        &sphere_at(&scene, sat),
        &TraceOptions::default(),
    )
    .unwrap();
    let wall = rays
        .iter()
        .find(|r| r.faces.len() == 1 && matches!(r.faces[0], FaceId::Wall { .. }))
        .expect("wall family captured");
    assert!(rel_err(wall.path_length, sat.distance(image)) < 1e-3);
    assert_eq!(wall.l_bl, 3.0);
    assert_eq!(wall.l_gl, 0.0);
    for r in &rays {
        let ground = r.faces.iter().filter(|f| f.is_ground()).count() as f64;
        let walls = r.faces.len() as f64 - ground;
        assert_eq!(r.l_gl, 4.7 * ground);
        assert_eq!(r.l_bl, 3.0 * walls);
        assert_eq!(r.total_loss_db(), r.l_fs + r.l_gl + r.l_bl);
    }
}

#[test]
fn seven_bounce_canyon_ray_is_discarded() {
    let scene = canyon();
    let tx = Vec3::new(0.0, 0.0, 1.5);
    // a ray launched east at 28 degrees climbs 5.32 m per crossing and clears
    // the 40 m walls only after its seventh wall hit, leaving westward
    let sat = tx + Orientation::new(-90.0, 28.0).unit_vector() * RANGE;
    let sphere = sphere_at(&scene, sat);
    let six = trace(
        &scene,
        tx,
        &LaunchGrid::coarse(),
        &sphere,
        &TraceOptions::default(),
    )
    .unwrap();
    assert!(six.is_empty(), "{six:?}");
    let seven = TraceOptions {
        max_bounces: 7,
        ..TraceOptions::default()
    };
    let rays = trace(&scene, tx, &LaunchGrid::coarse(), &sphere, &seven).unwrap();
    assert!(!rays.is_empty());
    assert!(rays.iter().all(|r| r.bounce_count == 7 && r.l_bl == 21.0));
}

#[test]
fn reversed_specular_path_has_equal_length() {
    let scene = single_slab();
    let tracer = Tracer::new(&scene, TraceOptions::default());
    let tx = Vec3::new(0.0, 10.0, 1.5);
    let sat = Vec3::new(40.0, 10.0, 1.5) + Orientation::new(-80.0, 35.0).unit_vector() * RANGE;
    let rays = tracer.capture(
        &tracer.escapes(tx, &LaunchGrid::coarse()).unwrap(),
        &sphere_at(&scene, sat),
    );
    let mut checked = 0;
    for r in rays.iter().filter(|r| r.bounce_count > 0) {
        let Some(fwd) = tracer.specular_path(tx, &r.faces, sat) else {
            continue;
        };
        let rev_faces: Vec<FaceId> = r.faces.iter().rev().copied().collect();
        let back = tracer
            .specular_path(sat, &rev_faces, tx)
            .expect("reverse path valid");
        let len = |p: &[Vec3]| p.windows(2).map(|w| w[0].distance(w[1])).sum::<f64>();
        assert!((len(&fwd) - len(&back)).abs() < 1e-6);
        let mut rev = back.clone();
        rev.reverse();
        for (a, b) in fwd.iter().zip(&rev) {
            assert!(a.distance(*b) < 1e-6);
        }
        // the traced ray is close to the exact one
        assert!(rel_err(r.path_length, len(&fwd)) < 1e-3);
        checked += 1;
    }
    assert!(checked > 0);
}

fn families(rays: &[RayPath]) -> BTreeSet<Vec<FaceId>> {
    rays.iter().map(|r| r.faces.clone()).collect()
}

#[test]
fn refining_the_grid_keeps_every_family() {
    let scene = single_slab();
    let tx = Vec3::new(-3.0, 5.0, 1.5);
    let sat = Vec3::new(0.0, 0.0, 0.0) + Orientation::new(-70.0, 55.0).unit_vector() * RANGE;
    let sphere = sphere_at(&scene, sat);
    let coarse = trace(
        &scene,
        tx,
        &LaunchGrid::coarse(),
        &sphere,
        &TraceOptions::default(),
    )
    .unwrap();
    let fine = trace(
        &scene,
        tx,
        &LaunchGrid::full_sphere(1.0, 0.5),
        &sphere,
        &TraceOptions::default(),
    )
    .unwrap();
    assert!(!coarse.is_empty());
    assert!(families(&coarse).is_subset(&families(&fine)));
}

#[test]
fn trace_is_independent_of_worker_count() {
    let scene = canyon();
    let tx = Vec3::new(0.0, 30.0, 1.5);
    let tracer = Tracer::new(&scene, TraceOptions::default());
    let a = tracer.escapes(tx, &LaunchGrid::coarse()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let b = pool.install(|| tracer.escapes(tx, &LaunchGrid::coarse()).unwrap());
    assert_eq!(a.rays, b.rays);
}

#[test]
fn transmitter_inside_building_is_rejected() {
    let scene = canyon();
    let tracer = Tracer::new(&scene, TraceOptions::default());
    assert!(tracer
        .escapes(Vec3::new(10.0, 0.0, 1.5), &LaunchGrid::coarse())
        .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ground_paths_match_image_source(
        h in 1.0f64..30.0,
        az in -180.0f64..180.0,
        el in 15.0f64..85.0,
    ) {
        let scene = ground_only();
        let tx = Vec3::new(0.0, 0.0, h);
        let image = Vec3::new(0.0, 0.0, -h);
        let sat = image + Orientation::new(az, el).unit_vector() * RANGE;
        let rays = trace(&scene, tx, &LaunchGrid::coarse(), &sphere_at(&scene, sat), &TraceOptions::default()).unwrap();
        prop_assert!(rays.iter().any(|r| r.bounce_count == 1));
        for r in rays.iter().filter(|r| r.bounce_count == 1) {
            prop_assert!(rel_err(r.path_length, sat.distance(image)) < 1e-3);
            prop_assert_eq!(r.l_gl, 4.7);
        }
    }
}
