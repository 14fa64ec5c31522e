use std::sync::Arc;

use chrono::{TimeZone, Utc};
use coexist_core::antenna::{AntennaPattern, PatternShape, RadialPattern};
use coexist_core::geometry::{Orientation, Vec3};
use coexist_core::interference::*;
use coexist_core::orbit::SatellitePose;
use coexist_core::raytrace::{friis_loss, LaunchGrid, RayPath, TraceOptions};
use coexist_core::scan::{scan_orientations, ScanOrientation};
use coexist_core::scene::{load_scene, EcefVector, GeodeticPoint, GroundExtent, UrbanScene};
use coexist_core::{Error, Result};
use proptest::prelude::*;

fn flat(half: f64) -> UrbanScene {
    UrbanScene::new(
        vec![],
        GroundExtent {
            x_min: -half,
            y_min: -half,
            x_max: half,
            y_max: half,
        },
        4.7,
        GeodeticPoint::new(40.758, -73.985, 0.0).unwrap(),
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

fn constant(name: &str, gain: f64) -> Arc<AntennaPattern> {
    let r = RadialPattern::new(vec![0.0, 180.0], vec![gain, gain]).unwrap();
    Arc::new(AntennaPattern::new(name, PatternShape::Radial(r), 360.0))
}

/// Linear off-axis roll-off, so different geometries give different gains.
fn sloped(name: &str, peak: f64) -> Arc<AntennaPattern> {
    let r = RadialPattern::new(vec![0.0, 180.0], vec![peak, peak - 60.0]).unwrap();
    Arc::new(AntennaPattern::new(name, PatternShape::Radial(r), 6.0))
}

fn ray(loss_db: f64, aod: Orientation, aoa: Orientation) -> RayPath {
    RayPath {
        aod,
        aoa,
        bounce_count: 0,
        path_length: 870e3,
        l_fs: loss_db,
        l_gl: 0.0,
        l_bl: 0.0,
        vertices: vec![],
        faces: vec![],
    }
}

fn overhead_pose(scene: &UrbanScene, altitude: f64) -> SatellitePose {
    let frame = scene.frame();
    SatellitePose {
        time: Utc.with_ymd_and_hms(2021, 10, 1, 0, 0, 0).unwrap(),
        position: frame.point_to_ecef(Vec3::new(0.0, 0.0, altitude)),
        velocity_direction: EcefVector(frame.direction_to_ecef(Vec3::new(0.0, 1.0, 0.0))),
        altitude,
    }
}

fn nadir_scan() -> ScanOrientation {
    ScanOrientation {
        theta_s: 0.0,
        phi_s: -90.0,
        pixel_index: 15,
        scan_angle: 0.0,
    }
}

fn ue_at(x: f64, y: f64, pattern: Arc<AntennaPattern>) -> TransmitterInstance {
    TransmitterInstance::pointed(
        Role::Uplink,
        Vec3::new(x, y, UE_HEIGHT_M),
        Vec3::new(0.0, 0.0, BS_HEIGHT_M),
        pattern,
    )
}

struct FixedRays(Vec<Vec<RayPath>>);

impl RaySource for FixedRays {
    fn rays(&self, _tx: Vec3) -> Result<Vec<Vec<RayPath>>> {
        Ok(self.0.clone())
    }
}

#[test]
fn downlink_grid_on_empty_scene() {
    let scene = flat(500.0);
    let site = CellSite::new("c", 0.0, 0.0, 10.0).unwrap();
    let set = downlink_orientation_set(&site, &scene, 1.0).unwrap();
    // lattice points with i² + j² ≤ 100
    let expected = (-10i32..=10)
        .flat_map(|i| (-10i32..=10).map(move |j| (i, j)))
        .filter(|(i, j)| i * i + j * j <= 100)
        .count();
    assert_eq!(expected, 317);
    assert_eq!(set.len(), expected);
    assert!(set.iter().all(|o| o.phi < 0.0));
    assert!(set.iter().any(|o| (o.phi - -90.0).abs() < 1e-12));
}

#[test]
fn downlink_mount_elevation_at_equal_offsets() {
    let bs = Vec3::new(0.0, 0.0, BS_HEIGHT_M);
    let ue = Vec3::new(4.5, 0.0, UE_HEIGHT_M);
    let dl = TransmitterInstance::pointed(Role::Downlink, bs, ue, constant("bs", 29.0));
    assert!((dl.mount.phi - -45.0).abs() < 1e-12);
    assert!((dl.mount.theta - 90.0).abs() < 1e-12);
    let ul = TransmitterInstance::pointed(Role::Uplink, ue, bs, constant("ue", 17.0));
    assert!((ul.mount.phi - 45.0).abs() < 1e-12);
    assert_eq!(dl.p_tx_dbm, -3.0);
    assert_eq!(ul.p_tx_dbm, 1.0);
}

#[test]
fn canyon_walls_hide_points_behind_them() {
    let scene = canyon();
    let site = CellSite::new("c", 0.0, 0.0, 30.0).unwrap();
    let pattern = constant("bs", 29.0);
    let txs = downlink_transmitters(&site, &scene, 1.0, pattern).unwrap();
    assert!(!txs.is_empty());
    for t in &txs {
        assert!(t.partner.x.abs() <= 5.0, "{:?}", t.partner);
        assert!(scene.los_clear(site.bs_position, t.partner));
    }
    // every lattice point between the walls is kept, including the wall faces
    let between = (-30i32..=30)
        .flat_map(|i| (-30i32..=30).map(move |j| (i, j)))
        .filter(|(i, j)| i * i + j * j <= 900 && i.abs() <= 5)
        .count();
    assert_eq!(txs.len(), between);
}

#[test]
fn uplink_sampling_is_seeded_and_in_the_disc() {
    let scene = flat(500.0);
    let site = CellSite::new("c", 0.0, 0.0, 50.0).unwrap();
    let p = constant("ue", 17.0);
    let a = uplink_transmitter_set(&site, &scene, 100, 7, Arc::clone(&p)).unwrap();
    let b = uplink_transmitter_set(&site, &scene, 100, 7, Arc::clone(&p)).unwrap();
    let c = uplink_transmitter_set(&site, &scene, 100, 8, p).unwrap();
    assert_eq!(a.len(), 100);
    assert!(a.iter().zip(&b).all(|(x, y)| x.position == y.position));
    assert!(a.iter().zip(&c).any(|(x, y)| x.position != y.position));
    for t in &a {
        assert!(t.link_ground_range() <= 50.0);
        assert_eq!(t.position.z, UE_HEIGHT_M);
        let back = Orientation::from_vector(t.position - t.partner);
        assert_eq!(t.mount.phi, -back.phi);
    }
}

#[test]
fn uplink_sampling_respects_line_of_sight() {
    let scene = canyon();
    let site = CellSite::new("c", 0.0, 0.0, 40.0).unwrap();
    let set = uplink_transmitter_set(&site, &scene, 50, 1, constant("ue", 17.0)).unwrap();
    assert!(set
        .iter()
        .all(|t| scene.los_clear(t.position, t.partner) && t.position.x.abs() < 5.0));
}

#[test]
fn uplink_sampling_reports_missing_line_of_sight() {
    let scene = canyon();
    // an antenna buried inside a slab sees nothing
    let site = CellSite::new("c", 10.0, 0.0, 2.0).unwrap();
    match uplink_transmitter_set(&site, &scene, 3, 1, constant("ue", 17.0)) {
        Err(Error::InsufficientLineOfSight {
            found,
            wanted,
            attempts,
        }) => {
            assert_eq!((found, wanted), (0, 3));
            assert_eq!(attempts, 3 * MAX_DRAWS_PER_UE);
        }
        other => panic!("expected a line-of-sight error, got {other:?}"),
    }
}

#[test]
fn single_ray_composition() {
    let tx = ue_at(4.5, 0.0, constant("ue", 17.0));
    let rx = constant("rx", 34.4);
    let one = ray(
        230.0,
        Orientation::new(0.0, 90.0),
        Orientation::new(0.0, -90.0),
    );
    let s = evaluate_single(
        std::slice::from_ref(&one),
        &tx,
        &nadir_scan(),
        &rx,
        0.0,
        GainModes::default(),
    );
    assert_eq!(s.m_rays, 1);
    assert!((s.power_dbm.unwrap() - -177.6).abs() < 1e-9);

    let two = evaluate_single(
        &[one.clone(), one.clone()],
        &tx,
        &nadir_scan(),
        &rx,
        0.0,
        GainModes::default(),
    );
    assert!((two.power_dbm.unwrap() - (-177.6 + 10.0 * 2f64.log10())).abs() < 1e-9);

    let none = evaluate_single(&[], &tx, &nadir_scan(), &rx, 0.0, GainModes::default());
    assert_eq!((none.power_dbm, none.m_rays), (None, 0));

    let with_atm = evaluate_single(&[one], &tx, &nadir_scan(), &rx, 2.5, GainModes::default());
    assert!((with_atm.power_dbm.unwrap() - -180.1).abs() < 1e-9);
}

#[test]
fn boresight_free_space_uplink() {
    let tx = ue_at(4.5, 0.0, constant("ue", 17.0));
    let rx = constant("rx", 34.4);
    let r = ray(
        friis_loss(870e3, 23.8e9),
        Orientation::new(0.0, 90.0),
        Orientation::new(0.0, -90.0),
    );
    let s = evaluate_single(&[r], &tx, &nadir_scan(), &rx, 0.0, GainModes::default());
    assert!((s.power_dbm.unwrap() - -126.4).abs() < 0.05);
}

#[test]
fn aggregate_adds_ten_log_n() {
    let tx = ue_at(4.5, 0.0, constant("ue", 17.0));
    let rx = constant("rx", 34.4);
    let base = evaluate_single(
        &[ray(
            222.4,
            Orientation::new(0.0, 90.0),
            Orientation::new(0.0, -90.0),
        )],
        &tx,
        &nadir_scan(),
        &rx,
        0.0,
        GainModes::default(),
    );
    assert!((base.power_dbm.unwrap() - -170.0).abs() < 1e-9);
    let net = NetworkScenario::new(25.0, DEFAULT_NETWORK_AREA_KM2).unwrap();
    assert_eq!(net.cell_count().unwrap(), 1500);
    let agg = aggregate(&base, &net).unwrap();
    assert!((agg.power_dbm.unwrap() - -138.239_087_409_443_2).abs() < 1e-9);
    assert_eq!(
        (agg.m_rays, agg.scan, agg.mount),
        (base.m_rays, base.scan, base.mount)
    );
    let one = NetworkScenario::new(1.0, 1.0).unwrap();
    assert_eq!(aggregate(&base, &one).unwrap(), base);
}

fn fixture_rays() -> Vec<RayPath> {
    vec![
        ray(
            200.0,
            Orientation::new(10.0, 60.0),
            Orientation::new(-170.0, -60.0),
        ),
        ray(
            205.0,
            Orientation::new(-100.0, 30.0),
            Orientation::new(80.0, -85.0),
        ),
        ray(
            199.0,
            Orientation::new(45.0, 88.0),
            Orientation::new(-135.0, -88.5),
        ),
    ]
}

#[test]
fn one_pose_one_mount_gives_thirty_samples() {
    let scene = flat(500.0);
    let poses = [overhead_pose(&scene, 820e3)];
    let rx = sloped("rx", 34.4);
    let ctx = EvaluationContext::new(&poses, &rx, 0.0);
    let dl = vec![TransmitterInstance::pointed(
        Role::Downlink,
        Vec3::new(0.0, 0.0, BS_HEIGHT_M),
        Vec3::new(10.0, 0.0, UE_HEIGHT_M),
        sloped("bs", 29.0),
    )];
    let src = FixedRays(vec![fixture_rays()]);
    let samples = run_scenario(ScenarioKind::SingleDl, None, &dl, &ctx, &src).unwrap();
    assert_eq!(samples.len(), 30);
    assert!(samples
        .iter()
        .enumerate()
        .all(|(i, s)| s.scan.pixel_index == i + 1));
    // uplink kind refuses downlink transmitters
    assert!(run_scenario(ScenarioKind::SingleUl, None, &dl, &ctx, &src).is_err());
}

#[test]
fn run_matches_single_evaluation_bit_for_bit() {
    let scene = flat(500.0);
    let poses = [overhead_pose(&scene, 820e3), overhead_pose(&scene, 900e3)];
    let rx = sloped("rx", 34.4);
    let mut ctx = EvaluationContext::new(&poses, &rx, 1.7);
    ctx.modes = GainModes::default();
    let p = sloped("ue", 17.0);
    let txs: Vec<_> = [(3.0, 4.0), (-20.0, 1.0), (0.5, -40.0)]
        .iter()
        .map(|&(x, y)| ue_at(x, y, Arc::clone(&p)))
        .collect();
    let per_pose = vec![fixture_rays(), fixture_rays()[1..].to_vec()];
    let src = FixedRays(per_pose.clone());
    let samples = run_scenario(ScenarioKind::SingleUl, None, &txs, &ctx, &src).unwrap();
    assert_eq!(samples.len(), 2 * 3 * 30);
    for s in &samples {
        let mut expect = evaluate_single(
            &per_pose[s.pose_id],
            &txs[s.tx_index],
            &s.scan,
            &rx,
            1.7,
            ctx.modes,
        );
        expect.pose_id = s.pose_id;
        expect.tx_index = s.tx_index;
        assert_eq!(
            s.power_dbm.unwrap().to_bits(),
            expect.power_dbm.unwrap().to_bits()
        );
        assert_eq!(s, &expect);
    }
    let scans = scan_orientations(&poses[1]);
    assert_eq!(samples.last().unwrap().scan, scans[29]);
}

#[test]
fn network_kinds_restrict_to_the_cell_radius() {
    let scene = flat(500.0);
    let poses = [overhead_pose(&scene, 820e3)];
    let rx = sloped("rx", 34.4);
    let ctx = EvaluationContext::new(&poses, &rx, 0.0);
    let p = sloped("ue", 17.0);
    let txs: Vec<_> = [(10.0, 0.0), (0.0, 35.9), (40.0, 0.0), (80.0, 60.0)]
        .iter()
        .map(|&(x, y)| ue_at(x, y, Arc::clone(&p)))
        .collect();
    let src = FixedRays(vec![fixture_rays()]);
    let single = run_scenario(ScenarioKind::SingleUl, None, &txs, &ctx, &src).unwrap();
    let dense = NetworkScenario::new(200.0, 60.0).unwrap();
    let net = run_scenario(ScenarioKind::NetworkUl, Some(&dense), &txs, &ctx, &src).unwrap();
    let used: std::collections::BTreeSet<_> = net.iter().map(|s| s.tx_index).collect();
    assert_eq!(used.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    let shift = 10.0 * 12000f64.log10();
    for s in &net {
        let base = single
            .iter()
            .find(|b| b.tx_index == s.tx_index && b.scan == s.scan)
            .unwrap();
        assert!((s.power_dbm.unwrap() - base.power_dbm.unwrap() - shift).abs() < 1e-9);
    }
    assert!(run_scenario(ScenarioKind::NetworkUl, None, &txs, &ctx, &src).is_err());
    let tiny = NetworkScenario::with_radius(200.0, 60.0, 1.0).unwrap();
    assert!(run_scenario(ScenarioKind::NetworkUl, Some(&tiny), &txs, &ctx, &src).is_err());
}

#[test]
fn traced_run_on_canyon_is_deterministic() {
    let scene = canyon();
    let poses = [overhead_pose(&scene, 820e3)];
    let rx = sloped("rx", 34.4);
    let ctx = EvaluationContext::new(&poses, &rx, 0.0);
    let site = CellSite::new("c", 0.0, 0.0, 20.0).unwrap();
    let txs = uplink_transmitter_set(&site, &scene, 3, 11, sloped("ue", 17.0)).unwrap();
    let src = TracingRaySource::new(
        &scene,
        &poses,
        LaunchGrid::coarse(),
        50e3,
        TraceOptions::default(),
    )
    .unwrap();
    let a = run_scenario(ScenarioKind::SingleUl, None, &txs, &ctx, &src).unwrap();
    let b = run_scenario(ScenarioKind::SingleUl, None, &txs, &ctx, &src).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 90);
    // a direct path up the canyon always exists for an overhead satellite
    assert!(a.iter().all(|s| s.m_rays >= 1 && s.is_coupled()));
}

proptest! {
    #[test]
    fn transmit_power_is_linear(offset in -20.0f64..20.0, x in -50.0f64..50.0, y in -50.0f64..50.0) {
        let rx = sloped("rx", 34.4);
        let base = ue_at(x, y, sloped("ue", 17.0));
        let moved = base.clone().with_ptx_offset(offset);
        let rays = fixture_rays();
        for pixel in scan_orientations(&overhead_pose(&flat(500.0), 820e3)) {
            let a = evaluate_single(&rays, &base, &pixel, &rx, 0.0, GainModes::default());
            let b = evaluate_single(&rays, &moved, &pixel, &rx, 0.0, GainModes::default());
            prop_assert!((b.power_dbm.unwrap() - a.power_dbm.unwrap() - offset).abs() < 1e-9);
            prop_assert_eq!(a.strongest_aoa, b.strongest_aoa);
        }
    }

    #[test]
    fn eirp_swap_moves_each_ray_by_the_eirp_difference(k in 0usize..3) {
        let rx = sloped("rx", 34.4);
        let bs_pat = sloped("bs", 29.0);
        let ue_pat = sloped("ue", 17.0);
        let ue = ue_at(12.0, -7.0, Arc::clone(&ue_pat));
        let mut as_bs = ue.clone();
        as_bs.pattern = Arc::clone(&bs_pat);
        as_bs.p_tx_dbm = DOWNLINK_PTX_DBM;
        let r = fixture_rays()[k].clone();
        let a = evaluate_single(std::slice::from_ref(&r), &ue, &nadir_scan(), &rx, 0.0, GainModes::default());
        let b = evaluate_single(std::slice::from_ref(&r), &as_bs, &nadir_scan(), &rx, 0.0, GainModes::default());
        let eirp = |t: &TransmitterInstance| t.p_tx_dbm + t.pattern.gain_toward(t.mount, r.aod, GainModes::default().tx);
        prop_assert!((b.power_dbm.unwrap() - a.power_dbm.unwrap() - (eirp(&as_bs) - eirp(&ue))).abs() < 1e-9);
    }
}
