use chrono::{TimeZone, Utc};
use coexist_core::geometry::{Orientation, Vec3};
use coexist_core::interference::InterferenceSample;
use coexist_core::orbit::SatellitePose;
use coexist_core::risk::*;
use coexist_core::scan::ScanOrientation;
use coexist_core::scene::{geodetic_to_ecef, EcefVector, GeodeticPoint};
use proptest::prelude::*;

fn pose(lat: f64, lon: f64) -> SatellitePose {
    SatellitePose {
        time: Utc.with_ymd_and_hms(2021, 10, 1, 0, 0, 0).unwrap(),
        position: geodetic_to_ecef(&GeodeticPoint::new(lat, lon, 820e3).unwrap()),
        velocity_direction: EcefVector(Vec3::new(0.0, 0.0, 1.0)),
        altitude: 820e3,
    }
}

fn sample(
    pose_id: usize,
    power: Option<f64>,
    scan: Orientation,
    aoa: Option<Orientation>,
) -> InterferenceSample {
    InterferenceSample {
        pose_id,
        scan: ScanOrientation {
            theta_s: scan.theta,
            phi_s: scan.phi,
            pixel_index: 1,
            scan_angle: 0.0,
        },
        tx_index: 0,
        mount: Orientation::new(0.0, 10.0),
        m_rays: usize::from(power.is_some()),
        power_dbm: power,
        strongest_aoa: aoa,
    }
}

#[test]
fn heatmap_examples() {
    let poses = [pose(40.0, -74.0), pose(41.0, -73.0)];
    let down = Orientation::new(0.0, -90.0);
    let samples = vec![
        sample(0, None, down, None),
        sample(1, Some(-150.0), down, Some(down)),
        sample(1, Some(-135.0), down, Some(down)),
    ];
    let t = ThresholdSet::default();
    let h = position_heatmap(&samples, &poses, &t);
    assert_eq!(h[0].max_dbm, None);
    assert_eq!(h[0].exceeds, [false; 4]);
    assert_eq!(h[1].max_dbm, Some(-135.0));
    assert_eq!(h[1].exceeds, [true; 4]);
    assert!((h[1].latitude - 41.0).abs() < 1e-6 && (h[1].longitude - -73.0).abs() < 1e-9);
}

#[test]
fn misalignment_uses_the_strongest_sample() {
    let poses = [pose(40.0, -74.0), pose(41.0, -73.0)];
    let scan = Orientation::new(0.0, -45.0);
    let samples = vec![
        sample(0, Some(-170.0), scan, Some(Orientation::new(180.0, 45.0))),
        sample(0, Some(-160.0), scan, Some(Orientation::new(0.0, -48.33))),
        sample(1, None, scan, None),
    ];
    let m = misalignment_map(&samples, &poses);
    assert!((m[0].degrees.unwrap() - 3.33).abs() < 1e-9);
    assert_eq!(m[1].degrees, None);
}

#[test]
fn reports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let poses = [pose(40.0, -74.0), pose(41.0, -73.0)];
    let down = Orientation::new(0.0, -90.0);
    let samples = vec![
        sample(0, Some(-150.04), down, Some(down)),
        sample(1, None, down, None),
    ];
    let c = ccdf(&samples).unwrap();
    write_ccdf_csv(dir.path().join("c.csv"), &c).unwrap();
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CCDF_HEADER);
    assert_eq!(lines[1], "-150.2,50");
    assert_eq!(*lines.last().unwrap(), "-150.0,0");

    let t = ThresholdSet::default();
    write_heatmap_csv(
        dir.path().join("h.csv"),
        &position_heatmap(&samples, &poses, &t),
    )
    .unwrap();
    let h = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert!(h
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",-150.04,false,false,true,true"));
    assert!(h
        .lines()
        .nth(2)
        .unwrap()
        .ends_with(",,false,false,false,false"));

    write_misalignment_csv(
        dir.path().join("m.csv"),
        &misalignment_map(&samples, &poses),
    )
    .unwrap();
    assert_eq!(
        std::fs::read_to_string(dir.path().join("m.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );

    let rows = vec![ExceedanceRow {
        scenario: "network_ul".into(),
        cell: "cell1".into(),
        density: Some(25.0),
        p: 50.0,
        gamma: t.gamma1,
        percent: 0.0126,
        harmful: true,
    }];
    write_exceedance_csv(dir.path().join("e.csv"), &rows).unwrap();
    let e = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert_eq!(
        e,
        format!("{EXCEEDANCE_HEADER}\nnetwork_ul,cell1,25,50,-136,0.0126,true\n")
    );
}

fn power_list() -> impl Strategy<Value = Vec<Option<f64>>> {
    prop::collection::vec(prop::option::weighted(0.7, -220.0f64..-100.0), 1..300)
}

proptest! {
    #[test]
    fn exceedance_non_increasing_in_threshold(ps in power_list(), a in -230.0f64..-90.0, b in -230.0f64..-90.0) {
        let c = Ccdf::new(ps).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(c.percent_above(lo) >= c.percent_above(hi));
        let pct = c.percent_above(lo);
        prop_assert!((0.0..=100.0).contains(&pct));
        prop_assert_eq!(exceedance_of(&c, lo).harmful, pct > 0.01);
    }

    #[test]
    fn heatmap_max_over_superset_dominates(ps in power_list(), cut in 0usize..300) {
        let poses = [pose(40.0, -74.0)];
        let down = Orientation::new(0.0, -90.0);
        let all: Vec<_> = ps.iter().map(|&p| sample(0, p, down, p.map(|_| down))).collect();
        let sub = &all[..cut.min(all.len())];
        let t = ThresholdSet::default();
        let (big, small) = (position_heatmap(&all, &poses, &t), position_heatmap(sub, &poses, &t));
        if let Some(s) = small[0].max_dbm {
            prop_assert!(big[0].max_dbm.unwrap() >= s);
        }
    }

    #[test]
    fn aggregate_shift_flips_exactly_the_poses_in_range(maxes in prop::collection::vec(-200.0f64..-120.0, 1..40)) {
        let poses: Vec<_> = (0..maxes.len()).map(|i| pose(40.0 + i as f64 * 0.1, -74.0)).collect();
        let down = Orientation::new(0.0, -90.0);
        let single: Vec<_> = maxes.iter().enumerate().map(|(i, &m)| sample(i, Some(m), down, Some(down))).collect();
        let shift = 10.0 * 1500f64.log10();
        let net: Vec<_> = single.iter().map(|s| s.shifted(shift)).collect();
        let t = ThresholdSet::default();
        let (a, b) = (position_heatmap(&single, &poses, &t), position_heatmap(&net, &poses, &t));
        for (i, &m) in maxes.iter().enumerate() {
            for (g, (_, gamma)) in t.gammas().iter().enumerate() {
                let flipped = !a[i].exceeds[g] && b[i].exceeds[g];
                prop_assert_eq!(flipped, m <= *gamma && m + shift > *gamma);
            }
        }
    }

    #[test]
    fn network_exceedance_is_shifted_single(ps in power_list(), n in 1u32..5000) {
        let shift = 10.0 * (n as f64).log10();
        let single = Ccdf::new(ps.iter().copied()).unwrap();
        let net = Ccdf::new(ps.iter().map(|p| p.map(|v| v + shift))).unwrap();
        // compare on the exact step points of the single-cell curve
        for (x, pct) in single.steps() {
            prop_assert_eq!(net.percent_above(x + shift), pct);
        }
    }

    #[test]
    fn exceedance_non_decreasing_in_cell_count(ps in power_list(), gamma in -180.0f64..-120.0, n1 in 1u32..5000, n2 in 1u32..5000) {
        let (lo, hi) = (n1.min(n2) as f64, n1.max(n2) as f64);
        let a = Ccdf::new(ps.iter().map(|p| p.map(|v| v + 10.0 * lo.log10()))).unwrap();
        let b = Ccdf::new(ps.iter().map(|p| p.map(|v| v + 10.0 * hi.log10()))).unwrap();
        prop_assert!(b.percent_above(gamma) >= a.percent_above(gamma));
    }
}
