use std::path::{Path, PathBuf};
use std::process::Command;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
}

fn coexist(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_coexist"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// One downlink mount (the grid point under the base station) seen from
/// `poses` satellite positions.
fn tiny_config(dir: &Path, poses: usize) -> PathBuf {
    let body = format!(
        "scene = {:?}\ntle = {:?}\natmosphere = {:?}\nreflector = {:?}\n\
         scenarios = [\"single_dl\"]\np_percent = [50.0]\n\
         [track]\nspan_days = 2.0\nmax_poses = {poses}\n\
         [[cells]]\nid = \"c\"\nx = 139.5\ny = -8.5\nr_cell = 0.5\n",
        data("scenes/midtown_grid.json"),
        data("tle/metop-b.tle"),
        data("atmosphere/nyc_23p8ghz_el45.csv"),
        data("antenna/amsu_a_surrogate_cut.csv"),
    );
    let path = dir.join("tiny.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn cache_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

#[test]
fn one_pose_one_mount_gives_thirty_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path(), 1);
    let out = tmp.path().join("out");
    coexist(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out.join("samples_single_dl_c_p50.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,pose_id,pixel_index,theta_s,phi_s,theta_g,phi_g,m_rays,power_dbm"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 30);
    for (i, r) in rows.iter().enumerate() {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[0], "single_dl_c");
        assert_eq!(f[2], (i + 1).to_string());
    }
    for name in [
        "poses.csv",
        "ccdf_single_dl_c_p50.csv",
        "exceedance_p50.csv",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
}

#[test]
fn cache_is_reused_and_damaged_entries_are_retraced() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path(), 3);
    let cfg = cfg.to_str().unwrap();
    let out = tmp.path().join("out");
    let out_s = out.to_str().unwrap();

    let first = coexist(&["trace", "--config", cfg, "--out", out_s]);
    assert!(
        first.contains("1 transmitters x 3 poses: 0 cached, 3 traced"),
        "{first}"
    );
    let files = cache_files(&out.join("cache"));
    assert_eq!(files.len(), 3);

    let again = coexist(&["trace", "--config", cfg, "--out", out_s]);
    assert!(again.contains("3 cached, 0 traced, 0 corrupt"), "{again}");

    coexist(&["run", "--config", cfg, "--out", out_s]);
    let reference = std::fs::read(out.join("samples_single_dl_c_p50.csv")).unwrap();

    let mut bytes = std::fs::read(&files[1]).unwrap();
    let last = bytes.len() - 2;
    bytes[last] ^= 0x04;
    std::fs::write(&files[1], &bytes).unwrap();
    let repaired = coexist(&["trace", "--config", cfg, "--out", out_s]);
    assert!(
        repaired.contains("2 cached, 1 traced, 1 corrupt"),
        "{repaired}"
    );

    coexist(&["run", "--config", cfg, "--out", out_s]);
    assert_eq!(
        std::fs::read(out.join("samples_single_dl_c_p50.csv")).unwrap(),
        reference
    );
}

#[test]
fn manifest_has_no_paths_or_times_and_hashes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path(), 1);
    let out = tmp.path().join("out");
    coexist(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "5",
    ]);
    let text = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["config"]["seed"], 5);
    assert!(m["config"].get("output").is_none());
    assert!(!text.contains(out.to_str().unwrap()));
    for o in m["outputs"].as_array().unwrap() {
        let file = o["file"].as_str().unwrap();
        let bytes = std::fs::read(out.join(file)).unwrap();
        assert_eq!(
            o["sha256"].as_str().unwrap(),
            coexist_cli::cache::sha256_hex(&bytes)
        );
    }
    assert_eq!(m["fixtures"].as_object().unwrap().len(), 4);
}

#[test]
fn validate_reports_a_misplaced_base_station() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path(), 1);
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("x = 139.5", "x = 90000.0");
    std::fs::write(&cfg, text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_coexist"))
        .args(["validate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("FAIL  cell c: base station outside the ground extent"),
        "{stdout}"
    );
    assert!(stdout.contains("1 finding(s)"), "{stdout}");
}

#[test]
fn bad_flags_are_rejected() {
    for args in [
        vec!["run", "--config", "x.toml", "--grid", "fine"],
        vec!["run", "--config", "x.toml", "--scintillation-exponent", "4"],
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_coexist"))
            .args(&args)
            .output()
            .unwrap();
        assert!(!out.status.success(), "{args:?}");
    }
}
