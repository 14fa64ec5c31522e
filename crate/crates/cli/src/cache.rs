//! Content-addressed ray cache: one dump per (transmitter, pose).
//!
//! Each file starts with `# sha256:<hex>` over the remaining bytes. A file
//! whose body no longer matches is treated as missing and retraced.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use coexist_core::geometry::Vec3;
use coexist_core::interference::RaySource;
use coexist_core::orbit::SatellitePose;
use coexist_core::raytrace::{
    read_ray_dump, write_ray_dump, CaptureSphere, LaunchGrid, RayPath, TraceOptions, Tracer,
};
use coexist_core::scene::UrbanScene;
use coexist_core::{Error, Result};
use sha2::{Digest, Sha256};

const KEY_VERSION: &str = "coexist-ray-cache-v1";
const CHECKSUM_PREFIX: &str = "# sha256:";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to a temporary sibling, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Cache file contents: checksum line plus ray dump body.
pub fn encode_entry(rays: &[RayPath]) -> Vec<u8> {
    let mut body = Vec::new();
    write_ray_dump(&mut body, rays).expect("writing to memory");
    let mut out = format!("{CHECKSUM_PREFIX}{}\n", sha256_hex(&body)).into_bytes();
    out.extend_from_slice(&body);
    out
}

/// Parses a cache file, or `None` if it is damaged.
pub fn decode_entry(bytes: &[u8]) -> Option<Vec<RayPath>> {
    let nl = bytes.iter().position(|&b| b == b'\n')?;
    let first = std::str::from_utf8(&bytes[..nl]).ok()?;
    let expected = first.strip_prefix(CHECKSUM_PREFIX)?;
    let body = &bytes[nl + 1..];
    if sha256_hex(body) != expected {
        return None;
    }
    read_ray_dump(body).ok()
}

#[derive(Debug, Default)]
pub struct CacheStats {
    pub hits: AtomicUsize,
    pub traced: AtomicUsize,
    pub corrupt: AtomicUsize,
}

impl CacheStats {
    pub fn snapshot(&self) -> (usize, usize, usize) {
        (
            self.hits.load(Ordering::Relaxed),
            self.traced.load(Ordering::Relaxed),
            self.corrupt.load(Ordering::Relaxed),
        )
    }
}

/// Ray source backed by the on-disk cache, with an in-memory copy of every
/// transmitter already served.
pub struct CachedRaySource<'a> {
    tracer: Tracer<'a>,
    grid: LaunchGrid,
    spheres: Vec<CaptureSphere>,
    dir: PathBuf,
    /// Hash of everything except the transmitter and the pose.
    base_key: Vec<u8>,
    memo: Mutex<HashMap<[u64; 3], Vec<Vec<RayPath>>>>,
    pub stats: CacheStats,
}

impl<'a> CachedRaySource<'a> {
    pub fn new(
        scene: &'a UrbanScene,
        poses: &[SatellitePose],
        grid: LaunchGrid,
        capture_diameter: f64,
        opts: TraceOptions,
        dir: impl Into<PathBuf>,
    ) -> Result<Self> {
        grid.validate()?;
        let dir = dir.into();
        std::fs::create_dir_all(&dir)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", dir.display())))?;
        let spheres = poses
            .iter()
            .map(|p| CaptureSphere::new(p.position, capture_diameter))
            .collect::<Result<_>>()?;
        let scene_json = serde_json::to_string(&scene.to_file()).expect("scene serializes");
        let mut h = Sha256::new();
        h.update(KEY_VERSION);
        h.update(scene_json.as_bytes());
        for v in [
            grid.elevation_step,
            grid.azimuth_step,
            grid.elevation_range.0,
            grid.elevation_range.1,
            grid.azimuth_range.0,
            grid.azimuth_range.1,
            opts.frequency_hz,
            capture_diameter,
        ] {
            h.update(v.to_le_bytes());
        }
        h.update((opts.max_bounces as u64).to_le_bytes());
        Ok(CachedRaySource {
            tracer: Tracer::new(scene, opts),
            grid,
            spheres,
            dir,
            base_key: h.finalize().to_vec(),
            memo: Mutex::new(HashMap::new()),
            stats: CacheStats::default(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Cache file for one transmitter position and pose index.
    pub fn entry_path(&self, tx: Vec3, pose: usize) -> PathBuf {
        let mut h = Sha256::new();
        h.update(&self.base_key);
        for v in [tx.x, tx.y, tx.z] {
            h.update(v.to_le_bytes());
        }
        let c = self.spheres[pose].center;
        for v in [c.x(), c.y(), c.z()] {
            h.update(v.to_le_bytes());
        }
        self.dir.join(format!("{}.rays", hex::encode(h.finalize())))
    }

    /// Makes sure every pose has a valid cache entry for `tx` and returns the
    /// rays as read back from their encoded form.
    pub fn load_or_trace(&self, tx: Vec3) -> Result<Vec<Vec<RayPath>>> {
        let mut out: Vec<Option<Vec<RayPath>>> = vec![None; self.spheres.len()];
        let mut missing = Vec::new();
        for (i, slot) in out.iter_mut().enumerate() {
            let path = self.entry_path(tx, i);
            match std::fs::read(&path) {
                Ok(bytes) => match decode_entry(&bytes) {
                    Some(rays) => {
                        self.stats.hits.fetch_add(1, Ordering::Relaxed);
                        *slot = Some(rays);
                    }
                    None => {
                        self.stats.corrupt.fetch_add(1, Ordering::Relaxed);
                        missing.push(i);
                    }
                },
                Err(_) => missing.push(i),
            }
        }
        if !missing.is_empty() {
            let escapes = self.tracer.escapes(tx, &self.grid)?;
            for i in missing {
                let rays = self.tracer.capture(&escapes, &self.spheres[i]);
                let bytes = encode_entry(&rays);
                let path = self.entry_path(tx, i);
                write_atomic(&path, &bytes)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
                self.stats.traced.fetch_add(1, Ordering::Relaxed);
                out[i] = Some(decode_entry(&bytes).expect("fresh entry decodes"));
            }
        }
        Ok(out
            .into_iter()
            .map(|r| r.expect("every pose filled"))
            .collect())
    }
}

impl RaySource for CachedRaySource<'_> {
    fn rays(&self, tx: Vec3) -> Result<Vec<Vec<RayPath>>> {
        let key = [tx.x.to_bits(), tx.y.to_bits(), tx.z.to_bits()];
        if let Some(r) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(r.clone());
        }
        let rays = self.load_or_trace(tx)?;
        self.memo
            .lock()
            .expect("memo lock")
            .insert(key, rays.clone());
        Ok(rays)
    }
}
