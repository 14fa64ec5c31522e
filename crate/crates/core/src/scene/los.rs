//! Segment–prism line-of-sight test.

use super::{BuildingPrism, UrbanScene};
use crate::geometry::Vec3;

/// True iff the segment `a`–`b` passes through no building interior.
///
/// The segment is split at every parameter where it crosses a footprint edge
/// or the roof plane; each piece is then wholly inside or wholly outside the
/// prism, so testing its midpoint decides it.
pub fn los_clear(a: Vec3, b: Vec3, scene: &UrbanScene) -> bool {
    scene
        .buildings()
        .iter()
        .all(|bld| !segment_enters(a, b, bld))
}

fn segment_enters(a: Vec3, b: Vec3, bld: &BuildingPrism) -> bool {
    let (lo, hi) = bld.bounds();
    if a.x.max(b.x) <= lo[0]
        || a.x.min(b.x) >= hi[0]
        || a.y.max(b.y) <= lo[1]
        || a.y.min(b.y) >= hi[1]
    {
        return false;
    }
    if a.z.min(b.z) >= bld.height() {
        return false;
    }

    let d = b - a;
    let mut cuts = vec![0.0, 1.0];
    for (p, q) in bld.edges() {
        let e = [q[0] - p[0], q[1] - p[1]];
        let denom = d.x * e[1] - d.y * e[0];
        if denom.abs() < 1e-15 {
            continue;
        }
        let w = [p[0] - a.x, p[1] - a.y];
        let t = (w[0] * e[1] - w[1] * e[0]) / denom;
        let s = (w[0] * d.y - w[1] * d.x) / denom;
        if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&s) {
            cuts.push(t);
        }
    }
    for level in [0.0, bld.height()] {
        if d.z.abs() > 1e-15 {
            let t = (level - a.z) / d.z;
            if (0.0..=1.0).contains(&t) {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);

    cuts.windows(2).any(|w| {
        if w[1] - w[0] < 1e-12 {
            return false;
        }
        let mid = a + d * (0.5 * (w[0] + w[1]));
        bld.contains(mid)
    })
}
