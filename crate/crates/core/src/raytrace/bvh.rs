//! Bounding volume hierarchy over scene faces.

use super::faces::Face;
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, lo: Vec3, hi: Vec3) {
        self.min = self.min.min(lo);
        self.max = self.max.max(hi);
    }

    /// Slab test; returns the entry distance if the ray meets the box before
    /// `t_max`.
    fn hit(&self, o: Vec3, inv: Vec3, t_max: f64) -> Option<f64> {
        const PAD: f64 = 1e-7;
        let mut t0: f64 = 0.0;
        let mut t1 = t_max;
        for axis in 0..3 {
            let (lo, hi) = (
                self.min.component(axis) - PAD,
                self.max.component(axis) + PAD,
            );
            let (oa, ia) = (o.component(axis), inv.component(axis));
            if ia.is_infinite() {
                if oa < lo || oa > hi {
                    return None;
                }
                continue;
            }
            let (mut a, mut b) = ((lo - oa) * ia, (hi - oa) * ia);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        bbox: Aabb,
        first: usize,
        count: usize,
    },
    Inner {
        bbox: Aabb,
        left: usize,
        right: usize,
    },
}

impl Node {
    fn bbox(&self) -> &Aabb {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    /// Face indices in leaf order.
    order: Vec<usize>,
}

impl Bvh {
    pub fn build(faces: &[Face]) -> Self {
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..faces.len()).collect(),
        };
        if !faces.is_empty() {
            bvh.build_node(faces, 0, faces.len());
        }
        bvh
    }

    fn build_node(&mut self, faces: &[Face], first: usize, count: usize) -> usize {
        let mut bbox = Aabb::empty();
        let mut centroids = Aabb::empty();
        for &f in &self.order[first..first + count] {
            let (lo, hi) = faces[f].bbox;
            bbox.grow(lo, hi);
            let c = (lo + hi) * 0.5;
            centroids.grow(c, c);
        }
        let idx = self.nodes.len();
        if count <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bbox, first, count });
            return idx;
        }
        let extent = centroids.max - centroids.min;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        let key = |f: &usize| {
            let (lo, hi) = faces[*f].bbox;
            (lo.component(axis) + hi.component(axis)) * 0.5
        };
        self.order[first..first + count].sort_by(|a, b| key(a).total_cmp(&key(b)));
        let half = count / 2;
        self.nodes.push(Node::Leaf { bbox, first, count });
        let left = self.build_node(faces, first, half);
        let right = self.build_node(faces, first + half, count - half);
        self.nodes[idx] = Node::Inner { bbox, left, right };
        idx
    }

    /// Nearest face hit along a unit ray, skipping `skip`.
    pub fn nearest(
        &self,
        faces: &[Face],
        o: Vec3,
        d: Vec3,
        skip: Option<usize>,
    ) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        const T_MIN: f64 = 1e-7;
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let limit = best.map_or(f64::INFINITY, |b| b.1);
            if self.nodes[n].bbox().hit(o, inv, limit).is_none() {
                continue;
            }
            match &self.nodes[n] {
                Node::Leaf { first, count, .. } => {
                    for &f in &self.order[*first..*first + *count] {
                        if Some(f) == skip {
                            continue;
                        }
                        if let Some(t) = faces[f].intersect(o, d, T_MIN) {
                            // ties resolve to the lower face index for determinism
                            let better = match best {
                                None => true,
                                Some((bf, bt)) => t < bt || (t == bt && f < bf),
                            };
                            if better {
                                best = Some((f, t));
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        best
    }

    /// True if any face other than those in `skip` is hit strictly between
    /// the ray origin and `t_max`.
    pub fn occluded(&self, faces: &[Face], o: Vec3, d: Vec3, t_max: f64, skip: &[usize]) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if self.nodes[n].bbox().hit(o, inv, t_max).is_none() {
                continue;
            }
            match &self.nodes[n] {
                Node::Leaf { first, count, .. } => {
                    for &f in &self.order[*first..*first + *count] {
                        if skip.contains(&f) {
                            continue;
                        }
                        if let Some(t) = faces[f].intersect(o, d, 1e-7) {
                            if t < t_max - 1e-7 {
                                return true;
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        false
    }
}
