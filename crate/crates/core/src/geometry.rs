//! Small 3D vector type and the azimuth/elevation convention shared by every
//! module.
//!
//! Directions are expressed in an east-north-up frame. Azimuth is a compass
//! bearing (0° = north, 90° = east) wrapped into [−180°, 180°]; elevation is
//! measured from the local horizontal, negative below it.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Unit vector in the same direction. Zero vectors stay zero.
    #[inline]
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    #[inline]
    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Mirror of a direction about a plane with unit normal `normal`.
    #[inline]
    pub fn reflect(self, normal: Vec3) -> Vec3 {
        self - normal * (2.0 * self.dot(normal))
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn min(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.x.min(other.x),
            self.y.min(other.y),
            self.z.min(other.z),
        )
    }

    pub fn max(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.x.max(other.x),
            self.y.max(other.y),
            self.z.max(other.z),
        )
    }

    /// Angle between two directions in degrees, in [0, 180].
    pub fn angle_deg(self, other: Vec3) -> f64 {
        // atan2 of |a×b| and a·b stays accurate for nearly parallel vectors.
        let c = self.cross(other).norm();
        let d = self.dot(other);
        c.atan2(d).to_degrees()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Wraps an angle in degrees into [−180, 180).
#[inline]
pub fn wrap_deg(angle: f64) -> f64 {
    let a = (angle + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return 360 for tiny negative inputs
    if a >= 180.0 {
        a - 360.0
    } else {
        a
    }
}

/// An azimuth/elevation pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Orientation {
    /// Azimuth, degrees clockwise from north.
    pub theta: f64,
    /// Elevation above the local horizontal, degrees.
    pub phi: f64,
}

impl Orientation {
    pub const fn new(theta: f64, phi: f64) -> Self {
        Orientation { theta, phi }
    }

    /// Direction of a (not necessarily unit) east-north-up vector.
    pub fn from_vector(v: Vec3) -> Self {
        let horizontal = v.x.hypot(v.y);
        let phi = v.z.atan2(horizontal).to_degrees();
        let theta = if horizontal > 0.0 {
            wrap_deg(v.x.atan2(v.y).to_degrees())
        } else {
            0.0
        };
        Orientation { theta, phi }
    }

    /// Unit east-north-up vector.
    pub fn unit_vector(self) -> Vec3 {
        let (st, ct) = self.theta.to_radians().sin_cos();
        let (sp, cp) = self.phi.to_radians().sin_cos();
        Vec3::new(cp * st, cp * ct, sp)
    }

    pub fn is_valid(self) -> bool {
        (-180.0..=180.0).contains(&self.theta) && (-90.0..=90.0).contains(&self.phi)
    }

    /// True angle to another orientation, degrees.
    pub fn angle_to(self, other: Orientation) -> f64 {
        self.unit_vector().angle_deg(other.unit_vector())
    }
}

/// Row-major 3×3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Mat3([[r0.x, r0.y, r0.z], [r1.x, r1.y, r1.z], [r2.x, r2.y, r2.z]])
    }

    #[inline]
    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_handles_both_directions() {
        assert_eq!(wrap_deg(190.0), -170.0);
        assert_eq!(wrap_deg(-190.0), 170.0);
        assert_eq!(wrap_deg(180.0), -180.0);
        assert_eq!(wrap_deg(-340.0), 20.0);
        assert!(wrap_deg(-1e-18) < 180.0);
    }

    #[test]
    fn orientation_round_trips_through_vectors() {
        for &(t, p) in &[(0.0, 0.0), (90.0, 10.0), (-135.0, -45.0), (179.5, 89.0)] {
            let o = Orientation::new(t, p);
            let back = Orientation::from_vector(o.unit_vector() * 3.0);
            assert!((back.theta - t).abs() < 1e-9, "{t} -> {}", back.theta);
            assert!((back.phi - p).abs() < 1e-9);
        }
        // east is azimuth 90
        let e = Orientation::from_vector(Vec3::new(1.0, 0.0, 0.0));
        assert!((e.theta - 90.0).abs() < 1e-12);
    }

    #[test]
    fn angle_between_opposite_vectors() {
        let a = Orientation::new(10.0, -30.0);
        let b = Orientation::from_vector(-a.unit_vector());
        assert!((a.angle_to(b) - 180.0).abs() < 1e-9);
        assert!(a.angle_to(a).abs() < 1e-9);
    }

    #[test]
    fn reflection_preserves_length() {
        let d = Vec3::new(0.3, -0.4, 0.5).normalized();
        let n = Vec3::new(0.0, 0.0, 1.0);
        let r = d.reflect(n);
        assert!((r.norm() - 1.0).abs() < 1e-12);
        assert_eq!(r.z, -d.z);
    }
}
