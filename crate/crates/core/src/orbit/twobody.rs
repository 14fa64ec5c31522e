//! Two-body propagation with optional J2 secular drift of the node, perigee
//! and mean anomaly.

use std::f64::consts::TAU;

use chrono::{DateTime, Utc};

use super::tle::TwoLineElements;
use super::StateVector;
use crate::Result;

/// Earth gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986_004_418e14;
const J2: f64 = 1.082_626_68e-3;
const RE_M: f64 = 6_378_137.0;

#[derive(Debug, Clone, PartialEq)]
pub struct KeplerElements {
    /// Semi-major axis, m.
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub raan: f64,
    pub arg_perigee: f64,
    pub mean_anomaly: f64,
}

#[derive(Debug, Clone)]
pub struct TwoBody {
    epoch: DateTime<Utc>,
    el: KeplerElements,
    with_j2: bool,
}

/// Orbital period of a Keplerian orbit, seconds.
pub fn kepler_period(semi_major_axis: f64) -> f64 {
    TAU * (semi_major_axis.powi(3) / MU_EARTH).sqrt()
}

fn solve_kepler(m: f64, e: f64) -> f64 {
    let mut ea = if e < 0.8 { m } else { std::f64::consts::PI };
    for _ in 0..50 {
        let f = ea - e * ea.sin() - m;
        let step = f / (1.0 - e * ea.cos());
        ea -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    ea
}

impl TwoBody {
    pub fn new(epoch: DateTime<Utc>, elements: KeplerElements, with_j2: bool) -> Self {
        TwoBody {
            epoch,
            el: elements,
            with_j2,
        }
    }

    /// Treats the mean elements of a TLE as osculating Keplerian elements.
    pub fn from_tle(tle: &TwoLineElements, with_j2: bool) -> Self {
        let n = tle.mean_motion * TAU / 86_400.0;
        let a = (MU_EARTH / (n * n)).cbrt();
        TwoBody::new(
            tle.epoch,
            KeplerElements {
                semi_major_axis: a,
                eccentricity: tle.eccentricity,
                inclination: tle.inclination_deg.to_radians(),
                raan: tle.raan_deg.to_radians(),
                arg_perigee: tle.arg_perigee_deg.to_radians(),
                mean_anomaly: tle.mean_anomaly_deg.to_radians(),
            },
            with_j2,
        )
    }

    pub fn epoch(&self) -> DateTime<Utc> {
        self.epoch
    }

    pub fn period_seconds(&self) -> f64 {
        kepler_period(self.el.semi_major_axis)
    }

    pub fn propagate(&self, seconds: f64) -> Result<StateVector> {
        let el = &self.el;
        let a = el.semi_major_axis;
        let e = el.eccentricity;
        let n = (MU_EARTH / a.powi(3)).sqrt();
        let (mut raan, mut argp, mut m) = (el.raan, el.arg_perigee, el.mean_anomaly + n * seconds);
        if self.with_j2 {
            let p = a * (1.0 - e * e);
            let k = 1.5 * n * J2 * (RE_M / p).powi(2);
            let ci = el.inclination.cos();
            raan -= k * ci * seconds;
            argp += 0.5 * k * (5.0 * ci * ci - 1.0) * seconds;
            m += 0.5 * k * (1.0 - e * e).sqrt() * (3.0 * ci * ci - 1.0) * seconds;
        }
        let ea = solve_kepler(m.rem_euclid(TAU), e);
        let (se, ce) = ea.sin_cos();
        let b = (1.0 - e * e).sqrt();
        // perifocal position and velocity
        let r = a * (1.0 - e * ce);
        let (px, py) = (a * (ce - e), a * b * se);
        let f = (MU_EARTH * a).sqrt() / r;
        let (vx, vy) = (-f * se, f * b * ce);

        let (so, co) = raan.sin_cos();
        let (sw, cw) = argp.sin_cos();
        let (si, ci) = el.inclination.sin_cos();
        let p_hat = [co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si];
        let q_hat = [-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si];
        let comb = |x: f64, y: f64| {
            [
                (x * p_hat[0] + y * q_hat[0]) / 1000.0,
                (x * p_hat[1] + y * q_hat[1]) / 1000.0,
                (x * p_hat[2] + y * q_hat[2]) / 1000.0,
            ]
        };
        Ok(StateVector {
            position_km: comb(px, py),
            velocity_km_s: comb(vx, vy),
        })
    }
}
