//! Julian dates and Greenwich sidereal time.

use std::f64::consts::TAU;

use chrono::{DateTime, Utc};

const UNIX_EPOCH_JD: f64 = 2_440_587.5;

/// Julian date of a UTC instant (UT1 − UTC is neglected).
pub fn julian_date(t: &DateTime<Utc>) -> f64 {
    let secs = t.timestamp() as f64 + f64::from(t.timestamp_subsec_nanos()) * 1e-9;
    UNIX_EPOCH_JD + secs / 86_400.0
}

/// Greenwich mean sidereal time in radians, IAU-82 polynomial.
pub fn gmst(jd_ut1: f64) -> f64 {
    let tut1 = (jd_ut1 - 2_451_545.0) / 36_525.0;
    let secs = -6.2e-6 * tut1.powi(3)
        + 0.093_104 * tut1 * tut1
        + (876_600.0 * 3600.0 + 8_640_184.812_866) * tut1
        + 67_310.548_41;
    (secs.to_radians() / 240.0).rem_euclid(TAU)
}
