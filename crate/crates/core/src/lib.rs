//! Out-of-band interference from directional mm-wave cellular transmitters to a
//! passive-sensing weather satellite.
//!
//! The pipeline runs scene → orbit → scan → raytrace → interference → risk:
//!
//! - [`scene`]: extruded-building world model, geodesy and line-of-sight queries.
//! - [`orbit`]: TLE parsing, SGP4 propagation and ground-track sampling.
//! - [`scan`]: cross-track step-and-stare sensor orientations.
//! - [`antenna`]: URA synthesis and the rotationally symmetric reflector pattern.
//! - [`raytrace`]: shoot-and-bounce tracer with capture-sphere collection.
//! - [`atmosphere`]: table-driven attenuation versus unavailability probability.
//! - [`interference`]: scenario construction and received-power evaluation.
//! - [`risk`]: thresholds, CCDFs, exceedance likelihoods and per-pose maps.

pub mod antenna;
pub mod atmosphere;
mod error;
pub mod geometry;
pub mod interference;
pub mod orbit;
pub mod raytrace;
pub mod risk;
pub mod scan;
pub mod scene;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts a power ratio or milliwatt value in dB(m) to linear.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio (or mW) to dB(m).
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
