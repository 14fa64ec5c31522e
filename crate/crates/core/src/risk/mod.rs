//! Harmful-interference classification.
//!
//! The ITU-R threshold γ1 is a fixed −136 dBm/200 MHz. γ2–γ4 are fractions of
//! the radiometer's noise-equivalent power k·B·NEΔT. Likelihoods are
//! fractions of scanning time: every (pose, scan, transmitter) sample carries
//! equal weight and uncoupled samples stay in the denominator.

mod report;

use serde::{Deserialize, Serialize};

use crate::geometry::Orientation;
use crate::interference::InterferenceSample;
use crate::orbit::SatellitePose;
use crate::{Error, Result};

pub use report::{
    write_ccdf_csv, write_exceedance_csv, write_heatmap_csv, write_misalignment_csv, ExceedanceRow,
    CCDF_GRID_DB, CCDF_HEADER, EXCEEDANCE_HEADER, HEATMAP_HEADER, MISALIGNMENT_HEADER,
};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// ITU-R protection threshold, dBm per 200 MHz.
pub const ITU_GAMMA1_DBM: f64 = -136.0;
/// Radiometer NEΔT, K.
pub const DEFAULT_NE_DELTA_T_K: f64 = 0.3;
/// Receiver bandwidth, Hz.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 2e8;
/// Fractions of k·B·NEΔT behind γ2, γ3 and γ4.
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.01, 0.001, 0.0001];
/// Percentage of time a threshold may be exceeded without harm.
pub const HARMFUL_PERCENT: f64 = 0.01;

fn w_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub ne_delta_t: f64,
    pub bandwidth: f64,
    pub boltzmann: f64,
    pub fractions: [f64; 3],
}

impl Default for ThresholdSet {
    fn default() -> Self {
        derive_thresholds(
            DEFAULT_NE_DELTA_T_K,
            DEFAULT_BANDWIDTH_HZ,
            DEFAULT_FRACTIONS,
        )
        .expect("default thresholds are ordered")
    }
}

impl ThresholdSet {
    /// (name, dBm) from γ1 down to γ4.
    pub fn gammas(&self) -> [(&'static str, f64); 4] {
        [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
        ]
    }

    /// k·B·NEΔT, W.
    pub fn noise_equivalent_power_w(&self) -> f64 {
        self.boltzmann * self.bandwidth * self.ne_delta_t
    }

    /// Brightness-temperature change equivalent to γ1, K.
    pub fn gamma1_degradation_k(&self) -> f64 {
        10f64.powf(self.gamma1 / 10.0) * 1e-3 / (self.boltzmann * self.bandwidth)
    }

    /// γ1 as a fraction of NEΔT.
    pub fn gamma1_fraction(&self) -> f64 {
        self.gamma1_degradation_k() / self.ne_delta_t
    }
}

/// γ_i = 10·log10(x_i·k·B·NEΔT) in dBm, with γ1 fixed at the ITU-R value.
pub fn derive_thresholds(
    ne_delta_t: f64,
    bandwidth: f64,
    fractions: [f64; 3],
) -> Result<ThresholdSet> {
    if !(ne_delta_t > 0.0 && bandwidth > 0.0 && fractions.iter().all(|&x| x > 0.0)) {
        return Err(Error::InvalidArgument(
            "NEΔT, bandwidth and fractions must be positive".into(),
        ));
    }
    let kbt = BOLTZMANN * bandwidth * ne_delta_t;
    let t = ThresholdSet {
        gamma1: ITU_GAMMA1_DBM,
        gamma2: w_to_dbm(fractions[0] * kbt),
        gamma3: w_to_dbm(fractions[1] * kbt),
        gamma4: w_to_dbm(fractions[2] * kbt),
        ne_delta_t,
        bandwidth,
        boltzmann: BOLTZMANN,
        fractions,
    };
    if !(t.gamma4 < t.gamma3 && t.gamma3 < t.gamma2 && t.gamma2 < t.gamma1) {
        return Err(Error::InvalidArgument(format!(
            "thresholds out of order: γ1 {} γ2 {:.2} γ3 {:.2} γ4 {:.2}",
            t.gamma1, t.gamma2, t.gamma3, t.gamma4
        )));
    }
    Ok(t)
}

/// Empirical CCDF over a time base that includes uncoupled samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccdf {
    /// Coupled powers, ascending.
    sorted: Vec<f64>,
    total: usize,
}

impl Ccdf {
    /// Powers in dBm; `None` marks a sample with no coupling.
    pub fn new<I: IntoIterator<Item = Option<f64>>>(powers: I) -> Result<Self> {
        let mut total = 0;
        let mut sorted = Vec::new();
        for p in powers {
            total += 1;
            if let Some(v) = p {
                sorted.push(v);
            }
        }
        if total == 0 {
            return Err(Error::EmptySamples);
        }
        sorted.sort_by(f64::total_cmp);
        Ok(Ccdf { sorted, total })
    }

    pub fn from_samples(samples: &[InterferenceSample]) -> Result<Self> {
        Ccdf::new(samples.iter().map(|s| s.power_dbm))
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn coupled(&self) -> usize {
        self.sorted.len()
    }

    /// Number of samples strictly above `x`.
    pub fn count_above(&self, x: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&v| v <= x)
    }

    /// Percentage of the time base strictly above `x`.
    pub fn percent_above(&self, x: f64) -> f64 {
        100.0 * self.count_above(x) as f64 / self.total as f64
    }

    pub fn max(&self) -> Option<f64> {
        self.sorted.last().copied()
    }

    /// Exact step curve: one (power, percent above) point per distinct power.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &v in &self.sorted {
            if out.last().is_some_and(|&(p, _)| p == v) {
                continue;
            }
            let above = self.sorted.len() - self.sorted.partition_point(|&w| w <= v);
            out.push((v, 100.0 * above as f64 / self.total as f64));
        }
        out
    }

    /// Curve sampled at multiples of `step` dB covering the coupled range.
    pub fn on_grid(&self, step: f64) -> Vec<(f64, f64)> {
        let (Some(&lo), Some(&hi)) = (self.sorted.first(), self.sorted.last()) else {
            return Vec::new();
        };
        let first = (lo / step).floor() as i64 - 1;
        let last = (hi / step).ceil() as i64;
        (first..=last)
            .map(|k| {
                let x = k as f64 * step;
                (x, self.percent_above(x))
            })
            .collect()
    }
}

/// Empirical CCDF of a sample list.
pub fn ccdf(samples: &[InterferenceSample]) -> Result<Ccdf> {
    Ccdf::from_samples(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exceedance {
    pub percent: f64,
    pub harmful: bool,
    pub sample_count: usize,
}

/// Percentage of time above `threshold`; harmful when strictly above 0.01%.
pub fn exceedance(samples: &[InterferenceSample], threshold: f64) -> Result<Exceedance> {
    Ok(exceedance_of(&ccdf(samples)?, threshold))
}

pub fn exceedance_of(c: &Ccdf, threshold: f64) -> Exceedance {
    let percent = c.percent_above(threshold);
    Exceedance {
        percent,
        harmful: is_harmful(percent),
        sample_count: c.total(),
    }
}

pub fn is_harmful(percent: f64) -> bool {
    percent > HARMFUL_PERCENT
}

/// Strongest interference seen at one satellite position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub pose_id: usize,
    pub latitude: f64,
    pub longitude: f64,
    /// `None` when nothing couples at this pose.
    pub max_dbm: Option<f64>,
    /// Against γ1..γ4.
    pub exceeds: [bool; 4],
}

/// Per pose, the maximum power over all scan and transmitter orientations.
pub fn position_heatmap(
    samples: &[InterferenceSample],
    poses: &[SatellitePose],
    thresholds: &ThresholdSet,
) -> Vec<HeatmapCell> {
    let mut max: Vec<Option<f64>> = vec![None; poses.len()];
    for s in samples {
        if let (Some(p), Some(slot)) = (s.power_dbm, max.get_mut(s.pose_id)) {
            *slot = Some(slot.map_or(p, |m: f64| m.max(p)));
        }
    }
    poses
        .iter()
        .zip(max)
        .enumerate()
        .map(|(pose_id, (pose, m))| {
            let g = pose.subsatellite_point();
            let exceeds = thresholds
                .gammas()
                .map(|(_, gamma)| m.is_some_and(|v| v > gamma));
            HeatmapCell {
                pose_id,
                latitude: g.latitude,
                longitude: g.longitude,
                max_dbm: m,
                exceeds,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misalignment {
    pub pose_id: usize,
    pub latitude: f64,
    pub longitude: f64,
    /// Angle between scan boresight and the strongest ray, degrees; `None`
    /// when nothing couples at this pose.
    pub degrees: Option<f64>,
}

/// Angle between a scan boresight and an arrival direction, degrees.
pub fn misalignment_deg(scan: Orientation, aoa: Orientation) -> f64 {
    scan.angle_to(aoa)
}

/// Per pose, the misalignment of the strongest sample's strongest ray.
pub fn misalignment_map(
    samples: &[InterferenceSample],
    poses: &[SatellitePose],
) -> Vec<Misalignment> {
    let mut best: Vec<Option<&InterferenceSample>> = vec![None; poses.len()];
    for s in samples {
        let (Some(p), Some(slot)) = (s.power_dbm, best.get_mut(s.pose_id)) else {
            continue;
        };
        if slot.map_or(true, |b| p > b.power_dbm.unwrap_or(f64::NEG_INFINITY)) {
            *slot = Some(s);
        }
    }
    poses
        .iter()
        .zip(best)
        .enumerate()
        .map(|(pose_id, (pose, b))| {
            let g = pose.subsatellite_point();
            Misalignment {
                pose_id,
                latitude: g.latitude,
                longitude: g.longitude,
                degrees: b.and_then(|s| {
                    s.strongest_aoa
                        .map(|a| misalignment_deg(s.scan.orientation(), a))
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_thresholds() {
        let t = ThresholdSet::default();
        assert!((t.noise_equivalent_power_w() - 8.283_894e-16).abs() < 1e-21);
        assert!((t.gamma2 - -140.8177).abs() < 1e-4);
        assert!((t.gamma3 - -150.8177).abs() < 1e-4);
        assert!((t.gamma4 - -160.8177).abs() < 1e-4);
        assert!((t.gamma2.round() - -141.0).abs() < 1e-12);
        assert!((t.gamma1_degradation_k() - 0.009_097).abs() < 1e-6);
        assert!((t.gamma1_fraction() - 0.0303).abs() < 1e-4);
    }

    #[test]
    fn thresholds_must_be_ordered() {
        assert!(derive_thresholds(0.3, 2e8, [1.0, 0.1, 0.01]).is_err());
        assert!(derive_thresholds(0.3, 2e8, [0.001, 0.01, 0.0001]).is_err());
        assert!(derive_thresholds(0.0, 2e8, DEFAULT_FRACTIONS).is_err());
    }

    #[test]
    fn ccdf_counts() {
        let c = Ccdf::new(vec![Some(-150.0); 10]).unwrap();
        assert_eq!(c.percent_above(-150.1), 100.0);
        assert_eq!(c.percent_above(-150.0), 0.0);
        assert!(Ccdf::new(Vec::<Option<f64>>::new()).is_err());

        let mut v = vec![Some(-200.0); 10_000];
        v[0] = Some(-130.0);
        v[1] = Some(-120.0);
        let c = Ccdf::new(v).unwrap();
        assert!((c.percent_above(-136.0) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn sentinels_halve_the_curve() {
        let coupled: Vec<Option<f64>> = (0..50).map(|i| Some(-180.0 + i as f64)).collect();
        let mixed: Vec<Option<f64>> = coupled
            .iter()
            .copied()
            .chain(std::iter::repeat(None).take(50))
            .collect();
        let (a, b) = (Ccdf::new(coupled).unwrap(), Ccdf::new(mixed).unwrap());
        for x in [-190.0, -175.5, -140.0, -131.0] {
            assert!((b.percent_above(x) * 2.0 - a.percent_above(x)).abs() < 1e-12);
        }
        assert_eq!(b.coupled(), 50);
        assert_eq!(b.total(), 100);
    }

    #[test]
    fn harmful_boundary() {
        assert!(!is_harmful(0.0039));
        assert!(is_harmful(0.0126));
        assert!(!is_harmful(0.01));
    }

    #[test]
    fn steps_are_right_continuous() {
        let c = Ccdf::new([Some(1.0), Some(2.0), Some(2.0), None]).unwrap();
        assert_eq!(c.steps(), vec![(1.0, 50.0), (2.0, 0.0)]);
        let g = c.on_grid(0.5);
        assert_eq!(g.first(), Some(&(0.5, 75.0)));
        assert_eq!(g.last(), Some(&(2.0, 0.0)));
    }

    #[test]
    fn misalignment_examples() {
        let scan = Orientation::new(0.0, -45.0);
        assert!(misalignment_deg(scan, scan).abs() < 1e-9);
        assert!((misalignment_deg(scan, Orientation::new(180.0, 45.0)) - 180.0).abs() < 1e-9);
        assert!((misalignment_deg(scan, Orientation::new(0.0, -48.33)) - 3.33).abs() < 1e-9);
    }
}
