//! Atmospheric attenuation versus link unavailability probability p.
//!
//! L_atm(p) = A_G + sqrt((A_R + A_C)² + A_S^k), with each component looked up
//! from a table keyed on p (percent) and interpolated linearly in log10(p).
//! The scintillation exponent k defaults to 3. The usual combination of
//! independent fades squares A_S instead; set k = 2 for that behavior.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest and largest unavailability probabilities a table must cover, %.
pub const P_MIN: f64 = 0.001;
pub const P_MAX: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScintillationExponent {
    Two,
    #[default]
    Three,
}

impl ScintillationExponent {
    pub fn value(self) -> i32 {
        match self {
            ScintillationExponent::Two => 2,
            ScintillationExponent::Three => 3,
        }
    }

    pub fn from_int(k: u8) -> Result<Self> {
        match k {
            2 => Ok(ScintillationExponent::Two),
            3 => Ok(ScintillationExponent::Three),
            _ => Err(Error::InvalidArgument(format!(
                "scintillation exponent must be 2 or 3, got {k}"
            ))),
        }
    }
}

/// Attenuation components at one probability, dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtmosphereRow {
    pub p_percent: f64,
    pub a_g: f64,
    pub a_r: f64,
    pub a_c: f64,
    pub a_s: f64,
}

impl AtmosphereRow {
    pub fn combine(&self, exponent: ScintillationExponent) -> f64 {
        let wet = self.a_r + self.a_c;
        self.a_g + (wet * wet + self.a_s.powi(exponent.value())).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphereTable {
    rows: Vec<AtmosphereRow>,
    exponent: ScintillationExponent,
}

impl AtmosphereTable {
    pub fn new(rows: Vec<AtmosphereRow>, exponent: ScintillationExponent) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Atmosphere("table has no rows".into()));
        }
        for r in &rows {
            if [r.a_g, r.a_r, r.a_c, r.a_s]
                .iter()
                .any(|v| !(v.is_finite() && *v >= 0.0))
            {
                return Err(Error::Atmosphere(format!(
                    "negative or non-finite component at p = {}",
                    r.p_percent
                )));
            }
        }
        for w in rows.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if !(b.p_percent > a.p_percent) {
                return Err(Error::Atmosphere(format!(
                    "p keys must be strictly increasing ({} then {})",
                    a.p_percent, b.p_percent
                )));
            }
            if b.a_g > a.a_g || b.a_r > a.a_r || b.a_c > a.a_c || b.a_s > a.a_s {
                return Err(Error::Atmosphere(format!(
                    "components must not increase with p (between p = {} and {})",
                    a.p_percent, b.p_percent
                )));
            }
        }
        let (first, last) = (rows[0].p_percent, rows[rows.len() - 1].p_percent);
        if first > P_MIN || last < P_MAX {
            return Err(Error::Atmosphere(format!(
                "table covers [{first}, {last}]%; it must include {P_MIN}% and {P_MAX}%"
            )));
        }
        Ok(AtmosphereTable { rows, exponent })
    }

    /// A table with the same four components at every p.
    pub fn constant(
        a_g: f64,
        a_r: f64,
        a_c: f64,
        a_s: f64,
        exponent: ScintillationExponent,
    ) -> Self {
        let row = |p| AtmosphereRow {
            p_percent: p,
            a_g,
            a_r,
            a_c,
            a_s,
        };
        AtmosphereTable {
            rows: vec![row(P_MIN), row(P_MAX)],
            exponent,
        }
    }

    pub fn exponent(&self) -> ScintillationExponent {
        self.exponent
    }

    pub fn with_exponent(mut self, exponent: ScintillationExponent) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn rows(&self) -> &[AtmosphereRow] {
        &self.rows
    }

    /// Components at p, interpolated linearly in log10(p).
    pub fn components(&self, p: f64) -> Result<AtmosphereRow> {
        if !(P_MIN..=P_MAX).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let i = self.rows.partition_point(|r| r.p_percent <= p);
        if i == 0 {
            return Ok(self.rows[0]);
        }
        let a = &self.rows[i - 1];
        if a.p_percent == p || i == self.rows.len() {
            return Ok(AtmosphereRow { p_percent: p, ..*a });
        }
        let b = &self.rows[i];
        let t = (p.log10() - a.p_percent.log10()) / (b.p_percent.log10() - a.p_percent.log10());
        let lerp = |x: f64, y: f64| x + (y - x) * t;
        Ok(AtmosphereRow {
            p_percent: p,
            a_g: lerp(a.a_g, b.a_g),
            a_r: lerp(a.a_r, b.a_r),
            a_c: lerp(a.a_c, b.a_c),
            a_s: lerp(a.a_s, b.a_s),
        })
    }

    /// Total attenuation at p percent, dB.
    pub fn l_atm(&self, p: f64) -> Result<f64> {
        Ok(self.components(p)?.combine(self.exponent))
    }
}

/// Loads a `p_percent, a_g_db, a_r_db, a_c_db, a_s_db` table.
pub fn load_atmosphere_table(
    path: impl AsRef<Path>,
    exponent: ScintillationExponent,
) -> Result<AtmosphereTable> {
    let path = path.as_ref();
    let ctx = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&ctx, e))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(&ctx, e))?;
        let v: Vec<f64> = (0..5)
            .map(|k| {
                rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| {
                    Error::parse(
                        &ctx,
                        format!("row {}: column {} is not a number", i + 1, k + 1),
                    )
                })
            })
            .collect::<Result<_>>()?;
        rows.push(AtmosphereRow {
            p_percent: v[0],
            a_g: v[1],
            a_r: v[2],
            a_c: v[3],
            a_s: v[4],
        });
    }
    AtmosphereTable::new(rows, exponent)
}
