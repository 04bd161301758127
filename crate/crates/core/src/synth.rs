//! Synthetic voyage generator with logged ground truth.
//!
//! Power is the calm-water baseline plus three known effects and Gaussian
//! measurement noise:
//!
//! ```text
//! P = baseline(V, T) + a_w·WTS²·(1 + cos WTD)/2 + a_trim·trim² + a_age·days + ε
//! ```
//!
//! Speeds above `sparse_band_start_kn` are drawn only with probability
//! `sparse_band_fraction`, leaving that band thin (or empty) so models have
//! to extrapolate into it.

use alloc::format;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::baseline::{PowerCurve, SeaTrialBaseline, SeaTrialPoint};
use crate::data::VoyageRecord;
use crate::error::{Error, Result};
use crate::math;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub c: f64,
    pub n: f64,
    pub draft_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_records: usize,
    pub ballast: CurveConfig,
    pub laden: CurveConfig,
    pub speed_range_kn: [f64; 2],
    pub draft_range_m: [f64; 2],
    pub trim_range_m: [f64; 2],
    pub wind_speed_max_kn: f64,
    /// a_w, kW per kn².
    pub wind_coeff: f64,
    /// a_trim, kW per m².
    pub trim_coeff: f64,
    /// a_age, kW per day since the first record.
    pub aging_coeff: f64,
    pub noise_std_kw: f64,
    pub sparse_band_start_kn: Option<f64>,
    pub sparse_band_fraction: f64,
    /// UTC seconds of the first record.
    pub start_timestamp: i64,
    pub duration_days: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_records: 5000,
            ballast: CurveConfig {
                c: 0.9,
                n: 3.2,
                draft_m: 6.0,
            },
            laden: CurveConfig {
                c: 1.4,
                n: 3.1,
                draft_m: 12.0,
            },
            speed_range_kn: [8.0, 17.0],
            draft_range_m: [6.0, 12.0],
            trim_range_m: [-1.5, 1.5],
            wind_speed_max_kn: 25.0,
            wind_coeff: 1.2,
            trim_coeff: 60.0,
            aging_coeff: 1.5,
            noise_std_kw: 50.0,
            sparse_band_start_kn: Some(14.0),
            sparse_band_fraction: 0.02,
            start_timestamp: 1_704_067_200,
            duration_days: 150.0,
        }
    }
}

/// Additive power components of one generated record, kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub baseline_kw: f64,
    pub wind_kw: f64,
    pub trim_kw: f64,
    pub aging_kw: f64,
    pub noise_kw: f64,
}

impl GroundTruth {
    /// Sum in the order the generator composes power.
    pub fn total(&self) -> f64 {
        self.baseline_kw + self.wind_kw + self.trim_kw + self.aging_kw + self.noise_kw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub records: Vec<VoyageRecord>,
    pub truth: Vec<GroundTruth>,
}

impl GeneratorConfig {
    /// Calm water only: no wind, trim or aging effects.
    pub fn calm() -> Self {
        Self {
            wind_coeff: 0.0,
            trim_coeff: 0.0,
            aging_coeff: 0.0,
            ..Self::default()
        }
    }

    pub fn baseline(&self) -> Result<SeaTrialBaseline> {
        SeaTrialBaseline::new(
            PowerCurve::new(self.ballast.c, self.ballast.n)?,
            self.ballast.draft_m,
            PowerCurve::new(self.laden.c, self.laden.n)?,
            self.laden.draft_m,
        )
    }

    pub fn validate(&self) -> Result<()> {
        fn range(name: &str, r: [f64; 2]) -> Result<()> {
            if r[0].is_finite() && r[1].is_finite() && r[0] < r[1] {
                Ok(())
            } else {
                Err(Error::config(format!("{name} [{}, {}] is empty", r[0], r[1])))
            }
        }
        if self.n_records == 0 {
            return Err(Error::config("n_records must be positive"));
        }
        range("speed_range_kn", self.speed_range_kn)?;
        range("draft_range_m", self.draft_range_m)?;
        range("trim_range_m", self.trim_range_m)?;
        if !(self.speed_range_kn[0] > 0.0) {
            return Err(Error::config("speed range must be positive"));
        }
        if !(self.draft_range_m[0] > 0.0) {
            return Err(Error::config("draft range must be positive"));
        }
        if !(self.wind_speed_max_kn >= 0.0) {
            return Err(Error::config("wind_speed_max_kn must be >= 0"));
        }
        if !(self.noise_std_kw >= 0.0 && self.noise_std_kw.is_finite()) {
            return Err(Error::config("noise_std_kw must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.sparse_band_fraction) {
            return Err(Error::config("sparse_band_fraction must lie in [0, 1]"));
        }
        if let Some(start) = self.sparse_band_start_kn {
            if !(start > self.speed_range_kn[0]) {
                return Err(Error::config("sparse band must start above the minimum speed"));
            }
        }
        if !(self.duration_days >= 0.0) {
            return Err(Error::config("duration_days must be >= 0"));
        }
        self.baseline().map(|_| ())
    }

    pub fn wind_effect(&self, wind_speed: f64, wind_dir_deg: f64) -> f64 {
        let (_, cos) = math::sin_cos(wind_dir_deg.to_radians());
        self.wind_coeff * wind_speed * wind_speed * (1.0 + cos) / 2.0
    }

    pub fn trim_effect(&self, trim: f64) -> f64 {
        self.trim_coeff * trim * trim
    }

    /// Noise-free expected power at an operating point. Aging is taken at
    /// its mean over the recording period, since time is not a model input.
    pub fn expected_power(&self, speed: f64, draft: f64, trim: f64, wind_speed: f64, wind_dir_deg: f64) -> Result<f64> {
        Ok(self.baseline()?.power(speed, draft)?
            + self.wind_effect(wind_speed, wind_dir_deg)
            + self.trim_effect(trim)
            + self.aging_coeff * self.duration_days / 2.0)
    }

    /// Noise-free sea-trial points on each curve at `speeds`.
    pub fn sea_trial_points(&self, speeds: &[f64]) -> Result<(Vec<SeaTrialPoint>, Vec<SeaTrialPoint>)> {
        let b = self.baseline()?;
        let pts = |curve: &PowerCurve| -> Result<Vec<SeaTrialPoint>> {
            speeds.iter().map(|&v| SeaTrialPoint::new(v, curve.evaluate(v))).collect()
        };
        Ok((pts(&b.ballast)?, pts(&b.laden)?))
    }
}

/// Generates `config.n_records` records, deterministic in `seed`.
pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<SyntheticDataset> {
    config.validate()?;
    let baseline = config.baseline()?;
    let noise = Normal::new(0.0, config.noise_std_kw).map_err(|e| Error::config(format!("{e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let [v_lo, v_hi] = config.speed_range_kn;
    let band = config.sparse_band_start_kn.filter(|s| *s < v_hi);
    let n = config.n_records;
    let span_secs = config.duration_days * SECONDS_PER_DAY;

    let mut records = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let speed = match band {
            Some(start) if rng.random::<f64>() < config.sparse_band_fraction => rng.random_range(start..v_hi),
            Some(start) => rng.random_range(v_lo..start),
            None => rng.random_range(v_lo..v_hi),
        };
        let draft = rng.random_range(config.draft_range_m[0]..config.draft_range_m[1]);
        let trim = rng.random_range(config.trim_range_m[0]..config.trim_range_m[1]);
        let wind_speed = rng.random::<f64>() * config.wind_speed_max_kn;
        let wind_dir = rng.random_range(0.0..360.0);
        let noise_kw = noise.sample(&mut rng);

        let offset = (span_secs * i as f64 / n as f64) as i64;
        let timestamp = config.start_timestamp + offset;
        let days = offset as f64 / SECONDS_PER_DAY;

        let gt = GroundTruth {
            baseline_kw: baseline.power(speed, draft)?,
            wind_kw: config.wind_effect(wind_speed, wind_dir),
            trim_kw: config.trim_effect(trim),
            aging_kw: config.aging_coeff * days,
            noise_kw,
        };
        let record = VoyageRecord {
            timestamp,
            power: gt.total(),
            speed,
            draft,
            trim,
            wind_speed,
            wind_dir,
        };
        record
            .validate()
            .map_err(|e| Error::config(format!("generated record {i} is invalid ({e}); reduce noise or raise speeds")))?;
        records.push(record);
        truth.push(gt);
    }
    Ok(SyntheticDataset { records, truth })
}
