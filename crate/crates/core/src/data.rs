//! Operational records, model features and dataset splitting.

use alloc::format;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// One timestamped operational sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoyageRecord {
    /// UTC seconds since the Unix epoch.
    pub timestamp: i64,
    /// Main engine brake power, kW.
    pub power: f64,
    /// Speed through water, knots.
    pub speed: f64,
    /// Mean draft, metres.
    pub draft: f64,
    /// Longitudinal trim, metres (signed).
    pub trim: f64,
    /// True wind speed, knots.
    pub wind_speed: f64,
    /// True wind direction, degrees in `[0, 360)`.
    pub wind_dir: f64,
}

impl VoyageRecord {
    /// Checks the record invariants, naming the first offending column.
    pub fn validate(&self) -> Result<()> {
        fn field(column: &'static str, reason: alloc::string::String) -> Error {
            Error::Field { column, reason }
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(field("power_kw", format!("must be >= 0, got {}", self.power)));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(field("stw_kn", format!("must be > 0, got {}", self.speed)));
        }
        if !(self.draft > 0.0 && self.draft.is_finite()) {
            return Err(field("draft_m", format!("must be > 0, got {}", self.draft)));
        }
        if !self.trim.is_finite() {
            return Err(field("trim_m", format!("must be finite, got {}", self.trim)));
        }
        if !(self.wind_speed >= 0.0 && self.wind_speed.is_finite()) {
            return Err(field("wind_speed_kn", format!("must be >= 0, got {}", self.wind_speed)));
        }
        if !(0.0..360.0).contains(&self.wind_dir) {
            return Err(field("wind_dir_deg", format!("must lie in [0, 360), got {}", self.wind_dir)));
        }
        Ok(())
    }

    pub fn features(&self) -> FeatureVector {
        engineer_features(self)
    }
}

/// Model input: speed, draft, trim and the wind decomposed into
/// longitudinal (`wx`) and transverse (`wy`) components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub speed: f64,
    pub draft: f64,
    pub trim: f64,
    pub wx: f64,
    pub wy: f64,
}

impl FeatureVector {
    pub const DIM: usize = 5;
    pub const SPEED: usize = 0;
    pub const DRAFT: usize = 1;
    pub const NAMES: [&'static str; 5] = ["stw_kn", "draft_m", "trim_m", "wx_kn", "wy_kn"];

    pub const fn new(speed: f64, draft: f64, trim: f64, wx: f64, wy: f64) -> Self {
        Self {
            speed,
            draft,
            trim,
            wx,
            wy,
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.speed, self.draft, self.trim, self.wx, self.wy]
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match *x {
            [speed, draft, trim, wx, wy] => Ok(Self::new(speed, draft, trim, wx, wy)),
            _ => Err(Error::Shape {
                expected: Self::DIM,
                got: x.len(),
            }),
        }
    }
}

/// Decomposes true wind into `Wx = WTS·cos(WTD)`, `Wy = WTS·sin(WTD)`;
/// WTD is stored in degrees.
pub fn engineer_features(r: &VoyageRecord) -> FeatureVector {
    let (s, c) = math::sin_cos(r.wind_dir.to_radians());
    FeatureVector::new(r.speed, r.draft, r.trim, r.wind_speed * c, r.wind_speed * s)
}

/// Row indices of the train/validation/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.8, 0.1, 0.1];

/// Shuffles `0..n_records` with a seeded ChaCha8 stream and cuts it at the
/// fraction boundaries (train and validation sizes are rounded, test takes
/// the remainder).
pub fn split_dataset(n_records: usize, fractions: [f64; 3], seed: u64) -> Result<DatasetSplit> {
    if n_records < 10 {
        return Err(Error::config(format!("need at least 10 records to split, got {n_records}")));
    }
    let total: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(*f >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!("split fractions {fractions:?} must be non-negative and sum to 1")));
    }

    let mut order: Vec<usize> = (0..n_records).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n_records).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }

    let n = n_records as f64;
    let n_train = (math::round(fractions[0] * n) as usize).min(n_records);
    let n_val = (math::round(fractions[1] * n) as usize).min(n_records - n_train);
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok(DatasetSplit {
        seed,
        train: order,
        validation,
        test,
    })
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every index below `n_records` appears exactly once.
    pub fn is_partition_of(&self, n_records: usize) -> bool {
        let mut seen = alloc::vec![false; n_records];
        for &i in self.train.iter().chain(&self.validation).chain(&self.test) {
            if i >= n_records || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.iter().all(|s| *s)
    }
}
