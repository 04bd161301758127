//! Speed sweep at fixed draft and wind, comparing pure and hybrid models
//! against the bare baseline, with nearest-sample annotations.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::baseline::SeaTrialBaseline;
use crate::data::{engineer_features, FeatureVector, VoyageRecord};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{Mode, PreparedData, TrainedModel};
use crate::scaler::StandardScaler;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepScenario {
    /// Draft in metres; the baseline's ballast draft when unset.
    pub draft: Option<f64>,
    pub wind_speed: f64,
    pub trim: f64,
    pub directions: Vec<f64>,
    pub speed_min: f64,
    pub speed_max: f64,
    pub speed_step: f64,
}

impl Default for SweepScenario {
    fn default() -> Self {
        Self {
            draft: None,
            wind_speed: 5.0,
            trim: 0.0,
            directions: alloc::vec![0.0, 90.0, 180.0],
            speed_min: 8.0,
            speed_max: 17.0,
            speed_step: 0.5,
        }
    }
}

impl SweepScenario {
    /// Grid speeds from `speed_min` to `speed_max` inclusive.
    pub fn speeds(&self) -> Result<Vec<f64>> {
        if !(self.speed_min > 0.0 && self.speed_max > self.speed_min && self.speed_step > 0.0) {
            return Err(Error::config(format!(
                "sweep needs 0 < speed_min < speed_max and a positive step, got {}..{} by {}",
                self.speed_min, self.speed_max, self.speed_step
            )));
        }
        let steps = math::round((self.speed_max - self.speed_min) / self.speed_step) as usize;
        Ok((0..=steps).map(|i| self.speed_min + i as f64 * self.speed_step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub direction_deg: f64,
    pub speed_kn: f64,
    pub baseline_kw: f64,
    pub pure_kw: f64,
    pub hybrid_kw: f64,
    /// The hybrid model's own output before the baseline is added.
    pub residual_kw: f64,
    pub nearest_train_dist: f64,
    pub nearest_train_index: usize,
    pub nearest_test_dist: f64,
    pub nearest_test_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub draft_m: f64,
    pub wind_speed_kn: f64,
    pub trim_m: f64,
    /// Ordered by direction, then by increasing speed.
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepColumn {
    Baseline,
    Pure,
    Hybrid,
}

impl SweepRow {
    pub fn get(&self, column: SweepColumn) -> f64 {
        match column {
            SweepColumn::Baseline => self.baseline_kw,
            SweepColumn::Pure => self.pure_kw,
            SweepColumn::Hybrid => self.hybrid_kw,
        }
    }
}

fn nearest(point: &[f64], candidates: &[Vec<f64>], idx: &[usize]) -> (f64, usize) {
    let mut best = (f64::INFINITY, usize::MAX);
    for (z, &i) in candidates.iter().zip(idx) {
        let d2: f64 = z.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 < best.0 {
            best = (d2, i);
        }
    }
    (math::sqrt(best.0), best.1)
}

fn standardized(scaler: &StandardScaler, data: &PreparedData, idx: &[usize]) -> Result<Vec<Vec<f64>>> {
    idx.iter().map(|&i| scaler.transform(&data.features[i].to_array())).collect()
}

/// Evaluates both models over the scenario grid. `data` is the dataset the
/// models were trained on; its train and test rows provide the
/// nearest-sample annotations in the models' standardized feature space.
pub fn run_sweep(
    pure: &TrainedModel,
    hybrid: &TrainedModel,
    baseline: &SeaTrialBaseline,
    scenario: &SweepScenario,
    data: &PreparedData,
) -> Result<SweepReport> {
    if pure.mode != Mode::Pure {
        return Err(Error::ModeMismatch("sweep `pure` model was trained on residual targets".into()));
    }
    if hybrid.mode != Mode::Hybrid {
        return Err(Error::ModeMismatch("sweep `hybrid` model was trained on total power".into()));
    }
    if pure.input_scaler != hybrid.input_scaler {
        return Err(Error::config("sweep models were not trained on the same training split"));
    }
    if data.split.train.is_empty() || data.split.test.is_empty() {
        return Err(Error::Empty("train or test split"));
    }
    let scaler = &hybrid.input_scaler;
    let train = standardized(scaler, data, &data.split.train)?;
    let test = standardized(scaler, data, &data.split.test)?;

    let draft = scenario.draft.unwrap_or(baseline.ballast_draft);
    let speeds = scenario.speeds()?;
    let mut rows = Vec::with_capacity(speeds.len() * scenario.directions.len());
    for &direction in &scenario.directions {
        for &speed in &speeds {
            let x: FeatureVector = engineer_features(&VoyageRecord {
                timestamp: 0,
                power: 0.0,
                speed,
                draft,
                trim: scenario.trim,
                wind_speed: scenario.wind_speed,
                wind_dir: direction,
            });
            let baseline_kw = baseline.power(speed, draft)?;
            let residual_kw = hybrid.predict(&x)?;
            let z = scaler.transform(&x.to_array())?;
            let (nearest_train_dist, nearest_train_index) = nearest(&z, &train, &data.split.train);
            let (nearest_test_dist, nearest_test_index) = nearest(&z, &test, &data.split.test);
            rows.push(SweepRow {
                direction_deg: direction,
                speed_kn: speed,
                baseline_kw,
                pure_kw: pure.predict(&x)?,
                hybrid_kw: hybrid.predict_power(Some(baseline), &x)?,
                residual_kw,
                nearest_train_dist,
                nearest_train_index,
                nearest_test_dist,
                nearest_test_index,
            });
        }
    }
    Ok(SweepReport {
        draft_m: draft,
        wind_speed_kn: scenario.wind_speed,
        trim_m: scenario.trim,
        rows,
    })
}

/// Fraction of consecutive speed pairs, within each direction, where
/// `column` strictly increases.
pub fn monotonicity_score(report: &SweepReport, column: SweepColumn) -> Result<f64> {
    let (mut rising, mut pairs) = (0usize, 0usize);
    let mut start = 0;
    while start < report.rows.len() {
        let dir = report.rows[start].direction_deg;
        let end = start + report.rows[start..].iter().take_while(|r| r.direction_deg == dir).count();
        let group = &report.rows[start..end];
        if group.len() < 2 {
            return Err(Error::config(format!("direction {dir} has fewer than 2 speeds")));
        }
        for w in group.windows(2) {
            if w[1].speed_kn <= w[0].speed_kn {
                return Err(Error::config("sweep rows are not sorted by speed within a direction"));
            }
            pairs += 1;
            if w[1].get(column) > w[0].get(column) {
                rising += 1;
            }
        }
        start = end;
    }
    if pairs == 0 {
        return Err(Error::Empty("sweep report"));
    }
    Ok(rising as f64 / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split_dataset, DEFAULT_FRACTIONS};
    use crate::model::{train_model, Family, ModelSpec};
    use crate::synth::{generate_synthetic, GeneratorConfig};

    fn report_from(values: &[[f64; 19]; 3]) -> SweepReport {
        let speeds = SweepScenario::default().speeds().unwrap();
        let mut rows = Vec::new();
        for (d, col) in [0.0, 90.0, 180.0].iter().zip(values) {
            for (s, v) in speeds.iter().zip(col) {
                rows.push(SweepRow {
                    direction_deg: *d,
                    speed_kn: *s,
                    baseline_kw: *v,
                    pure_kw: 1.0,
                    hybrid_kw: *v,
                    residual_kw: 0.0,
                    nearest_train_dist: 0.0,
                    nearest_train_index: 0,
                    nearest_test_dist: 0.0,
                    nearest_test_index: 0,
                });
            }
        }
        SweepReport {
            draft_m: 6.0,
            wind_speed_kn: 5.0,
            trim_m: 0.0,
            rows,
        }
    }

    #[test]
    fn default_grid() {
        let s = SweepScenario::default().speeds().unwrap();
        assert_eq!(s.len(), 19);
        assert_eq!((s[0], s[1], s[18]), (8.0, 8.5, 17.0));
    }

    #[test]
    fn monotonicity_hand_counts() {
        let mut up = [0.0; 19];
        for (i, v) in up.iter_mut().enumerate() {
            *v = i as f64;
        }
        let mut dipped = up;
        dipped[10] = 8.5;
        let r = report_from(&[dipped, dipped, dipped]);
        assert!((monotonicity_score(&r, SweepColumn::Hybrid).unwrap() - 17.0 / 18.0).abs() < 1e-15);
        assert_eq!(monotonicity_score(&r, SweepColumn::Pure).unwrap(), 0.0);
        let r = report_from(&[up, up, up]);
        assert_eq!(monotonicity_score(&r, SweepColumn::Baseline).unwrap(), 1.0);
    }

    #[test]
    fn monotonicity_needs_two_speeds() {
        let mut r = report_from(&[[0.0; 19]; 3]);
        r.rows.truncate(20);
        assert!(monotonicity_score(&r, SweepColumn::Baseline).is_err());
    }

    #[test]
    fn sweep_identity_and_annotations() {
        let cfg = GeneratorConfig {
            n_records: 300,
            ..GeneratorConfig::default()
        };
        let ds = generate_synthetic(&cfg, 4).unwrap();
        let split = split_dataset(ds.records.len(), DEFAULT_FRACTIONS, 4).unwrap();
        let data = PreparedData::new(&ds.records, split).unwrap();
        let b = cfg.baseline().unwrap();
        let mut spec = ModelSpec::new(Family::Gbt, Mode::Pure);
        spec.gbt.n_estimators = 20;
        let pure = train_model(&data, None, &spec).unwrap().model;
        spec.mode = Mode::Hybrid;
        let hybrid = train_model(&data, Some(&b), &spec).unwrap().model;

        let report = run_sweep(&pure, &hybrid, &b, &SweepScenario::default(), &data).unwrap();
        assert_eq!(report.rows.len(), 57);
        assert_eq!(report.draft_m, b.ballast_draft);
        for r in &report.rows {
            let diff = r.hybrid_kw - r.baseline_kw;
            assert!((diff - r.residual_kw).abs() <= 1e-9 * r.residual_kw.abs().max(1.0));
            assert!(data.split.train.contains(&r.nearest_train_index));
            assert!(data.split.test.contains(&r.nearest_test_index));
            assert!(r.nearest_train_dist >= 0.0 && r.nearest_test_dist >= 0.0);
        }
        assert_eq!(monotonicity_score(&report, SweepColumn::Baseline).unwrap(), 1.0);
        let again = run_sweep(&pure, &hybrid, &b, &SweepScenario::default(), &data).unwrap();
        assert_eq!(report, again);

        assert!(matches!(
            run_sweep(&hybrid, &hybrid, &b, &SweepScenario::default(), &data),
            Err(Error::ModeMismatch(_))
        ));
    }
}
