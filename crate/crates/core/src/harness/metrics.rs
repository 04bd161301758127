use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::baseline::SeaTrialBaseline;
use crate::error::{Error, Result};
use crate::math;
use crate::model::{Family, Mode, PreparedData, TrainedModel};

/// Error summary of one split, in kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsEntry {
    pub mae: f64,
    pub rmse: f64,
    pub n: usize,
}

/// MAE and RMSE of `predicted` against `actual`.
pub fn compute_metrics(predicted: &[f64], actual: &[f64]) -> Result<MetricsEntry> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::Empty("split"));
    }
    let n = actual.len() as f64;
    let (mut abs, mut sq) = (0.0, 0.0);
    for (p, a) in predicted.iter().zip(actual) {
        let e = p - a;
        abs += e.abs();
        sq += e * e;
    }
    Ok(MetricsEntry {
        mae: abs / n,
        rmse: math::sqrt(sq / n),
        n: actual.len(),
    })
}

/// Per-split errors of one trained model, total power in kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub family: Family,
    pub mode: Mode,
    pub train: MetricsEntry,
    pub validation: MetricsEntry,
    pub test: MetricsEntry,
}

impl MetricsReport {
    pub fn entries(&self) -> [(&'static str, &MetricsEntry); 3] {
        [("train", &self.train), ("validation", &self.validation), ("test", &self.test)]
    }
}

fn split_metrics(
    model: &TrainedModel,
    baseline: Option<&SeaTrialBaseline>,
    data: &PreparedData,
    idx: &[usize],
) -> Result<MetricsEntry> {
    let predicted = idx
        .iter()
        .map(|&i| model.predict_power(baseline, &data.features[i]))
        .collect::<Result<Vec<_>>>()?;
    let actual: Vec<f64> = idx.iter().map(|&i| data.power[i]).collect();
    compute_metrics(&predicted, &actual)
}

/// Evaluates total-power predictions on every split.
pub fn evaluate_model(
    model: &TrainedModel,
    baseline: Option<&SeaTrialBaseline>,
    data: &PreparedData,
) -> Result<MetricsReport> {
    Ok(MetricsReport {
        family: model.family,
        mode: model.mode,
        train: split_metrics(model, baseline, data, &data.split.train)?,
        validation: split_metrics(model, baseline, data, &data.split.validation)?,
        test: split_metrics(model, baseline, data, &data.split.test)?,
    })
}
