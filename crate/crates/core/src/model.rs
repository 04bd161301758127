//! Trained regressors with their scalers, and the shared training pipeline
//! for all six model variants (pure/hybrid × GBT/NN/PINN).

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::baseline::{self, SeaTrialBaseline};
use crate::data::{DatasetSplit, FeatureVector, VoyageRecord};
use crate::error::{Error, Result};
use crate::gbt::{self, GbtConfig, GbtModel};
use crate::neural::{self, EpochRecord, Mlp, MlpConfig, TrainOptions};
use crate::pinn::{self, PinnConfig};
use crate::scaler::StandardScaler;

/// What a regressor's target is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Total power.
    Pure,
    /// Power minus the sea-trial baseline.
    #[serde(alias = "residual")]
    Hybrid,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pure => "pure",
            Mode::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gbt,
    Nn,
    Pinn,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Gbt => "gbt",
            Family::Nn => "nn",
            Family::Pinn => "pinn",
        }
    }
}

/// Anything that maps features to a power quantity in kW.
pub trait PowerRegressor {
    fn mode(&self) -> Mode;
    fn predict(&self, x: &FeatureVector) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regressor {
    Gbt(GbtModel),
    Mlp { network: Mlp },
}

/// A fitted regressor with the scalers it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub family: Family,
    pub mode: Mode,
    pub input_scaler: StandardScaler,
    pub target_scaler: StandardScaler,
    pub regressor: Regressor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinn: Option<PinnConfig>,
}

impl TrainedModel {
    /// Raw regressor output in kW: total power for pure models, residual
    /// power for hybrid ones.
    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        let z = self.input_scaler.transform(&x.to_array())?;
        let y = match &self.regressor {
            Regressor::Gbt(m) => m.predict(&z)?,
            Regressor::Mlp { network } => network.forward(&z)?,
        };
        self.target_scaler.inverse_value(0, y)
    }

    /// Total power in kW; hybrid models add the baseline.
    pub fn predict_power(&self, baseline: Option<&SeaTrialBaseline>, x: &FeatureVector) -> Result<f64> {
        match (self.mode, baseline) {
            (Mode::Pure, _) => self.predict(x),
            (Mode::Hybrid, Some(b)) => baseline::hybrid_predict(b, self, x),
            (Mode::Hybrid, None) => Err(Error::config("hybrid model needs a sea-trial baseline")),
        }
    }
}

impl PowerRegressor for TrainedModel {
    fn mode(&self) -> Mode {
        self.mode
    }

    fn predict(&self, x: &FeatureVector) -> Result<f64> {
        TrainedModel::predict(self, x)
    }
}

/// Features and measured power for a dataset, with its split.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub features: Vec<FeatureVector>,
    pub power: Vec<f64>,
    pub split: DatasetSplit,
}

impl PreparedData {
    pub fn new(records: &[VoyageRecord], split: DatasetSplit) -> Result<Self> {
        if !split.is_partition_of(records.len()) {
            return Err(Error::config(format!(
                "split does not partition the {} records",
                records.len()
            )));
        }
        Ok(Self {
            features: records.iter().map(VoyageRecord::features).collect(),
            power: records.iter().map(|r| r.power).collect(),
            split,
        })
    }

    pub fn subset(&self, idx: &[usize]) -> (Vec<FeatureVector>, Vec<f64>) {
        (
            idx.iter().map(|&i| self.features[i]).collect(),
            idx.iter().map(|&i| self.power[i]).collect(),
        )
    }

    /// Regression targets for `mode`: power, or power minus the baseline
    /// (in kW, before any standardization).
    pub fn targets(&self, idx: &[usize], mode: Mode, baseline: Option<&SeaTrialBaseline>) -> Result<Vec<f64>> {
        idx.iter()
            .map(|&i| match (mode, baseline) {
                (Mode::Pure, _) => Ok(self.power[i]),
                (Mode::Hybrid, Some(b)) => {
                    let x = &self.features[i];
                    Ok(self.power[i] - b.power(x.speed, x.draft)?)
                }
                (Mode::Hybrid, None) => Err(Error::config("hybrid mode needs a sea-trial baseline")),
            })
            .collect()
    }
}

/// Everything needed to train one model variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub mode: Mode,
    pub gbt: GbtConfig,
    pub mlp: MlpConfig,
    pub train: TrainOptions,
    pub lambda_phys: f64,
    /// Propeller-law coefficient; estimated from the training split when unset.
    pub c_prop: Option<f64>,
}

impl ModelSpec {
    pub fn new(family: Family, mode: Mode) -> Self {
        Self {
            family,
            mode,
            gbt: GbtConfig::default(),
            mlp: MlpConfig {
                input_dim: FeatureVector::DIM,
                hidden_layers: 4,
                neurons_per_layer: 64,
                activation: neural::Activation::Tanh,
                seed: 0,
            },
            train: TrainOptions::default(),
            lambda_phys: pinn::DEFAULT_PHYSICS_WEIGHT,
            c_prop: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    /// Per-epoch losses for network families; empty for GBT.
    pub history: Vec<EpochRecord>,
    /// Per-round training MSE (standardized) for GBT; empty otherwise.
    pub gbt_train_mse: Vec<f64>,
}

fn rows(features: &[FeatureVector], scaler: &StandardScaler) -> Result<Vec<[f64; 5]>> {
    features
        .iter()
        .map(|f| {
            let z = scaler.transform(&f.to_array())?;
            Ok([z[0], z[1], z[2], z[3], z[4]])
        })
        .collect()
}

fn standardize(values: &[f64], scaler: &StandardScaler) -> Result<Vec<f64>> {
    values.iter().map(|v| scaler.transform_value(0, *v)).collect()
}

/// Fits scalers on the training split and trains the requested variant.
pub fn train_model(data: &PreparedData, baseline: Option<&SeaTrialBaseline>, spec: &ModelSpec) -> Result<TrainOutcome> {
    if spec.mode == Mode::Hybrid && baseline.is_none() {
        return Err(Error::config("hybrid mode needs a sea-trial baseline"));
    }
    let train_idx = &data.split.train;
    if train_idx.is_empty() {
        return Err(Error::Empty("training split"));
    }
    let (train_x, train_power) = data.subset(train_idx);
    let (val_x, _) = data.subset(&data.split.validation);
    let train_y = data.targets(train_idx, spec.mode, baseline)?;
    let val_y = data.targets(&data.split.validation, spec.mode, baseline)?;

    let feature_rows: Vec<[f64; 5]> = train_x.iter().map(FeatureVector::to_array).collect();
    let input_scaler = StandardScaler::fitted(&feature_rows)?;
    let target_scaler = StandardScaler::fitted_column(&train_y)?;
    let xs = rows(&train_x, &input_scaler)?;
    let ys = standardize(&train_y, &target_scaler)?;
    let vxs = rows(&val_x, &input_scaler)?;
    let vys = standardize(&val_y, &target_scaler)?;

    let mut history = Vec::new();
    let mut gbt_train_mse = Vec::new();
    let mut pinn_cfg = None;
    let regressor = match spec.family {
        Family::Gbt => {
            let fit = gbt::train(&xs, &ys, &spec.gbt, spec.mode)?;
            gbt_train_mse = fit.train_mse;
            Regressor::Gbt(fit.model)
        }
        Family::Nn => {
            let (network, h) = neural::train_mlp(&xs, &ys, &vxs, &vys, &spec.mlp, &spec.train)?;
            history = h;
            Regressor::Mlp { network }
        }
        Family::Pinn => {
            let c_prop = match spec.c_prop {
                Some(c) => c,
                None => {
                    let speeds: Vec<f64> = train_x.iter().map(|f| f.speed).collect();
                    baseline::estimate_propeller_coefficient(&speeds, &train_power)?
                }
            };
            let cfg = PinnConfig {
                lambda_phys: spec.lambda_phys,
                mode: spec.mode,
                c_prop,
            };
            let (network, h) = pinn::train_pinn(
                &xs,
                &ys,
                &vxs,
                &vys,
                &spec.mlp,
                &cfg,
                baseline,
                &input_scaler,
                &target_scaler,
                &spec.train,
            )?;
            history = h;
            pinn_cfg = Some(cfg);
            Regressor::Mlp { network }
        }
    };

    Ok(TrainOutcome {
        model: TrainedModel {
            family: spec.family,
            mode: spec.mode,
            input_scaler,
            target_scaler,
            regressor,
            pinn: pinn_cfg,
        },
        history,
        gbt_train_mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split_dataset, DEFAULT_FRACTIONS};
    use crate::synth::{generate_synthetic, GeneratorConfig};

    fn dataset(seed: u64) -> (PreparedData, SeaTrialBaseline) {
        let cfg = GeneratorConfig {
            n_records: 400,
            ..GeneratorConfig::default()
        };
        let ds = generate_synthetic(&cfg, seed).unwrap();
        let split = split_dataset(ds.records.len(), DEFAULT_FRACTIONS, seed).unwrap();
        (PreparedData::new(&ds.records, split).unwrap(), cfg.baseline().unwrap())
    }

    #[test]
    fn hybrid_gbt_recomposes_from_components() {
        let (data, b) = dataset(7);
        let mut spec = ModelSpec::new(Family::Gbt, Mode::Hybrid);
        spec.gbt.n_estimators = 30;
        let model = train_model(&data, Some(&b), &spec).unwrap().model;
        let i = data.split.test[0];
        let x = data.features[i];
        let total = model.predict_power(Some(&b), &x).unwrap();
        let residual = model.predict(&x).unwrap();
        assert_eq!(total, b.power(x.speed, x.draft).unwrap() + residual);
    }

    #[test]
    fn hybrid_needs_baseline() {
        let (data, _) = dataset(1);
        let spec = ModelSpec::new(Family::Gbt, Mode::Hybrid);
        assert!(train_model(&data, None, &spec).is_err());
    }

    #[test]
    fn pure_model_rejected_by_hybrid_composition() {
        let (data, b) = dataset(2);
        let mut spec = ModelSpec::new(Family::Gbt, Mode::Pure);
        spec.gbt.n_estimators = 3;
        let model = train_model(&data, None, &spec).unwrap().model;
        let x = data.features[0];
        assert!(matches!(baseline::hybrid_predict(&b, &model, &x), Err(Error::ModeMismatch(_))));
        assert_eq!(model.predict_power(Some(&b), &x).unwrap(), model.predict(&x).unwrap());
    }

    #[test]
    fn network_families_train() {
        let (data, b) = dataset(3);
        for family in [Family::Nn, Family::Pinn] {
            let mut spec = ModelSpec::new(family, Mode::Hybrid);
            spec.mlp.hidden_layers = 1;
            spec.mlp.neurons_per_layer = 4;
            spec.train.epochs = 5;
            let out = train_model(&data, Some(&b), &spec).unwrap();
            assert_eq!(out.history.len(), 5);
            assert_eq!(out.model.pinn.is_some(), family == Family::Pinn);
            assert!(out.model.predict(&data.features[0]).unwrap().is_finite());
        }
    }
}
