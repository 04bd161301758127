//! Seeded random search over a finite grid.
//!
//! Each trial draws one value per parameter, independently and uniformly,
//! from a ChaCha8 stream. The objective is minimized; a non-finite score
//! (including a diverged run) ranks as `+inf`, and ties keep the earliest
//! trial.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbt::GbtConfig;
use crate::neural::{MlpConfig, TrainOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<Param>,
}

impl SearchSpace {
    pub fn new(params: Vec<Param>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::config("search space has no parameters"));
        }
        for p in &params {
            if p.values.is_empty() {
                return Err(Error::config(format!("parameter `{}` has no values", p.name)));
            }
        }
        Ok(Self { params })
    }

    fn param(name: &str, values: Vec<f64>) -> Param {
        Param {
            name: name.into(),
            values,
        }
    }

    /// Tree-ensemble grid: learning rate, depth, ensemble size and the two
    /// leaf penalties.
    pub fn gbt() -> Self {
        Self {
            params: alloc::vec![
                Self::param("learning_rate", alloc::vec![0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]),
                Self::param("max_depth", (3..=10).map(f64::from).collect()),
                Self::param("n_estimators", (5..=500).map(f64::from).collect()),
                Self::param("l1_alpha", alloc::vec![0.0, 1.0, 100.0]),
                Self::param("l2_lambda", alloc::vec![0.0, 1.0, 100.0]),
            ],
        }
    }

    /// Network grid shared by the plain and physics-informed MLPs.
    pub fn network() -> Self {
        Self {
            params: alloc::vec![
                Self::param("learning_rate", alloc::vec![1e-2, 1e-3, 3e-4, 1e-4]),
                Self::param("hidden_layers", alloc::vec![4.0, 6.0, 8.0]),
                Self::param("neurons_per_layer", alloc::vec![64.0, 128.0, 256.0]),
            ],
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|p| p.name.as_str())
    }

    /// Number of distinct configurations.
    pub fn size(&self) -> usize {
        self.params.iter().map(|p| p.values.len()).product()
    }

    /// Overrides the fields of `base` named by this space.
    pub fn apply_gbt(&self, values: &[f64], base: &GbtConfig) -> Result<GbtConfig> {
        let mut cfg = *base;
        for (p, v) in self.params.iter().zip(values) {
            match p.name.as_str() {
                "learning_rate" => cfg.learning_rate = *v,
                "max_depth" => cfg.max_depth = *v as usize,
                "n_estimators" => cfg.n_estimators = *v as usize,
                "l1_alpha" => cfg.l1_alpha = *v,
                "l2_lambda" => cfg.l2_lambda = *v,
                "min_samples_leaf" => cfg.min_samples_leaf = *v as usize,
                other => return Err(Error::config(format!("`{other}` is not a tree parameter"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides the network shape and learning rate named by this space.
    pub fn apply_network(
        &self,
        values: &[f64],
        base: (&MlpConfig, &TrainOptions),
    ) -> Result<(MlpConfig, TrainOptions)> {
        let (mut mlp, mut opts) = (*base.0, *base.1);
        for (p, v) in self.params.iter().zip(values) {
            match p.name.as_str() {
                "learning_rate" => opts.learning_rate = *v,
                "hidden_layers" => mlp.hidden_layers = *v as usize,
                "neurons_per_layer" => mlp.neurons_per_layer = *v as usize,
                "epochs" => opts.epochs = *v as usize,
                other => return Err(Error::config(format!("`{other}` is not a network parameter"))),
            }
        }
        mlp.validate()?;
        Ok((mlp, opts))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub values: Vec<f64>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: usize,
    pub trials: Vec<TrialRecord>,
}

impl SearchOutcome {
    pub fn best_trial(&self) -> &TrialRecord {
        &self.trials[self.best]
    }
}

fn rank(score: f64) -> f64 {
    if score.is_finite() {
        score
    } else {
        f64::INFINITY
    }
}

/// Draws `n_trials` configurations and scores each with `objective`.
///
/// Errors from the objective abort the search, except divergence, which is
/// logged as a NaN score.
pub fn random_search<F>(space: &SearchSpace, n_trials: usize, seed: u64, mut objective: F) -> Result<SearchOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if n_trials < 1 {
        return Err(Error::config("random search needs at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials: Vec<TrialRecord> = Vec::with_capacity(n_trials);
    let mut best = 0;
    for index in 0..n_trials {
        let values: Vec<f64> = space
            .params
            .iter()
            .map(|p| p.values[rng.random_range(0..p.values.len())])
            .collect();
        let score = match objective(&values) {
            Ok(s) => s,
            Err(Error::Diverged { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        if index > 0 && rank(score) < rank(trials[best].score) {
            best = index;
        }
        trials.push(TrialRecord { index, values, score });
    }
    Ok(SearchOutcome { best, trials })
}
