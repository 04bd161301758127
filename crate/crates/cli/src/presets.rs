//! Tuned hyperparameters shipped with the tool.
//!
//! `tableN-baseline` presets are for pure models (trained on total power)
//! and `tableN-hybrid` presets for residual models.

use serde::Deserialize;
use vesselpower_core::model::ModelSpec;
use vesselpower_core::{Family, Mode};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbtPreset {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_estimators: usize,
    pub l1_alpha: f64,
    pub l2_lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkPreset {
    pub learning_rate: f64,
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub family: Family,
    pub mode: Mode,
    #[serde(default)]
    pub gbt: Option<GbtPreset>,
    #[serde(default)]
    pub network: Option<NetworkPreset>,
}

const SOURCES: [(&str, &str); 6] = [
    ("table2-baseline", include_str!("../presets/table2-baseline.json")),
    ("table2-hybrid", include_str!("../presets/table2-hybrid.json")),
    ("table3-baseline", include_str!("../presets/table3-baseline.json")),
    ("table3-hybrid", include_str!("../presets/table3-hybrid.json")),
    ("table4-baseline", include_str!("../presets/table4-baseline.json")),
    ("table4-hybrid", include_str!("../presets/table4-hybrid.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn load(name: &str) -> Result<Preset> {
    let (_, src) = SOURCES.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown preset `{name}`; available: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let preset: Preset =
        serde_json::from_str(src).map_err(|e| CliError::Usage(format!("preset `{name}` is malformed: {e}")))?;
    let expected = match preset.family {
        Family::Gbt => preset.gbt.is_some() && preset.network.is_none(),
        Family::Nn | Family::Pinn => preset.network.is_some() && preset.gbt.is_none(),
    };
    if !expected {
        return Err(CliError::Usage(format!("preset `{name}` does not match its family")));
    }
    Ok(preset)
}

impl Preset {
    pub fn apply(&self, spec: &mut ModelSpec) {
        if let Some(g) = self.gbt {
            spec.gbt.learning_rate = g.learning_rate;
            spec.gbt.max_depth = g.max_depth;
            spec.gbt.n_estimators = g.n_estimators;
            spec.gbt.l1_alpha = g.l1_alpha;
            spec.gbt.l2_lambda = g.l2_lambda;
        }
        if let Some(n) = self.network {
            spec.train.learning_rate = n.learning_rate;
            spec.mlp.hidden_layers = n.hidden_layers;
            spec.mlp.neurons_per_layer = n.neurons_per_layer;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for name in names() {
            let p = load(name).unwrap();
            assert_eq!(p.mode == Mode::Hybrid, name.ends_with("hybrid"), "{name}");
        }
        assert!(load("table9-hybrid").is_err());
    }

    #[test]
    fn tree_presets() {
        let p = load("table2-baseline").unwrap();
        assert_eq!(
            p.gbt,
            Some(GbtPreset {
                learning_rate: 0.25,
                max_depth: 10,
                n_estimators: 40,
                l1_alpha: 1.0,
                l2_lambda: 0.0,
            })
        );
        let p = load("table2-hybrid").unwrap();
        assert_eq!(
            p.gbt,
            Some(GbtPreset {
                learning_rate: 0.1,
                max_depth: 10,
                n_estimators: 500,
                l1_alpha: 1.0,
                l2_lambda: 100.0,
            })
        );
    }

    #[test]
    fn network_presets() {
        let cases = [
            ("table3-baseline", Family::Nn, 1e-4, 6, 256),
            ("table3-hybrid", Family::Nn, 3e-4, 4, 64),
            ("table4-baseline", Family::Pinn, 1e-4, 8, 256),
            ("table4-hybrid", Family::Pinn, 3e-4, 6, 256),
        ];
        for (name, family, lr, layers, width) in cases {
            let p = load(name).unwrap();
            assert_eq!(p.family, family);
            assert_eq!(
                p.network,
                Some(NetworkPreset {
                    learning_rate: lr,
                    hidden_layers: layers,
                    neurons_per_layer: width,
                })
            );
        }
    }
}
