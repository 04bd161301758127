//! Fast self-checks run by `vesselpower verify`.

use std::fmt::Write;
use std::path::Path;

use vesselpower_core::baseline::{fit_power_curve, PowerCurve, SeaTrialPoint};
use vesselpower_core::data::{engineer_features, split_dataset, DEFAULT_FRACTIONS};
use vesselpower_core::gbt::{self, GbtConfig, Node};
use vesselpower_core::neural::{Activation, Mlp, MlpConfig, Objective};
use vesselpower_core::pinn::{PhysicsTargets, PinnConfig, PinnObjective};
use vesselpower_core::synth::GeneratorConfig;
use vesselpower_core::{Mode, SeaTrialBaseline, StandardScaler, VoyageRecord};

use crate::formats::{read_json, BaselineFile};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<String, String>;

fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Deterministic pseudo-random values in `[-1, 1)`.
fn probe(i: usize, salt: f64) -> f64 {
    let x = ((i as f64 + 1.0) * 12.9898 + salt * 78.233).sin() * 43_758.545_3;
    2.0 * (x - x.floor()) - 1.0
}

fn power_law_recovery() -> Outcome {
    let speeds: Vec<f64> = (8..=17).map(f64::from).collect();
    let mut worst: f64 = 0.0;
    for c in [0.5, 1.5, 3.0] {
        for n in [2.8, 3.0, 3.3] {
            let pts: Vec<SeaTrialPoint> = speeds
                .iter()
                .map(|&v| SeaTrialPoint::new(v, c * v.powf(n)))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let fit = fit_power_curve(&pts).map_err(|e| e.to_string())?;
            worst = worst.max(rel_err(fit.c, c, 0.0)).max(rel_err(fit.n, n, 0.0));
        }
    }
    if worst < 1e-9 {
        Ok(format!("max relative error {worst:.1e}"))
    } else {
        Err(format!("max relative error {worst:.3e} >= 1e-9"))
    }
}

fn load_baseline(path: Option<&Path>) -> Result<(BaselineFile, SeaTrialBaseline), String> {
    match path {
        None => {
            let b = GeneratorConfig::default().baseline().map_err(|e| e.to_string())?;
            Ok((BaselineFile::from(&b), b))
        }
        Some(p) => {
            let file: BaselineFile = read_json(p).map_err(|e| e.to_string())?;
            let b = file.to_baseline().map_err(|e| format!("{}: {e}", p.display()))?;
            Ok((file, b))
        }
    }
}

/// At the trial drafts the interpolation must reproduce the stored curves,
/// and between them it must be affine in draft.
fn baseline_endpoints(path: Option<&Path>) -> Outcome {
    let (file, b) = load_baseline(path)?;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let v = 12.5 + 7.0 * probe(i, 1.0);
        let t = b.ballast_draft + (b.laden_draft - b.ballast_draft) * (1.0 + probe(i, 2.0));
        let pb = file.ballast.c * v.powf(file.ballast.n);
        let pl = file.laden.c * v.powf(file.laden.n);
        let at = |t: f64| b.power(v, t).map_err(|e| e.to_string());
        worst = worst
            .max(rel_err(at(file.ballast.draft_m)?, pb, 0.0))
            .max(rel_err(at(file.laden.draft_m)?, pl, 0.0));
        let w = (t - file.ballast.draft_m) / (file.laden.draft_m - file.ballast.draft_m);
        worst = worst.max(rel_err(at(t)?, (1.0 - w) * pb + w * pl, 1e-300));
    }
    if worst < 1e-12 {
        Ok(format!("1000 probes, max relative error {worst:.1e}"))
    } else {
        Err(format!("endpoint/affinity error {worst:.3e} >= 1e-12"))
    }
}

fn propeller_identity() -> Outcome {
    let b = GeneratorConfig::default().baseline().map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let v = 12.5 + 7.0 * probe(i, 3.0);
        let t = 9.0 + 5.0 * probe(i, 4.0);
        let c = 1.0 + 0.9 * probe(i, 5.0);
        let r = b.residual_derivative_target(c, v, t).map_err(|e| e.to_string())?;
        let d = b.power_dv(v, t).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(r + d, 3.0 * c * v * v, 0.0));
    }
    if worst < 1e-10 {
        Ok(format!("1000 probes, max relative error {worst:.1e}"))
    } else {
        Err(format!("identity error {worst:.3e} >= 1e-10"))
    }
}

fn small_net(layers: usize, width: usize, seed: u64) -> Result<Mlp, String> {
    Mlp::init(&MlpConfig {
        input_dim: 5,
        hidden_layers: layers,
        neurons_per_layer: width,
        activation: Activation::Tanh,
        seed,
    })
    .map_err(|e| e.to_string())
}

fn batch(n: usize, salt: f64) -> (Vec<[f64; 5]>, Vec<f64>) {
    let x = (0..n)
        .map(|i| core::array::from_fn(|d| 1.5 * probe(i * 5 + d, salt)))
        .collect();
    let y = (0..n).map(|i| probe(i, salt + 0.5)).collect();
    (x, y)
}

fn mlp_parameter_gradient() -> Outcome {
    let net = small_net(2, 8, 1)?;
    let (x, y) = batch(8, 6.0);
    let (_, grad) = net.mse_gradient(&x, &y).map_err(|e| e.to_string())?;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..grad.len() {
        let mut plus = net.clone();
        plus.params_mut()[k] += h;
        let mut minus = net.clone();
        minus.params_mut()[k] -= h;
        let lp = plus.mse_gradient(&x, &y).map_err(|e| e.to_string())?.0;
        let lm = minus.mse_gradient(&x, &y).map_err(|e| e.to_string())?.0;
        worst = worst.max(rel_err(grad[k], (lp - lm) / (2.0 * h), 1e-8));
    }
    if worst < 1e-6 {
        Ok(format!("{} parameters, max relative error {worst:.1e}", grad.len()))
    } else {
        Err(format!("gradient error {worst:.3e} >= 1e-6"))
    }
}

fn mlp_input_derivative() -> Outcome {
    let net = small_net(2, 8, 2)?;
    let (xs, _) = batch(8, 7.0);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for x in &xs {
        for dim in 0..5 {
            let mut p = *x;
            p[dim] += h;
            let mut m = *x;
            m[dim] -= h;
            let fd = (net.forward(&p).map_err(|e| e.to_string())? - net.forward(&m).map_err(|e| e.to_string())?)
                / (2.0 * h);
            let an = net.input_derivative(x, dim).map_err(|e| e.to_string())?;
            worst = worst.max(rel_err(an, fd, 1e-8));
        }
    }
    if worst < 1e-6 {
        Ok(format!("max relative error {worst:.1e}"))
    } else {
        Err(format!("input derivative error {worst:.3e} >= 1e-6"))
    }
}

fn pinn_gradient() -> Outcome {
    // Small power units keep the summed physics term moderate so central
    // differences are not dominated by round-off.
    let k = 0.01;
    let b = SeaTrialBaseline::new(
        PowerCurve::new(0.9 * k, 3.2).map_err(|e| e.to_string())?,
        6.0,
        PowerCurve::new(1.4 * k, 3.1).map_err(|e| e.to_string())?,
        12.0,
    )
    .map_err(|e| e.to_string())?;
    let rows: Vec<[f64; 5]> = (0..8)
        .map(|i| {
            [
                12.0 + 4.0 * probe(i, 8.0),
                9.0 + 3.0 * probe(i, 9.0),
                probe(i, 10.0),
                10.0 * probe(i, 11.0),
                10.0 * probe(i, 12.0),
            ]
        })
        .collect();
    let raw: Vec<f64> = (0..8).map(|i| 300.0 * k * probe(i, 13.0)).collect();
    let inputs = StandardScaler::fitted(&rows).map_err(|e| e.to_string())?;
    let target = StandardScaler::fitted_column(&raw).map_err(|e| e.to_string())?;
    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| inputs.transform(r))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let y: Vec<f64> = raw
        .iter()
        .map(|v| target.transform_value(0, *v))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let net = small_net(2, 8, 3)?;
    let idx: Vec<usize> = (0..8).collect();
    let mut worst: f64 = 0.0;
    for mode in [Mode::Pure, Mode::Hybrid] {
        let cfg = PinnConfig::new(mode, k);
        let phys = PhysicsTargets::new(&cfg, Some(&b), &inputs, &target, &z).map_err(|e| e.to_string())?;
        let obj = PinnObjective {
            inputs: &z,
            targets: &y,
            physics: &phys,
            lambda_phys: cfg.lambda_phys,
        };
        let mut grad = vec![0.0; net.params().len()];
        obj.evaluate(&net, &idx, Some(&mut grad)).map_err(|e| e.to_string())?;
        let h = 1e-5;
        for p in 0..grad.len() {
            let at = |d: f64| -> Result<f64, String> {
                let mut n = net.clone();
                n.params_mut()[p] += d;
                Ok(obj.evaluate(&n, &idx, None).map_err(|e| e.to_string())?.total)
            };
            worst = worst.max(rel_err(grad[p], (at(h)? - at(-h)?) / (2.0 * h), 1e-8));
        }
    }
    if worst < 1e-4 {
        Ok(format!("pure and hybrid, max relative error {worst:.1e}"))
    } else {
        Err(format!("physics-informed gradient error {worst:.3e} >= 1e-4"))
    }
}

fn scaler_round_trip() -> Outcome {
    let s = StandardScaler::fitted_column(&[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
    if s.mean()[0] != 2.0 || rel_err(s.std()[0], (2.0f64 / 3.0).sqrt(), 0.0) > 1e-15 {
        return Err(format!("moments of {{1,2,3}}: mean {} std {}", s.mean()[0], s.std()[0]));
    }
    let (rows, _) = batch(32, 14.0);
    let rows: Vec<[f64; 5]> = rows.iter().map(|r| [r[0] * 100.0, r[1], 3.0, r[3] - 7.0, r[4]]).collect();
    let s = StandardScaler::fitted(&rows).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r in &rows {
        let back = s
            .inverse_transform(&s.transform(r).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for (a, b) in back.iter().zip(r) {
            worst = worst.max(rel_err(*a, *b, 1e-300));
        }
    }
    if worst < 1e-12 {
        Ok(format!("max relative error {worst:.1e}"))
    } else {
        Err(format!("round-trip error {worst:.3e} >= 1e-12"))
    }
}

fn gbt_hand_example() -> Outcome {
    let x = [[1.0], [2.0], [3.0], [4.0]];
    let y = [0.0, 0.0, 10.0, 10.0];
    let mut found = Vec::new();
    for lambda in [0.0, 2.0] {
        let cfg = GbtConfig {
            learning_rate: 1.0,
            max_depth: 1,
            n_estimators: 1,
            l1_alpha: 0.0,
            l2_lambda: lambda,
            min_samples_leaf: 1,
        };
        let m = gbt::train(&x, &y, &cfg, Mode::Pure).map_err(|e| e.to_string())?.model;
        let leaves: Vec<f64> = m.trees[0]
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { weight } => Some(*weight),
                Node::Split { .. } => None,
            })
            .collect();
        found.push(leaves);
    }
    if found == [vec![-5.0, 5.0], vec![-2.5, 2.5]] {
        Ok("leaves ∓5 unregularized, ∓2.5 at λ = 2".into())
    } else {
        Err(format!("leaf weights {found:?}"))
    }
}

fn wind_decomposition() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..360 {
        let r = VoyageRecord {
            timestamp: 0,
            power: 1.0,
            speed: 10.0,
            draft: 8.0,
            trim: 0.0,
            wind_speed: 12.5 + 12.0 * probe(i, 15.0),
            wind_dir: i as f64,
        };
        let f = engineer_features(&r);
        worst = worst.max(rel_err(f.wx * f.wx + f.wy * f.wy, r.wind_speed * r.wind_speed, 1e-300));
    }
    let head = engineer_features(&VoyageRecord {
        timestamp: 0,
        power: 1.0,
        speed: 10.0,
        draft: 8.0,
        trim: 0.0,
        wind_speed: 5.0,
        wind_dir: 0.0,
    });
    if (head.wx, head.wy) != (5.0, 0.0) {
        return Err(format!("head wind decomposed to ({}, {})", head.wx, head.wy));
    }
    if worst < 1e-12 {
        Ok(format!("max relative error {worst:.1e}"))
    } else {
        Err(format!("|W|² error {worst:.3e} >= 1e-12"))
    }
}

fn split_partition() -> Outcome {
    let s = split_dataset(10, DEFAULT_FRACTIONS, 0).map_err(|e| e.to_string())?;
    if (s.train.len(), s.validation.len(), s.test.len()) != (8, 1, 1) || !s.is_partition_of(10) {
        return Err(format!(
            "10 records split as ({}, {}, {})",
            s.train.len(),
            s.validation.len(),
            s.test.len()
        ));
    }
    let big = split_dataset(40_000, DEFAULT_FRACTIONS, 1).map_err(|e| e.to_string())?;
    if (big.train.len(), big.validation.len(), big.test.len()) != (32_000, 4_000, 4_000) || !big.is_partition_of(40_000)
    {
        return Err("40000 records not split 32000/4000/4000".into());
    }
    Ok("(8, 1, 1) and (32000, 4000, 4000)".into())
}

/// Runs every check; `baseline` adds the endpoint check for that file.
pub fn run_checks(baseline: Option<&Path>) -> Vec<CheckResult> {
    let mut checks: Vec<(&'static str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("power-law-recovery", Box::new(power_law_recovery)),
        ("baseline-endpoints", Box::new(|| baseline_endpoints(None))),
        ("propeller-identity", Box::new(propeller_identity)),
        ("mlp-parameter-gradient", Box::new(mlp_parameter_gradient)),
        ("mlp-input-derivative", Box::new(mlp_input_derivative)),
        ("pinn-loss-gradient", Box::new(pinn_gradient)),
        ("scaler-round-trip", Box::new(scaler_round_trip)),
        ("gbt-hand-example", Box::new(gbt_hand_example)),
        ("wind-decomposition", Box::new(wind_decomposition)),
        ("split-partition", Box::new(split_partition)),
    ];
    if let Some(path) = baseline {
        checks.push(("baseline-file-endpoints", Box::new(move || baseline_endpoints(Some(path)))));
    }
    checks
        .into_iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { name, passed, detail }
        })
        .collect()
}

pub fn render_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in results {
        let _ = writeln!(
            s,
            "{:<width$}  {}  {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let _ = writeln!(s, "{} checks, {} failed", results.len(), failed);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_checks_pass() {
        let results = run_checks(None);
        assert!(results.len() >= 6);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn probes_are_bounded() {
        for i in 0..1000 {
            let p = probe(i, 0.3);
            assert!((-1.0..1.0).contains(&p));
        }
    }
}
