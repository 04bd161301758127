//! Physics-informed objective for the network regressors.
//!
//! `L = L_data + λ·L_phys` where `L_data` is the mean squared error in
//! standardized target units and
//! `L_phys = Σᵢ (∂NN/∂V|ᵢ − gᵢ)²` is summed (not averaged) over the batch.
//! The derivative is compared in physical units (kW per knot). In pure mode
//! `gᵢ = 3·c·Vᵢ²`; in hybrid mode the network models the residual, so
//! `gᵢ = 3·c·Vᵢ² − ∂P_baseline/∂V`.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::baseline::SeaTrialBaseline;
use crate::data::FeatureVector;
use crate::error::{Error, Result};
use crate::model::Mode;
use crate::neural::{self, EpochRecord, LossParts, Mlp, MlpConfig, MseObjective, Objective, Scratch, Trace, TrainOptions};
use crate::scaler::StandardScaler;

pub const DEFAULT_PHYSICS_WEIGHT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinnConfig {
    pub lambda_phys: f64,
    pub mode: Mode,
    /// Propeller-law coefficient `c` of `P = c·V³`, held fixed in training.
    pub c_prop: f64,
}

impl PinnConfig {
    pub fn new(mode: Mode, c_prop: f64) -> Self {
        Self {
            lambda_phys: DEFAULT_PHYSICS_WEIGHT,
            mode,
            c_prop,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_phys >= 0.0 && self.lambda_phys.is_finite()) {
            return Err(Error::config("lambda_phys must be finite and >= 0"));
        }
        if !(self.c_prop > 0.0 && self.c_prop.is_finite()) {
            return Err(Error::config("c_prop must be positive"));
        }
        Ok(())
    }
}

/// Collocation targets `gᵢ` (kW per knot) and the factor converting the
/// network's standardized input derivative to physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsTargets {
    pub targets: Vec<f64>,
    /// `σ_target / σ_speed`.
    pub derivative_scale: f64,
}

impl PhysicsTargets {
    /// Targets at the standardized `inputs`, which double as collocation
    /// points.
    pub fn new<R: AsRef<[f64]>>(
        cfg: &PinnConfig,
        baseline: Option<&SeaTrialBaseline>,
        input_scaler: &StandardScaler,
        target_scaler: &StandardScaler,
        inputs: &[R],
    ) -> Result<Self> {
        cfg.validate()?;
        if cfg.mode == Mode::Hybrid && baseline.is_none() {
            return Err(Error::config("hybrid physics loss needs a sea-trial baseline"));
        }
        let derivative_scale = target_scaler.scale(0)? / input_scaler.scale(FeatureVector::SPEED)?;
        let targets = inputs
            .iter()
            .map(|x| {
                let x = x.as_ref();
                if x.len() != FeatureVector::DIM {
                    return Err(Error::Shape {
                        expected: FeatureVector::DIM,
                        got: x.len(),
                    });
                }
                let v = input_scaler.inverse_value(FeatureVector::SPEED, x[FeatureVector::SPEED])?;
                match (cfg.mode, baseline) {
                    (Mode::Hybrid, Some(b)) => {
                        let t = input_scaler.inverse_value(FeatureVector::DRAFT, x[FeatureVector::DRAFT])?;
                        b.residual_derivative_target(cfg.c_prop, v, t)
                    }
                    _ => Ok(3.0 * cfg.c_prop * v * v),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            targets,
            derivative_scale,
        })
    }
}

/// `(1/N)·Σ(ŷᵢ − yᵢ)²` in standardized units.
pub fn data_loss<R: AsRef<[f64]>>(net: &Mlp, inputs: &[R], targets: &[f64]) -> Result<f64> {
    let batch: Vec<usize> = (0..inputs.len()).collect();
    neural::mse_terms(net, inputs, targets, &batch, None)
}

/// `Σᵢ (s·∂NN/∂V|ᵢ − gᵢ)²` over every collocation point.
pub fn physics_loss<R: AsRef<[f64]>>(net: &Mlp, inputs: &[R], physics: &PhysicsTargets) -> Result<f64> {
    let batch: Vec<usize> = (0..inputs.len()).collect();
    physics_terms(net, inputs, physics, &batch)
}

pub fn total_loss<R: AsRef<[f64]>>(
    net: &Mlp,
    inputs: &[R],
    targets: &[f64],
    physics: &PhysicsTargets,
    lambda_phys: f64,
) -> Result<LossParts> {
    let data = data_loss(net, inputs, targets)?;
    let phys = physics_loss(net, inputs, physics)?;
    Ok(LossParts {
        total: data + lambda_phys * phys,
        data,
        physics: phys,
    })
}

fn physics_terms<R: AsRef<[f64]>>(net: &Mlp, inputs: &[R], physics: &PhysicsTargets, batch: &[usize]) -> Result<f64> {
    if physics.targets.len() != inputs.len() {
        return Err(Error::Shape {
            expected: inputs.len(),
            got: physics.targets.len(),
        });
    }
    let mut trace = Trace::new(net);
    let mut sum = 0.0;
    for &i in batch {
        net.trace_into(inputs[i].as_ref(), Some(FeatureVector::SPEED), &mut trace)?;
        let d = physics.derivative_scale * trace.output_tangent - physics.targets[i];
        sum += d * d;
    }
    Ok(sum)
}

pub struct PinnObjective<'a, R> {
    pub inputs: &'a [R],
    pub targets: &'a [f64],
    pub physics: &'a PhysicsTargets,
    pub lambda_phys: f64,
}

impl<R: AsRef<[f64]>> Objective for PinnObjective<'_, R> {
    fn len(&self) -> usize {
        self.inputs.len()
    }

    fn evaluate(&self, net: &Mlp, batch: &[usize], grad: Option<&mut [f64]>) -> Result<LossParts> {
        if self.lambda_phys == 0.0 {
            // Same arithmetic as plain MSE training; the physics term is
            // evaluated only for logging.
            let data = neural::mse_terms(net, self.inputs, self.targets, batch, grad)?;
            let physics = physics_terms(net, self.inputs, self.physics, batch)?;
            return Ok(LossParts {
                total: data + 0.0 * physics,
                data,
                physics,
            });
        }
        if self.inputs.len() != self.targets.len() || self.physics.targets.len() != self.inputs.len() {
            return Err(Error::Shape {
                expected: self.inputs.len(),
                got: self.targets.len().min(self.physics.targets.len()),
            });
        }
        if batch.is_empty() {
            return Err(Error::Empty("batch"));
        }

        let n = batch.len() as f64;
        let s = self.physics.derivative_scale;
        let mut trace = Trace::new(net);
        let mut scratch = Scratch::default();
        let mut data_sum = 0.0;
        let mut phys_sum = 0.0;
        let mut grad = grad;
        for &i in batch {
            net.trace_into(self.inputs[i].as_ref(), Some(FeatureVector::SPEED), &mut trace)?;
            let r = trace.output - self.targets[i];
            let d = s * trace.output_tangent - self.physics.targets[i];
            data_sum += r * r;
            phys_sum += d * d;
            if let Some(g) = grad.as_deref_mut() {
                net.backprop(&trace, 2.0 * r / n, self.lambda_phys * 2.0 * d * s, g, &mut scratch);
            }
        }
        let data = data_sum / n;
        Ok(LossParts {
            total: data + self.lambda_phys * phys_sum,
            data,
            physics: phys_sum,
        })
    }
}

/// Trains a fresh network on the physics-informed objective; collocation
/// points are the training inputs. Validation loss is the data loss.
#[allow(clippy::too_many_arguments)]
pub fn train_pinn<R: AsRef<[f64]>>(
    train_inputs: &[R],
    train_targets: &[f64],
    val_inputs: &[R],
    val_targets: &[f64],
    mlp: &MlpConfig,
    cfg: &PinnConfig,
    baseline: Option<&SeaTrialBaseline>,
    input_scaler: &StandardScaler,
    target_scaler: &StandardScaler,
    opts: &TrainOptions,
) -> Result<(Mlp, Vec<EpochRecord>)> {
    let physics = PhysicsTargets::new(cfg, baseline, input_scaler, target_scaler, train_inputs)?;
    let objective = PinnObjective {
        inputs: train_inputs,
        targets: train_targets,
        physics: &physics,
        lambda_phys: cfg.lambda_phys,
    };
    let val = MseObjective {
        inputs: val_inputs,
        targets: val_targets,
    };
    neural::fit(Mlp::init(mlp)?, &objective, Some(&val), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::PowerCurve;
    use crate::neural::{train_mlp, Activation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn net_cfg(layers: usize, width: usize, seed: u64) -> MlpConfig {
        MlpConfig {
            input_dim: 5,
            hidden_layers: layers,
            neurons_per_layer: width,
            activation: Activation::Tanh,
            seed,
        }
    }

    fn baseline(k: f64) -> SeaTrialBaseline {
        SeaTrialBaseline::new(
            PowerCurve::new(0.9 * k, 3.2).unwrap(),
            6.0,
            PowerCurve::new(1.4 * k, 3.1).unwrap(),
            12.0,
        )
        .unwrap()
    }

    /// Physical rows, standardized rows, targets and fitted scalers.
    struct Fixture {
        std_rows: Vec<[f64; 5]>,
        targets: Vec<f64>,
        inputs: StandardScaler,
        target: StandardScaler,
    }

    fn fixture(seed: u64, n: usize, k: f64) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<[f64; 5]> = (0..n)
            .map(|_| {
                [
                    rng.random_range(8.0..16.0),
                    rng.random_range(6.0..12.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                ]
            })
            .collect();
        let raw: Vec<f64> = (0..n).map(|_| k * rng.random_range(-300.0..300.0)).collect();
        let inputs = StandardScaler::fitted(&rows).unwrap();
        let target = StandardScaler::fitted_column(&raw).unwrap();
        let std_rows = rows
            .iter()
            .map(|r| {
                let z = inputs.transform(r).unwrap();
                [z[0], z[1], z[2], z[3], z[4]]
            })
            .collect();
        let targets = raw.iter().map(|y| target.transform_value(0, *y).unwrap()).collect();
        Fixture {
            std_rows,
            targets,
            inputs,
            target,
        }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
    }

    #[test]
    fn data_loss_cases() {
        let mut net = Mlp::zeros(&net_cfg(1, 2, 0)).unwrap();
        let x = [[0.0; 5], [1.0; 5]];
        assert_eq!(data_loss(&net, &x, &[0.0, 0.0]).unwrap(), 0.0);
        // Constant output 0 with targets ±1.
        assert_eq!(data_loss(&net, &x, &[1.0, -1.0]).unwrap(), 1.0);
        let empty: [[f64; 5]; 0] = [];
        assert!(data_loss(&net, &empty, &[]).is_err());

        net = Mlp::init(&net_cfg(2, 4, 3)).unwrap();
        let f = fixture(3, 9, 1.0);
        let mut naive = 0.0;
        for (x, y) in f.std_rows.iter().zip(&f.targets) {
            let e = net.forward(x).unwrap() - y;
            naive += e * e;
        }
        naive /= 9.0;
        assert!(rel_err(data_loss(&net, &f.std_rows, &f.targets).unwrap(), naive) < 1e-12);
    }

    #[test]
    fn hybrid_requires_baseline() {
        let f = fixture(1, 4, 1.0);
        let cfg = PinnConfig::new(Mode::Hybrid, 1.0);
        assert!(PhysicsTargets::new(&cfg, None, &f.inputs, &f.target, &f.std_rows).is_err());
        let bad = PinnConfig { c_prop: 0.0, ..cfg };
        assert!(PhysicsTargets::new(&bad, Some(&baseline(1.0)), &f.inputs, &f.target, &f.std_rows).is_err());
    }

    #[test]
    fn propeller_law_baseline_with_zero_network_has_no_physics_loss() {
        let f = fixture(2, 6, 1.0);
        let curve = PowerCurve::new(1.1, 3.0).unwrap();
        let b = SeaTrialBaseline::new(curve, 6.0, curve, 12.0).unwrap();
        let cfg = PinnConfig::new(Mode::Hybrid, 1.1);
        let phys = PhysicsTargets::new(&cfg, Some(&b), &f.inputs, &f.target, &f.std_rows).unwrap();
        let net = Mlp::zeros(&net_cfg(2, 3, 0)).unwrap();
        assert!(physics_loss(&net, &f.std_rows, &phys).unwrap() < 1e-18);

        // A non-trivial network is pushed toward ∂f/∂V = 0.
        let net = Mlp::init(&net_cfg(2, 3, 5)).unwrap();
        let direct: f64 = f
            .std_rows
            .iter()
            .map(|x| {
                let d = net.physical_input_derivative(x, 0, &f.inputs, &f.target).unwrap();
                d * d
            })
            .sum();
        let loss = physics_loss(&net, &f.std_rows, &phys).unwrap();
        assert!(rel_err(loss, direct) < 1e-9, "{loss} vs {direct}");
    }

    #[test]
    fn pure_mode_linear_probe_matches_target() {
        // Identity network whose output is a·V_std, so the physical slope is
        // a·σ_P/σ_V; choose a to hit 3·c·V² at the single collocation point.
        let f = fixture(4, 5, 1.0);
        let c_prop = 0.8;
        let x = f.std_rows[0];
        let v = f.inputs.inverse_value(0, x[0]).unwrap();
        let scale = f.target.scale(0).unwrap() / f.inputs.scale(0).unwrap();
        let a = 3.0 * c_prop * v * v / scale;
        let cfg = MlpConfig {
            activation: Activation::Identity,
            ..net_cfg(1, 1, 0)
        };
        let mut net = Mlp::zeros(&cfg).unwrap();
        let p = net.params_mut();
        p[0] = 1.0; // hidden = V_std
        p[6] = a; // output weight
        let phys = PhysicsTargets::new(&PinnConfig::new(Mode::Pure, c_prop), None, &f.inputs, &f.target, &[x]).unwrap();
        assert!(physics_loss(&net, &[x], &phys).unwrap() < 1e-18 * (3.0 * c_prop * v * v).powi(2));
    }

    #[test]
    fn physics_loss_matches_finite_difference_recomputation() {
        let f = fixture(7, 4, 1.0);
        let b = baseline(1.0);
        let net = Mlp::init(&net_cfg(2, 8, 11)).unwrap();
        for mode in [Mode::Pure, Mode::Hybrid] {
            let cfg = PinnConfig::new(mode, 1.05);
            let phys = PhysicsTargets::new(&cfg, Some(&b), &f.inputs, &f.target, &f.std_rows).unwrap();
            let mut brute = 0.0;
            for x in &f.std_rows {
                // Central difference in physical speed on the composed map.
                let v = f.inputs.inverse_value(0, x[0]).unwrap();
                let t = f.inputs.inverse_value(1, x[1]).unwrap();
                let h = 1e-5;
                let eval = |vp: f64| {
                    let mut z = *x;
                    z[0] = f.inputs.transform_value(0, vp).unwrap();
                    f.target.inverse_value(0, net.forward(&z).unwrap()).unwrap()
                };
                let slope = (eval(v + h) - eval(v - h)) / (2.0 * h);
                let g = match mode {
                    Mode::Pure => 3.0 * 1.05 * v * v,
                    Mode::Hybrid => 3.0 * 1.05 * v * v - b.power_dv(v, t).unwrap(),
                };
                brute += (slope - g) * (slope - g);
            }
            let loss = physics_loss(&net, &f.std_rows, &phys).unwrap();
            assert!(rel_err(loss, brute) < 1e-5, "{mode:?}: {loss} vs {brute}");
        }
    }

    #[test]
    fn total_loss_bookkeeping() {
        let f = fixture(8, 5, 1.0);
        let net = Mlp::init(&net_cfg(1, 4, 1)).unwrap();
        let phys = PhysicsTargets::new(&PinnConfig::new(Mode::Pure, 1.0), None, &f.inputs, &f.target, &f.std_rows).unwrap();
        let zero = total_loss(&net, &f.std_rows, &f.targets, &phys, 0.0).unwrap();
        assert_eq!(zero.total, data_loss(&net, &f.std_rows, &f.targets).unwrap());
        let parts = LossParts {
            total: 0.0,
            data: 1.0,
            physics: 0.02,
        };
        assert_eq!(parts.data + DEFAULT_PHYSICS_WEIGHT * parts.physics, 3.0);
        assert_eq!(PinnConfig::new(Mode::Pure, 1.0).lambda_phys, 100.0);
    }

    #[test]
    fn total_loss_gradient_matches_central_differences() {
        // Small power units keep λ·Σd² near 1e4 so the differences are not
        // swamped by round-off.
        let f = fixture(12, 4, 0.01);
        let b = baseline(0.01);
        let net = Mlp::init(&net_cfg(2, 4, 13)).unwrap();
        for mode in [Mode::Pure, Mode::Hybrid] {
            let cfg = PinnConfig::new(mode, 0.01);
            let phys = PhysicsTargets::new(&cfg, Some(&b), &f.inputs, &f.target, &f.std_rows).unwrap();
            let obj = PinnObjective {
                inputs: &f.std_rows,
                targets: &f.targets,
                physics: &phys,
                lambda_phys: cfg.lambda_phys,
            };
            let batch = [0, 1, 2, 3];
            let mut grad = alloc::vec![0.0; net.params().len()];
            obj.evaluate(&net, &batch, Some(&mut grad)).unwrap();
            let h = 1e-5;
            for k in 0..grad.len() {
                let at = |delta: f64| {
                    let mut n = net.clone();
                    n.params_mut()[k] += delta;
                    obj.evaluate(&n, &batch, None).unwrap().total
                };
                let fd = (at(h) - at(-h)) / (2.0 * h);
                assert!(rel_err(grad[k], fd) < 1e-4, "{mode:?} param {k}: {} vs {fd}", grad[k]);
            }
        }
    }

    #[test]
    fn physics_loss_scales_quadratically_with_units() {
        let net = Mlp::init(&net_cfg(2, 5, 2)).unwrap();
        let losses: Vec<f64> = [1.0, 7.5]
            .iter()
            .map(|&k| {
                let f = fixture(21, 6, k);
                let cfg = PinnConfig::new(Mode::Hybrid, 1.2 * k);
                let phys = PhysicsTargets::new(&cfg, Some(&baseline(k)), &f.inputs, &f.target, &f.std_rows).unwrap();
                physics_loss(&net, &f.std_rows, &phys).unwrap()
            })
            .collect();
        assert!(rel_err(losses[1], 7.5 * 7.5 * losses[0]) < 1e-10);
    }

    #[test]
    fn zero_weight_reduces_to_plain_training() {
        let f = fixture(30, 40, 1.0);
        let mlp = net_cfg(2, 6, 4);
        let opts = TrainOptions {
            epochs: 30,
            ..TrainOptions::default()
        };
        let cfg = PinnConfig {
            lambda_phys: 0.0,
            ..PinnConfig::new(Mode::Pure, 1.0)
        };
        let (pinn_net, pinn_hist) = train_pinn(
            &f.std_rows, &f.targets, &f.std_rows, &f.targets, &mlp, &cfg, None, &f.inputs, &f.target, &opts,
        )
        .unwrap();
        let (nn_net, nn_hist) = train_mlp(&f.std_rows, &f.targets, &f.std_rows, &f.targets, &mlp, &opts).unwrap();
        assert_eq!(pinn_net, nn_net);
        for (a, b) in pinn_hist.iter().zip(&nn_hist) {
            assert_eq!(a.train.total.to_bits(), b.train.total.to_bits());
            assert_eq!(a.val_loss.to_bits(), b.val_loss.to_bits());
        }
    }

    #[test]
    fn history_satisfies_weighting_identity() {
        let f = fixture(31, 30, 1.0);
        let cfg = PinnConfig::new(Mode::Hybrid, 1.1);
        let opts = TrainOptions {
            epochs: 15,
            ..TrainOptions::default()
        };
        let b = baseline(1.0);
        let (_, hist) = train_pinn(
            &f.std_rows, &f.targets, &f.std_rows, &f.targets, &net_cfg(1, 4, 0), &cfg, Some(&b), &f.inputs, &f.target,
            &opts,
        )
        .unwrap();
        assert_eq!(hist.len(), 15);
        for e in &hist {
            let expect = e.train.data + 100.0 * e.train.physics;
            assert!(rel_err(e.train.total, expect) < 1e-10);
        }
    }
}
