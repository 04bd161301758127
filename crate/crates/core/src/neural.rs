//! Fully-connected network with exact gradients.
//!
//! A forward pass can carry a tangent (the derivative of every activation
//! with respect to one input dimension) next to the primal values. The
//! reverse pass then differentiates both the output and its input
//! derivative with respect to all parameters, which is what the
//! propeller-law penalty needs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::scaler::StandardScaler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    /// Linear units; only useful for checks.
    Identity,
}

impl Activation {
    /// Value, first and second derivative at `z`.
    #[inline]
    fn eval(self, z: f64) -> (f64, f64, f64) {
        match self {
            Activation::Tanh => {
                let a = math::tanh(z);
                let d1 = 1.0 - a * a;
                (a, d1, -2.0 * a * d1)
            }
            Activation::Identity => (z, 1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub seed: u64,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_layers == 0 || self.neurons_per_layer == 0 {
            return Err(Error::config(format!(
                "network needs input_dim, hidden_layers and neurons_per_layer >= 1, got {}/{}/{}",
                self.input_dim, self.hidden_layers, self.neurons_per_layer
            )));
        }
        Ok(())
    }

    fn sizes(&self) -> Vec<usize> {
        let mut s = alloc::vec![self.input_dim];
        s.extend(core::iter::repeat_n(self.neurons_per_layer, self.hidden_layers));
        s.push(1);
        s
    }
}

/// Network parameters: affine layers with the activation between them and
/// a linear scalar output. All weights and biases live in one flat vector,
/// layer by layer, weights row-major (`out × in`) followed by the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MlpFile", try_from = "MlpFile")]
pub struct Mlp {
    activation: Activation,
    sizes: Vec<usize>,
    params: Vec<f64>,
}

impl Mlp {
    /// Glorot-uniform weights from a ChaCha8 stream seeded with
    /// `config.seed`; biases start at zero.
    pub fn init(config: &MlpConfig) -> Result<Self> {
        let mut net = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for l in 0..net.layer_count() {
            let (fan_in, fan_out) = (net.sizes[l], net.sizes[l + 1]);
            let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
            let (w, _) = net.layer_range(l);
            for p in &mut net.params[w] {
                *p = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn zeros(config: &MlpConfig) -> Result<Self> {
        config.validate()?;
        let sizes = config.sizes();
        let n = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            activation: config.activation,
            sizes,
            params: alloc::vec![0.0; n],
        })
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Layer widths from input to the scalar output.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_norm(&self) -> f64 {
        math::sqrt(self.params.iter().map(|p| p * p).sum())
    }

    fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    /// (weight range, bias range) of layer `l` in the flat vector.
    fn layer_range(&self, l: usize) -> (core::ops::Range<usize>, core::ops::Range<usize>) {
        let start: usize = self.sizes[..l + 1].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
        let w_end = start + fan_in * fan_out;
        (start..w_end, w_end..w_end + fan_out)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let mut trace = Trace::new(self);
        self.trace_into(x, None, &mut trace)?;
        Ok(trace.output)
    }

    /// d(output)/d(x[dim]) in the network's own (standardized) units.
    pub fn input_derivative(&self, x: &[f64], dim: usize) -> Result<f64> {
        let mut trace = Trace::new(self);
        self.trace_into(x, Some(dim), &mut trace)?;
        Ok(trace.output_tangent)
    }

    /// Input derivative in physical units: the network maps standardized
    /// inputs to a standardized target, so the chain rule contributes
    /// `σ_target / σ_input[dim]`.
    pub fn physical_input_derivative(
        &self,
        x_std: &[f64],
        dim: usize,
        inputs: &StandardScaler,
        target: &StandardScaler,
    ) -> Result<f64> {
        Ok(self.input_derivative(x_std, dim)? * target.scale(0)? / inputs.scale(dim)?)
    }

    /// Forward pass storing what the reverse pass needs. With
    /// `tangent_dim`, also propagates d/dx[tangent_dim].
    pub fn trace_into(&self, x: &[f64], tangent_dim: Option<usize>, trace: &mut Trace) -> Result<()> {
        self.check_input(x)?;
        if let Some(d) = tangent_dim {
            if d >= self.input_dim() {
                return Err(Error::Index {
                    index: d,
                    dim: self.input_dim(),
                });
            }
        }
        trace.tangent_dim = tangent_dim;
        trace.acts[0].copy_from_slice(x);
        if let Some(d) = tangent_dim {
            trace.tangents[0].iter_mut().for_each(|t| *t = 0.0);
            trace.tangents[0][d] = 1.0;
        }

        let last = self.layer_count() - 1;
        for l in 0..=last {
            let (wr, br) = self.layer_range(l);
            let w = &self.params[wr];
            let b = &self.params[br];
            let fan_in = self.sizes[l];
            let (head, tail) = trace.acts.split_at_mut(l + 1);
            let input = &head[l];
            let (thead, ttail) = trace.tangents.split_at_mut(l + 1);
            let tin = &thead[l];

            if l == last {
                trace.output = dot(&w[..fan_in], input) + b[0];
                if tangent_dim.is_some() {
                    trace.output_tangent = dot(&w[..fan_in], tin);
                }
                break;
            }

            let out = &mut tail[0];
            let tout = &mut ttail[0];
            for (o, row) in w.chunks_exact(fan_in).enumerate() {
                let z = dot(row, input) + b[o];
                let (a, d1, d2) = self.activation.eval(z);
                out[o] = a;
                trace.d1[l][o] = d1;
                trace.d2[l][o] = d2;
                if tangent_dim.is_some() {
                    let zt = dot(row, tin);
                    trace.ztan[l][o] = zt;
                    tout[o] = d1 * zt;
                }
            }
        }
        Ok(())
    }

    /// Reverse pass over a stored trace. `output_adjoint` weights the
    /// output, `tangent_adjoint` weights the input derivative (ignored when
    /// the trace has no tangent). Accumulates into `grad`.
    pub fn backprop(&self, trace: &Trace, output_adjoint: f64, tangent_adjoint: f64, grad: &mut [f64], scratch: &mut Scratch) {
        debug_assert_eq!(grad.len(), self.params.len());
        let with_tangent = trace.tangent_dim.is_some();
        scratch.zbar.clear();
        scratch.zbar.push(output_adjoint);
        scratch.ztbar.clear();
        scratch.ztbar.push(if with_tangent { tangent_adjoint } else { 0.0 });

        for l in (0..self.layer_count()).rev() {
            let (wr, br) = self.layer_range(l);
            let fan_in = self.sizes[l];
            let input = &trace.acts[l];
            let tin = &trace.tangents[l];
            {
                let (gw, gb) = grad[wr.start..br.end].split_at_mut(wr.len());
                for (o, grow) in gw.chunks_exact_mut(fan_in).enumerate() {
                    let zb = scratch.zbar[o];
                    if with_tangent {
                        let ztb = scratch.ztbar[o];
                        for i in 0..fan_in {
                            grow[i] += zb * input[i] + ztb * tin[i];
                        }
                    } else {
                        for i in 0..fan_in {
                            grow[i] += zb * input[i];
                        }
                    }
                    gb[o] += zb;
                }
            }
            if l == 0 {
                break;
            }

            let w = &self.params[wr];
            scratch.abar.clear();
            scratch.abar.resize(fan_in, 0.0);
            scratch.atbar.clear();
            scratch.atbar.resize(fan_in, 0.0);
            for (o, row) in w.chunks_exact(fan_in).enumerate() {
                let zb = scratch.zbar[o];
                for i in 0..fan_in {
                    scratch.abar[i] += row[i] * zb;
                }
                if with_tangent {
                    let ztb = scratch.ztbar[o];
                    for i in 0..fan_in {
                        scratch.atbar[i] += row[i] * ztb;
                    }
                }
            }

            let h = l - 1;
            scratch.zbar.clear();
            scratch.ztbar.clear();
            for j in 0..fan_in {
                let d1 = trace.d1[h][j];
                if with_tangent {
                    let atb = scratch.atbar[j];
                    scratch.zbar.push(d1 * scratch.abar[j] + trace.d2[h][j] * trace.ztan[h][j] * atb);
                    scratch.ztbar.push(d1 * atb);
                } else {
                    scratch.zbar.push(d1 * scratch.abar[j]);
                    scratch.ztbar.push(0.0);
                }
            }
        }
    }

    /// Mean squared error over `(inputs, targets)` and its parameter gradient.
    pub fn mse_gradient<R: AsRef<[f64]>>(&self, inputs: &[R], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        let batch: Vec<usize> = (0..inputs.len()).collect();
        let mut grad = alloc::vec![0.0; self.params.len()];
        let loss = mse_terms(self, inputs, targets, &batch, Some(&mut grad))?;
        Ok((loss, grad))
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-sample buffers of a forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    acts: Vec<Vec<f64>>,
    tangents: Vec<Vec<f64>>,
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
    ztan: Vec<Vec<f64>>,
    tangent_dim: Option<usize>,
    pub output: f64,
    pub output_tangent: f64,
}

impl Trace {
    pub fn new(net: &Mlp) -> Self {
        let hidden = &net.sizes[1..net.sizes.len() - 1];
        let acts: Vec<Vec<f64>> = net.sizes[..net.sizes.len() - 1].iter().map(|&n| alloc::vec![0.0; n]).collect();
        let per_hidden = || hidden.iter().map(|&n| alloc::vec![0.0; n]).collect::<Vec<_>>();
        Self {
            tangents: acts.clone(),
            acts,
            d1: per_hidden(),
            d2: per_hidden(),
            ztan: per_hidden(),
            tangent_dim: None,
            output: 0.0,
            output_tangent: 0.0,
        }
    }
}

/// Adjoint buffers reused across reverse passes.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    zbar: Vec<f64>,
    ztbar: Vec<f64>,
    abar: Vec<f64>,
    atbar: Vec<f64>,
}

/// `(1/N)·Σ(ŷ − y)²` over `batch`, accumulating its gradient when asked.
pub fn mse_terms<R: AsRef<[f64]>>(
    net: &Mlp,
    inputs: &[R],
    targets: &[f64],
    batch: &[usize],
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    if inputs.len() != targets.len() {
        return Err(Error::Shape {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let n = batch.len() as f64;
    let mut trace = Trace::new(net);
    let mut scratch = Scratch::default();
    let mut sum = 0.0;
    for &i in batch {
        net.trace_into(inputs[i].as_ref(), None, &mut trace)?;
        let r = trace.output - targets[i];
        sum += r * r;
        if let Some(g) = grad.as_deref_mut() {
            net.backprop(&trace, 2.0 * r / n, 0.0, g, &mut scratch);
        }
    }
    Ok(sum / n)
}

/// Bias-corrected Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64, n_params: usize) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: alloc::vec![0.0; n_params],
            v: alloc::vec![0.0; n_params],
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape {
                expected: self.m.len(),
                got: if params.len() != self.m.len() { params.len() } else { grads.len() },
            });
        }
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - math::powf(self.beta1, t);
        let c2 = 1.0 - math::powf(self.beta2, t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.learning_rate * m_hat / (math::sqrt(v_hat) + self.epsilon);
        }
        Ok(())
    }
}

/// Loss split into its data and physics parts (`total = data + λ·physics`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub data: f64,
    pub physics: f64,
}

/// A differentiable training objective over indexed samples.
pub trait Objective {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Loss on `batch`; adds its parameter gradient to `grad` when given.
    fn evaluate(&self, net: &Mlp, batch: &[usize], grad: Option<&mut [f64]>) -> Result<LossParts>;
}

/// Plain mean squared error.
pub struct MseObjective<'a, R> {
    pub inputs: &'a [R],
    pub targets: &'a [f64],
}

impl<R: AsRef<[f64]>> Objective for MseObjective<'_, R> {
    fn len(&self) -> usize {
        self.inputs.len()
    }

    fn evaluate(&self, net: &Mlp, batch: &[usize], grad: Option<&mut [f64]>) -> Result<LossParts> {
        let data = mse_terms(net, self.inputs, self.targets, batch, grad)?;
        Ok(LossParts {
            total: data,
            data,
            physics: 0.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Seeds the minibatch shuffling stream.
    pub seed: u64,
    /// Training sets up to this size use a single full batch per epoch.
    pub full_batch_limit: usize,
    pub batch_size: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 1000,
            seed: 0,
            full_batch_limit: 5000,
            batch_size: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train: LossParts,
    /// Data loss on the validation set after the epoch; NaN without one.
    pub val_loss: f64,
}

/// Adam on `objective` for `opts.epochs` epochs, no schedule, no early stop.
///
/// The logged training loss of a full-batch epoch is the loss at the
/// parameters the epoch's step started from.
pub fn fit<O: Objective + ?Sized, V: Objective + ?Sized>(
    mut net: Mlp,
    objective: &O,
    validation: Option<&V>,
    opts: &TrainOptions,
) -> Result<(Mlp, Vec<EpochRecord>)> {
    if !(opts.learning_rate > 0.0 && opts.learning_rate.is_finite()) {
        return Err(Error::config("learning rate must be positive"));
    }
    let n = objective.len();
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    if opts.batch_size == 0 {
        return Err(Error::config("batch_size must be >= 1"));
    }
    let mut adam = Adam::new(opts.learning_rate, net.params.len());
    let mut grad = alloc::vec![0.0; net.params.len()];
    let mut order: Vec<usize> = (0..n).collect();
    let full_batch = n <= opts.full_batch_limit;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(1);
    let val_batch: Vec<usize> = validation.map(|v| (0..v.len()).collect()).unwrap_or_default();
    let mut history = Vec::with_capacity(opts.epochs);

    for epoch in 1..=opts.epochs {
        if !full_batch {
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
        }
        let batch_size = if full_batch { n } else { opts.batch_size };
        let mut acc = LossParts::default();
        let mut batches = 0usize;
        for batch in order.chunks(batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let parts = objective.evaluate(&net, batch, Some(&mut grad))?;
            if !parts.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged {
                    epoch,
                    param_norm: net.param_norm(),
                });
            }
            adam.step(&mut net.params, &grad)?;
            acc.total += parts.total;
            acc.data += parts.data;
            acc.physics += parts.physics;
            batches += 1;
        }
        let train = if batches == 1 {
            acc
        } else {
            let k = batches as f64;
            LossParts {
                total: acc.total / k,
                data: acc.data / k,
                physics: acc.physics / k,
            }
        };
        let val_loss = match validation {
            Some(v) if !v.is_empty() => v.evaluate(&net, &val_batch, None)?.data,
            _ => f64::NAN,
        };
        history.push(EpochRecord { epoch, train, val_loss });
    }
    Ok((net, history))
}

/// Trains a fresh network on mean squared error.
pub fn train_mlp<R: AsRef<[f64]>>(
    train_inputs: &[R],
    train_targets: &[f64],
    val_inputs: &[R],
    val_targets: &[f64],
    config: &MlpConfig,
    opts: &TrainOptions,
) -> Result<(Mlp, Vec<EpochRecord>)> {
    let net = Mlp::init(config)?;
    let train = MseObjective {
        inputs: train_inputs,
        targets: train_targets,
    };
    let val = MseObjective {
        inputs: val_inputs,
        targets: val_targets,
    };
    fit(net, &train, Some(&val), opts)
}

/// Serialized layout: one entry per layer with its shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpFile {
    pub activation: Activation,
    pub layers: Vec<LayerFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFile {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl From<Mlp> for MlpFile {
    fn from(net: Mlp) -> Self {
        let layers = (0..net.layer_count())
            .map(|l| {
                let (w, b) = net.layer_range(l);
                LayerFile {
                    inputs: net.sizes[l],
                    outputs: net.sizes[l + 1],
                    weights: net.params[w].to_vec(),
                    bias: net.params[b].to_vec(),
                }
            })
            .collect();
        MlpFile {
            activation: net.activation,
            layers,
        }
    }
}

impl TryFrom<MlpFile> for Mlp {
    type Error = String;

    fn try_from(file: MlpFile) -> core::result::Result<Self, String> {
        let first = file.layers.first().ok_or("network has no layers")?;
        let mut sizes = alloc::vec![first.inputs];
        let mut params = Vec::new();
        for (l, layer) in file.layers.iter().enumerate() {
            if layer.inputs != *sizes.last().unwrap() {
                return Err(format!("layer {l} expects {} inputs, previous layer has {}", layer.inputs, sizes.last().unwrap()));
            }
            if layer.weights.len() != layer.inputs * layer.outputs || layer.bias.len() != layer.outputs {
                return Err(format!("layer {l} arrays do not match shape {}x{}", layer.outputs, layer.inputs));
            }
            sizes.push(layer.outputs);
            params.extend_from_slice(&layer.weights);
            params.extend_from_slice(&layer.bias);
        }
        if *sizes.last().unwrap() != 1 || sizes.len() < 3 {
            return Err("network must have at least one hidden layer and a scalar output".into());
        }
        Ok(Mlp {
            activation: file.activation,
            sizes,
            params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(input_dim: usize, hidden_layers: usize, neurons: usize, seed: u64) -> MlpConfig {
        MlpConfig {
            input_dim,
            hidden_layers,
            neurons_per_layer: neurons,
            activation: Activation::Tanh,
            seed,
        }
    }

    fn random_batch(seed: u64, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        let y = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (x, y)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&cfg(3, 2, 4, 0)).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn single_neuron_hand_evaluated() {
        let mut net = Mlp::zeros(&cfg(1, 1, 1, 0)).unwrap();
        // [w1, b1, w2, b2]
        net.params_mut().copy_from_slice(&[0.8, -0.1, 1.5, 0.25]);
        let expected = 1.5 * libm::tanh(0.8 * 0.5 - 0.1) + 0.25;
        assert_eq!(net.forward(&[0.5]).unwrap(), expected);
    }

    #[test]
    fn shape_errors() {
        let net = Mlp::init(&cfg(2, 1, 3, 0)).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Shape { .. })));
        assert!(matches!(net.input_derivative(&[1.0, 2.0], 2), Err(Error::Index { .. })));
        assert!(Mlp::init(&cfg(2, 0, 3, 0)).is_err());
    }

    #[test]
    fn parameter_gradient_matches_central_differences() {
        for (seed, layers, width) in [(1, 1, 3), (2, 2, 8), (3, 2, 4)] {
            let net = Mlp::init(&cfg(2, layers, width, seed)).unwrap();
            let (x, y) = random_batch(seed + 10, 6, 2);
            let (_, grad) = net.mse_gradient(&x, &y).unwrap();
            let h = 1e-6;
            for k in 0..net.params().len() {
                let mut plus = net.clone();
                plus.params_mut()[k] += h;
                let mut minus = net.clone();
                minus.params_mut()[k] -= h;
                let fd = (plus.mse_gradient(&x, &y).unwrap().0 - minus.mse_gradient(&x, &y).unwrap().0) / (2.0 * h);
                assert!(rel_err(grad[k], fd) < 1e-6, "param {k}: {} vs {fd}", grad[k]);
            }
        }
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let net = Mlp::init(&cfg(2, 2, 3, 4)).unwrap();
        let (x, _) = random_batch(4, 5, 2);
        let y: Vec<f64> = x.iter().map(|r| net.forward(r).unwrap()).collect();
        let (loss, grad) = net.mse_gradient(&x, &y).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn duplicated_batch_keeps_mean_gradient() {
        let net = Mlp::init(&cfg(3, 2, 5, 8)).unwrap();
        let (x, y) = random_batch(8, 7, 3);
        let (_, g1) = net.mse_gradient(&x, &y).unwrap();
        let x2: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
        let y2: Vec<f64> = y.iter().chain(&y).copied().collect();
        let (_, g2) = net.mse_gradient(&x2, &y2).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn input_derivative_of_linear_network() {
        let c = MlpConfig {
            activation: Activation::Identity,
            ..cfg(2, 1, 1, 0)
        };
        let mut net = Mlp::zeros(&c).unwrap();
        // hidden = x0 (weights [1, 0]), output = 3·hidden
        net.params_mut().copy_from_slice(&[1.0, 0.0, 0.0, 3.0, 0.0]);
        assert_eq!(net.input_derivative(&[0.4, 9.0], 0).unwrap(), 3.0);
        assert_eq!(net.input_derivative(&[0.4, 9.0], 1).unwrap(), 0.0);

        let inputs = StandardScaler::fitted(&[[0.0, 0.0], [4.0, 2.0]]).unwrap();
        let target = StandardScaler::fitted_column(&[1.0, 1.0]).unwrap();
        let d = net.physical_input_derivative(&[0.4, 9.0], 0, &inputs, &target).unwrap();
        assert_eq!(d, 3.0 / 2.0);
    }

    #[test]
    fn input_derivative_matches_central_differences() {
        for seed in 0..5 {
            let net = Mlp::init(&cfg(3, 2, 8, seed)).unwrap();
            let (xs, _) = random_batch(seed + 100, 4, 3);
            for x in &xs {
                for dim in 0..3 {
                    let h = 1e-5;
                    let mut p = x.clone();
                    p[dim] += h;
                    let mut m = x.clone();
                    m[dim] -= h;
                    let fd = (net.forward(&p).unwrap() - net.forward(&m).unwrap()) / (2.0 * h);
                    let an = net.input_derivative(x, dim).unwrap();
                    assert!(rel_err(an, fd) < 1e-6, "{an} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn ignored_input_has_zero_derivative() {
        let mut net = Mlp::init(&cfg(3, 2, 4, 6)).unwrap();
        let (w, _) = net.layer_range(0);
        for o in 0..4 {
            net.params[w.start + o * 3 + 2] = 0.0;
        }
        assert_eq!(net.input_derivative(&[0.1, 0.2, 0.3], 2).unwrap(), 0.0);
    }

    #[test]
    fn tangent_reverse_pass_matches_differences_of_input_derivative() {
        // Gradient of ½·(∂y/∂x₀)² with respect to every parameter.
        let net = Mlp::init(&cfg(2, 2, 4, 21)).unwrap();
        let x = [0.3, -0.7];
        let mut trace = Trace::new(&net);
        net.trace_into(&x, Some(0), &mut trace).unwrap();
        let mut grad = alloc::vec![0.0; net.params().len()];
        net.backprop(&trace, 0.0, trace.output_tangent, &mut grad, &mut Scratch::default());
        let h = 1e-6;
        for k in 0..grad.len() {
            let f = |delta: f64| {
                let mut n = net.clone();
                n.params_mut()[k] += delta;
                let d = n.input_derivative(&x, 0).unwrap();
                0.5 * d * d
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            assert!(rel_err(grad[k], fd) < 1e-6, "param {k}: {} vs {fd}", grad[k]);
        }
    }

    #[test]
    fn adam_first_step_hand_evaluated() {
        let mut adam = Adam::new(1e-3, 1);
        let mut p = [1.0];
        adam.step(&mut p, &[0.5]).unwrap();
        // m̂ = 0.5, v̂ = 0.25
        let expected = 1.0 - 1e-3 * 0.5 / (0.5 + 1e-8);
        assert_eq!(p[0], expected);
    }

    #[test]
    fn adam_zero_gradient_and_determinism() {
        let mut adam = Adam::new(1e-2, 3);
        let mut p = [0.5, -1.0, 2.0];
        adam.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, [0.5, -1.0, 2.0]);

        let mut a = Adam::new(1e-2, 2);
        let mut b = a.clone();
        let mut pa = [0.1, 0.2];
        let mut pb = pa;
        a.step(&mut pa, &[0.3, -0.4]).unwrap();
        b.step(&mut pb, &[0.3, -0.4]).unwrap();
        assert_eq!(pa, pb);
        assert!(a.step(&mut [0.0], &[0.0]).is_err());
    }

    #[test]
    fn learns_linear_map() {
        let x: Vec<[f64; 1]> = (0..16).map(|i| [-1.0 + 2.0 * i as f64 / 15.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0]).collect();
        let opts = TrainOptions {
            learning_rate: 1e-2,
            epochs: 1000,
            ..TrainOptions::default()
        };
        let (net, history) = train_mlp(&x, &y, &x, &y, &cfg(1, 1, 8, 3), &opts).unwrap();
        assert_eq!(history.len(), 1000);
        let (mse, _) = net.mse_gradient(&x, &y).unwrap();
        assert!(mse < 1e-3, "{mse}");
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let c = cfg(2, 2, 3, 17);
        let (x, y) = random_batch(1, 10, 2);
        let opts = TrainOptions {
            epochs: 0,
            ..TrainOptions::default()
        };
        let (net, history) = train_mlp(&x, &y, &x, &y, &c, &opts).unwrap();
        assert_eq!(net, Mlp::init(&c).unwrap());
        assert!(history.is_empty());
    }

    #[test]
    fn training_is_deterministic_including_minibatches() {
        let c = cfg(2, 1, 4, 2);
        let (x, y) = random_batch(9, 40, 2);
        let opts = TrainOptions {
            epochs: 20,
            full_batch_limit: 10,
            batch_size: 7,
            ..TrainOptions::default()
        };
        let a = train_mlp(&x, &y, &x, &y, &c, &opts).unwrap();
        let b = train_mlp(&x, &y, &x, &y, &c, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_is_reported() {
        let c = cfg(1, 1, 2, 0);
        let x = [[1.0], [2.0]];
        let y = [f64::NAN, 1.0];
        let opts = TrainOptions {
            epochs: 3,
            ..TrainOptions::default()
        };
        assert!(matches!(train_mlp(&x, &y, &x, &y, &c, &opts), Err(Error::Diverged { epoch: 1, .. })));
    }

    #[test]
    fn file_layout_round_trip() {
        let net = Mlp::init(&cfg(5, 2, 3, 1)).unwrap();
        let file = MlpFile::from(net.clone());
        assert_eq!(file.layers.len(), 3);
        assert_eq!((file.layers[0].outputs, file.layers[0].inputs), (3, 5));
        assert_eq!(Mlp::try_from(file).unwrap(), net);
    }
}
