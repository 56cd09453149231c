//! Fixed-topology multi-layer perceptrons with hand-written backward passes.
//!
//! All parameters live in one flat buffer: for each layer, the row-major
//! weight matrix (`out x in`) followed by the bias vector. Gradients use the
//! same layout, so an optimizer can treat a network as a single slice.
//!
//! Besides the usual reverse pass, [`Mlp::input_gradient`] and
//! [`Mlp::input_gradient_backward`] implement double backpropagation: the
//! gradient of the input-gradient with respect to the parameters. The
//! discriminator's R1 penalty needs it.

use serde::{Deserialize, Serialize};

use super::rng::RandomStream;
use super::tensor::{gemv, gemv_t_acc, outer_acc};
use crate::error::{Error, Result};

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Activation {
    Identity,
    LeakyRelu { alpha: f64 },
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn leaky() -> Self {
        Activation::LeakyRelu {
            alpha: DEFAULT_LEAKY_SLOPE,
        }
    }

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::LeakyRelu { alpha } => {
                if z > 0.0 {
                    z
                } else {
                    alpha * z
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::LeakyRelu { alpha } => {
                if z > 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
        }
    }

    #[inline]
    pub fn second_derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity | Activation::LeakyRelu { .. } => 0.0,
            Activation::Tanh => {
                let t = z.tanh();
                -2.0 * t * (1.0 - t * t)
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }
        }
    }

    fn init_gain(self) -> f64 {
        match self {
            Activation::LeakyRelu { alpha } => 2.0 / (1.0 + alpha * alpha),
            _ => 1.0,
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

impl LayerSpec {
    fn weight_len(&self) -> usize {
        self.inputs * self.outputs
    }

    fn param_len(&self) -> usize {
        self.weight_len() + self.outputs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<LayerSpec>,
    offsets: Vec<usize>,
    params: Vec<f64>,
}

/// Values retained by a forward pass for the backward passes.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[k]` is layer `k`'s output.
    activations: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache has at least the input")
    }

    pub fn input(&self) -> &[f64] {
        &self.activations[0]
    }
}

/// Intermediate quantities of an input-gradient sweep.
#[derive(Debug, Clone)]
pub struct InputGradient {
    /// Gradient of `seed · output` with respect to the input.
    pub gradient: Vec<f64>,
    /// `deltas[k]` is the adjoint of layer `k`'s pre-activation.
    deltas: Vec<Vec<f64>>,
    /// `upstream[k]` is the adjoint of layer `k`'s output (`upstream[L-1]` is the seed).
    upstream: Vec<Vec<f64>>,
}

impl Mlp {
    /// Builds a network from layer widths, e.g. `[2, 64, 64, 1]`, using
    /// `hidden` between layers and `output` on the last layer. Weights are
    /// Gaussian with variance `gain / fan_in`; biases start at zero.
    pub fn new(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut RandomStream,
    ) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "network widths must have at least two positive entries, got {widths:?}"
            )));
        }
        let layers: Vec<LayerSpec> = widths
            .windows(2)
            .enumerate()
            .map(|(k, w)| LayerSpec {
                inputs: w[0],
                outputs: w[1],
                activation: if k + 2 == widths.len() { output } else { hidden },
            })
            .collect();
        let mut mlp = Self::zeros(layers)?;
        for k in 0..mlp.layers.len() {
            let spec = mlp.layers[k];
            let scale = (spec.activation.init_gain() / spec.inputs as f64).sqrt();
            let off = mlp.offsets[k];
            for w in &mut mlp.params[off..off + spec.weight_len()] {
                *w = rng.gaussian() * scale;
            }
        }
        Ok(mlp)
    }

    /// All-zero parameters for the given layers.
    pub fn zeros(layers: Vec<LayerSpec>) -> Result<Self> {
        let total = Self::validate(&layers)?;
        let offsets = Self::offsets_for(&layers);
        Ok(Self {
            layers,
            offsets,
            params: vec![0.0; total],
        })
    }

    pub fn from_parts(layers: Vec<LayerSpec>, params: Vec<f64>) -> Result<Self> {
        let total = Self::validate(&layers)?;
        if params.len() != total {
            return Err(Error::ShapeMismatch {
                expected: total,
                actual: params.len(),
            });
        }
        let offsets = Self::offsets_for(&layers);
        Ok(Self {
            layers,
            offsets,
            params,
        })
    }

    fn validate(layers: &[LayerSpec]) -> Result<usize> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network has no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::InvalidConfig(format!(
                    "layer widths do not chain: {} -> {}",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        if layers.iter().any(|l| l.inputs == 0 || l.outputs == 0) {
            return Err(Error::InvalidConfig("zero-width layer".into()));
        }
        Ok(layers.iter().map(LayerSpec::param_len).sum())
    }

    fn offsets_for(layers: &[LayerSpec]) -> Vec<usize> {
        let mut acc = 0;
        layers
            .iter()
            .map(|l| {
                let off = acc;
                acc += l.param_len();
                off
            })
            .collect()
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn zero_grad(&self) -> Vec<f64> {
        vec![0.0; self.params.len()]
    }

    fn weights(&self, k: usize) -> &[f64] {
        let off = self.offsets[k];
        &self.params[off..off + self.layers[k].weight_len()]
    }

    fn bias(&self, k: usize) -> &[f64] {
        let spec = &self.layers[k];
        let off = self.offsets[k] + spec.weight_len();
        &self.params[off..off + spec.outputs]
    }

    /// Mutable views of layer `k`'s weight and bias gradients inside `grad`.
    fn grad_blocks<'g>(&self, k: usize, grad: &'g mut [f64]) -> (&'g mut [f64], &'g mut [f64]) {
        let spec = &self.layers[k];
        let off = self.offsets[k];
        let block = &mut grad[off..off + spec.param_len()];
        block.split_at_mut(spec.weight_len())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        activations.push(input.to_vec());
        for (k, spec) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; spec.outputs];
            gemv(
                self.weights(k),
                spec.outputs,
                spec.inputs,
                &activations[k],
                &mut z,
            );
            for (zi, bi) in z.iter_mut().zip(self.bias(k)) {
                *zi += bi;
            }
            let a = z.iter().map(|&v| spec.activation.apply(v)).collect();
            pre_activations.push(z);
            activations.push(a);
        }
        let out = activations[self.layers.len()].clone();
        Ok((
            out,
            ForwardCache {
                activations,
                pre_activations,
            },
        ))
    }

    /// Forward pass without retaining a cache.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut a = input.to_vec();
        for (k, spec) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; spec.outputs];
            gemv(self.weights(k), spec.outputs, spec.inputs, &a, &mut z);
            for (zi, bi) in z.iter_mut().zip(self.bias(k)) {
                *zi = spec.activation.apply(*zi + bi);
            }
            a = z;
        }
        Ok(a)
    }

    fn check_cache(&self, cache: &ForwardCache, out_grad: &[f64]) -> Result<()> {
        if cache.pre_activations.len() != self.layers.len() {
            return Err(Error::ShapeMismatch {
                expected: self.layers.len(),
                actual: cache.pre_activations.len(),
            });
        }
        if out_grad.len() != self.output_dim() {
            return Err(Error::ShapeMismatch {
                expected: self.output_dim(),
                actual: out_grad.len(),
            });
        }
        Ok(())
    }

    /// Reverse pass. Returns `(parameter gradient, input gradient)`.
    pub fn backward(&self, cache: &ForwardCache, out_grad: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut grad = self.zero_grad();
        let dx = self.backward_acc(cache, out_grad, &mut grad)?;
        Ok((grad, dx))
    }

    /// Reverse pass that adds parameter gradients into `grad` and returns the
    /// input gradient.
    pub fn backward_acc(
        &self,
        cache: &ForwardCache,
        out_grad: &[f64],
        grad: &mut [f64],
    ) -> Result<Vec<f64>> {
        self.check_cache(cache, out_grad)?;
        if grad.len() != self.params.len() {
            return Err(Error::ShapeMismatch {
                expected: self.params.len(),
                actual: grad.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut delta: Vec<f64> = out_grad
            .iter()
            .zip(&cache.pre_activations[last])
            .map(|(g, &z)| g * self.layers[last].activation.derivative(z))
            .collect();
        for k in (0..self.layers.len()).rev() {
            let spec = self.layers[k];
            {
                let (gw, gb) = self.grad_blocks(k, grad);
                outer_acc(&delta, &cache.activations[k], gw);
                for (b, d) in gb.iter_mut().zip(&delta) {
                    *b += d;
                }
            }
            let mut upstream = vec![0.0; spec.inputs];
            gemv_t_acc(self.weights(k), spec.outputs, spec.inputs, &delta, &mut upstream);
            if k == 0 {
                return Ok(upstream);
            }
            let prev = self.layers[k - 1].activation;
            delta = upstream
                .iter()
                .zip(&cache.pre_activations[k - 1])
                .map(|(u, &z)| u * prev.derivative(z))
                .collect();
        }
        unreachable!("loop returns at the first layer")
    }

    /// Gradient of `seed · output` with respect to the input, keeping the
    /// intermediate adjoints for [`Mlp::input_gradient_backward`].
    pub fn input_gradient(&self, cache: &ForwardCache, seed: &[f64]) -> Result<InputGradient> {
        self.check_cache(cache, seed)?;
        let n = self.layers.len();
        let mut deltas = vec![Vec::new(); n];
        let mut upstream = vec![Vec::new(); n];
        let mut e = seed.to_vec();
        for k in (0..n).rev() {
            let spec = self.layers[k];
            let delta: Vec<f64> = e
                .iter()
                .zip(&cache.pre_activations[k])
                .map(|(ei, &z)| ei * spec.activation.derivative(z))
                .collect();
            let mut below = vec![0.0; spec.inputs];
            gemv_t_acc(self.weights(k), spec.outputs, spec.inputs, &delta, &mut below);
            upstream[k] = e;
            deltas[k] = delta;
            e = below;
        }
        Ok(InputGradient {
            gradient: e,
            deltas,
            upstream,
        })
    }

    /// Adds `∂(gbar · g)/∂θ` into `grad`, where `g` is the input gradient
    /// computed by [`Mlp::input_gradient`] from the same cache and seed.
    pub fn input_gradient_backward(
        &self,
        cache: &ForwardCache,
        ig: &InputGradient,
        gbar: &[f64],
        grad: &mut [f64],
    ) -> Result<()> {
        if gbar.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                expected: self.input_dim(),
                actual: gbar.len(),
            });
        }
        let n = self.layers.len();
        // Sweep up through the backward chain e_{k-1} = W_kᵀ (σ'(z_k) ⊙ e_k).
        let mut e_bar = gbar.to_vec();
        let mut z_bar: Vec<Vec<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let spec = self.layers[k];
            {
                let (gw, _) = self.grad_blocks(k, grad);
                outer_acc(&ig.deltas[k], &e_bar, gw);
            }
            let mut delta_bar = vec![0.0; spec.outputs];
            gemv(self.weights(k), spec.outputs, spec.inputs, &e_bar, &mut delta_bar);
            let zk = &cache.pre_activations[k];
            let ek = &ig.upstream[k];
            z_bar.push(
                (0..spec.outputs)
                    .map(|r| spec.activation.second_derivative(zk[r]) * ek[r] * delta_bar[r])
                    .collect(),
            );
            e_bar = delta_bar
                .iter()
                .zip(zk)
                .map(|(d, &z)| d * spec.activation.derivative(z))
                .collect();
        }
        // Pre-activation adjoints flow back through the forward pass.
        let mut acc = z_bar[n - 1].clone();
        for k in (0..n).rev() {
            let spec = self.layers[k];
            {
                let (gw, gb) = self.grad_blocks(k, grad);
                outer_acc(&acc, &cache.activations[k], gw);
                for (b, a) in gb.iter_mut().zip(&acc) {
                    *b += a;
                }
            }
            if k == 0 {
                break;
            }
            let mut a_bar = vec![0.0; spec.inputs];
            gemv_t_acc(self.weights(k), spec.outputs, spec.inputs, &acc, &mut a_bar);
            let prev = self.layers[k - 1].activation;
            acc = a_bar
                .iter()
                .zip(&cache.pre_activations[k - 1])
                .zip(&z_bar[k - 1])
                .map(|((a, &z), zb)| a * prev.derivative(z) + zb)
                .collect();
        }
        Ok(())
    }
}
