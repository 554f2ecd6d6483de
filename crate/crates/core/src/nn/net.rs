use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Sigmoid outputs are clamped to `[SIGMOID_CLAMP, 1 - SIGMOID_CLAMP]`.
pub const SIGMOID_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Relu,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Linear,
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetBlob", try_from = "NetBlob")]
pub struct MlpNet {
    layer_dims: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    hidden: HiddenActivation,
    output: OutputActivation,
    weight_decay: f64,
}

/// Intermediate values of one forward pass, kept for [`MlpNet::backward`].
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Input to each layer; `layer_inputs[0]` is the network input.
    pub layer_inputs: Vec<Array2<f64>>,
    /// `x W + b` of each layer, before the activation.
    pub pre_activations: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// `self += other`.
    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }
}

impl MlpNet {
    /// Glorot-uniform weights `U(±sqrt(6 / (fan_in + fan_out)))`, zero biases.
    pub fn new(
        layer_dims: &[usize],
        hidden: HiddenActivation,
        output: OutputActivation,
        weight_decay: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_dims, hidden, output, weight_decay)?;
        for w in &mut net.weights {
            let (fan_in, fan_out) = w.dim();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            w.mapv_inplace(|_| rng.random_range(-limit..limit));
        }
        Ok(net)
    }

    pub fn zeros(
        layer_dims: &[usize],
        hidden: HiddenActivation,
        output: OutputActivation,
        weight_decay: f64,
    ) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::param(format!("bad layer dims {layer_dims:?}")));
        }
        if !(weight_decay >= 0.0) || !weight_decay.is_finite() {
            return Err(Error::param(format!("weight decay {weight_decay}")));
        }
        let weights = layer_dims.windows(2).map(|d| Array2::zeros((d[0], d[1]))).collect();
        let biases = layer_dims[1..].iter().map(|&d| Array1::zeros(d)).collect();
        Ok(Self {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            hidden,
            output,
            weight_decay,
        })
    }

    pub fn from_parts(
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        hidden: HiddenActivation,
        output: OutputActivation,
        weight_decay: f64,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::shape("one bias vector per weight matrix"));
        }
        let mut layer_dims = vec![weights[0].nrows()];
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.nrows() != *layer_dims.last().unwrap() || w.ncols() != b.len() {
                return Err(Error::shape(format!("layer {i} does not chain")));
            }
            layer_dims.push(w.ncols());
        }
        let mut net = Self::zeros(&layer_dims, hidden, output, weight_decay)?;
        net.weights = weights;
        net.biases = biases;
        if !net.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(net)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn weight_decay(&self) -> f64 {
        self.weight_decay
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    fn n_layers(&self) -> usize {
        self.weights.len()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::shape(format!(
                "input has {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn affine(&self, layer: usize, x: &ArrayView2<f64>) -> Array2<f64> {
        let w = &self.weights[layer];
        let mut z = Array2::zeros((x.nrows(), w.ncols()));
        z += &self.biases[layer];
        general_mat_mul(1.0, x, w, 1.0, &mut z);
        z
    }

    fn activate(&self, layer: usize, z: &Array2<f64>) -> Array2<f64> {
        if layer + 1 < self.n_layers() {
            match self.hidden {
                HiddenActivation::Relu => z.mapv(|v| v.max(0.0)),
                HiddenActivation::Tanh => z.mapv(f64::tanh),
            }
        } else {
            match self.output {
                OutputActivation::Linear => z.clone(),
                OutputActivation::Sigmoid => z.mapv(sigmoid),
            }
        }
    }

    /// Forward pass keeping every intermediate for backpropagation.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<ForwardPass> {
        self.check_input(&x)?;
        let mut layer_inputs = Vec::with_capacity(self.n_layers());
        let mut pre_activations = Vec::with_capacity(self.n_layers());
        let mut current = x.to_owned();
        for layer in 0..self.n_layers() {
            let z = self.affine(layer, &current.view());
            let a = self.activate(layer, &z);
            layer_inputs.push(current);
            pre_activations.push(z);
            current = a;
        }
        Ok(ForwardPass {
            layer_inputs,
            pre_activations,
            output: current,
        })
    }

    /// Forward pass returning only the output.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut current = x.to_owned();
        for layer in 0..self.n_layers() {
            let z = self.affine(layer, &current.view());
            current = self.activate(layer, &z);
        }
        Ok(current)
    }

    /// Gradients of `sum(upstream * output)` with respect to every
    /// parameter and to the input rows.
    pub fn backward(&self, pass: &ForwardPass, upstream: ArrayView2<f64>) -> Result<(Gradients, Array2<f64>)> {
        let (grads, input) = self.backprop(pass, upstream, true)?;
        Ok((grads, input.expect("input gradient requested")))
    }

    /// As [`MlpNet::backward`] without the input gradient.
    pub fn param_gradients(&self, pass: &ForwardPass, upstream: ArrayView2<f64>) -> Result<Gradients> {
        Ok(self.backprop(pass, upstream, false)?.0)
    }

    fn backprop(
        &self,
        pass: &ForwardPass,
        upstream: ArrayView2<f64>,
        want_input: bool,
    ) -> Result<(Gradients, Option<Array2<f64>>)> {
        if pass.layer_inputs.len() != self.n_layers() || upstream.dim() != pass.output.dim() {
            return Err(Error::shape(format!(
                "upstream {:?} vs output {:?}",
                upstream.dim(),
                pass.output.dim()
            )));
        }
        let last = self.n_layers() - 1;
        let mut delta = upstream.to_owned();
        if self.output == OutputActivation::Sigmoid {
            Zip::from(&mut delta)
                .and(&pass.output)
                .for_each(|d, &s| *d *= s * (1.0 - s));
        }
        let mut gw = vec![Array2::zeros((0, 0)); self.n_layers()];
        let mut gb = vec![Array1::zeros(0); self.n_layers()];
        let mut input_grad = None;
        for layer in (0..=last).rev() {
            let x = &pass.layer_inputs[layer];
            let mut dw = Array2::zeros(self.weights[layer].dim());
            general_mat_mul(1.0, &x.t(), &delta, 0.0, &mut dw);
            gw[layer] = dw;
            gb[layer] = delta.sum_axis(Axis(0));
            if layer == 0 && !want_input {
                break;
            }
            let mut dx = Array2::zeros(x.dim());
            general_mat_mul(1.0, &delta, &self.weights[layer].t(), 0.0, &mut dx);
            if layer == 0 {
                input_grad = Some(dx);
                break;
            }
            let z = &pass.pre_activations[layer - 1];
            match self.hidden {
                HiddenActivation::Relu => Zip::from(&mut dx).and(z).for_each(|d, &zv| {
                    if zv <= 0.0 {
                        *d = 0.0;
                    }
                }),
                HiddenActivation::Tanh => Zip::from(&mut dx)
                    .and(&pass.layer_inputs[layer])
                    .for_each(|d, &a| *d *= 1.0 - a * a),
            }
            delta = dx;
        }
        Ok((
            Gradients {
                weights: gw,
                biases: gb,
            },
            input_grad,
        ))
    }

    /// `w <- w - lr * (grad + weight_decay * w)` on weights; biases take the
    /// plain gradient step. `epoch` only labels a divergence error.
    pub fn sgd_step(&mut self, grads: &Gradients, learning_rate: f64, epoch: usize) -> Result<()> {
        if grads.weights.len() != self.n_layers() {
            return Err(Error::shape("gradient layer count"));
        }
        for (w, g) in self.weights.iter().zip(&grads.weights) {
            if w.dim() != g.dim() {
                return Err(Error::shape(format!("gradient {:?} for weight {:?}", g.dim(), w.dim())));
            }
        }
        if !grads.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let decay = self.weight_decay;
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            if decay == 0.0 {
                w.scaled_add(-learning_rate, g);
            } else {
                Zip::from(w).and(g).for_each(|w, &g| {
                    *w -= learning_rate * (g + decay * *w);
                });
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            b.scaled_add(-learning_rate, g);
        }
        if !self.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(SIGMOID_CLAMP, 1.0 - SIGMOID_CLAMP)
}

const NET_FORMAT_VERSION: u32 = 1;

/// On-disk form: row-major weights, one vector per layer.
#[derive(Serialize, Deserialize)]
struct NetBlob {
    version: u32,
    layer_dims: Vec<usize>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
    weight_decay: f64,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl From<MlpNet> for NetBlob {
    fn from(net: MlpNet) -> Self {
        NetBlob {
            version: NET_FORMAT_VERSION,
            layer_dims: net.layer_dims,
            hidden_activation: net.hidden,
            output_activation: net.output,
            weight_decay: net.weight_decay,
            weights: net.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: net.biases.into_iter().map(|b| b.to_vec()).collect(),
        }
    }
}

impl TryFrom<NetBlob> for MlpNet {
    type Error = Error;

    fn try_from(blob: NetBlob) -> Result<Self> {
        if blob.version != NET_FORMAT_VERSION {
            return Err(Error::FormatVersion(blob.version));
        }
        let dims = &blob.layer_dims;
        if dims.len() < 2 || blob.weights.len() != dims.len() - 1 {
            return Err(Error::shape("layer count"));
        }
        let weights = blob
            .weights
            .into_iter()
            .zip(dims.windows(2))
            .map(|(w, d)| Array2::from_shape_vec((d[0], d[1]), w).map_err(|e| Error::shape(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let biases = blob.biases.into_iter().map(Array1::from).collect();
        MlpNet::from_parts(
            weights,
            biases,
            blob.hidden_activation,
            blob.output_activation,
            blob.weight_decay,
        )
    }
}
