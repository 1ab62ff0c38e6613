use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Activation;
use crate::error::{ensure_len, Error, Result};
use crate::linalg::{gemm, Matrix, Op};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

impl LayerShape {
    pub fn new(inputs: usize, outputs: usize, activation: Activation) -> Self {
        LayerShape {
            inputs,
            outputs,
            activation,
        }
    }

    fn param_count(&self) -> usize {
        self.outputs * self.inputs + self.outputs
    }
}

/// A stack of affine layers `y = act(W x + b)` with all parameters in one
/// flat buffer: per layer, the `outputs x inputs` weight (row-major) then the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<LayerShape>,
    offsets: Vec<usize>,
    params: Vec<f64>,
}

/// Per-layer inputs and activation derivatives saved by [`DenseNet::forward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Matrix>,
    /// `act'(z)` per layer; `None` for identity layers.
    derivs: Vec<Option<Matrix>>,
}

impl DenseNet {
    /// All-zero parameters.
    pub fn zeros(layers: Vec<LayerShape>) -> Result<Self> {
        let n = layers.iter().map(LayerShape::param_count).sum();
        Self::from_parts(layers, vec![0.0; n])
    }

    pub fn from_parts(layers: Vec<LayerShape>, params: Vec<f64>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("network has no layers"));
        }
        for w in layers.windows(2) {
            ensure_len("layer chaining", w[0].outputs, w[1].inputs)?;
        }
        if layers.iter().any(|l| l.inputs == 0 || l.outputs == 0) {
            return Err(Error::InvalidConfig("layers need nonzero widths".into()));
        }
        let mut offsets = Vec::with_capacity(layers.len());
        let mut total = 0;
        for l in &layers {
            offsets.push(total);
            total += l.param_count();
        }
        ensure_len("parameter buffer", total, params.len())?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        Ok(DenseNet {
            layers,
            offsets,
            params,
        })
    }

    /// Glorot-uniform weights on `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(layers: Vec<LayerShape>, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layers)?;
        for l in 0..net.layers.len() {
            let shape = net.layers[l];
            let limit = libm::sqrt(6.0 / (shape.inputs + shape.outputs) as f64);
            for w in net.weight_mut(l) {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    /// Chain `widths[0] -> widths[1] -> ...`, `hidden` on every layer but the last.
    pub fn mlp<R: Rng + ?Sized>(widths: &[usize], hidden: Activation, rng: &mut R) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidConfig("an MLP needs at least two widths".into()));
        }
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last { Activation::Identity } else { hidden };
                LayerShape::new(w[0], w[1], act)
            })
            .collect();
        Self::glorot(layers, rng)
    }

    pub fn layers(&self) -> &[LayerShape] {
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

    pub fn weight(&self, layer: usize) -> &[f64] {
        let s = self.layers[layer];
        let o = self.offsets[layer];
        &self.params[o..o + s.outputs * s.inputs]
    }

    pub fn weight_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.layers[layer];
        let o = self.offsets[layer];
        &mut self.params[o..o + s.outputs * s.inputs]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let s = self.layers[layer];
        let o = self.offsets[layer] + s.outputs * s.inputs;
        &self.params[o..o + s.outputs]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.layers[layer];
        let o = self.offsets[layer] + s.outputs * s.inputs;
        &mut self.params[o..o + s.outputs]
    }

    fn affine(&self, layer: usize, x: &Matrix) -> Matrix {
        let s = self.layers[layer];
        let mut z = Matrix::zeros(x.rows(), s.outputs);
        for r in 0..x.rows() {
            z.row_mut(r).copy_from_slice(self.bias(layer));
        }
        gemm(
            1.0,
            x.as_slice(),
            (x.rows(), s.inputs),
            Op::N,
            self.weight(layer),
            (s.outputs, s.inputs),
            Op::T,
            1.0,
            z.as_mut_slice(),
        );
        z
    }

    /// Forward pass over a batch (one sample per row), keeping what backward needs.
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, ForwardCache)> {
        ensure_len("network input", self.input_dim(), x.cols())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut derivs = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (l, s) in self.layers.iter().enumerate() {
            let mut a = self.affine(l, &h);
            let deriv = (s.activation != Activation::Identity).then(|| {
                let mut d = Matrix::zeros(a.rows(), a.cols());
                for (v, g) in a.as_mut_slice().iter_mut().zip(d.as_mut_slice()) {
                    (*v, *g) = s.activation.apply_with_derivative(*v);
                }
                d
            });
            inputs.push(h);
            derivs.push(deriv);
            h = a;
        }
        Ok((h, ForwardCache { inputs, derivs }))
    }

    /// Forward pass without a cache.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        ensure_len("network input", self.input_dim(), x.cols())?;
        let mut h = x.clone();
        for (l, s) in self.layers.iter().enumerate() {
            h = self.affine(l, &h);
            if s.activation != Activation::Identity {
                h.as_mut_slice()
                    .iter_mut()
                    .for_each(|v| *v = s.activation.apply(*v));
            }
        }
        Ok(h)
    }

    /// Gradient of a scalar objective given `dy = d objective / d output`.
    /// Returns the input gradient and the flat parameter gradient.
    pub fn backward(&self, cache: &ForwardCache, dy: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        let mut grads = vec![0.0; self.params.len()];
        let dx = self.backward_into(cache, dy, &mut grads)?;
        Ok((dx, grads))
    }

    /// Like [`backward`](Self::backward) but adds parameter gradients into `grads`.
    pub fn backward_into(&self, cache: &ForwardCache, dy: &Matrix, grads: &mut [f64]) -> Result<Matrix> {
        self.backprop(cache, dy, grads, true)
    }

    /// Parameter gradients only; skips the input-gradient product of the first layer.
    pub fn backward_params(&self, cache: &ForwardCache, dy: &Matrix, grads: &mut [f64]) -> Result<()> {
        self.backprop(cache, dy, grads, false).map(drop)
    }

    fn backprop(&self, cache: &ForwardCache, dy: &Matrix, grads: &mut [f64], input_grad: bool) -> Result<Matrix> {
        ensure_len("cached layers", self.layers.len(), cache.derivs.len())?;
        ensure_len("output gradient", self.output_dim(), dy.cols())?;
        ensure_len("parameter gradient", self.params.len(), grads.len())?;
        let batch = cache.inputs[0].rows();
        ensure_len("output gradient rows", batch, dy.rows())?;

        let mut delta = dy.clone();
        for l in (0..self.layers.len()).rev() {
            let s = self.layers[l];
            if let Some(deriv) = &cache.derivs[l] {
                for (d, g) in delta.as_mut_slice().iter_mut().zip(deriv.as_slice()) {
                    *d *= g;
                }
            }
            let o = self.offsets[l];
            let (gw, rest) = grads[o..o + s.param_count()].split_at_mut(s.outputs * s.inputs);
            // dW += delta^T x
            gemm(
                1.0,
                delta.as_slice(),
                (batch, s.outputs),
                Op::T,
                cache.inputs[l].as_slice(),
                (batch, s.inputs),
                Op::N,
                1.0,
                gw,
            );
            for r in 0..batch {
                for (gb, d) in rest.iter_mut().zip(delta.row(r)) {
                    *gb += d;
                }
            }
            if l == 0 && !input_grad {
                break;
            }
            // dx = delta W
            let mut dx = Matrix::zeros(batch, s.inputs);
            gemm(
                1.0,
                delta.as_slice(),
                (batch, s.outputs),
                Op::N,
                self.weight(l),
                (s.outputs, s.inputs),
                Op::N,
                0.0,
                dx.as_mut_slice(),
            );
            delta = dx;
        }
        Ok(delta)
    }
}
