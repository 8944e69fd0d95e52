use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Truncation point of the initial weight distribution, in standard deviations.
pub const INIT_TRUNCATION: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Swish,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
            Activation::Swish => x * sigmoid(x),
        }
    }

    /// `(σ(x), σ'(x))` sharing one exponential.
    #[inline]
    pub fn apply_with_derivative(self, x: f64) -> (f64, f64) {
        match self {
            Activation::Tanh => {
                let t = x.tanh();
                (t, 1.0 - t * t)
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                (s, s * (1.0 - s))
            }
            Activation::Swish => {
                let s = sigmoid(x);
                (x * s, s + x * s * (1.0 - s))
            }
        }
    }

    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::Swish => {
                let s = sigmoid(x);
                s + x * s * (1.0 - s)
            }
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            Activation::Tanh => 0,
            Activation::Sigmoid => 1,
            Activation::Swish => 2,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Sigmoid),
            2 => Some(Activation::Swish),
            _ => None,
        }
    }
}

/// Feedforward network `x -> W_L(σ(W_{L-1}(... σ(W_1 x))))` with affine
/// maps `W_l(z) = A_l z + b_l` and an affine output layer.
///
/// All parameters live in one flat vector, layer by layer: the row-major
/// `N_l x N_{l-1}` matrix `A_l` followed by `b_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    dims: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
}

/// Intermediate values of a batched forward pass.
#[derive(Debug)]
pub struct ForwardCache {
    /// Layer inputs: the batch itself, then each hidden activation.
    inputs: Vec<Array2<f64>>,
    /// Activation derivatives at the hidden pre-activations.
    slopes: Vec<Array2<f64>>,
}

/// Gradient of `upstream · F(x)` for a single input.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    /// Same layout as [`Network::params`].
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Network {
    pub fn zeros(dims: &[usize], activation: Activation) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::config(format!(
                "network needs at least an input and an output layer of positive width, got {dims:?}"
            )));
        }
        Ok(Network { dims: dims.to_vec(), activation, params: vec![0.0; param_count(dims)] })
    }

    pub fn from_params(dims: &[usize], activation: Activation, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(dims, activation)?;
        if params.len() != net.params.len() {
            return Err(Error::Shape { expected: net.params.len(), got: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    /// Weights drawn from a standard normal truncated at two standard
    /// deviations (re-drawing rejected values), scaled by `1/sqrt(N_{l-1})`;
    /// biases zero.
    pub fn init_truncated_normal(dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(dims, activation)?;
        let mut stream = Stream::new(seed, 0);
        for l in 0..net.n_layers() {
            let scale = 1.0 / (net.dims[l] as f64).sqrt();
            net.weights_mut(l).mapv_inplace(|_| scale * stream.truncated_normal(INIT_TRUNCATION));
        }
        Ok(net)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("dims non-empty")
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Number of affine layers.
    pub fn n_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offset(&self, layer: usize) -> usize {
        param_count(&self.dims[..=layer])
    }

    pub fn weights(&self, layer: usize) -> ArrayView2<'_, f64> {
        let (rows, cols, off) = (self.dims[layer + 1], self.dims[layer], self.offset(layer));
        ArrayView2::from_shape((rows, cols), &self.params[off..off + rows * cols]).expect("layout")
    }

    pub fn weights_mut(&mut self, layer: usize) -> ArrayViewMut2<'_, f64> {
        let (rows, cols, off) = (self.dims[layer + 1], self.dims[layer], self.offset(layer));
        ArrayViewMut2::from_shape((rows, cols), &mut self.params[off..off + rows * cols]).expect("layout")
    }

    pub fn bias(&self, layer: usize) -> ArrayView1<'_, f64> {
        let (rows, cols, off) = (self.dims[layer + 1], self.dims[layer], self.offset(layer));
        ArrayView1::from(&self.params[off + rows * cols..off + rows * cols + rows])
    }

    pub fn bias_mut(&mut self, layer: usize) -> ArrayViewMut1<'_, f64> {
        let (rows, cols, off) = (self.dims[layer + 1], self.dims[layer], self.offset(layer));
        ArrayViewMut1::from(&mut self.params[off + rows * cols..off + rows * cols + rows])
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape { expected: self.input_dim(), got: x.len() });
        }
        let mut z = Array1::from(x.to_vec());
        for l in 0..self.n_layers() {
            let mut a = self.weights(l).dot(&z) + self.bias(l);
            if l + 1 < self.n_layers() {
                a.mapv_inplace(|v| self.activation.apply(v));
            }
            z = a;
        }
        Ok(z.to_vec())
    }

    /// Forward pass over the rows of `x` (`[batch, N_0]`).
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, ForwardCache)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape { expected: self.input_dim(), got: x.ncols() });
        }
        let last = self.n_layers() - 1;
        let mut inputs = Vec::with_capacity(self.n_layers());
        let mut slopes = Vec::with_capacity(last);
        let mut z = x.to_owned();
        for l in 0..last {
            let mut a = z.dot(&self.weights(l).t()) + self.bias(l);
            let mut slope = Array2::zeros(a.raw_dim());
            Zip::from(&mut a).and(&mut slope).for_each(|v, d| {
                let (act, der) = self.activation.apply_with_derivative(*v);
                *v = act;
                *d = der;
            });
            inputs.push(z);
            slopes.push(slope);
            z = a;
        }
        let out = z.dot(&self.weights(last).t()) + self.bias(last);
        inputs.push(z);
        Ok((out, ForwardCache { inputs, slopes }))
    }

    /// Parameter gradient of `sum_rows upstream_row · F(x_row)`, given the
    /// cache of the matching forward pass.
    pub fn backward_batch(&self, cache: &ForwardCache, upstream: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let batch = cache.inputs[0].nrows();
        if upstream.nrows() != batch {
            return Err(Error::Shape { expected: batch, got: upstream.nrows() });
        }
        if upstream.ncols() != self.output_dim() {
            return Err(Error::Shape { expected: self.output_dim(), got: upstream.ncols() });
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = upstream.to_owned();
        for l in (0..self.n_layers()).rev() {
            let (rows, cols, off) = (self.dims[l + 1], self.dims[l], self.offset(l));
            let dw = delta.t().dot(&cache.inputs[l]);
            grads[off..off + rows * cols].iter_mut().zip(dw.iter()).for_each(|(g, &v)| *g = v);
            let db = delta.sum_axis(Axis(0));
            grads[off + rows * cols..off + rows * cols + rows].iter_mut().zip(db.iter()).for_each(|(g, &v)| *g = v);
            if l > 0 {
                let mut back = delta.dot(&self.weights(l));
                back.zip_mut_with(&cache.slopes[l - 1], |g, &d| *g *= d);
                delta = back;
            }
        }
        Ok(grads)
    }

    /// Gradient of `upstream · F(x)` with respect to every parameter and to
    /// the input.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<Gradients> {
        if upstream.len() != self.output_dim() {
            return Err(Error::Shape { expected: self.output_dim(), got: upstream.len() });
        }
        let xb = ArrayView2::from_shape((1, x.len()), x).expect("row");
        let (_, cache) = self.forward_batch(xb)?;
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row");
        let params = self.backward_batch(&cache, up)?;

        let mut delta = Array1::from(upstream.to_vec());
        for l in (0..self.n_layers()).rev() {
            let mut back = self.weights(l).t().dot(&delta);
            if l > 0 {
                back.zip_mut_with(&cache.slopes[l - 1].row(0), |g, &d| *g *= d);
            }
            delta = back;
        }
        Ok(Gradients { params, input: delta.to_vec() })
    }
}

/// Componentwise clamp to `[-bound, bound]`.
pub fn truncate(y: &[f64], bound: f64) -> Vec<f64> {
    y.iter().map(|&v| truncate_scalar(v, bound)).collect()
}

#[inline]
pub fn truncate_scalar(y: f64, bound: f64) -> f64 {
    y.clamp(-bound, bound)
}

/// Derivative of [`truncate_scalar`]: 1 on the closed interval, 0 outside.
#[inline]
pub fn truncate_derivative(y: f64, bound: f64) -> f64 {
    if y.abs() <= bound {
        1.0
    } else {
        0.0
    }
}
