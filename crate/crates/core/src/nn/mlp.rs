use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis, Zip};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CampError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// Exponential-linear unit with alpha = 1.
    Elu,
    Identity,
}

impl Activation {
    pub fn tag(self) -> &'static str {
        match self {
            Activation::Elu => "elu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "elu" => Ok(Activation::Elu),
            "identity" => Ok(Activation::Identity),
            other => Err(CampError::Data(format!("unknown activation tag '{other}'"))),
        }
    }

    #[inline]
    fn value(self, a: f64) -> f64 {
        match self {
            Activation::Elu if a <= 0.0 => a.exp_m1(),
            _ => a,
        }
    }

    #[inline]
    fn first(self, a: f64) -> f64 {
        match self {
            Activation::Elu if a <= 0.0 => a.exp(),
            _ => 1.0,
        }
    }

    #[inline]
    fn second(self, a: f64) -> f64 {
        match self {
            Activation::Elu if a <= 0.0 => a.exp(),
            _ => 0.0,
        }
    }
}

/// Layer sizes `[input, hidden..., output]`; hidden layers use `activation`, the head is linear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(input: usize, hidden: &[usize], output: usize, activation: Activation) -> Result<Self> {
        if hidden.is_empty() {
            return Err(CampError::InvalidArgument("an MLP needs at least one hidden layer".into()));
        }
        Self::from_sizes([&[input][..], hidden, &[output]].concat(), activation)
    }

    /// A single affine layer.
    pub fn linear(input: usize, output: usize) -> Result<Self> {
        Self::from_sizes(vec![input, output], Activation::Identity)
    }

    pub fn from_sizes(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(CampError::InvalidArgument(format!(
                "invalid layer sizes {layer_sizes:?}"
            )));
        }
        Ok(Self {
            layer_sizes,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }
}

/// Flat parameter layout: for each layer, the row-major `(out, in)` weight matrix followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: MlpSpec,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Activations retained by a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Layer inputs `h_0 = x, h_1, ..., h_{L-1}`.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations `a_1, ..., a_L`; the last one is the network output.
    pre: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.pre.last().unwrap()
    }

    pub fn input(&self) -> &Array2<f64> {
        &self.inputs[0]
    }

    pub fn batch(&self) -> usize {
        self.inputs[0].nrows()
    }
}

/// Result of [`Mlp::jacobian_penalty`].
#[derive(Debug, Clone)]
pub struct Penalty {
    /// `‖∂f/∂x‖_F²` per sample.
    pub per_sample: Vec<f64>,
    /// Gradient of `Σ_b w_b · per_sample[b]` with respect to the parameters.
    pub param_grad: Vec<f64>,
    /// Gradient of the same weighted sum with respect to the inputs.
    pub input_grad: Array2<f64>,
}

fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    // QR of a Gaussian matrix; the sign fix makes the distribution uniform over orthogonal matrices.
    let tall = rows >= cols;
    let (r, c) = if tall { (rows, cols) } else { (cols, rows) };
    let a = nalgebra::DMatrix::<f64>::from_fn(r, c, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..c {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).scale_mut(-1.0);
        }
    }
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[i * cols + j] = gain * if tall { q[(i, j)] } else { q[(j, i)] };
        }
    }
    out
}

impl Mlp {
    pub fn zeros(spec: MlpSpec) -> Self {
        let mut offsets = Vec::with_capacity(spec.num_layers());
        let mut off = 0;
        for w in spec.layer_sizes.windows(2) {
            offsets.push(off);
            off += w[1] * w[0] + w[1];
        }
        Self {
            params: vec![0.0; off],
            spec,
            offsets,
        }
    }

    /// Orthogonal weights (gain `hidden_gain` on hidden layers, `output_gain` on the head), zero biases.
    pub fn orthogonal<R: Rng + ?Sized>(spec: MlpSpec, hidden_gain: f64, output_gain: f64, rng: &mut R) -> Self {
        let mut net = Self::zeros(spec);
        let layers = net.spec.num_layers();
        for l in 0..layers {
            let (out, inp) = net.layer_shape(l);
            let gain = if l + 1 == layers { output_gain } else { hidden_gain };
            let w = orthogonal(out, inp, gain, rng);
            let off = net.offsets[l];
            net.params[off..off + out * inp].copy_from_slice(&w);
        }
        net
    }

    pub fn from_params(spec: MlpSpec, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(spec);
        if params.len() != net.params.len() {
            return Err(CampError::DimensionMismatch {
                context: "mlp parameters",
                expected: net.params.len(),
                got: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim()
    }

    fn layer_shape(&self, l: usize) -> (usize, usize) {
        (self.spec.layer_sizes[l + 1], self.spec.layer_sizes[l])
    }

    /// Weight matrix of layer `l`, shape `(out, in)`.
    pub fn weight(&self, l: usize) -> ArrayView2<'_, f64> {
        let (o, i) = self.layer_shape(l);
        let off = self.offsets[l];
        ArrayView2::from_shape((o, i), &self.params[off..off + o * i]).unwrap()
    }

    pub fn bias(&self, l: usize) -> ArrayView1<'_, f64> {
        let (o, i) = self.layer_shape(l);
        let off = self.offsets[l] + o * i;
        ArrayView1::from(&self.params[off..off + o])
    }

    pub fn weight_mut(&mut self, l: usize) -> ArrayViewMut2<'_, f64> {
        let (o, i) = self.layer_shape(l);
        let off = self.offsets[l];
        ArrayViewMut2::from_shape((o, i), &mut self.params[off..off + o * i]).unwrap()
    }

    pub fn bias_mut(&mut self, l: usize) -> ArrayViewMut1<'_, f64> {
        let (o, i) = self.layer_shape(l);
        let off = self.offsets[l] + o * i;
        ArrayViewMut1::from(&mut self.params[off..off + o])
    }

    fn grad_views<'g>(&self, grad: &'g mut [f64], l: usize) -> (ArrayViewMut2<'g, f64>, ArrayViewMut1<'g, f64>) {
        let (o, i) = self.layer_shape(l);
        let off = self.offsets[l];
        let (w, rest) = grad[off..off + o * i + o].split_at_mut(o * i);
        (
            ArrayViewMut2::from_shape((o, i), w).unwrap(),
            ArrayViewMut1::from(rest),
        )
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(CampError::DimensionMismatch {
                context: "mlp input",
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Batched evaluation; rows of `x` are samples.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let act = self.spec.activation;
        let layers = self.spec.num_layers();
        let mut h = x.to_owned();
        for l in 0..layers {
            let mut a = h.dot(&self.weight(l).t());
            a += &self.bias(l);
            if l + 1 < layers {
                a.mapv_inplace(|v| act.value(v));
            }
            h = a;
        }
        Ok(h)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(&x)?;
        let act = self.spec.activation;
        let layers = self.spec.num_layers();
        let mut inputs = Vec::with_capacity(layers);
        let mut pre = Vec::with_capacity(layers);
        inputs.push(x.to_owned());
        for l in 0..layers {
            let mut a = inputs[l].dot(&self.weight(l).t());
            a += &self.bias(l);
            if l + 1 < layers {
                inputs.push(a.mapv(|v| act.value(v)));
            }
            pre.push(a);
        }
        Ok(ForwardCache { inputs, pre })
    }

    /// Reverse-mode gradients of `Σ upstream ⊙ output` with respect to parameters and inputs.
    pub fn backward(&self, cache: &ForwardCache, upstream: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let dx = self.backward_into(cache, upstream, &mut grad);
        (grad, dx)
    }

    /// As [`Mlp::backward`], accumulating the parameter gradient into `grad`.
    pub fn backward_into(&self, cache: &ForwardCache, upstream: ArrayView2<f64>, grad: &mut [f64]) -> Array2<f64> {
        assert_eq!(upstream.dim(), cache.output().dim(), "upstream shape");
        let act = self.spec.activation;
        let mut g = upstream.to_owned();
        for l in (0..self.spec.num_layers()).rev() {
            let (mut gw, mut gb) = self.grad_views(grad, l);
            general_mat_mul(1.0, &g.t(), &cache.inputs[l], 1.0, &mut gw);
            gb += &g.sum_axis(Axis(0));
            let mut dh = g.dot(&self.weight(l));
            if l > 0 {
                Zip::from(&mut dh)
                    .and(&cache.pre[l - 1])
                    .for_each(|d, &a| *d *= act.first(a));
            }
            g = dh;
        }
        g
    }

    /// Input gradient of output `k` for every sample (one backward pass without parameter gradients).
    pub fn input_gradient(&self, cache: &ForwardCache, k: usize) -> Array2<f64> {
        let act = self.spec.activation;
        let mut g = Array2::zeros(cache.output().dim());
        g.column_mut(k).fill(1.0);
        for l in (0..self.spec.num_layers()).rev() {
            let mut dh = g.dot(&self.weight(l));
            if l > 0 {
                Zip::from(&mut dh)
                    .and(&cache.pre[l - 1])
                    .for_each(|d, &a| *d *= act.first(a));
            }
            g = dh;
        }
        g
    }

    /// Squared Frobenius norm of the input Jacobian per sample, and the exact
    /// gradients of `Σ_b weights[b] · ‖J_b‖²` with respect to parameters and inputs.
    pub fn jacobian_penalty(&self, cache: &ForwardCache, weights: &[f64]) -> Penalty {
        let batch = cache.batch();
        assert_eq!(weights.len(), batch, "penalty weights");
        let mut per_sample = vec![0.0; batch];
        let mut param_grad = vec![0.0; self.params.len()];
        let mut input_grad = Array2::zeros(cache.input().dim());
        let w = Array1::from(weights.to_vec()).insert_axis(Axis(1));
        for k in 0..self.output_dim() {
            self.penalty_output(cache, k, &w, &mut per_sample, &mut param_grad, &mut input_grad);
        }
        Penalty {
            per_sample,
            param_grad,
            input_grad,
        }
    }

    fn penalty_output(
        &self,
        cache: &ForwardCache,
        k: usize,
        weights: &Array2<f64>,
        per_sample: &mut [f64],
        param_grad: &mut [f64],
        input_grad: &mut Array2<f64>,
    ) {
        let act = self.spec.activation;
        let layers = self.spec.num_layers();
        let pre = &cache.pre;

        // Backward graph for output k: g[l] is the gradient w.r.t. pre-activation a_{l+1},
        // dh[l] the gradient w.r.t. layer input h_l.
        let mut g: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); layers];
        let mut dh: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); layers];
        let mut top = Array2::zeros(cache.output().dim());
        top.column_mut(k).fill(1.0);
        g[layers - 1] = top;
        for l in (0..layers).rev() {
            dh[l] = g[l].dot(&self.weight(l));
            if l > 0 {
                let mut gl = dh[l].clone();
                Zip::from(&mut gl).and(&pre[l - 1]).for_each(|d, &a| *d *= act.first(a));
                g[l - 1] = gl;
            }
        }
        let v = &dh[0];
        for (b, row) in v.outer_iter().enumerate() {
            per_sample[b] += row.dot(&row);
        }

        // Adjoint of the backward graph, walking up from the input gradient.
        let mut dh_bar = v * weights * 2.0;
        let mut a_bar_bw: Vec<Option<Array2<f64>>> = vec![None; layers];
        for l in 0..layers {
            // dh[l] = g[l] · W_l
            {
                let (mut gw, _) = self.grad_views(param_grad, l);
                general_mat_mul(1.0, &g[l].t(), &dh_bar, 1.0, &mut gw);
            }
            if l + 1 == layers {
                break;
            }
            let g_bar = dh_bar.dot(&self.weight(l).t());
            // g[l] = σ'(a_{l+1}) ⊙ dh[l+1]
            let mut next_dh_bar = g_bar.clone();
            Zip::from(&mut next_dh_bar).and(&pre[l]).for_each(|d, &a| *d *= act.first(a));
            let mut a_bar = g_bar;
            Zip::from(&mut a_bar)
                .and(&pre[l])
                .and(&dh[l + 1])
                .for_each(|d, &a, &h| *d *= act.second(a) * h);
            a_bar_bw[l] = Some(a_bar);
            dh_bar = next_dh_bar;
        }

        // Adjoint of the forward graph; the linear head contributes nothing.
        let mut a_bar_next: Option<Array2<f64>> = None;
        for l in (0..layers - 1).rev() {
            let mut a_bar = a_bar_bw[l].take().unwrap();
            if let Some(next) = &a_bar_next {
                let mut h_bar = next.dot(&self.weight(l + 1));
                Zip::from(&mut h_bar).and(&pre[l]).for_each(|d, &a| *d *= act.first(a));
                a_bar += &h_bar;
            }
            let (mut gw, mut gb) = self.grad_views(param_grad, l);
            general_mat_mul(1.0, &a_bar.t(), &cache.inputs[l], 1.0, &mut gw);
            gb += &a_bar.sum_axis(Axis(0));
            a_bar_next = Some(a_bar);
        }
        if let Some(a_bar) = a_bar_next {
            *input_grad += &a_bar.dot(&self.weight(0));
        }
    }
}
