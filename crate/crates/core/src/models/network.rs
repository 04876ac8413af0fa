//! Feed-forward classifiers over a flat parameter vector.
//!
//! A [`Network`] is a list of layers evaluated through a [`Backend`], so the
//! same forward definition runs over plain reals, the reverse-mode tape and
//! batched hyper-dual tensors. Activations are `[samples, features]` with
//! image features in height-width-channel order.

use std::cell::RefCell;

use ndarray::{Array2, IxDyn};
use serde::{Deserialize, Serialize};

use super::DatasetBatch;
use crate::hyperdual::Primitive;
use crate::objective::Objective;
use crate::reverse::{Tape, TensorVar};
use crate::tensor::{HdTensor, Real};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    Dense {
        inputs: usize,
        outputs: usize,
    },
    /// 'same'-padded, stride 1.
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        height: usize,
        width: usize,
    },
    /// 2×2 window, stride 2.
    MaxPool2 {
        channels: usize,
        height: usize,
        width: usize,
    },
    Relu,
}

impl Layer {
    fn input_features(&self) -> Option<usize> {
        match *self {
            Layer::Dense { inputs, .. } => Some(inputs),
            Layer::Conv2d { in_channels, height, width, .. } => Some(in_channels * height * width),
            Layer::MaxPool2 { channels, height, width } => Some(channels * height * width),
            Layer::Relu => None,
        }
    }

    fn output_features(&self, input: usize) -> usize {
        match *self {
            Layer::Dense { outputs, .. } => outputs,
            Layer::Conv2d { out_channels, height, width, .. } => out_channels * height * width,
            Layer::MaxPool2 { channels, height, width } => channels * (height / 2) * (width / 2),
            Layer::Relu => input,
        }
    }

    /// `(weights, biases, fan_in)`
    fn param_shape(&self) -> Option<(usize, usize, usize)> {
        match *self {
            Layer::Dense { inputs, outputs } => Some((inputs * outputs, outputs, inputs)),
            Layer::Conv2d { in_channels, out_channels, kernel, .. } => {
                let fan_in = kernel * kernel * in_channels;
                Some((fan_in * out_channels, out_channels, fan_in))
            }
            _ => None,
        }
    }
}

/// A contiguous run of parameters sharing one fan-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamBlock {
    pub offset: usize,
    pub len: usize,
    pub fan_in: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    offsets: Vec<usize>,
    plans: Vec<Option<Plan>>,
    input_dim: usize,
    classes: usize,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Plan {
    /// im2col index per sample row, `positions × patch` laid out row-major.
    Im2col {
        index: Vec<Option<usize>>,
        positions: usize,
        patch: usize,
    },
    Pool {
        windows: Vec<Vec<usize>>,
    },
}

fn im2col_plan(c: usize, k: usize, h: usize, w: usize) -> Plan {
    let pad = (k / 2) as isize;
    let mut index = Vec::with_capacity(h * w * k * k * c);
    for oy in 0..h as isize {
        for ox in 0..w as isize {
            for ky in 0..k as isize {
                for kx in 0..k as isize {
                    let (iy, ix) = (oy + ky - pad, ox + kx - pad);
                    let inside = iy >= 0 && ix >= 0 && iy < h as isize && ix < w as isize;
                    for ch in 0..c {
                        index.push(inside.then(|| ((iy as usize * w + ix as usize) * c) + ch));
                    }
                }
            }
        }
    }
    Plan::Im2col { index, positions: h * w, patch: k * k * c }
}

fn pool_plan(c: usize, h: usize, w: usize) -> Plan {
    let (oh, ow) = (h / 2, w / 2);
    let mut windows = Vec::with_capacity(oh * ow * c);
    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0..c {
                let at = |y: usize, x: usize| (y * w + x) * c + ch;
                windows.push(vec![
                    at(2 * oy, 2 * ox),
                    at(2 * oy, 2 * ox + 1),
                    at(2 * oy + 1, 2 * ox),
                    at(2 * oy + 1, 2 * ox + 1),
                ]);
            }
        }
    }
    Plan::Pool { windows }
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        let mut features = input_dim;
        let mut offset = 0;
        let mut offsets = Vec::with_capacity(layers.len());
        let mut plans = Vec::with_capacity(layers.len());
        for (i, layer) in layers.iter().enumerate() {
            if let Some(expected) = layer.input_features() {
                if expected != features {
                    return Err(Error::Config(format!(
                        "layer {i} ({layer:?}) expects {expected} inputs, previous layer gives {features}"
                    )));
                }
            }
            match *layer {
                Layer::Dense { inputs, outputs } if inputs == 0 || outputs == 0 => {
                    return Err(Error::Config(format!("layer {i} has a zero-sized dense layer")));
                }
                Layer::Conv2d { kernel, in_channels, out_channels, height, width } => {
                    if kernel % 2 == 0 || in_channels == 0 || out_channels == 0 || height == 0 || width == 0 {
                        return Err(Error::Config(format!("layer {i}: invalid convolution {layer:?}")));
                    }
                }
                Layer::MaxPool2 { height, width, channels } if (height < 2 || width < 2 || channels == 0) => {
                    return Err(Error::Config(format!("layer {i}: invalid pooling {layer:?}")));
                }
                _ => {}
            }
            offsets.push(offset);
            if let Some((w, b, _)) = layer.param_shape() {
                offset += w + b;
            }
            plans.push(match *layer {
                Layer::Conv2d { in_channels, kernel, height, width, .. } => {
                    Some(im2col_plan(in_channels, kernel, height, width))
                }
                Layer::MaxPool2 { channels, height, width } => Some(pool_plan(channels, height, width)),
                _ => None,
            });
            features = layer.output_features(features);
        }
        if features < 2 {
            return Err(Error::Config(format!("network must output ≥ 2 classes, got {features}")));
        }
        Ok(Network { layers, offsets, plans, input_dim, classes: features, dim: offset })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn param_blocks(&self) -> Vec<ParamBlock> {
        self.layers
            .iter()
            .zip(&self.offsets)
            .filter_map(|(l, &offset)| l.param_shape().map(|(w, b, fan_in)| ParamBlock { offset, len: w + b, fan_in }))
            .collect()
    }

    fn check(&self, theta_len: usize, batch: &DatasetBatch) -> Result<()> {
        if theta_len != self.dim {
            return Err(Error::Shape(format!("θ has length {theta_len}, network has {}", self.dim)));
        }
        if batch.features() != self.input_dim {
            return Err(Error::Shape(format!(
                "batch has {} features, network expects {}",
                batch.features(),
                self.input_dim
            )));
        }
        if let Some(&bad) = batch.labels().iter().find(|&&y| y >= self.classes) {
            return Err(Error::LabelOutOfRange { label: bad, classes: self.classes });
        }
        Ok(())
    }

    /// Logits for every sample, through the given backend.
    pub fn forward<B: Backend>(&self, be: &B, input: B::T, batch: usize) -> Result<B::T> {
        let mut h = input;
        for ((layer, &off), plan) in self.layers.iter().zip(&self.offsets).zip(&self.plans) {
            h = match (*layer, plan) {
                (Layer::Dense { inputs, outputs }, _) => {
                    let w = be.param(off, inputs, outputs)?;
                    let b = be.param(off + inputs * outputs, 1, outputs)?;
                    be.add_bias(&be.matmul(&h, &w)?, &b)?
                }
                (Layer::Conv2d { out_channels, .. }, Some(Plan::Im2col { index, positions, patch })) => {
                    let w = be.param(off, *patch, out_channels)?;
                    let b = be.param(off + patch * out_channels, 1, out_channels)?;
                    let cols = be.gather(&h, index, *patch)?;
                    let y = be.add_bias(&be.matmul(&cols, &w)?, &b)?;
                    be.reshape(&y, batch, positions * out_channels)?
                }
                (Layer::MaxPool2 { .. }, Some(Plan::Pool { windows })) => be.max_select(&h, windows)?,
                (Layer::Relu, _) => be.relu(&h)?,
                _ => unreachable!("plans are built alongside layers"),
            };
        }
        Ok(h)
    }

    pub fn logits(&self, theta: &[f64], batch: &DatasetBatch) -> Result<Array2<f64>> {
        self.check(theta.len(), batch)?;
        let be = PlainBackend { theta };
        self.forward(&be, batch.inputs().clone(), batch.len())
    }

    pub fn loss(&self, theta: &[f64], batch: &DatasetBatch) -> Result<f64> {
        let z = self.logits(theta, batch)?;
        Ok(plain_nll(&z, batch.labels()))
    }

    pub fn accuracy(&self, theta: &[f64], batch: &DatasetBatch) -> Result<f64> {
        let z = self.logits(theta, batch)?;
        let correct = z
            .outer_iter()
            .zip(batch.labels())
            .filter(|(row, &y)| {
                let mut best = 0;
                for j in 1..row.len() {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                best == y
            })
            .count();
        Ok(correct as f64 / batch.len() as f64)
    }

    /// Loss and gradient through the reverse-mode tape.
    pub fn loss_and_grad(&self, theta: &[f64], batch: &DatasetBatch) -> Result<(f64, Vec<f64>)> {
        self.check(theta.len(), batch)?;
        let tape = Tape::new();
        let be = TapeBackend { tape: &tape, theta, leaves: RefCell::new(Vec::new()) };
        let x = tape.tensor(batch.inputs().clone());
        let z = self.forward(&be, x, batch.len())?;
        let loss = z.logsoftmax_nll(batch.labels())?;
        let grads = tape.backward_tensor(&loss)?;
        let mut g = vec![0.0; self.dim];
        for (offset, leaf) in be.leaves.borrow().iter() {
            let a = grads.wrt_tensor(leaf);
            for (k, v) in a.iter().enumerate() {
                g[offset + k] += v;
            }
        }
        Ok((loss.value()[[0, 0]], g))
    }

    /// Hyper-dual losses for a `[N, D]` stack of seeded parameter vectors,
    /// evaluated in precision `R`.
    pub fn loss_hd_batch<R: Real>(&self, seeds: &HdTensor<f64>, batch: &DatasetBatch) -> Result<HdTensor<f64>> {
        if seeds.ndim() != 2 {
            return Err(Error::Shape(format!("seed batch must be [N, D], got {:?}", seeds.shape())));
        }
        self.check(seeds.shape()[1], batch)?;
        let n = seeds.shape()[0];
        let be = HdBackend::<R> { seeds: seeds.cast(), n };
        let x = batch.inputs().mapv(|v| R::from(v).unwrap());
        let (b, f) = x.dim();
        let x = HdTensor::constant(x.into_shape_with_order(IxDyn(&[1, b, f])).unwrap());
        let z = self.forward(&be, x, batch.len())?;
        Ok(z.logsoftmax_nll(batch.labels())?.cast())
    }

    /// Bind a data batch, producing an optimizer-facing objective.
    pub fn objective<'a>(&'a self, batch: &'a DatasetBatch, precision: Precision) -> NetObjective<'a> {
        NetObjective { net: self, batch, precision }
    }
}

fn plain_nll(z: &Array2<f64>, labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &y) in z.outer_iter().zip(labels) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = row.iter().map(|&v| (v - m).exp()).sum();
        total += m + s.ln() - row[y];
    }
    total / labels.len() as f64
}

/// Tensor operations a network forward pass needs.
pub trait Backend {
    type T;

    /// Parameters `[offset, offset + rows·cols)` as a `rows × cols` matrix.
    fn param(&self, offset: usize, rows: usize, cols: usize) -> Result<Self::T>;
    fn matmul(&self, a: &Self::T, b: &Self::T) -> Result<Self::T>;
    /// `[r, c] + [1, c]`
    fn add_bias(&self, a: &Self::T, bias: &Self::T) -> Result<Self::T>;
    fn relu(&self, a: &Self::T) -> Result<Self::T>;
    /// Row-wise gather; each row becomes `index.len() / out_cols` rows.
    fn gather(&self, a: &Self::T, index: &[Option<usize>], out_cols: usize) -> Result<Self::T>;
    fn reshape(&self, a: &Self::T, rows: usize, cols: usize) -> Result<Self::T>;
    /// Row-wise argmax over each window (by primal value).
    fn max_select(&self, a: &Self::T, windows: &[Vec<usize>]) -> Result<Self::T>;
}

struct PlainBackend<'a> {
    theta: &'a [f64],
}

impl Backend for PlainBackend<'_> {
    type T = Array2<f64>;

    fn param(&self, offset: usize, rows: usize, cols: usize) -> Result<Array2<f64>> {
        let s = &self.theta[offset..offset + rows * cols];
        Ok(Array2::from_shape_vec((rows, cols), s.to_vec()).unwrap())
    }

    fn matmul(&self, a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(a.dot(b))
    }

    fn add_bias(&self, a: &Array2<f64>, bias: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(a + bias)
    }

    fn relu(&self, a: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(a.mapv(|v| Primitive::Relu.eval(v).0))
    }

    fn gather(&self, a: &Array2<f64>, index: &[Option<usize>], out_cols: usize) -> Result<Array2<f64>> {
        let mut out = Vec::with_capacity(a.nrows() * index.len());
        for row in a.outer_iter() {
            out.extend(index.iter().map(|j| j.map_or(0.0, |j| row[j])));
        }
        Ok(Array2::from_shape_vec((a.nrows() * index.len() / out_cols, out_cols), out).unwrap())
    }

    fn reshape(&self, a: &Array2<f64>, rows: usize, cols: usize) -> Result<Array2<f64>> {
        Ok(a.as_standard_layout().into_owned().into_shape_with_order((rows, cols)).unwrap())
    }

    fn max_select(&self, a: &Array2<f64>, windows: &[Vec<usize>]) -> Result<Array2<f64>> {
        Ok(Array2::from_shape_fn((a.nrows(), windows.len()), |(r, w)| {
            windows[w].iter().map(|&j| a[[r, j]]).fold(f64::NEG_INFINITY, f64::max)
        }))
    }
}

struct TapeBackend<'t, 'a> {
    tape: &'t Tape,
    theta: &'a [f64],
    leaves: RefCell<Vec<(usize, TensorVar<'t>)>>,
}

impl<'t> Backend for TapeBackend<'t, '_> {
    type T = TensorVar<'t>;

    fn param(&self, offset: usize, rows: usize, cols: usize) -> Result<TensorVar<'t>> {
        let s = &self.theta[offset..offset + rows * cols];
        let leaf = self.tape.tensor(Array2::from_shape_vec((rows, cols), s.to_vec()).unwrap());
        self.leaves.borrow_mut().push((offset, leaf));
        Ok(leaf)
    }

    fn matmul(&self, a: &TensorVar<'t>, b: &TensorVar<'t>) -> Result<TensorVar<'t>> {
        a.matmul(b)
    }

    fn add_bias(&self, a: &TensorVar<'t>, bias: &TensorVar<'t>) -> Result<TensorVar<'t>> {
        a.add_bias(bias)
    }

    fn relu(&self, a: &TensorVar<'t>) -> Result<TensorVar<'t>> {
        a.map(Primitive::Relu)
    }

    fn gather(&self, a: &TensorVar<'t>, index: &[Option<usize>], out_cols: usize) -> Result<TensorVar<'t>> {
        a.gather(index, out_cols)
    }

    fn reshape(&self, a: &TensorVar<'t>, rows: usize, cols: usize) -> Result<TensorVar<'t>> {
        a.reshape(rows, cols)
    }

    fn max_select(&self, a: &TensorVar<'t>, windows: &[Vec<usize>]) -> Result<TensorVar<'t>> {
        a.max_select(windows)
    }
}

/// Activations are `[N, rows, cols]` with `N` the tangent-pair batch; the
/// data input is `[1, B, F]` and broadcasts against it.
struct HdBackend<R: Real> {
    seeds: HdTensor<R>,
    n: usize,
}

impl<R: Real> Backend for HdBackend<R> {
    type T = HdTensor<R>;

    fn param(&self, offset: usize, rows: usize, cols: usize) -> Result<HdTensor<R>> {
        self.seeds.slice_last(offset, offset + rows * cols)?.reshape(&[self.n, rows, cols])
    }

    fn matmul(&self, a: &HdTensor<R>, b: &HdTensor<R>) -> Result<HdTensor<R>> {
        a.matmul(b)
    }

    fn add_bias(&self, a: &HdTensor<R>, bias: &HdTensor<R>) -> Result<HdTensor<R>> {
        a.add(bias)
    }

    fn relu(&self, a: &HdTensor<R>) -> Result<HdTensor<R>> {
        a.map(Primitive::Relu)
    }

    fn gather(&self, a: &HdTensor<R>, index: &[Option<usize>], out_cols: usize) -> Result<HdTensor<R>> {
        let s = a.shape();
        let (lead, rows) = (s[0], s[1]);
        a.gather(2, index, &[index.len()])?.reshape(&[lead, rows * index.len() / out_cols, out_cols])
    }

    fn reshape(&self, a: &HdTensor<R>, rows: usize, cols: usize) -> Result<HdTensor<R>> {
        let lead = a.shape()[0];
        a.clone().reshape(&[lead, rows, cols])
    }

    fn max_select(&self, a: &HdTensor<R>, windows: &[Vec<usize>]) -> Result<HdTensor<R>> {
        a.max_select(2, windows)
    }
}

/// Floating-point width of the batched hyper-dual evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            other => Err(Error::Config(format!("unknown precision `{other}` (use f32 or f64)"))),
        }
    }
}

/// A network with a bound data batch.
#[derive(Debug, Clone, Copy)]
pub struct NetObjective<'a> {
    net: &'a Network,
    batch: &'a DatasetBatch,
    precision: Precision,
}

impl Objective for NetObjective<'_> {
    fn dim(&self) -> usize {
        self.net.dim()
    }

    fn value(&self, theta: &[f64]) -> Result<f64> {
        self.net.loss(theta, self.batch)
    }

    fn value_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.net.loss_and_grad(theta, self.batch)
    }

    fn eval_hd_batch(&self, seeds: &HdTensor<f64>) -> Result<HdTensor<f64>> {
        match self.precision {
            Precision::F64 => self.net.loss_hd_batch::<f64>(seeds, self.batch),
            Precision::F32 => self.net.loss_hd_batch::<f32>(seeds, self.batch),
        }
    }
}
