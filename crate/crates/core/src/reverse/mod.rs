//! Tape-based reverse-mode AD for scalar losses.
//!
//! The tape is rebuilt for every evaluation. Nodes hold their forward value
//! as a dense matrix (scalars are `1×1`) and are appended in topological
//! order, so a single reverse sweep visits each node once.

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array2, Axis};

use crate::hyperdual::Primitive;
use crate::objective::{Objective, ScalarFn};
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    /// Scalar node with up to two inputs and their local partials.
    Scalar {
        inputs: [(usize, f64); 2],
        arity: usize,
    },
    MatMul(usize, usize),
    /// `[r, c] + [1, c]`
    AddBias(usize, usize),
    Map(usize, Primitive),
    Gather {
        src: usize,
        index: Vec<Option<usize>>,
        per_row: usize,
    },
    /// Flat per-element selection.
    Select {
        src: usize,
        picks: Vec<usize>,
    },
    Reshape(usize),
    /// Mean NLL; saves the softmax probabilities.
    Nll {
        logits: usize,
        labels: Vec<usize>,
        probs: Array2<f64>,
    },
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Array2<f64>,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Scalar variable on a tape, or a free constant (`tape == None`).
#[derive(Debug, Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: usize,
    value: f64,
}

/// Matrix-valued node on a tape.
#[derive(Debug, Clone, Copy)]
pub struct TensorVar<'t> {
    tape: &'t Tape,
    idx: usize,
}

/// Adjoints after a reverse sweep.
#[derive(Debug)]
pub struct Gradients {
    adj: Vec<Option<Array2<f64>>>,
}

impl Gradients {
    pub fn wrt(&self, v: &Var<'_>) -> f64 {
        match v.tape {
            Some(_) => self.adj[v.idx].as_ref().map_or(0.0, |a| a[[0, 0]]),
            None => 0.0,
        }
    }

    /// Adjoint of a tensor node; zeros if it does not influence the output.
    pub fn wrt_tensor(&self, v: &TensorVar<'_>) -> Array2<f64> {
        match &self.adj[v.idx] {
            Some(a) => a.clone(),
            None => Array2::zeros(v.tape.nodes.borrow()[v.idx].value.raw_dim()),
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, op: Op, value: Array2<f64>) -> usize {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { op, value });
        nodes.len() - 1
    }

    pub fn var(&self, x: f64) -> Var<'_> {
        let idx = self.push(Op::Leaf, Array2::from_elem((1, 1), x));
        Var { tape: Some(self), idx, value: x }
    }

    pub fn tensor(&self, value: Array2<f64>) -> TensorVar<'_> {
        let idx = self.push(Op::Leaf, value);
        TensorVar { tape: self, idx }
    }

    fn scalar_node(&self, value: f64, inputs: &[(usize, f64)]) -> Var<'_> {
        let mut slots = [(0, 0.0); 2];
        slots[..inputs.len()].copy_from_slice(inputs);
        let idx = self.push(Op::Scalar { inputs: slots, arity: inputs.len() }, Array2::from_elem((1, 1), value));
        Var { tape: Some(self), idx, value }
    }

    /// Reverse sweep from a scalar output.
    pub fn backward(&self, out: &Var<'_>) -> Gradients {
        let n = self.len();
        let mut adj: Vec<Option<Array2<f64>>> = vec![None; n];
        if out.tape.is_some() {
            adj[out.idx] = Some(Array2::ones((1, 1)));
            self.sweep(out.idx, &mut adj);
        }
        Gradients { adj }
    }

    /// Reverse sweep from a tensor output, which must be `1×1`.
    pub fn backward_tensor(&self, out: &TensorVar<'_>) -> Result<Gradients> {
        let shape = self.nodes.borrow()[out.idx].value.shape().to_vec();
        if shape != [1, 1] {
            return Err(Error::NonScalarOutput(shape));
        }
        let mut adj: Vec<Option<Array2<f64>>> = vec![None; self.len()];
        adj[out.idx] = Some(Array2::ones((1, 1)));
        self.sweep(out.idx, &mut adj);
        Ok(Gradients { adj })
    }

    fn sweep(&self, from: usize, adj: &mut [Option<Array2<f64>>]) {
        fn acc(adj: &mut [Option<Array2<f64>>], i: usize, g: Array2<f64>) {
            match &mut adj[i] {
                Some(a) => *a += &g,
                slot @ None => *slot = Some(g),
            }
        }
        let nodes = self.nodes.borrow();
        for i in (0..=from).rev() {
            let Some(g) = adj[i].take() else { continue };
            match &nodes[i].op {
                Op::Leaf => {
                    adj[i] = Some(g);
                    continue;
                }
                Op::Scalar { inputs, arity } => {
                    let g0 = g[[0, 0]];
                    for &(j, partial) in &inputs[..*arity] {
                        acc(adj, j, Array2::from_elem((1, 1), g0 * partial));
                    }
                }
                Op::MatMul(a, b) => {
                    let av = &nodes[*a].value;
                    let bv = &nodes[*b].value;
                    acc(adj, *a, g.dot(&bv.t()));
                    acc(adj, *b, av.t().dot(&g));
                }
                Op::AddBias(a, bias) => {
                    acc(adj, *bias, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    acc(adj, *a, g);
                }
                Op::Map(a, p) => {
                    let x = &nodes[*a].value;
                    let mut d = g;
                    d.zip_mut_with(x, |gi, &xi| *gi *= p.eval(xi).1);
                    acc(adj, *a, d);
                }
                Op::Gather { src, index, per_row } => {
                    let sv = &nodes[*src].value;
                    let mut d = Array2::<f64>::zeros(sv.raw_dim());
                    let cols = sv.ncols();
                    let gs = g.as_standard_layout();
                    let gflat = gs.as_slice().unwrap();
                    let dflat = d.as_slice_mut().unwrap();
                    for r in 0..sv.nrows() {
                        let out = &gflat[r * per_row..(r + 1) * per_row];
                        for (k, j) in index.iter().enumerate() {
                            if let Some(j) = j {
                                dflat[r * cols + j] += out[k];
                            }
                        }
                    }
                    acc(adj, *src, d);
                }
                Op::Select { src, picks } => {
                    let mut d = Array2::<f64>::zeros(nodes[*src].value.raw_dim());
                    let gs = g.as_standard_layout();
                    let dflat = d.as_slice_mut().unwrap();
                    for (&p, &gi) in picks.iter().zip(gs.iter()) {
                        dflat[p] += gi;
                    }
                    acc(adj, *src, d);
                }
                Op::Reshape(a) => {
                    let dim = nodes[*a].value.raw_dim();
                    let gs = g.as_standard_layout().into_owned();
                    acc(adj, *a, gs.into_shape_with_order(dim).unwrap());
                }
                Op::Nll { logits, labels, probs } => {
                    let g0 = g[[0, 0]];
                    let b = labels.len() as f64;
                    let mut d = probs.clone();
                    for (r, &y) in labels.iter().enumerate() {
                        d[[r, y]] -= 1.0;
                    }
                    d *= g0 / b;
                    acc(adj, *logits, d);
                }
            }
        }
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    fn tape_of(a: &Var<'t>, b: &Var<'t>) -> Option<&'t Tape> {
        a.tape.or(b.tape)
    }

    fn binary(self, rhs: Var<'t>, value: f64, da: f64, db: f64) -> Var<'t> {
        match Self::tape_of(&self, &rhs) {
            None => Var { tape: None, idx: 0, value },
            Some(tape) => {
                let mut inputs = Vec::with_capacity(2);
                if self.tape.is_some() {
                    inputs.push((self.idx, da));
                }
                if rhs.tape.is_some() {
                    inputs.push((rhs.idx, db));
                }
                tape.scalar_node(value, &inputs)
            }
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        match self.tape {
            None => Var { value: -self.value, ..self },
            Some(t) => t.scalar_node(-self.value, &[(self.idx, -1.0)]),
        }
    }
}

impl<'t> Scalar for Var<'t> {
    fn constant(x: f64) -> Self {
        Var { tape: None, idx: 0, value: x }
    }

    fn primal(&self) -> f64 {
        self.value
    }

    fn apply(self, p: Primitive) -> Result<Self> {
        if !p.in_domain(self.value) {
            return Err(p.domain_error(self.value));
        }
        let (f, d1, _) = p.eval(self.value);
        Ok(match self.tape {
            None => Var { value: f, ..self },
            Some(t) => t.scalar_node(f, &[(self.idx, d1)]),
        })
    }

    fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs.value == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self * rhs.apply(Primitive::Recip)?)
    }
}

impl<'t> TensorVar<'t> {
    pub fn value(&self) -> Array2<f64> {
        self.tape.nodes.borrow()[self.idx].value.clone()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.tape.nodes.borrow()[self.idx].value.dim()
    }

    fn wrap(&self, op: Op, value: Array2<f64>) -> TensorVar<'t> {
        TensorVar { tape: self.tape, idx: self.tape.push(op, value) }
    }

    pub fn matmul(&self, rhs: &TensorVar<'t>) -> Result<TensorVar<'t>> {
        let value = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.idx].value, &nodes[rhs.idx].value);
            if a.ncols() != b.nrows() {
                return Err(Error::Shape(format!("matmul {:?} × {:?}", a.dim(), b.dim())));
            }
            a.dot(b)
        };
        Ok(self.wrap(Op::MatMul(self.idx, rhs.idx), value))
    }

    pub fn add_bias(&self, bias: &TensorVar<'t>) -> Result<TensorVar<'t>> {
        let value = {
            let nodes = self.tape.nodes.borrow();
            let (a, b) = (&nodes[self.idx].value, &nodes[bias.idx].value);
            if b.nrows() != 1 || b.ncols() != a.ncols() {
                return Err(Error::Shape(format!("bias {:?} for {:?}", b.dim(), a.dim())));
            }
            a + b
        };
        Ok(self.wrap(Op::AddBias(self.idx, bias.idx), value))
    }

    pub fn map(&self, p: Primitive) -> Result<TensorVar<'t>> {
        let value = {
            let nodes = self.tape.nodes.borrow();
            let x = &nodes[self.idx].value;
            if let Some(&bad) = x.iter().find(|&&v| !p.in_domain(v)) {
                return Err(p.domain_error(bad));
            }
            x.mapv(|v| p.eval(v).0)
        };
        Ok(self.wrap(Op::Map(self.idx, p), value))
    }

    /// Row-wise gather: each source row `r` yields `index.len()` values laid
    /// out as `rows_out = index.len() / out_cols` rows of `out_cols`.
    pub fn gather(&self, index: &[Option<usize>], out_cols: usize) -> Result<TensorVar<'t>> {
        let value = {
            let nodes = self.tape.nodes.borrow();
            let x = &nodes[self.idx].value;
            if out_cols == 0 || !index.len().is_multiple_of(out_cols) {
                return Err(Error::Shape(format!("gather of {} into {out_cols} cols", index.len())));
            }
            if let Some(&bad) = index.iter().flatten().find(|&&j| j >= x.ncols()) {
                return Err(Error::IndexOutOfBounds { index: bad, dim: x.ncols() });
            }
            let mut out = Vec::with_capacity(x.nrows() * index.len());
            for row in x.outer_iter() {
                out.extend(index.iter().map(|j| j.map_or(0.0, |j| row[j])));
            }
            Array2::from_shape_vec((x.nrows() * index.len() / out_cols, out_cols), out).unwrap()
        };
        Ok(self.wrap(Op::Gather { src: self.idx, index: index.to_vec(), per_row: index.len() }, value))
    }

    /// Row-wise argmax over each window of columns (primal decides).
    pub fn max_select(&self, windows: &[Vec<usize>]) -> Result<TensorVar<'t>> {
        let (value, picks) = {
            let nodes = self.tape.nodes.borrow();
            let x = &nodes[self.idx].value;
            let cols = x.ncols();
            if let Some(&bad) = windows.iter().flatten().find(|&&j| j >= cols) {
                return Err(Error::IndexOutOfBounds { index: bad, dim: cols });
            }
            if windows.iter().any(|w| w.is_empty()) {
                return Err(Error::Shape("empty pooling window".into()));
            }
            let mut picks = Vec::with_capacity(x.nrows() * windows.len());
            let mut out = Vec::with_capacity(x.nrows() * windows.len());
            for (r, row) in x.outer_iter().enumerate() {
                for w in windows {
                    let mut best = w[0];
                    for &j in &w[1..] {
                        if row[j] > row[best] {
                            best = j;
                        }
                    }
                    picks.push(r * cols + best);
                    out.push(row[best]);
                }
            }
            (Array2::from_shape_vec((x.nrows(), windows.len()), out).unwrap(), picks)
        };
        Ok(self.wrap(Op::Select { src: self.idx, picks }, value))
    }

    pub fn reshape(&self, rows: usize, cols: usize) -> Result<TensorVar<'t>> {
        let value = {
            let nodes = self.tape.nodes.borrow();
            let x = &nodes[self.idx].value;
            if rows * cols != x.len() {
                return Err(Error::Shape(format!("reshape {:?} into ({rows}, {cols})", x.dim())));
            }
            x.as_standard_layout().into_owned().into_shape_with_order((rows, cols)).unwrap()
        };
        Ok(self.wrap(Op::Reshape(self.idx), value))
    }

    /// Mean NLL of `labels` under row-wise log-softmax; returns a `1×1` node.
    pub fn logsoftmax_nll(&self, labels: &[usize]) -> Result<TensorVar<'t>> {
        let (loss, probs) = {
            let nodes = self.tape.nodes.borrow();
            let z = &nodes[self.idx].value;
            let (b, c) = z.dim();
            if c < 2 {
                return Err(Error::Shape(format!("need at least 2 classes, got {c}")));
            }
            if labels.len() != b {
                return Err(Error::Shape(format!("{} labels for batch of {b}", labels.len())));
            }
            if let Some(&bad) = labels.iter().find(|&&y| y >= c) {
                return Err(Error::LabelOutOfRange { label: bad, classes: c });
            }
            let mut probs = Array2::zeros((b, c));
            let mut total = 0.0;
            for (r, row) in z.outer_iter().enumerate() {
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = row.iter().map(|&v| (v - m).exp()).sum();
                let lse = m + s.ln();
                total += lse - row[labels[r]];
                for (j, &v) in row.iter().enumerate() {
                    probs[[r, j]] = (v - lse).exp();
                }
            }
            (total / b as f64, probs)
        };
        Ok(self.wrap(Op::Nll { logits: self.idx, labels: labels.to_vec(), probs }, Array2::from_elem((1, 1), loss)))
    }
}

/// `f(θ)` and `∇f(θ)` from one forward and one reverse sweep.
pub fn grad<F: ScalarFn + ?Sized>(f: &F, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let tape = Tape::new();
    let xs: Vec<Var<'_>> = theta.iter().map(|&x| tape.var(x)).collect();
    let y = f.call(&xs)?;
    let grads = tape.backward(&y);
    Ok((y.value(), xs.iter().map(|x| grads.wrt(x)).collect()))
}

/// Forward-mode `∇f·v` (hyper-dual pass with `v2 = 0`) next to the
/// reverse-mode `g·v`.
pub fn jvp_crosscheck(f: &dyn Objective, theta: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    let zero = vec![0.0; theta.len()];
    let forward = f.eval_hd(theta, v, &zero)?.e1;
    let (_, g) = f.value_and_grad(theta)?;
    if v.len() != g.len() {
        return Err(Error::Shape(format!("v has length {}, expected {}", v.len(), g.len())));
    }
    let reverse = g.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((forward, reverse))
}
