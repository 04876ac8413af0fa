//! Batched hyper-dual arrays.
//!
//! An [`HdTensor`] stores the four hyper-dual components as separate dense
//! arrays of identical shape. The leading axis is usually the tangent-pair
//! batch, so one forward pass evaluates every pair of a hyperplane step.

mod pairs;

pub use pairs::{batch_eval_tangent_pairs, pair_layout, TangentPairs};

use std::fmt::Debug;

use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayD, ArrayView2, ArrayView3, ArrayViewMut2, Axis, Dimension, IxDyn, LinalgScalar, ScalarOperand};
use num_traits::Float;

use crate::hyperdual::{HyperDual, Primitive};
use crate::{Error, Result};

/// Floating-point element type accepted by [`HdTensor`].
pub trait Real: Float + LinalgScalar + ScalarOperand + Send + Sync + Debug + Default + 'static {}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Clone)]
pub struct HdTensor<T: Real = f64> {
    re: ArrayD<T>,
    e1: ArrayD<T>,
    e2: ArrayD<T>,
    e12: ArrayD<T>,
    // e1, e2, e12 known to be identically zero; lets matmul skip terms
    zero: [bool; 3],
}

fn all_zero<T: Real>(a: &ArrayD<T>) -> bool {
    a.iter().all(|x| *x == T::zero())
}

fn std_layout<T: Real>(a: ArrayD<T>) -> ArrayD<T> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

/// `dst += lhs · rhs`
fn gemm<T: Real>(lhs: &ArrayView2<'_, T>, rhs: &ArrayView2<'_, T>, dst: &mut ArrayViewMut2<'_, T>) {
    general_mat_mul(T::one(), lhs, rhs, T::one(), dst);
}

fn reshape<T: Real>(a: ArrayD<T>, shape: &[usize]) -> ArrayD<T> {
    std_layout(a).into_shape_with_order(IxDyn(shape)).expect("element count checked by caller")
}

impl<T: Real> HdTensor<T> {
    pub fn new(re: ArrayD<T>, e1: ArrayD<T>, e2: ArrayD<T>, e12: ArrayD<T>) -> Result<Self> {
        if re.shape() != e1.shape() || re.shape() != e2.shape() || re.shape() != e12.shape() {
            return Err(Error::Shape(format!(
                "component shapes differ: {:?} {:?} {:?} {:?}",
                re.shape(),
                e1.shape(),
                e2.shape(),
                e12.shape()
            )));
        }
        let zero = [all_zero(&e1), all_zero(&e2), all_zero(&e12)];
        Ok(HdTensor { re: std_layout(re), e1: std_layout(e1), e2: std_layout(e2), e12: std_layout(e12), zero })
    }

    /// Lifted constant: derivative parts are zero.
    pub fn constant(re: ArrayD<T>) -> Self {
        let z = ArrayD::zeros(re.raw_dim());
        HdTensor { re: std_layout(re), e1: z.clone(), e2: z.clone(), e12: z, zero: [true; 3] }
    }

    /// Build from a flat list of hyper-dual scalars in row-major order.
    pub fn from_scalars(shape: &[usize], values: &[HyperDual<T>]) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != values.len() {
            return Err(Error::Shape(format!("{} values for shape {shape:?}", values.len())));
        }
        let pick =
            |f: fn(&HyperDual<T>) -> T| ArrayD::from_shape_vec(IxDyn(shape), values.iter().map(f).collect()).unwrap();
        HdTensor::new(pick(|h| h.re), pick(|h| h.e1), pick(|h| h.e2), pick(|h| h.e12))
    }

    pub fn shape(&self) -> &[usize] {
        self.re.shape()
    }

    pub fn ndim(&self) -> usize {
        self.re.ndim()
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn re(&self) -> &ArrayD<T> {
        &self.re
    }

    pub fn e1(&self) -> &ArrayD<T> {
        &self.e1
    }

    pub fn e2(&self) -> &ArrayD<T> {
        &self.e2
    }

    pub fn e12(&self) -> &ArrayD<T> {
        &self.e12
    }

    pub fn get(&self, index: &[usize]) -> Option<HyperDual<T>> {
        Some(HyperDual::new(
            *self.re.get(IxDyn(index))?,
            self.e1[IxDyn(index)],
            self.e2[IxDyn(index)],
            self.e12[IxDyn(index)],
        ))
    }

    /// Row-major flat list of hyper-dual scalars.
    pub fn to_scalars(&self) -> Vec<HyperDual<T>> {
        self.re
            .iter()
            .zip(self.e1.iter())
            .zip(self.e2.iter())
            .zip(self.e12.iter())
            .map(|(((&a, &b), &c), &d)| HyperDual::new(a, b, c, d))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        [&self.re, &self.e1, &self.e2, &self.e12].iter().all(|a| a.iter().all(|x| x.is_finite()))
    }

    pub fn cast<U: Real>(&self) -> HdTensor<U> {
        let c = |a: &ArrayD<T>| a.mapv(|x| U::from(x).unwrap());
        HdTensor { re: c(&self.re), e1: c(&self.e1), e2: c(&self.e2), e12: c(&self.e12), zero: self.zero }
    }

    pub fn reshape(self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.len() {
            return Err(Error::Shape(format!("cannot reshape {:?} into {shape:?}", self.shape())));
        }
        Ok(HdTensor {
            re: reshape(self.re, shape),
            e1: reshape(self.e1, shape),
            e2: reshape(self.e2, shape),
            e12: reshape(self.e12, shape),
            zero: self.zero,
        })
    }

    pub fn scale(&self, c: T) -> Self {
        HdTensor { re: &self.re * c, e1: &self.e1 * c, e2: &self.e2 * c, e12: &self.e12 * c, zero: self.zero }
    }

    fn broadcast_check(&self, other: &Self, what: &str) -> Result<()> {
        let a = self.re.view();
        let b = other.re.view();
        // ndarray co-broadcasting panics on mismatch; check first
        let (sa, sb) = (a.shape(), b.shape());
        let n = sa.len().max(sb.len());
        for k in 0..n {
            let da = if k + sa.len() >= n { sa[k + sa.len() - n] } else { 1 };
            let db = if k + sb.len() >= n { sb[k + sb.len() - n] } else { 1 };
            if da != db && da != 1 && db != 1 {
                return Err(Error::Shape(format!("cannot {what} {sa:?} and {sb:?}")));
            }
        }
        Ok(())
    }

    /// Elementwise sum with numpy-style broadcasting.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.broadcast_check(other, "add")?;
        Ok(HdTensor {
            re: &self.re + &other.re,
            e1: &self.e1 + &other.e1,
            e2: &self.e2 + &other.e2,
            e12: &self.e12 + &other.e12,
            zero: [self.zero[0] && other.zero[0], self.zero[1] && other.zero[1], self.zero[2] && other.zero[2]],
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    /// Elementwise hyper-dual product with broadcasting.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.broadcast_check(other, "multiply")?;
        let (a, b) = (self, other);
        Ok(HdTensor {
            re: &a.re * &b.re,
            e1: &(&a.re * &b.e1) + &(&a.e1 * &b.re),
            e2: &(&a.re * &b.e2) + &(&a.e2 * &b.re),
            e12: &(&(&a.re * &b.e12) + &(&a.e12 * &b.re)) + &(&(&a.e1 * &b.e2) + &(&a.e2 * &b.e1)),
            zero: [
                a.zero[0] && b.zero[0],
                a.zero[1] && b.zero[1],
                a.zero[2] && b.zero[2] && (a.zero[0] || b.zero[1]) && (a.zero[1] || b.zero[0]),
            ],
        })
    }

    /// Elementwise application of a registered primitive.
    pub fn map(&self, p: Primitive) -> Result<Self> {
        if let Some((index, &x)) = self.re.indexed_iter().find(|(_, &x)| !p.in_domain(x)) {
            return Err(Error::TensorDomain {
                primitive: p.name(),
                index: index.slice().to_vec(),
                input: x.to_f64().unwrap_or(f64::NAN),
            });
        }
        let n = self.len();
        let mut re = Vec::with_capacity(n);
        let mut e1 = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        let mut e12 = Vec::with_capacity(n);
        for (((&x, &a), &b), &c) in self.re.iter().zip(self.e1.iter()).zip(self.e2.iter()).zip(self.e12.iter()) {
            let (f, d1, d2) = p.eval(x);
            re.push(f);
            e1.push(d1 * a);
            e2.push(d1 * b);
            e12.push(d1 * c + d2 * a * b);
        }
        let dim = self.re.raw_dim();
        let mk = |v| ArrayD::from_shape_vec(dim.clone(), v).unwrap();
        Ok(HdTensor {
            re: mk(re),
            e1: mk(e1),
            e2: mk(e2),
            e12: mk(e12),
            zero: [self.zero[0], self.zero[1], self.zero[2] && (self.zero[0] || self.zero[1])],
        })
    }

    /// Sum along `axis`; derivatives sum too.
    pub fn reduce_sum(&self, axis: usize) -> Result<Self> {
        if axis >= self.ndim() {
            return Err(Error::InvalidAxis { axis, rank: self.ndim() });
        }
        let ax = Axis(axis);
        Ok(HdTensor {
            re: self.re.sum_axis(ax),
            e1: self.e1.sum_axis(ax),
            e2: self.e2.sum_axis(ax),
            e12: self.e12.sum_axis(ax),
            zero: self.zero,
        })
    }

    /// Batched matrix product over the last two axes. Leading axes must agree
    /// or one operand must have a single leading batch (broadcast).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let (sa, sb) = (self.shape(), other.shape());
        if sa.len() < 2 || sb.len() < 2 {
            return Err(Error::Shape(format!("matmul needs rank ≥ 2, got {sa:?} and {sb:?}")));
        }
        let (m, k) = (sa[sa.len() - 2], sa[sa.len() - 1]);
        let (k2, n) = (sb[sb.len() - 2], sb[sb.len() - 1]);
        if k != k2 {
            return Err(Error::Shape(format!("inner dimensions differ: {sa:?} × {sb:?}")));
        }
        let lead_a = &sa[..sa.len() - 2];
        let lead_b = &sb[..sb.len() - 2];
        let la: usize = lead_a.iter().product();
        let lb: usize = lead_b.iter().product();
        let lead_out = if lead_a == lead_b || lb == 1 {
            lead_a.to_vec()
        } else if la == 1 {
            lead_b.to_vec()
        } else {
            return Err(Error::Shape(format!("batch dimensions differ: {sa:?} × {sb:?}")));
        };
        let l = la.max(lb);

        fn flat<T: Real>(x: &ArrayD<T>, s: (usize, usize, usize)) -> ArrayView3<'_, T> {
            x.view().into_shape_with_order(s).unwrap()
        }
        let flat_a = |x| flat(x, (la, m, k));
        let flat_b = |x| flat(x, (lb, k, n));
        let (ar, a1, a2, a12) = (flat_a(&self.re), flat_a(&self.e1), flat_a(&self.e2), flat_a(&self.e12));
        let (br, b1, b2, b12) = (flat_b(&other.re), flat_b(&other.e1), flat_b(&other.e2), flat_b(&other.e12));
        let [za1, za2, za12] = self.zero;
        let [zb1, zb2, zb12] = other.zero;

        let mut out = [(); 4].map(|_| ndarray::Array3::<T>::zeros((l, m, n)));
        for i in 0..l {
            let ia = if la == 1 { 0 } else { i };
            let ib = if lb == 1 { 0 } else { i };
            let [o_re, o_e1, o_e2, o_e12] = &mut out;
            let mut o_re = o_re.index_axis_mut(Axis(0), i);
            let mut o_e1 = o_e1.index_axis_mut(Axis(0), i);
            let mut o_e2 = o_e2.index_axis_mut(Axis(0), i);
            let mut o_e12 = o_e12.index_axis_mut(Axis(0), i);
            let (ar, a1, a2, a12) = (
                ar.index_axis(Axis(0), ia),
                a1.index_axis(Axis(0), ia),
                a2.index_axis(Axis(0), ia),
                a12.index_axis(Axis(0), ia),
            );
            let (br, b1, b2, b12) = (
                br.index_axis(Axis(0), ib),
                b1.index_axis(Axis(0), ib),
                b2.index_axis(Axis(0), ib),
                b12.index_axis(Axis(0), ib),
            );
            gemm(&ar, &br, &mut o_re);
            if !zb1 {
                gemm(&ar, &b1, &mut o_e1);
            }
            if !za1 {
                gemm(&a1, &br, &mut o_e1);
            }
            if !zb2 {
                gemm(&ar, &b2, &mut o_e2);
            }
            if !za2 {
                gemm(&a2, &br, &mut o_e2);
            }
            if !zb12 {
                gemm(&ar, &b12, &mut o_e12);
            }
            if !za12 {
                gemm(&a12, &br, &mut o_e12);
            }
            if !za1 && !zb2 {
                gemm(&a1, &b2, &mut o_e12);
            }
            if !za2 && !zb1 {
                gemm(&a2, &b1, &mut o_e12);
            }
        }
        let mut shape = lead_out;
        shape.extend([m, n]);
        let [re, e1, e2, e12] = out.map(|x| reshape(x.into_dyn(), &shape));
        Ok(HdTensor { re, e1, e2, e12, zero: [za1 && zb1, za2 && zb2, za12 && zb12 && (za1 || zb2) && (za2 || zb1)] })
    }

    /// Gather along the trailing axes. The tensor is viewed as
    /// `[prod(shape[..lead]), rest]`; output row `r` takes `rest[index[j]]`
    /// for each `j`, or zero where `index[j]` is `None`. The result has shape
    /// `shape[..lead] ++ out_tail`.
    pub fn gather(&self, lead: usize, index: &[Option<usize>], out_tail: &[usize]) -> Result<Self> {
        if lead > self.ndim() {
            return Err(Error::InvalidAxis { axis: lead, rank: self.ndim() });
        }
        if out_tail.iter().product::<usize>() != index.len() {
            return Err(Error::Shape(format!("gather index of length {} does not fill {out_tail:?}", index.len())));
        }
        let rows: usize = self.shape()[..lead].iter().product();
        let cols = self.len().checked_div(rows).unwrap_or(0);
        if let Some(bad) = index.iter().flatten().find(|&&j| j >= cols) {
            return Err(Error::IndexOutOfBounds { index: *bad, dim: cols });
        }
        let mut shape = self.shape()[..lead].to_vec();
        shape.extend_from_slice(out_tail);
        let g = |a: &ArrayD<T>| {
            let src = a.as_slice().expect("standard layout");
            let mut out = Vec::with_capacity(rows * index.len());
            for r in 0..rows {
                let row = &src[r * cols..(r + 1) * cols];
                out.extend(index.iter().map(|j| j.map_or(T::zero(), |j| row[j])));
            }
            ArrayD::from_shape_vec(IxDyn(&shape), out).unwrap()
        };
        Ok(HdTensor { re: g(&self.re), e1: g(&self.e1), e2: g(&self.e2), e12: g(&self.e12), zero: self.zero })
    }

    /// Entries `[start, end)` of the last axis.
    pub fn slice_last(&self, start: usize, end: usize) -> Result<Self> {
        let last = self.ndim().checked_sub(1).ok_or(Error::InvalidAxis { axis: 0, rank: 0 })?;
        if start > end || end > self.shape()[last] {
            return Err(Error::Shape(format!("slice {start}..{end} of axis with length {}", self.shape()[last])));
        }
        let s = |a: &ArrayD<T>| {
            a.slice_axis(Axis(last), ndarray::Slice::from(start..end)).as_standard_layout().into_owned()
        };
        Ok(HdTensor { re: s(&self.re), e1: s(&self.e1), e2: s(&self.e2), e12: s(&self.e12), zero: self.zero })
    }

    /// Row-wise selection of the candidate with the largest primal. The
    /// tensor is viewed as `[prod(shape[..lead]), rest]`; output entry `w` of
    /// each row is the argmax over `windows[w]`. First index wins ties.
    pub fn max_select(&self, lead: usize, windows: &[Vec<usize>]) -> Result<Self> {
        if lead > self.ndim() {
            return Err(Error::InvalidAxis { axis: lead, rank: self.ndim() });
        }
        let rows: usize = self.shape()[..lead].iter().product();
        let cols = self.len().checked_div(rows).unwrap_or(0);
        if let Some(bad) = windows.iter().flatten().find(|&&j| j >= cols) {
            return Err(Error::IndexOutOfBounds { index: *bad, dim: cols });
        }
        if windows.iter().any(|w| w.is_empty()) {
            return Err(Error::Shape("empty pooling window".into()));
        }
        let re = self.re.as_slice().expect("standard layout");
        let mut picks = Vec::with_capacity(rows * windows.len());
        for r in 0..rows {
            let row = &re[r * cols..(r + 1) * cols];
            for w in windows {
                let mut best = w[0];
                for &j in &w[1..] {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                picks.push(r * cols + best);
            }
        }
        let mut shape = self.shape()[..lead].to_vec();
        shape.push(windows.len());
        let g = |a: &ArrayD<T>| {
            let src = a.as_slice().expect("standard layout");
            ArrayD::from_shape_vec(IxDyn(&shape), picks.iter().map(|&p| src[p]).collect()).unwrap()
        };
        Ok(HdTensor { re: g(&self.re), e1: g(&self.e1), e2: g(&self.e2), e12: g(&self.e12), zero: self.zero })
    }

    /// Mean negative log-likelihood of `labels` under `log_softmax(logits)`
    /// over the last axis, averaged over the second-to-last (batch) axis.
    ///
    /// Input `[..., B, C]`, output `[...]`. The log-sum-exp shift uses the
    /// primal row maximum, lifted as a constant.
    pub fn logsoftmax_nll(&self, labels: &[usize]) -> Result<Self> {
        let s = self.shape();
        if s.len() < 2 {
            return Err(Error::Shape(format!("logits need rank ≥ 2, got {s:?}")));
        }
        let (b, c) = (s[s.len() - 2], s[s.len() - 1]);
        if c < 2 {
            return Err(Error::Shape(format!("need at least 2 classes, got {c}")));
        }
        if labels.len() != b {
            return Err(Error::Shape(format!("{} labels for batch of {b}", labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= c) {
            return Err(Error::LabelOutOfRange { label: bad, classes: c });
        }
        let lead = s[..s.len() - 2].to_vec();
        let l: usize = lead.iter().product();
        fn view<T: Real>(a: &ArrayD<T>) -> &[T] {
            a.as_slice().expect("standard layout")
        }
        let (re, e1, e2, e12) = (view(&self.re), view(&self.e1), view(&self.e2), view(&self.e12));
        let inv_b = T::one() / T::from(b).unwrap();
        let mut out = Vec::with_capacity(l);
        for li in 0..l {
            let mut total = HyperDual::constant(T::zero());
            for (bi, &y) in labels.iter().enumerate() {
                let base = (li * b + bi) * c;
                let z = |j: usize| HyperDual::new(re[base + j], e1[base + j], e2[base + j], e12[base + j]);
                let shift = (0..c).map(|j| re[base + j]).fold(T::neg_infinity(), T::max);
                let shift = HyperDual::constant(shift);
                let mut sum = HyperDual::constant(T::zero());
                for j in 0..c {
                    sum = sum + (z(j) - shift).unary(Primitive::Exp)?;
                }
                let lse = shift + sum.unary(Primitive::Log)?;
                total = total + (lse - z(y));
            }
            out.push(total * inv_b);
        }
        HdTensor::from_scalars(&lead, &out)
    }

    /// Rank-2 convenience: logits `[B, C]` to a single hyper-dual loss.
    pub fn nll_scalar(&self, labels: &[usize]) -> Result<HyperDual<T>> {
        if self.ndim() != 2 {
            return Err(Error::Shape(format!("expected [B, C] logits, got {:?}", self.shape())));
        }
        Ok(self.logsoftmax_nll(labels)?.to_scalars()[0])
    }
}
