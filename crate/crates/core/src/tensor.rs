//! Dense row-major f64 tensors and the numeric kernels the rest of the
//! crate builds on.
//!
//! All arithmetic is shape-checked. The only broadcasting rule is the
//! documented right-aligned singleton rule used by bias adds and
//! denominator divides: shapes are aligned at their trailing axes, and each
//! axis must either match exactly or have extent 1 (or be missing) in *one*
//! of the two operands. Mutual broadcasting (both operands expanding) is
//! rejected.
//!
//! Correctness paths run in f64 throughout; the benchmark module owns its
//! own single-precision kernels.

use crate::rng::Rng;
use crate::{Error, Result};

/// Dense multi-dimensional array of f64, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

pub(crate) fn numel_of(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Row-major strides for `shape`.
pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if numel_of(&shape) != data.len() {
            return Err(Error::shape(format!(
                "shape {:?} implies {} elements, got {}",
                shape,
                numel_of(&shape),
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; numel_of(shape)],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; numel_of(shape)],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: vec![],
            data: vec![value],
        }
    }

    /// I.i.d. standard normal entries, filled in row-major order.
    pub fn gaussian(shape: &[usize], rng: &mut Rng) -> Self {
        let n = numel_of(shape);
        let data = (0..n).map(|_| rng.gaussian()).collect();
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Value of a rank-0 or single-element tensor.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() != 1 {
            return Err(Error::shape(format!(
                "item() on tensor with {} elements",
                self.data.len()
            )));
        }
        Ok(self.data[0])
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.shape.len());
        let strides = strides_of(&self.shape);
        let mut off = 0;
        for (i, &ix) in idx.iter().enumerate() {
            debug_assert!(ix < self.shape[i]);
            off += ix * strides[i];
        }
        self.data[off]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Same data, new shape; element counts must agree.
    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        if numel_of(shape) != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {:?} ({} elems) to {:?}",
                self.shape,
                self.data.len(),
                shape
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Tensor {
        self.map(|x| x * c)
    }

    pub fn add_scalar(&self, c: f64) -> Tensor {
        self.map(|x| x + c)
    }

    pub fn relu(&self) -> Tensor {
        self.map(|x| if x > 0.0 { x } else { 0.0 })
    }

    pub fn silu(&self) -> Tensor {
        self.map(|x| x * sigmoid(x))
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_zip(self, other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_zip(self, other, "sub", |a, b| a - b)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_zip(self, other, "mul", |a, b| a * b)
    }

    pub fn div(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_zip(self, other, "div", |a, b| a / b)
    }

    /// Batched matrix product.
    ///
    /// `self` is `[.., m, k]`; `other` is either `[k, n]` (one matrix applied
    /// to every batch) or `[.., k, n]` with identical leading batch axes.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() < 2 || other.rank() < 2 {
            return Err(Error::shape("matmul operands must have rank >= 2"));
        }
        let (m, k) = (self.shape[self.rank() - 2], self.shape[self.rank() - 1]);
        let (kb, n) = (other.shape[other.rank() - 2], other.shape[other.rank() - 1]);
        if k != kb {
            return Err(Error::shape(format!(
                "matmul inner dims disagree: {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        let batch_a = &self.shape[..self.rank() - 2];
        let batch_b = &other.shape[..other.rank() - 2];
        let shared_rhs = batch_b.is_empty();
        if !shared_rhs && batch_a != batch_b {
            return Err(Error::shape(format!(
                "matmul batch axes disagree: {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        let batches = numel_of(batch_a);
        let mut out_shape = batch_a.to_vec();
        out_shape.push(m);
        out_shape.push(n);
        let mut out = vec![0.0; batches * m * n];
        for bi in 0..batches {
            let a = &self.data[bi * m * k..(bi + 1) * m * k];
            let b = if shared_rhs {
                &other.data[..]
            } else {
                &other.data[bi * k * n..(bi + 1) * k * n]
            };
            let o = &mut out[bi * m * n..(bi + 1) * m * n];
            matmul_2d(a, b, o, m, k, n);
        }
        Tensor::new(out_shape, out)
    }

    /// Reorders axes; `axes` is a permutation of `0..rank`.
    pub fn permute(&self, axes: &[usize]) -> Result<Tensor> {
        let r = self.rank();
        if axes.len() != r {
            return Err(Error::shape("permute axes length mismatch"));
        }
        let mut seen = vec![false; r];
        for &a in axes {
            if a >= r || seen[a] {
                return Err(Error::shape("permute axes must be a permutation"));
            }
            seen[a] = true;
        }
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let in_strides = strides_of(&self.shape);
        let out_strides = strides_of(&out_shape);
        let mut out = vec![0.0; self.data.len()];
        let mut idx = vec![0usize; r];
        for (pos, v) in self.data.iter().enumerate() {
            // unravel pos into idx over the input shape
            let mut rem = pos;
            for (i, s) in in_strides.iter().enumerate() {
                idx[i] = rem / s;
                rem %= s;
            }
            let mut opos = 0;
            for (oi, &a) in axes.iter().enumerate() {
                opos += idx[a] * out_strides[oi];
            }
            out[opos] = *v;
        }
        Tensor::new(out_shape, out)
    }

    /// Contiguous slice along `axis`.
    pub fn narrow(&self, axis: usize, start: usize, len: usize) -> Result<Tensor> {
        if axis >= self.rank() || start + len > self.shape[axis] {
            return Err(Error::shape(format!(
                "narrow axis {axis} [{start}, {start}+{len}) out of range for {:?}",
                self.shape
            )));
        }
        let mut out_shape = self.shape.clone();
        out_shape[axis] = len;
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut out = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let base = o * self.shape[axis] * inner + start * inner;
            out.extend_from_slice(&self.data[base..base + len * inner]);
        }
        Tensor::new(out_shape, out)
    }

    /// Writes `src` into the slice `[start, start+len)` of `axis`.
    pub fn narrow_assign(&mut self, axis: usize, start: usize, src: &Tensor) -> Result<()> {
        let len = src.shape[axis];
        if axis >= self.rank() || start + len > self.shape[axis] {
            return Err(Error::shape("narrow_assign out of range"));
        }
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        for o in 0..outer {
            let dst_base = o * self.shape[axis] * inner + start * inner;
            let src_base = o * len * inner;
            self.data[dst_base..dst_base + len * inner]
                .copy_from_slice(&src.data[src_base..src_base + len * inner]);
        }
        Ok(())
    }

    /// Concatenates along `axis`; all other extents must agree.
    pub fn concat(parts: &[&Tensor], axis: usize) -> Result<Tensor> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("concat of zero tensors"))?;
        let r = first.rank();
        let mut axis_total = 0;
        for p in parts {
            if p.rank() != r || axis >= r {
                return Err(Error::shape("concat rank mismatch"));
            }
            for i in 0..r {
                if i != axis && p.shape[i] != first.shape[i] {
                    return Err(Error::shape("concat extent mismatch"));
                }
            }
            axis_total += p.shape[axis];
        }
        let mut out_shape = first.shape.clone();
        out_shape[axis] = axis_total;
        let outer: usize = first.shape[..axis].iter().product();
        let inner: usize = first.shape[axis + 1..].iter().product();
        let mut out = Vec::with_capacity(numel_of(&out_shape));
        for o in 0..outer {
            for p in parts {
                let chunk = p.shape[axis] * inner;
                out.extend_from_slice(&p.data[o * chunk..(o + 1) * chunk]);
            }
        }
        Tensor::new(out_shape, out)
    }

    /// Sums over `axis`, keeping it as extent 1.
    pub fn sum_axis_keepdim(&self, axis: usize) -> Result<Tensor> {
        if axis >= self.rank() {
            return Err(Error::shape("sum_axis out of range"));
        }
        let mut out_shape = self.shape.clone();
        out_shape[axis] = 1;
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let ext = self.shape[axis];
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            for a in 0..ext {
                let base = (o * ext + a) * inner;
                for i in 0..inner {
                    out[o * inner + i] += self.data[base + i];
                }
            }
        }
        Tensor::new(out_shape, out)
    }

    pub fn sum_all(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Per-row softmax over the last axis, max-subtracted.
    pub fn softmax_last(&self) -> Result<Tensor> {
        if self.rank() == 0 {
            return Err(Error::shape("softmax needs rank >= 1"));
        }
        let d = self.shape[self.rank() - 1];
        let rows = self.data.len() / d;
        let mut out = vec![0.0; self.data.len()];
        for r in 0..rows {
            let row = &self.data[r * d..(r + 1) * d];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for (i, &x) in row.iter().enumerate() {
                let e = (x - m).exp();
                out[r * d + i] = e;
                z += e;
            }
            for v in &mut out[r * d..(r + 1) * d] {
                *v /= z;
            }
        }
        Tensor::new(self.shape.clone(), out)
    }

    /// Per-row layer norm over the last axis with learnable scale and shift.
    pub fn layer_norm(&self, gamma: &Tensor, beta: &Tensor, eps: f64) -> Result<Tensor> {
        let d = *self
            .shape
            .last()
            .ok_or_else(|| Error::shape("layer_norm needs rank >= 1"))?;
        if gamma.shape() != [d] || beta.shape() != [d] {
            return Err(Error::shape(format!(
                "layer_norm scale/shift must be [{d}], got {:?}/{:?}",
                gamma.shape(),
                beta.shape()
            )));
        }
        let rows = self.data.len() / d;
        let mut out = vec![0.0; self.data.len()];
        for r in 0..rows {
            let row = &self.data[r * d..(r + 1) * d];
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + eps).sqrt();
            for i in 0..d {
                out[r * d + i] = (row[i] - mean) * inv * gamma.data[i] + beta.data[i];
            }
        }
        Tensor::new(self.shape.clone(), out)
    }

    /// Largest absolute entry (0 for empty tensors).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn matmul_2d(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    // i-k-j loop order keeps the inner loop streaming over b and out rows.
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (kk, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[kk * n..(kk + 1) * n];
            for j in 0..n {
                orow[j] += av * brow[j];
            }
        }
    }
}

/// Result shape of broadcasting `a` against `b`, or an error if the shapes
/// are incompatible under the singleton rule.
pub(crate) fn broadcast_shape(a: &[usize], b: &[usize], op: &str) -> Result<Vec<usize>> {
    let r = a.len().max(b.len());
    let mut out = vec![0usize; r];
    let mut a_expands = false;
    let mut b_expands = false;
    for i in 0..r {
        let da = if i < r - a.len() { 1 } else { a[i - (r - a.len())] };
        let db = if i < r - b.len() { 1 } else { b[i - (r - b.len())] };
        out[i] = if da == db {
            da
        } else if da == 1 {
            a_expands = true;
            db
        } else if db == 1 {
            b_expands = true;
            da
        } else {
            return Err(Error::shape(format!("{op}: {a:?} vs {b:?}")));
        };
    }
    if a.len() < b.len() {
        a_expands = true;
    }
    if b.len() < a.len() {
        b_expands = true;
    }
    if a_expands && b_expands {
        return Err(Error::shape(format!(
            "{op}: mutual broadcast {a:?} vs {b:?} not supported"
        )));
    }
    Ok(out)
}

fn broadcast_zip(a: &Tensor, b: &Tensor, op: &str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
    let out_shape = broadcast_shape(&a.shape, &b.shape, op)?;
    if a.shape == b.shape {
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| f(x, y))
            .collect();
        return Tensor::new(out_shape, data);
    }
    let r = out_shape.len();
    let out_strides = strides_of(&out_shape);
    let a_strides = broadcast_strides(&a.shape, &out_shape);
    let b_strides = broadcast_strides(&b.shape, &out_shape);
    let n = numel_of(&out_shape);
    let mut data = vec![0.0; n];
    let mut idx = vec![0usize; r];
    for (pos, slot) in data.iter_mut().enumerate() {
        let mut rem = pos;
        for (i, s) in out_strides.iter().enumerate() {
            idx[i] = rem / s;
            rem %= s;
        }
        let mut ap = 0;
        let mut bp = 0;
        for i in 0..r {
            ap += idx[i] * a_strides[i];
            bp += idx[i] * b_strides[i];
        }
        *slot = f(a.data[ap], b.data[bp]);
    }
    Tensor::new(out_shape, data)
}

/// Strides of `shape` viewed as `out_shape`, with 0 on broadcast axes.
pub(crate) fn broadcast_strides(shape: &[usize], out_shape: &[usize]) -> Vec<usize> {
    let r = out_shape.len();
    let own = strides_of(shape);
    let offset = r - shape.len();
    let mut s = vec![0usize; r];
    for i in 0..shape.len() {
        s[offset + i] = if shape[i] == 1 { 0 } else { own[i] };
    }
    s
}

/// Sums `grad` down to `shape` by reducing over axes that were broadcast.
pub(crate) fn reduce_to_shape(grad: &Tensor, shape: &[usize]) -> Result<Tensor> {
    if grad.shape() == shape {
        return Ok(grad.clone());
    }
    let r = grad.rank();
    let offset = r - shape.len();
    let mut out = Tensor::zeros(shape);
    let g_strides = strides_of(grad.shape());
    let o_strides = strides_of(shape);
    let mut idx = vec![0usize; r];
    for (pos, &g) in grad.data().iter().enumerate() {
        let mut rem = pos;
        for (i, s) in g_strides.iter().enumerate() {
            idx[i] = rem / s;
            rem %= s;
        }
        let mut op = 0;
        for i in 0..shape.len() {
            let ix = if shape[i] == 1 { 0 } else { idx[offset + i] };
            op += ix * o_strides[i];
        }
        out.data_mut()[op] += g;
    }
    Ok(out)
}

/// Temporal 1D convolution over `[T, S, D]` with kernel size 3, symmetric
/// zero padding: frame `t` mixes frames `t-1, t, t+1` independently at each
/// spatial index. `weight` is `[3, D, D]` (tap, in, out); `bias` is `[D]`.
pub fn conv1d_temporal(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    conv1d_impl(x, weight, bias, ConvAlign::Symmetric)
}

/// Causal variant: frame `t` mixes frames `t-2, t-1, t`, zero-padded at the
/// start. Streaming over cached history lives in [`crate::causal`].
pub fn conv1d_temporal_causal(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    conv1d_impl(x, weight, bias, ConvAlign::Causal)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum ConvAlign {
    /// Tap k reads frame t + k - 1.
    Symmetric,
    /// Tap k reads frame t + k - 2 (tap 2 is the current frame).
    Causal,
}

impl ConvAlign {
    pub(crate) fn frame_of_tap(self, t: isize, k: isize) -> isize {
        match self {
            ConvAlign::Symmetric => t + k - 1,
            ConvAlign::Causal => t + k - 2,
        }
    }
}

pub(crate) fn conv1d_impl(
    x: &Tensor,
    weight: &Tensor,
    bias: &Tensor,
    align: ConvAlign,
) -> Result<Tensor> {
    let [t_ext, s_ext, d] = dims3(x, "conv1d input")?;
    if weight.shape() != [3, d, d] {
        return Err(Error::shape(format!(
            "conv1d weight must be [3, {d}, {d}], got {:?}",
            weight.shape()
        )));
    }
    if bias.shape() != [d] {
        return Err(Error::shape(format!(
            "conv1d bias must be [{d}], got {:?}",
            bias.shape()
        )));
    }
    let mut out = vec![0.0; x.numel()];
    for t in 0..t_ext as isize {
        for s in 0..s_ext {
            let orow = ((t as usize) * s_ext + s) * d;
            out[orow..orow + d].copy_from_slice(bias.data());
            for k in 0..3isize {
                let src = align.frame_of_tap(t, k);
                if src < 0 || src >= t_ext as isize {
                    continue;
                }
                let xrow = ((src as usize) * s_ext + s) * d;
                let w = &weight.data()[(k as usize) * d * d..(k as usize + 1) * d * d];
                for i in 0..d {
                    let xv = x.data()[xrow + i];
                    if xv == 0.0 {
                        continue;
                    }
                    for o in 0..d {
                        out[orow + o] += xv * w[i * d + o];
                    }
                }
            }
        }
    }
    Tensor::new(vec![t_ext, s_ext, d], out)
}

pub(crate) fn dims3(x: &Tensor, what: &str) -> Result<[usize; 3]> {
    match x.shape() {
        &[a, b, c] => Ok([a, b, c]),
        s => Err(Error::shape(format!("{what} must be rank 3, got {s:?}"))),
    }
}

/// Max elementwise relative error between same-shaped tensors:
/// `|a-b| / (max(|a|,|b|) + 1e-300)`. Exact zeros on both sides score 0.
pub fn max_rel_err(a: &Tensor, b: &Tensor) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_rel_err shape mismatch");
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            if x == y {
                0.0
            } else {
                (x - y).abs() / (x.abs().max(y.abs()) + 1e-300)
            }
        })
        .fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_tensor(shape: &[usize], seed: u64) -> Tensor {
        let mut rng = Rng::from_seed(seed);
        Tensor::gaussian(shape, &mut rng)
    }

    #[test]
    fn shape_data_mismatch_rejected() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn matmul_identity() {
        let a = rand_tensor(&[3, 3], 1);
        let mut eye = Tensor::zeros(&[3, 3]);
        for i in 0..3 {
            eye.data_mut()[i * 3 + i] = 1.0;
        }
        let out = eye.matmul(&a).unwrap();
        assert_eq!(out.data(), a.data());
    }

    #[test]
    fn matmul_zeros_times_ones() {
        let z = Tensor::zeros(&[2, 3]);
        let o = Tensor::filled(&[3, 4], 1.0);
        let out = z.matmul(&o).unwrap();
        assert_eq!(out.shape(), &[2, 4]);
        assert!(out.data().iter().all(|&x| x == 0.0));
    }

    // Independent oracle: naive triple loop in the textbook i-j-k order,
    // accumulating into a local scalar.
    fn matmul_oracle(a: &Tensor, b: &Tensor) -> Tensor {
        let (m, k) = (a.shape()[0], a.shape()[1]);
        let n = b.shape()[1];
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for kk in 0..k {
                    acc += a.data()[i * k + kk] * b.data()[kk * n + j];
                }
                out.data_mut()[i * n + j] = acc;
            }
        }
        out
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let a = rand_tensor(&[5, 4], 2);
        let b = rand_tensor(&[4, 6], 3);
        let got = a.matmul(&b).unwrap();
        let want = matmul_oracle(&a, &b);
        assert!(max_rel_err(&got, &want) <= 1e-12);
    }

    #[test]
    fn matmul_inner_dim_mismatch() {
        let a = rand_tensor(&[2, 3], 4);
        let b = rand_tensor(&[4, 2], 5);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn matmul_batched_matches_per_slice() {
        let a = rand_tensor(&[3, 2, 4], 6);
        let b = rand_tensor(&[3, 4, 5], 7);
        let got = a.matmul(&b).unwrap();
        for bi in 0..3 {
            let ab = a.narrow(0, bi, 1).unwrap().reshape(&[2, 4]).unwrap();
            let bb = b.narrow(0, bi, 1).unwrap().reshape(&[4, 5]).unwrap();
            let want = ab.matmul(&bb).unwrap();
            let gb = got.narrow(0, bi, 1).unwrap().reshape(&[2, 5]).unwrap();
            assert_eq!(gb.data(), want.data());
        }
    }

    #[test]
    fn relu_basics() {
        let x = Tensor::new(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(x.relu().data(), &[0.0, 0.0, 2.0]);
        let y = rand_tensor(&[17], 8);
        assert_eq!(y.relu().relu().data(), y.relu().data());
    }

    #[test]
    fn bias_broadcast_allowed_mutual_rejected() {
        let x = rand_tensor(&[4, 3], 9);
        let b = rand_tensor(&[3], 10);
        let y = x.add(&b).unwrap();
        assert_eq!(y.at(&[2, 1]), x.at(&[2, 1]) + b.at(&[1]));

        let a = rand_tensor(&[3, 1], 11);
        let c = rand_tensor(&[1, 4], 12);
        assert!(a.add(&c).is_err());

        let d = rand_tensor(&[4, 2], 13);
        assert!(x.add(&d).is_err());
    }

    #[test]
    fn trailing_singleton_divide() {
        let num = rand_tensor(&[2, 3, 4], 14);
        let den = Tensor::filled(&[2, 3, 1], 2.0);
        let q = num.div(&den).unwrap();
        assert_eq!(q.at(&[1, 2, 3]), num.at(&[1, 2, 3]) / 2.0);
    }

    #[test]
    fn softmax_rows_sum_to_one_and_shift_invariant() {
        let x = rand_tensor(&[6, 9], 15);
        let y = x.softmax_last().unwrap();
        for r in 0..6 {
            let s: f64 = y.data()[r * 9..(r + 1) * 9].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let shifted = x.add_scalar(123.456);
        let y2 = shifted.softmax_last().unwrap();
        assert!(max_rel_err(&y, &y2) < 1e-12);
    }

    #[test]
    fn layer_norm_normalizes() {
        let x = rand_tensor(&[5, 16], 16);
        let gamma = Tensor::filled(&[16], 1.0);
        let beta = Tensor::zeros(&[16]);
        let y = x.layer_norm(&gamma, &beta, 1e-12).unwrap();
        for r in 0..5 {
            let row = &y.data()[r * 16..(r + 1) * 16];
            let mean: f64 = row.iter().sum::<f64>() / 16.0;
            let var: f64 = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / 16.0;
            assert!(mean.abs() < 1e-10);
            assert!((var - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn conv1d_zero_weight_gives_bias() {
        let x = rand_tensor(&[4, 2, 3], 17);
        let w = Tensor::zeros(&[3, 3, 3]);
        let b = Tensor::new(vec![3], vec![0.5, -1.0, 2.0]).unwrap();
        let y = conv1d_temporal(&x, &w, &b).unwrap();
        for t in 0..4 {
            for s in 0..2 {
                for i in 0..3 {
                    assert_eq!(y.at(&[t, s, i]), b.at(&[i]));
                }
            }
        }
    }

    #[test]
    fn conv1d_single_frame_center_tap() {
        let x = rand_tensor(&[1, 3, 4], 18);
        let mut w = Tensor::zeros(&[3, 4, 4]);
        let wc = rand_tensor(&[4, 4], 19);
        w.narrow_assign(0, 1, &wc.reshape(&[1, 4, 4]).unwrap()).unwrap();
        let b = rand_tensor(&[4], 20);
        let y = conv1d_temporal(&x, &w, &b).unwrap();
        let want = x
            .reshape(&[3, 4])
            .unwrap()
            .matmul(&wc)
            .unwrap()
            .add(&b)
            .unwrap();
        assert!(max_rel_err(&y, &want.reshape(&[1, 3, 4]).unwrap()) <= 1e-12);
    }

    // Independent oracle: explicit sliding-window sum, one output element at
    // a time.
    fn conv_oracle(x: &Tensor, w: &Tensor, b: &Tensor, causal: bool) -> Tensor {
        let (t_ext, s_ext, d) = (x.shape()[0], x.shape()[1], x.shape()[2]);
        let mut out = Tensor::zeros(x.shape());
        for t in 0..t_ext as isize {
            for s in 0..s_ext {
                for o in 0..d {
                    let mut acc = b.at(&[o]);
                    for k in 0..3isize {
                        let src = if causal { t + k - 2 } else { t + k - 1 };
                        if src < 0 || src >= t_ext as isize {
                            continue;
                        }
                        for i in 0..d {
                            acc += x.at(&[src as usize, s, i]) * w.at(&[k as usize, i, o]);
                        }
                    }
                    out.data_mut()[((t as usize) * s_ext + s) * d + o] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn conv1d_matches_sliding_window_oracle() {
        let x = rand_tensor(&[5, 3, 4], 21);
        let w = rand_tensor(&[3, 4, 4], 22);
        let b = rand_tensor(&[4], 23);
        let got = conv1d_temporal(&x, &w, &b).unwrap();
        let want = conv_oracle(&x, &w, &b, false);
        assert!(max_rel_err(&got, &want) <= 1e-12);

        let got_c = conv1d_temporal_causal(&x, &w, &b).unwrap();
        let want_c = conv_oracle(&x, &w, &b, true);
        assert!(max_rel_err(&got_c, &want_c) <= 1e-12);
    }

    #[test]
    fn permute_roundtrip() {
        let x = rand_tensor(&[2, 3, 4], 24);
        let y = x.permute(&[2, 0, 1]).unwrap();
        assert_eq!(y.shape(), &[4, 2, 3]);
        assert_eq!(y.at(&[3, 1, 2]), x.at(&[1, 2, 3]));
        let back = y.permute(&[1, 2, 0]).unwrap();
        assert_eq!(back.data(), x.data());
    }

    #[test]
    fn narrow_and_concat_roundtrip() {
        let x = rand_tensor(&[4, 5], 25);
        let a = x.narrow(0, 0, 2).unwrap();
        let b = x.narrow(0, 2, 2).unwrap();
        let back = Tensor::concat(&[&a, &b], 0).unwrap();
        assert_eq!(back.data(), x.data());

        let c = x.narrow(1, 1, 3).unwrap();
        assert_eq!(c.shape(), &[4, 3]);
        assert_eq!(c.at(&[2, 0]), x.at(&[2, 1]));
    }

    #[test]
    fn sum_axis_keepdim_matches_manual() {
        let x = rand_tensor(&[3, 4, 2], 26);
        let s = x.sum_axis_keepdim(1).unwrap();
        assert_eq!(s.shape(), &[3, 1, 2]);
        for b in 0..3 {
            for i in 0..2 {
                let manual: f64 = (0..4).map(|a| x.at(&[b, a, i])).sum();
                assert!((s.at(&[b, 0, i]) - manual).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn determinism_repeated_ops_bitwise_identical() {
        let x = rand_tensor(&[7, 7], 27);
        let y = rand_tensor(&[7, 7], 28);
        let a = x.matmul(&y).unwrap();
        let b = x.matmul(&y).unwrap();
        assert_eq!(a.data(), b.data());
    }
}
