//! Named-index dense tensors and the contraction kernels used by every update.
//!
//! Storage is row-major with axis order equal to declaration order. Multi-operand
//! contractions are evaluated as a sequence of pairwise contractions; the next
//! operand is chosen greedily by loop volume with ties resolved by position, and
//! every pairwise kernel walks its index space in a fixed order. Results are
//! therefore bit-identical across runs for identical inputs.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A symbolic index and its cardinality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexDef {
    name: String,
    cardinality: usize,
}

impl IndexDef {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Result<Self> {
        let name = name.into();
        if cardinality == 0 {
            return Err(Error::ZeroCardinality(name));
        }
        Ok(IndexDef { name, cardinality })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }
}

impl fmt::Display for IndexDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.cardinality)
    }
}

pub(crate) fn describe(indices: &[IndexDef]) -> String {
    indices
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_unique(indices: &[IndexDef]) -> Result<()> {
    for (k, a) in indices.iter().enumerate() {
        if indices[..k].iter().any(|b| b.name == a.name) {
            return Err(Error::DuplicateIndex(a.name.clone()));
        }
    }
    Ok(())
}

/// Dense multiway array whose axes are named indices.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor<T> {
    indices: Vec<IndexDef>,
    values: Vec<T>,
    nonneg: bool,
}

impl<T: Scalar> NamedTensor<T> {
    /// Build a tensor from row-major values. Every value must be finite.
    pub fn from_vec(indices: Vec<IndexDef>, values: Vec<T>) -> Result<Self> {
        check_unique(&indices)?;
        let expected = volume(&indices);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        let nonneg = values.iter().all(|v| *v >= T::zero());
        Ok(NamedTensor {
            indices,
            values,
            nonneg,
        })
    }

    /// Like [`NamedTensor::from_vec`] but rejects negative entries.
    pub fn nonneg(indices: Vec<IndexDef>, values: Vec<T>) -> Result<Self> {
        let t = Self::from_vec(indices, values)?;
        if let Some(pos) = t.values.iter().position(|v| *v < T::zero()) {
            return Err(Error::Negative {
                offset: pos,
                value: t.values[pos].as_f64(),
            });
        }
        Ok(t)
    }

    pub fn filled(indices: Vec<IndexDef>, value: T) -> Result<Self> {
        let n = volume(&indices);
        Self::from_vec(indices, vec![value; n])
    }

    pub fn zeros(indices: Vec<IndexDef>) -> Result<Self> {
        Self::filled(indices, T::zero())
    }

    pub fn ones(indices: Vec<IndexDef>) -> Result<Self> {
        Self::filled(indices, T::one())
    }

    /// Rank-0 tensor holding a single value.
    pub fn scalar(value: T) -> Self {
        NamedTensor {
            indices: Vec::new(),
            values: vec![value],
            nonneg: value >= T::zero(),
        }
    }

    /// Build a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(indices: Vec<IndexDef>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let dims: Vec<usize> = indices.iter().map(|i| i.cardinality).collect();
        let n = volume(&indices);
        let mut values = Vec::with_capacity(n);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..n {
            values.push(f(&idx));
            increment(&mut idx, &dims);
        }
        Self::from_vec(indices, values)
    }

    // Internal constructor for kernel outputs whose values are known to be finite.
    pub(crate) fn from_parts(indices: Vec<IndexDef>, values: Vec<T>, nonneg: bool) -> Self {
        debug_assert_eq!(values.len(), volume(&indices));
        NamedTensor {
            indices,
            values,
            nonneg,
        }
    }

    pub fn indices(&self) -> &[IndexDef] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i.cardinality).collect()
    }

    pub fn index_names(&self) -> Vec<&str> {
        self.indices.iter().map(|i| i.name.as_str()).collect()
    }

    /// Row-major strides, one per axis.
    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.indices)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.indices.iter().position(|i| i.name == name)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.indices.len());
        idx.iter()
            .zip(&self.indices)
            .fold(0, |acc, (&i, d)| acc * d.cardinality + i)
    }

    /// Multi-index of a row-major offset.
    pub fn unravel(&self, mut offset: usize) -> Vec<usize> {
        let mut idx = vec![0; self.indices.len()];
        for (k, d) in self.indices.iter().enumerate().rev() {
            idx[k] = offset % d.cardinality;
            offset /= d.cardinality;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.values[self.offset(idx)]
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.indices == other.indices
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: describe(&self.indices),
                found: describe(&other.indices),
            })
        }
    }

    /// Elementwise map; the result must be finite.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_vec(self.indices.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Elementwise combination of two identically shaped tensors.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_vec(self.indices.clone(), values)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| {
                let d = (a - b).abs();
                if d > m {
                    d
                } else {
                    m
                }
            }))
    }

    /// Sum out every axis not in `out`, then arrange the remaining axes in `out`
    /// order. Indices of `out` that this tensor lacks are broadcast.
    pub fn sum_to(&self, out: &[IndexDef]) -> Result<Self> {
        contract(&[self], out, true)
    }

    /// Convert the element type.
    pub fn cast<U: Scalar>(&self) -> NamedTensor<U> {
        NamedTensor {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
            nonneg: self.nonneg,
        }
    }
}

pub(crate) fn volume(indices: &[IndexDef]) -> usize {
    indices.iter().map(|i| i.cardinality).product()
}

fn row_major_strides(indices: &[IndexDef]) -> Vec<usize> {
    let mut strides = vec![1; indices.len()];
    for k in (0..indices.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * indices[k + 1].cardinality;
    }
    strides
}

fn increment(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// Elementwise product of two tensors over identical index lists.
pub fn hadamard<T: Scalar>(a: &NamedTensor<T>, b: &NamedTensor<T>) -> Result<NamedTensor<T>> {
    a.check_same_shape(b)?;
    let values = a.values.iter().zip(&b.values).map(|(&x, &y)| x * y).collect();
    let nonneg = a.nonneg && b.nonneg;
    Ok(NamedTensor::from_parts(a.indices.clone(), values, nonneg))
}

/// Elementwise quotient with `0/0 = 0`. A non-zero numerator over a zero
/// denominator is a domain error naming the offending cell.
pub fn safe_div<T: Scalar>(num: &NamedTensor<T>, den: &NamedTensor<T>) -> Result<NamedTensor<T>> {
    num.check_same_shape(den)?;
    let mut values = Vec::with_capacity(num.len());
    for (k, (&x, &y)) in num.values.iter().zip(&den.values).enumerate() {
        if y == T::zero() {
            if x != T::zero() {
                return Err(Error::Domain {
                    cell: num.unravel(k),
                    numerator: x.as_f64(),
                });
            }
            values.push(T::zero());
        } else {
            values.push(x / y);
        }
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let nonneg = values.iter().all(|v| *v >= T::zero());
    Ok(NamedTensor::from_parts(num.indices.clone(), values, nonneg))
}

/// Sum over all non-output indices of the product of the factors.
///
/// Every output index must occur in at least one factor, and shared index
/// names must agree on cardinality.
pub fn full_product<T: Scalar>(
    factors: &[&NamedTensor<T>],
    out: &[IndexDef],
) -> Result<NamedTensor<T>> {
    contract(factors, out, false)
}

/// `Δ_α(Q)`: contraction of `q` with every factor except `factors[alpha]`,
/// summed over all indices outside factor `alpha`. The result has exactly the
/// shape of `factors[alpha]`.
pub fn delta<T: Scalar>(
    alpha: usize,
    q: &NamedTensor<T>,
    factors: &[&NamedTensor<T>],
) -> Result<NamedTensor<T>> {
    let target = factors.get(alpha).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "factor position {alpha} out of range ({} factors)",
            factors.len()
        ))
    })?;
    let mut operands: Vec<&NamedTensor<T>> = Vec::with_capacity(factors.len());
    operands.push(q);
    operands.extend(
        factors
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != alpha)
            .map(|(_, f)| *f),
    );
    // Cardinalities of the target factor must agree with the operands too.
    let mut all: Vec<&NamedTensor<T>> = operands.clone();
    all.push(target);
    check_cardinalities(&all, &[])?;
    contract(&operands, &target.indices, true)
}

fn check_cardinalities<T>(operands: &[&NamedTensor<T>], out: &[IndexDef]) -> Result<HashMap<String, usize>> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let all = operands.iter().flat_map(|t| t.indices.iter()).chain(out.iter());
    for idx in all {
        match seen.get(&idx.name) {
            Some(&c) if c != idx.cardinality => {
                return Err(Error::CardinalityMismatch {
                    name: idx.name.clone(),
                    left: c,
                    right: idx.cardinality,
                })
            }
            Some(_) => {}
            None => {
                seen.insert(idx.name.clone(), idx.cardinality);
            }
        }
    }
    Ok(seen)
}

fn has(indices: &[IndexDef], name: &str) -> bool {
    indices.iter().any(|i| i.name == name)
}

fn union(a: &[IndexDef], b: &[IndexDef]) -> Vec<IndexDef> {
    let mut u = a.to_vec();
    for i in b {
        if !has(&u, &i.name) {
            u.push(i.clone());
        }
    }
    u
}

/// General contraction: multiply the operands and sum every index not in `out`.
/// With `broadcast`, output indices absent from all operands are replicated.
pub(crate) fn contract<T: Scalar>(
    operands: &[&NamedTensor<T>],
    out: &[IndexDef],
    broadcast: bool,
) -> Result<NamedTensor<T>> {
    check_unique(out)?;
    check_cardinalities(operands, out)?;
    if !broadcast {
        for o in out {
            if !operands.iter().any(|t| has(&t.indices, &o.name)) {
                return Err(Error::MissingIndex(o.name.clone()));
            }
        }
    }
    let one = NamedTensor::scalar(T::one());
    match operands.len() {
        0 => return contract_pair(&one, &one, out),
        1 => return contract_pair(operands[0], &one, out),
        _ => {}
    }

    let mut remaining: Vec<&NamedTensor<T>> = operands[1..].to_vec();
    let mut current: Option<NamedTensor<T>> = None;
    let first = operands[0];
    while !remaining.is_empty() {
        let cur_indices = current.as_ref().map_or(&first.indices, |c| &c.indices);
        // Greedy: smallest loop volume next, earliest operand on ties.
        let (pick, _) = remaining
            .iter()
            .enumerate()
            .map(|(k, t)| (k, volume_u128(&union(cur_indices, &t.indices))))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("remaining is non-empty");
        let next = remaining.remove(pick);
        let lhs = current.as_ref().unwrap_or(first);
        let keep: Vec<IndexDef> = if remaining.is_empty() {
            out.to_vec()
        } else {
            union(&lhs.indices, &next.indices)
                .into_iter()
                .filter(|i| has(out, &i.name) || remaining.iter().any(|t| has(&t.indices, &i.name)))
                .collect()
        };
        current = Some(contract_pair(lhs, next, &keep)?);
    }
    Ok(current.expect("at least two operands were contracted"))
}

fn volume_u128(indices: &[IndexDef]) -> u128 {
    indices
        .iter()
        .fold(1u128, |acc, i| acc.saturating_mul(i.cardinality as u128))
}

/// Pairwise kernel: `out[o] = Σ a[..]·b[..]` over every index of `a` or `b` not
/// in `out`. Output indices missing from both operands are broadcast.
fn contract_pair<T: Scalar>(
    a: &NamedTensor<T>,
    b: &NamedTensor<T>,
    out: &[IndexDef],
) -> Result<NamedTensor<T>> {
    // Loop axes: output axes in output order, then summed axes of a, then of b.
    let mut axes: Vec<IndexDef> = out.to_vec();
    for i in a.indices.iter().chain(&b.indices) {
        if !has(&axes, &i.name) {
            axes.push(i.clone());
        }
    }
    let stride_in = |t: &NamedTensor<T>| -> Vec<usize> {
        let s = t.strides();
        axes.iter()
            .map(|ax| t.position(&ax.name).map_or(0, |p| s[p]))
            .collect()
    };
    let sa = stride_in(a);
    let sb = stride_in(b);
    let out_strides = row_major_strides(out);
    let so: Vec<usize> = (0..axes.len())
        .map(|k| if k < out.len() { out_strides[k] } else { 0 })
        .collect();
    let dims: Vec<usize> = axes.iter().map(|i| i.cardinality).collect();

    // Outer axes by decreasing combined stride; the innermost axis is picked
    // by a rough cost model that weighs per-call overhead against whether the
    // loop body hits one of the contiguous fast paths.
    let mut order: Vec<usize> = (0..axes.len()).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(sa[k] + sb[k] + so[k]));
    let cost = |k: usize| -> f64 {
        let fast = matches!((sa[k], sb[k], so[k]), (1, 1, 0) | (1, 1, 1) | (1, 0, 1) | (0, 1, 1));
        8.0 / dims[k] as f64 + if fast { 1.0 } else { 2.5 }
    };
    if let Some(pos) = (0..order.len()).rev().min_by(|&x, &y| cost(order[x]).total_cmp(&cost(order[y]))) {
        let k = order.remove(pos);
        order.push(k);
    }
    let pick = |v: &[usize]| -> Vec<usize> { order.iter().map(|&k| v[k]).collect() };
    let (dims, sa, sb, so) = merge_axes(pick(&dims), pick(&sa), pick(&sb), pick(&so));

    let mut values = vec![T::zero(); volume(out)];
    kernel(&dims, &sa, &sb, &so, &a.values, &b.values, &mut values);
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    Ok(NamedTensor::from_parts(out.to_vec(), values, a.nonneg && b.nonneg))
}

/// Fuse neighbouring loop axes that every operand walks as one contiguous
/// run, so the inner loop gets longer.
fn merge_axes(
    dims: Vec<usize>,
    sa: Vec<usize>,
    sb: Vec<usize>,
    so: Vec<usize>,
) -> (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut d, mut a, mut b, mut o) = (Vec::new(), Vec::new(), Vec::new(), Vec::<usize>::new());
    for k in 0..dims.len() {
        if dims[k] == 1 {
            continue;
        }
        if let Some(last) = d.len().checked_sub(1) {
            let fits = |s: &[usize], t: usize| s[last] == t * dims[k];
            if fits(&a, sa[k]) && fits(&b, sb[k]) && fits(&o, so[k]) {
                d[last] *= dims[k];
                a[last] = sa[k];
                b[last] = sb[k];
                o[last] = so[k];
                continue;
            }
        }
        d.push(dims[k]);
        a.push(sa[k]);
        b.push(sb[k]);
        o.push(so[k]);
    }
    (d, a, b, o)
}

/// Inner loop over one axis of length `len` starting at `oa`, `ob`, `oo`.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn inner<T: Scalar>(
    len: usize,
    (la, lb, lo): (usize, usize, usize),
    (oa, ob, oo): (usize, usize, usize),
    a: &[T],
    b: &[T],
    out: &mut [T],
) {
    match (la, lb, lo) {
        (1, 1, 0) => {
            // Four partial sums break the add dependency chain.
            let (xa, xb) = (&a[oa..oa + len], &b[ob..ob + len]);
            let mut acc = [T::zero(); 4];
            let mut ca = xa.chunks_exact(4);
            let mut cb = xb.chunks_exact(4);
            for (x, y) in (&mut ca).zip(&mut cb) {
                for l in 0..4 {
                    acc[l] += x[l] * y[l];
                }
            }
            let mut tail = T::zero();
            for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
                tail += x * y;
            }
            out[oo] += (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
        }
        (1, 1, 1) => {
            let dst = &mut out[oo..oo + len];
            for ((o, &x), &y) in dst.iter_mut().zip(&a[oa..oa + len]).zip(&b[ob..ob + len]) {
                *o += x * y;
            }
        }
        (1, 0, 1) => {
            let y = b[ob];
            for (o, &x) in out[oo..oo + len].iter_mut().zip(&a[oa..oa + len]) {
                *o += x * y;
            }
        }
        (0, 1, 1) => {
            let x = a[oa];
            for (o, &y) in out[oo..oo + len].iter_mut().zip(&b[ob..ob + len]) {
                *o += x * y;
            }
        }
        (_, _, 0) => {
            let mut acc = T::zero();
            let (mut pa, mut pb) = (oa, ob);
            for _ in 0..len {
                acc += a[pa] * b[pb];
                pa += la;
                pb += lb;
            }
            out[oo] += acc;
        }
        _ => {
            let (mut pa, mut pb, mut po) = (oa, ob, oo);
            for _ in 0..len {
                out[po] += a[pa] * b[pb];
                pa += la;
                pb += lb;
                po += lo;
            }
        }
    }
}

fn kernel<T: Scalar>(
    dims: &[usize],
    sa: &[usize],
    sb: &[usize],
    so: &[usize],
    a: &[T],
    b: &[T],
    out: &mut [T],
) {
    let n = dims.len();
    if n == 0 {
        out[0] += a[0] * b[0];
        return;
    }
    // The two innermost axes run as plain loops; the rest use an odometer.
    let last = n - 1;
    let (len, step) = (dims[last], (sa[last], sb[last], so[last]));
    let (mid_len, ma, mb, mo) = match last.checked_sub(1) {
        Some(m) => (dims[m], sa[m], sb[m], so[m]),
        None => (1, 0, 0, 0),
    };
    let outer = last.saturating_sub(1);
    let mut idx = vec![0usize; outer];
    let (mut oa, mut ob, mut oo) = (0usize, 0usize, 0usize);
    loop {
        let (mut pa, mut pb, mut po) = (oa, ob, oo);
        for _ in 0..mid_len {
            inner(len, step, (pa, pb, po), a, b, out);
            pa += ma;
            pb += mb;
            po += mo;
        }
        let mut k = outer;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            oa += sa[k];
            ob += sb[k];
            oo += so[k];
            if idx[k] < dims[k] {
                break;
            }
            oa -= sa[k] * dims[k];
            ob -= sb[k] * dims[k];
            oo -= so[k] * dims[k];
            idx[k] = 0;
        }
    }
}
