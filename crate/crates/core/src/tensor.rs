//! Dense tensors over GF(p) and canonical polyadic decompositions.
//!
//! Tensors are stored row-major: the last axis varies fastest. Unfoldings use
//! the same convention, flattening the remaining axes in ascending order.

use crate::gf::{Elem, Field};
use crate::linalg::Mat;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tensor {
    field: Field,
    dims: Vec<usize>,
    data: Vec<Elem>,
}

impl Tensor {
    pub fn zeros(field: &Field, dims: &[usize]) -> Self {
        assert!(!dims.is_empty(), "tensors have at least one axis");
        Self {
            field: field.clone(),
            dims: dims.to_vec(),
            data: vec![0; dims.iter().product()],
        }
    }

    pub fn from_vec(field: &Field, dims: &[usize], data: Vec<Elem>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("a tensor needs at least one axis".into()));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::Shape(format!(
                "{} entries for dims {dims:?}",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&x| !field.contains(x)) {
            return Err(Error::Input(format!("entry {bad} is not an element of {field}")));
        }
        Ok(Self {
            field: field.clone(),
            dims: dims.to_vec(),
            data,
        })
    }

    /// The tensor product of the given vectors.
    pub fn outer(field: &Field, vectors: &[&[Elem]]) -> Self {
        let dims: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        let mut t = Self::zeros(field, &dims);
        t.add_outer(1, vectors);
        t
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, index: &[usize]) -> Elem {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], x: Elem) {
        let o = self.offset(index);
        self.data[o] = self.field.elem(x as i64);
    }

    /// Product of all dims after the first: the size of one axis-0 slice.
    pub fn slice_len(&self) -> usize {
        self.dims[1..].iter().product()
    }

    /// `v ×_0 T` with the length-1 leading axis dropped.
    ///
    /// For a one-axis tensor the result is a single-entry tensor of dims `[1]`.
    pub fn axis0_combination(&self, v: &[Elem]) -> Tensor {
        assert_eq!(v.len(), self.dims[0], "combination length");
        let f = &self.field;
        let m = self.slice_len();
        let mut out = vec![0; m];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(&self.data[i * m..(i + 1) * m]) {
                *o = f.mul_add(*o, vi, x);
            }
        }
        let dims = if self.dims.len() == 1 {
            vec![1]
        } else {
            self.dims[1..].to_vec()
        };
        Tensor {
            field: f.clone(),
            dims,
            data: out,
        }
    }

    /// `self += scale * (v_0 ⊗ v_1 ⊗ …)`.
    pub fn add_outer(&mut self, scale: Elem, vectors: &[&[Elem]]) {
        debug_assert_eq!(vectors.len(), self.dims.len());
        debug_assert!(vectors.iter().zip(&self.dims).all(|(v, &n)| v.len() == n));
        if scale == 0 || self.data.is_empty() {
            return;
        }
        let f = self.field.clone();
        // Accumulate the product progressively: prefix[d] holds the running product.
        let mut index = vec![0usize; self.dims.len()];
        let mut prefix = vec![0 as Elem; self.dims.len() + 1];
        prefix[0] = scale;
        for d in 0..self.dims.len() {
            prefix[d + 1] = f.mul(prefix[d], vectors[d][0]);
        }
        let last = self.dims.len() - 1;
        for cell in self.data.iter_mut() {
            *cell = f.add(*cell, prefix[last + 1]);
            // advance the index, updating prefixes from the changed axis on
            let mut d = last;
            loop {
                index[d] += 1;
                if index[d] < self.dims[d] {
                    break;
                }
                index[d] = 0;
                if d == 0 {
                    break;
                }
                d -= 1;
            }
            for e in d..=last {
                prefix[e + 1] = f.mul(prefix[e], vectors[e][index[e]]);
            }
        }
    }

    pub fn sub(&self, rhs: &Tensor) -> Result<Tensor> {
        self.field.ensure_same(&rhs.field)?;
        if self.dims != rhs.dims {
            return Err(Error::Shape(format!(
                "dims {:?} vs {:?}",
                self.dims, rhs.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| self.field.sub(a, b))
            .collect();
        Ok(Tensor {
            data,
            ..self.clone()
        })
    }

    /// Drops length-1 axes listed in `axes` (which must all have length 1).
    pub(crate) fn squeeze_axes(&self, axes: &[usize]) -> Tensor {
        debug_assert!(axes.iter().all(|&a| self.dims[a] == 1));
        let dims: Vec<usize> = (0..self.ndim())
            .filter(|a| !axes.contains(a))
            .map(|a| self.dims[a])
            .collect();
        Tensor {
            field: self.field.clone(),
            dims,
            data: self.data.clone(),
        }
    }

    /// Reorders axes: axis `j` of the result is axis `perm[j]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.ndim());
        let dims: Vec<usize> = perm.iter().map(|&a| self.dims[a]).collect();
        let mut out = Tensor::zeros(&self.field, &dims);
        let mut src = vec![0usize; self.ndim()];
        let mut dst = vec![0usize; self.ndim()];
        for o in 0..out.data.len() {
            let mut rem = o;
            for j in (0..dims.len()).rev() {
                dst[j] = rem % dims[j];
                rem /= dims[j];
            }
            for (j, &a) in perm.iter().enumerate() {
                src[a] = dst[j];
            }
            out.data[o] = self.get(&src);
        }
        out
    }

    /// The axis-`d` contraction `m ×_d self`.
    pub fn contract(&self, m: &Mat, d: usize) -> Result<Tensor> {
        contract(m, d, self)
    }

    /// The axis-`d` unfolding.
    pub fn unfold(&self, d: usize) -> Mat {
        unfold(self, d)
    }
}

/// `m ×_d t`: replaces axis `d` of length `n_d` by `m.rows()` combinations.
pub fn contract(m: &Mat, d: usize, t: &Tensor) -> Result<Tensor> {
    m.field().ensure_same(t.field())?;
    if d >= t.ndim() || m.cols() != t.dims[d] {
        return Err(Error::Shape(format!(
            "cannot contract a {}x{} matrix along axis {d} of dims {:?}",
            m.rows(),
            m.cols(),
            t.dims
        )));
    }
    let f = t.field();
    let pre: usize = t.dims[..d].iter().product();
    let post: usize = t.dims[d + 1..].iter().product();
    let n = t.dims[d];
    let n_out = m.rows();
    let mut dims = t.dims.clone();
    dims[d] = n_out;
    let mut out = Tensor::zeros(f, &dims);
    for a in 0..pre {
        for io in 0..n_out {
            let dst = &mut out.data[(a * n_out + io) * post..(a * n_out + io + 1) * post];
            for i in 0..n {
                let coef = m.get(io, i);
                if coef == 0 {
                    continue;
                }
                let src = &t.data[(a * n + i) * post..(a * n + i + 1) * post];
                for (x, &y) in dst.iter_mut().zip(src) {
                    *x = f.mul_add(*x, coef, y);
                }
            }
        }
    }
    Ok(out)
}

/// Axis-`d` unfolding: an `n_d × Π_{d'≠d} n_{d'}` matrix whose row `i` is the
/// row-major flattening of the slice at index `i` along axis `d`.
pub fn unfold(t: &Tensor, d: usize) -> Mat {
    assert!(d < t.ndim(), "axis {d} out of range");
    let pre: usize = t.dims[..d].iter().product();
    let post: usize = t.dims[d + 1..].iter().product();
    let n = t.dims[d];
    let cols = pre * post;
    let mut data = vec![0; n * cols];
    for a in 0..pre {
        for i in 0..n {
            let src = &t.data[(a * n + i) * post..(a * n + i + 1) * post];
            data[i * cols + a * post..i * cols + (a + 1) * post].copy_from_slice(src);
        }
    }
    Mat::from_vec(t.field(), n, cols, data).expect("in range")
}

/// A list of factor matrices `A_d` (`n_d × R`) sharing a column count `R`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cpd {
    field: Field,
    factors: Vec<Mat>,
}

impl Cpd {
    pub fn new(factors: Vec<Mat>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::Shape("a CPD needs at least one factor".into()));
        };
        let field = first.field().clone();
        let r = first.cols();
        for a in &factors {
            field.ensure_same(a.field())?;
            if a.cols() != r {
                return Err(Error::Shape(format!(
                    "factor column counts differ: {} vs {r}",
                    a.cols()
                )));
            }
        }
        Ok(Self { field, factors })
    }

    /// The rank-0 CPD of the zero tensor with the given dims.
    pub fn empty(field: &Field, dims: &[usize]) -> Self {
        Self {
            field: field.clone(),
            factors: dims.iter().map(|&n| Mat::zeros(field, n, 0)).collect(),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn factors(&self) -> &[Mat] {
        &self.factors
    }

    pub fn into_factors(self) -> Vec<Mat> {
        self.factors
    }

    /// Number of summands `R`.
    pub fn rank(&self) -> usize {
        self.factors[0].cols()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Mat::rows).collect()
    }

    pub fn eval(&self) -> Tensor {
        cpd_eval(self)
    }

    pub fn verify(&self, t: &Tensor) -> Result<bool> {
        cpd_verify(t, self)
    }

    /// Drops summands that are identically zero.
    pub fn prune_zero_columns(&self) -> Cpd {
        let keep: Vec<usize> = (0..self.rank())
            .filter(|&r| self.factors.iter().all(|a| (0..a.rows()).any(|i| a.get(i, r) != 0)))
            .collect();
        let factors = self
            .factors
            .iter()
            .map(|a| {
                let mut out = Mat::zeros(&self.field, a.rows(), keep.len());
                for i in 0..a.rows() {
                    for (j, &r) in keep.iter().enumerate() {
                        out.set(i, j, a.get(i, r));
                    }
                }
                out
            })
            .collect();
        Cpd {
            field: self.field.clone(),
            factors,
        }
    }
}

/// `Σ_r ⊗_d (A_d)_{:,r}`.
pub fn cpd_eval(c: &Cpd) -> Tensor {
    let dims = c.dims();
    let mut t = Tensor::zeros(&c.field, &dims);
    let columns: Vec<Vec<Vec<Elem>>> = c
        .factors
        .iter()
        .map(|a| (0..a.cols()).map(|r| a.column(r)).collect())
        .collect();
    for r in 0..c.rank() {
        let vs: Vec<&[Elem]> = columns.iter().map(|cols| cols[r].as_slice()).collect();
        t.add_outer(1, &vs);
    }
    t
}

/// Whether `c` evaluates to `t`.
pub fn cpd_verify(t: &Tensor, c: &Cpd) -> Result<bool> {
    t.field.ensure_same(&c.field)?;
    if c.dims() != t.dims {
        return Err(Error::Shape(format!(
            "CPD dims {:?} vs tensor dims {:?}",
            c.dims(),
            t.dims
        )));
    }
    Ok(cpd_eval(c) == *t)
}

/// Rank ≤ 1 test on a matrix with early exit: every row must be a multiple
/// of the first nonzero row.
pub(crate) fn mat_rank_at_most_one(m: &Mat) -> bool {
    let f = m.field();
    let Some(base) = (0..m.rows()).find(|&i| m.row(i).iter().any(|&x| x != 0)) else {
        return true;
    };
    let b = m.row(base);
    let lead = b.iter().position(|&x| x != 0).expect("nonzero row");
    let inv = f.inv_nonzero(b[lead]);
    for i in base + 1..m.rows() {
        let row = m.row(i);
        let s = f.mul(row[lead], inv);
        if row.iter().zip(b).any(|(&x, &y)| x != f.mul(s, y)) {
            return false;
        }
    }
    true
}

/// Whether `t` has rank at most one.
pub fn is_rank_at_most_one(t: &Tensor) -> bool {
    (0..t.ndim()).all(|d| mat_rank_at_most_one(&unfold(t, d)))
}

/// Vectors `u_d` with `⊗_d u_d == t` when `t` has rank ≤ 1, else `None`.
///
/// The zero tensor decomposes as all-zero vectors.
pub fn rank1_decompose(t: &Tensor) -> Option<Vec<Vec<Elem>>> {
    if !is_rank_at_most_one(t) {
        return None;
    }
    let f = t.field();
    let Some(pos) = t.data.iter().position(|&x| x != 0) else {
        return Some(t.dims.iter().map(|&n| vec![0; n]).collect());
    };
    let mut anchor = vec![0usize; t.ndim()];
    let mut rem = pos;
    for d in (0..t.ndim()).rev() {
        anchor[d] = rem % t.dims[d];
        rem /= t.dims[d];
    }
    let inv = f.inv_nonzero(t.data[pos]);
    let mut out = Vec::with_capacity(t.ndim());
    for d in 0..t.ndim() {
        let mut idx = anchor.clone();
        let u: Vec<Elem> = (0..t.dims[d])
            .map(|i| {
                idx[d] = i;
                let x = t.get(&idx);
                if d == 0 {
                    x
                } else {
                    f.mul(x, inv)
                }
            })
            .collect();
        out.push(u);
    }
    debug_assert_eq!(
        Tensor::outer(f, &out.iter().map(Vec::as_slice).collect::<Vec<_>>()),
        *t
    );
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LexOdometer;

    fn gf2() -> Field {
        Field::gf2()
    }

    fn t222(ones: &[[usize; 3]]) -> Tensor {
        let mut t = Tensor::zeros(&gf2(), &[2, 2, 2]);
        for idx in ones {
            t.set(idx, 1);
        }
        t
    }

    #[test]
    fn contract_examples() {
        let f = gf2();
        let t = t222(&[[0, 1, 1], [1, 0, 1], [1, 1, 0]]);
        assert_eq!(contract(&Mat::identity(&f, 2), 1, &t).unwrap(), t);

        let e1 = Mat::from_rows(&f, &[[0i64, 1]]).unwrap();
        let s = contract(&e1, 0, &t).unwrap();
        assert_eq!(s.dims(), &[1, 2, 2]);
        assert_eq!(s.data(), &t.data()[4..8]);

        let t = t222(&[[0, 0, 0], [1, 0, 0]]);
        let ones = Mat::from_rows(&f, &[[1i64, 1]]).unwrap();
        assert!(contract(&ones, 0, &t).unwrap().is_zero());

        assert!(matches!(
            contract(&Mat::identity(&f, 3), 0, &t),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn unfold_examples() {
        let f = gf2();
        let m = Tensor::from_vec(&f, &[2, 2], vec![1, 0, 1, 1]).unwrap();
        assert_eq!(
            unfold(&m, 0),
            Mat::from_rows(&f, &[[1i64, 0], [1, 1]]).unwrap()
        );
        let t = t222(&[[1, 0, 1]]);
        assert_eq!(
            unfold(&t, 0),
            Mat::from_rows(&f, &[[0i64, 0, 0, 0], [0, 1, 0, 0]]).unwrap()
        );
        // Axis 2: columns flatten (i0, i1) row-major, so (1,0) lands in column 2.
        assert_eq!(
            unfold(&t, 2),
            Mat::from_rows(&f, &[[0i64, 0, 0, 0], [0, 0, 1, 0]]).unwrap()
        );
    }

    #[test]
    fn eval_examples() {
        let f = gf2();
        let empty = Cpd::new(vec![Mat::zeros(&f, 2, 0); 3]).unwrap();
        assert!(empty.eval().is_zero());
        assert_eq!(empty.eval().dims(), &[2, 2, 2]);

        let e0 = Mat::from_rows(&f, &[[1i64], [0]]).unwrap();
        let unit = Cpd::new(vec![e0.clone(), e0.clone(), e0]).unwrap();
        assert_eq!(unit.eval(), t222(&[[0, 0, 0]]));
        assert!(cpd_verify(&t222(&[[0, 0, 0]]), &unit).unwrap());
        assert!(!cpd_verify(&t222(&[[1, 0, 0]]), &unit).unwrap());
        assert!(cpd_verify(&Tensor::zeros(&f, &[2, 2, 2]), &empty).unwrap());
        assert!(matches!(
            cpd_verify(&Tensor::zeros(&f, &[2, 2]), &empty),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn cpd_rejects_mismatched_columns() {
        let f = gf2();
        assert!(Cpd::new(vec![Mat::zeros(&f, 2, 1), Mat::zeros(&f, 2, 2)]).is_err());
        assert!(Cpd::new(vec![]).is_err());
    }

    #[test]
    fn rank1_examples() {
        let f = gf2();
        let z = Tensor::zeros(&f, &[2, 3, 2]);
        assert_eq!(
            rank1_decompose(&z).unwrap(),
            vec![vec![0, 0], vec![0, 0, 0], vec![0, 0]]
        );
        assert_eq!(
            rank1_decompose(&t222(&[[0, 0, 0]])).unwrap(),
            vec![vec![1, 0], vec![1, 0], vec![1, 0]]
        );
        assert!(rank1_decompose(&t222(&[[0, 0, 0], [1, 1, 1]])).is_none());
    }

    /// Brute-force rank ≤ 1 test: is `t` zero or an outer product of some vectors?
    fn brute_rank_le1(t: &Tensor) -> bool {
        let f = t.field();
        let total: usize = t.dims().iter().sum();
        let mut odo = LexOdometer::new(f, total);
        while let Some(flat) = odo.step() {
            let mut vs = Vec::new();
            let mut at = 0;
            for &n in t.dims() {
                vs.push(&flat[at..at + n]);
                at += n;
            }
            if Tensor::outer(f, &vs) == *t {
                return true;
            }
        }
        false
    }

    #[test]
    fn rank1_agrees_with_brute_force_on_all_2x2x2() {
        let f = gf2();
        for bits in 0u32..256 {
            let data = (0..8).map(|i| (bits >> i) & 1).collect();
            let t = Tensor::from_vec(&f, &[2, 2, 2], data).unwrap();
            let got = rank1_decompose(&t);
            assert_eq!(got.is_some(), brute_rank_le1(&t), "bits {bits:08b}");
            if let Some(us) = got {
                let vs: Vec<&[Elem]> = us.iter().map(Vec::as_slice).collect();
                assert_eq!(Tensor::outer(&f, &vs), t);
            }
        }
    }

    #[test]
    fn rank1_over_gf3_with_scalars() {
        let f = Field::new(3).unwrap();
        let t = Tensor::outer(&f, &[&[2, 1], &[0, 2, 1], &[1, 2]]);
        let us = rank1_decompose(&t).unwrap();
        let vs: Vec<&[Elem]> = us.iter().map(Vec::as_slice).collect();
        assert_eq!(Tensor::outer(&f, &vs), t);
    }

    #[test]
    fn permute_and_squeeze() {
        let f = gf2();
        let t = t222(&[[1, 0, 1]]);
        let p = t.permute_axes(&[2, 0, 1]);
        assert_eq!(p.get(&[1, 1, 0]), 1);
        assert_eq!(p.data().iter().filter(|&&x| x == 1).count(), 1);
        let s = Tensor::from_vec(&f, &[2, 1, 2], vec![1, 0, 0, 1]).unwrap();
        assert_eq!(s.squeeze_axes(&[1]).dims(), &[2, 2]);
    }

    #[test]
    fn axis0_combination_sums_slices() {
        let f = Field::new(3).unwrap();
        let t = Tensor::from_vec(&f, &[2, 2], vec![1, 2, 0, 1]).unwrap();
        assert_eq!(t.axis0_combination(&[1, 1]).data(), &[1, 0]);
        assert_eq!(t.axis0_combination(&[2, 0]).data(), &[2, 1]);
    }

    #[test]
    fn zero_length_axes() {
        let f = gf2();
        let t = Tensor::zeros(&f, &[2, 0, 3]);
        assert!(t.is_empty());
        assert_eq!(unfold(&t, 0).shape(), (2, 0));
        assert_eq!(unfold(&t, 1).shape(), (0, 6));
        assert!(rank1_decompose(&t).is_some());
        let c = Cpd::empty(&f, &[2, 0, 3]);
        assert!(cpd_verify(&t, &c).unwrap());
    }
}
