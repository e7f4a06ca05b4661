//! Dense matrices over GF(p).
//!
//! Everything here is exact. Zero-sized matrices (no rows or no columns) are
//! legal and behave as empty products, which the search relies on when a
//! partial factor has no columns.

mod enumerate;

use std::fmt;

pub use enumerate::{
    enumerate_factorizations, enumerate_full_rank, solve_right_factors, Factorizations,
    LexOdometer, SolveRight,
};

use crate::gf::{Elem, Field};
use crate::{Error, Result};

/// A dense row-major matrix over a prime field.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

/// Output of [`Mat::rref_transform`]: `transform * input == rref`.
#[derive(Clone, Debug)]
pub struct RrefResult {
    pub rref: Mat,
    pub transform: Mat,
    pub rank: usize,
    /// Column index of the leading 1 in each nonzero row.
    pub pivots: Vec<usize>,
}

/// Invertible `p_left`, `q_right` with `p_left * m * q_right == [[I_r, 0], [0, 0]]`.
#[derive(Clone, Debug)]
pub struct RankNormalForm {
    pub p_left: Mat,
    pub q_right: Mat,
    pub rank: usize,
}

impl Mat {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Wraps row-major data, checking its length and that every entry lies in the field.
    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&x| !field.contains(x)) {
            return Err(Error::Input(format!("entry {bad} is not an element of {field}")));
        }
        Ok(Self {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from equally long rows. Entries are reduced mod p.
    pub fn from_rows<R: AsRef<[i64]>>(field: &Field, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend(row.iter().map(|&x| field.elem(x)));
        }
        Ok(Self {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// A 1×n matrix.
    pub fn row_vector(field: &Field, v: &[Elem]) -> Self {
        Self::from_vec(field, 1, v.len(), v.to_vec()).expect("valid row vector")
    }

    /// An n×1 matrix.
    pub fn column_vector(field: &Field, v: &[Elem]) -> Self {
        Self::from_vec(field, v.len(), 1, v.to_vec()).expect("valid column vector")
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Elem> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Elem) {
        debug_assert!(self.field.contains(x));
        self.data[i * self.cols + j] = x;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Mat) -> Result<Mat> {
        self.field.ensure_same(&rhs.field)?;
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = &self.field;
        let mut out = Mat::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                let src = rhs.row(l);
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = f.mul_add(*d, a, b);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Mat) -> Result<Mat> {
        self.zip_with(rhs, |f, a, b| f.add(a, b))
    }

    pub fn sub(&self, rhs: &Mat) -> Result<Mat> {
        self.zip_with(rhs, |f, a, b| f.sub(a, b))
    }

    fn zip_with(&self, rhs: &Mat, op: impl Fn(&Field, Elem, Elem) -> Elem) -> Result<Mat> {
        self.field.ensure_same(&rhs.field)?;
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| op(&self.field, a, b))
            .collect();
        Ok(Mat {
            data,
            ..self.clone()
        })
    }

    /// Rows `range` as a new matrix.
    pub fn select_rows(&self, range: std::ops::Range<usize>) -> Mat {
        let data = self.data[range.start * self.cols..range.end * self.cols].to_vec();
        Mat {
            field: self.field.clone(),
            rows: range.len(),
            cols: self.cols,
            data,
        }
    }

    /// Columns `range` as a new matrix.
    pub fn select_cols(&self, range: std::ops::Range<usize>) -> Mat {
        let mut data = Vec::with_capacity(self.rows * range.len());
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[range.clone()]);
        }
        Mat {
            field: self.field.clone(),
            rows: self.rows,
            cols: range.len(),
            data,
        }
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &Mat) -> Result<Mat> {
        self.field.ensure_same(&rhs.field)?;
        if self.rows != rhs.rows {
            return Err(Error::Shape("hstack needs equal row counts".into()));
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + rhs.cols));
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(rhs.row(i));
        }
        Ok(Mat {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols + rhs.cols,
            data,
        })
    }

    /// `[self ; rhs]`.
    pub fn vstack(&self, rhs: &Mat) -> Result<Mat> {
        self.field.ensure_same(&rhs.field)?;
        if self.cols != rhs.cols {
            return Err(Error::Shape("vstack needs equal column counts".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Mat {
            field: self.field.clone(),
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    /// Appends a row in place.
    pub fn push_row(&mut self, row: &[Elem]) {
        assert_eq!(row.len(), self.cols, "row length");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Reduced row echelon form together with an invertible `transform`
    /// satisfying `transform * self == rref`.
    ///
    /// Columns are scanned left to right and the pivot is the first remaining
    /// row with a nonzero entry, so the transform is deterministic.
    pub fn rref_transform(&self) -> RrefResult {
        let mut work = self.data.clone();
        let mut transform = Mat::identity(&self.field, self.rows);
        let pivots = eliminate(
            &self.field,
            &mut work,
            self.rows,
            self.cols,
            Some(&mut transform.data),
        );
        RrefResult {
            rref: Mat {
                field: self.field.clone(),
                rows: self.rows,
                cols: self.cols,
                data: work,
            },
            transform,
            rank: pivots.len(),
            pivots,
        }
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut work = self.data.clone();
        let pivots = eliminate(&self.field, &mut work, self.rows, self.cols, None);
        (
            Mat {
                field: self.field.clone(),
                rows: self.rows,
                cols: self.cols,
                data: work,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        eliminate(&self.field, &mut work, self.rows, self.cols, None).len()
    }

    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!(
                "inverse of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let r = self.rref_transform();
        if r.rank < self.rows {
            return Err(Error::Singular);
        }
        Ok(r.transform)
    }

    /// Basis of the right null space `{x : self * x = 0}`, one vector per
    /// row, returned in reduced row echelon form.
    pub fn kernel_basis(&self) -> Mat {
        let f = &self.field;
        let (rref, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Mat::zeros(f, 0, self.cols);
        let mut v = vec![0; self.cols];
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            v.iter_mut().for_each(|x| *x = 0);
            v[free] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(rref.get(i, free));
            }
            basis.push_row(&v);
        }
        basis.rref().0
    }

    /// Invertible `P`, `Q` with `P * self * Q = [[I_r, 0], [0, 0]]`.
    pub fn rank_normal_form(&self) -> RankNormalForm {
        let f = &self.field;
        let red = self.rref_transform();
        let r = red.rank;
        let n = self.cols;
        // Permutation moving pivot columns to the front, others after in order.
        let mut order = red.pivots.clone();
        order.extend((0..n).filter(|c| !red.pivots.contains(c)));
        let mut perm = Mat::zeros(f, n, n);
        for (dst, &src) in order.iter().enumerate() {
            perm.data[src * n + dst] = 1;
        }
        // After permuting, rref = [[I_r, B], [0, 0]]; clear B with column operations.
        let mut clear = Mat::identity(f, n);
        for i in 0..r {
            for (j, &src) in order.iter().enumerate().skip(r) {
                clear.data[i * n + j] = f.neg(red.rref.get(i, src));
            }
        }
        let q_right = perm.mul(&clear).expect("square n×n");
        RankNormalForm {
            p_left: red.transform,
            q_right,
            rank: r,
        }
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat[{}x{} over {}]", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            write!(f, "\n  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// In-place Gauss-Jordan elimination of a row-major `rows × cols` buffer.
/// Row operations are mirrored onto `track` (a `rows × rows` buffer) when given.
/// Returns pivot columns.
pub(crate) fn eliminate(
    f: &Field,
    a: &mut [Elem],
    rows: usize,
    cols: usize,
    mut track: Option<&mut [Elem]>,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if pr != r {
            swap_rows(a, cols, pr, r);
            if let Some(t) = track.as_deref_mut() {
                swap_rows(t, rows, pr, r);
            }
        }
        let inv = f.inv_nonzero(a[r * cols + c]);
        if inv != 1 {
            scale_row(f, a, cols, r, inv);
            if let Some(t) = track.as_deref_mut() {
                scale_row(f, t, rows, r, inv);
            }
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = a[i * cols + c];
            if factor == 0 {
                continue;
            }
            let neg = f.neg(factor);
            axpy_row(f, a, cols, i, r, neg);
            if let Some(t) = track.as_deref_mut() {
                axpy_row(f, t, rows, i, r, neg);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn swap_rows(a: &mut [Elem], width: usize, i: usize, j: usize) {
    for k in 0..width {
        a.swap(i * width + k, j * width + k);
    }
}

fn scale_row(f: &Field, a: &mut [Elem], width: usize, i: usize, s: Elem) {
    for x in &mut a[i * width..(i + 1) * width] {
        *x = f.mul(*x, s);
    }
}

/// row[dst] += s * row[src]
fn axpy_row(f: &Field, a: &mut [Elem], width: usize, dst: usize, src: usize, s: Elem) {
    for k in 0..width {
        let b = a[src * width + k];
        if b != 0 {
            a[dst * width + k] = f.mul_add(a[dst * width + k], s, b);
        }
    }
}

/// Incrementally maintained echelon basis, used to test whether a new row
/// vector increases the rank of a growing set.
#[derive(Clone, Debug)]
pub(crate) struct EchelonBasis {
    field: Field,
    width: usize,
    rows: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub(crate) fn new(field: &Field, width: usize) -> Self {
        Self {
            field: field.clone(),
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` if it is independent of the current basis; returns whether it was added.
    pub(crate) fn insert(&mut self, v: &[Elem]) -> bool {
        debug_assert_eq!(v.len(), self.width);
        let f = &self.field;
        let mut w = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let x = w[pc];
            if x != 0 {
                let neg = f.neg(x);
                for (wk, &rk) in w.iter_mut().zip(row) {
                    *wk = f.mul_add(*wk, neg, rk);
                }
            }
        }
        let Some(pc) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv_nonzero(w[pc]);
        for x in &mut w {
            *x = f.mul(*x, inv);
        }
        self.rows.push(w);
        self.pivots.push(pc);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> Field {
        Field::new(p).unwrap()
    }

    fn m(f: &Field, rows: &[&[i64]]) -> Mat {
        Mat::from_rows(f, rows).unwrap()
    }

    fn is_rref(a: &Mat, rank: usize) -> bool {
        let mut last: Option<usize> = None;
        for i in 0..a.rows() {
            let lead = a.row(i).iter().position(|&x| x != 0);
            match lead {
                None => {
                    if i < rank {
                        return false;
                    }
                }
                Some(c) => {
                    if i >= rank || a.get(i, c) != 1 {
                        return false;
                    }
                    if last.is_some_and(|l| c <= l) {
                        return false;
                    }
                    if (0..a.rows()).any(|k| k != i && a.get(k, c) != 0) {
                        return false;
                    }
                    last = Some(c);
                }
            }
        }
        true
    }

    #[test]
    fn rref_examples() {
        let f = gf(2);
        let r = m(&f, &[&[0, 1], &[1, 0]]).rref_transform();
        assert_eq!(r.rref, Mat::identity(&f, 2));
        assert_eq!(r.rank, 2);

        let r = m(&f, &[&[1, 1], &[1, 1]]).rref_transform();
        assert_eq!(r.rref, m(&f, &[&[1, 1], &[0, 0]]));
        assert_eq!(r.rank, 1);

        let f3 = gf(3);
        let r = m(&f3, &[&[2]]).rref_transform();
        assert_eq!(r.rref, m(&f3, &[&[1]]));
        assert_eq!(r.transform, m(&f3, &[&[2]]));
    }

    #[test]
    fn rank_examples() {
        let f = gf(2);
        assert_eq!(Mat::identity(&f, 3).rank(), 3);
        assert_eq!(Mat::zeros(&f, 2, 5).rank(), 0);
        assert_eq!(m(&f, &[&[1, 1], &[1, 1]]).rank(), 1);
    }

    #[test]
    fn inverse_examples() {
        let f = gf(2);
        let a = m(&f, &[&[1, 1], &[0, 1]]);
        assert_eq!(a.inverse().unwrap(), a);
        assert_eq!(Mat::identity(&f, 4).inverse().unwrap(), Mat::identity(&f, 4));
        assert!(matches!(
            m(&f, &[&[1, 1], &[1, 1]]).inverse(),
            Err(Error::Singular)
        ));
        assert!(matches!(Mat::zeros(&f, 2, 3).inverse(), Err(Error::Shape(_))));
    }

    #[test]
    fn kernel_examples() {
        let f = gf(2);
        assert_eq!(Mat::identity(&f, 2).kernel_basis().rows(), 0);
        assert_eq!(Mat::zeros(&f, 1, 2).kernel_basis(), Mat::identity(&f, 2));
        assert_eq!(m(&f, &[&[1, 1]]).kernel_basis(), m(&f, &[&[1, 1]]));
    }

    #[test]
    fn rank_normal_form_examples() {
        let f = gf(2);
        let i2 = Mat::identity(&f, 2);
        let n = i2.rank_normal_form();
        assert_eq!((n.p_left.clone(), n.q_right.clone(), n.rank), (i2.clone(), i2, 2));

        let z = Mat::zeros(&f, 2, 3);
        let n = z.rank_normal_form();
        assert_eq!(n.p_left, Mat::identity(&f, 2));
        assert_eq!(n.q_right, Mat::identity(&f, 3));
        assert_eq!(n.rank, 0);

        let a = m(&f, &[&[0, 1], &[0, 0]]);
        let n = a.rank_normal_form();
        let prod = n.p_left.mul(&a).unwrap().mul(&n.q_right).unwrap();
        assert_eq!(prod, m(&f, &[&[1, 0], &[0, 0]]));
        assert_eq!(n.rank, 1);
    }

    #[test]
    fn zero_sized_matrices() {
        let f = gf(3);
        let a = Mat::zeros(&f, 0, 4);
        let b = Mat::zeros(&f, 4, 0);
        assert_eq!(a.rank(), 0);
        assert_eq!(b.rank(), 0);
        assert_eq!(b.mul(&a).unwrap(), Mat::zeros(&f, 4, 4));
        assert_eq!(a.mul(&b).unwrap(), Mat::zeros(&f, 0, 0));
        assert_eq!(a.kernel_basis(), Mat::identity(&f, 4));
        assert_eq!(b.kernel_basis().shape(), (0, 0));
        assert_eq!(Mat::zeros(&f, 0, 0).inverse().unwrap().shape(), (0, 0));
        let n = b.rank_normal_form();
        assert_eq!(n.p_left, Mat::identity(&f, 4));
        assert_eq!(n.q_right.shape(), (0, 0));
    }

    #[test]
    fn echelon_basis_tracks_rank() {
        let f = gf(3);
        let mut b = EchelonBasis::new(&f, 3);
        assert!(b.insert(&[1, 2, 0]));
        assert!(!b.insert(&[2, 1, 0]));
        assert!(!b.insert(&[0, 0, 0]));
        assert!(b.insert(&[0, 1, 1]));
        assert!(!b.insert(&[1, 0, 1]));
        assert!(b.insert(&[0, 0, 1]));
        assert_eq!(b.rank(), 3);
    }

    fn random_mat(f: &Field, rows: usize, cols: usize, seed: &mut u64) -> Mat {
        let data = (0..rows * cols)
            .map(|_| {
                *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((*seed >> 33) % f.p() as u64) as Elem
            })
            .collect();
        Mat::from_vec(f, rows, cols, data).unwrap()
    }

    #[test]
    fn rref_contract_on_random_matrices() {
        let mut seed = 7u64;
        for p in [2u64, 3, 5, 7] {
            let f = gf(p);
            for rows in 0..5 {
                for cols in 0..5 {
                    for _ in 0..6 {
                        let a = random_mat(&f, rows, cols, &mut seed);
                        let r = a.rref_transform();
                        assert_eq!(r.transform.mul(&a).unwrap(), r.rref);
                        assert!(is_rref(&r.rref, r.rank), "{:?}", r.rref);
                        assert!(r.transform.inverse().is_ok());
                        // idempotent
                        assert_eq!(r.rref.rref_transform().rref, r.rref);

                        let k = a.kernel_basis();
                        assert_eq!(k.rows(), cols - r.rank);
                        assert_eq!(k.rank(), k.rows());
                        assert!(a.mul(&k.transpose()).unwrap().is_zero());

                        let n = a.rank_normal_form();
                        let prod = n.p_left.mul(&a).unwrap().mul(&n.q_right).unwrap();
                        for i in 0..rows {
                            for j in 0..cols {
                                let want = if i == j && i < n.rank { 1 } else { 0 };
                                assert_eq!(prod.get(i, j), want);
                            }
                        }
                        assert!(n.q_right.inverse().is_ok());

                        if rows == cols && r.rank == rows {
                            let inv = a.inverse().unwrap();
                            assert_eq!(a.mul(&inv).unwrap(), Mat::identity(&f, rows));
                        }
                    }
                }
            }
        }
    }
}
