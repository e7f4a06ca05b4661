//! Streaming enumerations of matrices and matrix factorizations.
//!
//! All streams are lexicographic in row-major data under the field's
//! `0..p` element order, hold only polynomial state, and yield each item once.

use super::Mat;
use crate::gf::{Elem, Field};
use crate::{Error, Result};

/// Counts through `F^len` in lexicographic order, last digit fastest.
///
/// A zero-length odometer yields the empty vector exactly once.
#[derive(Clone, Debug)]
pub struct LexOdometer {
    p: Elem,
    digits: Vec<Elem>,
    started: bool,
    done: bool,
}

impl LexOdometer {
    pub fn new(field: &Field, len: usize) -> Self {
        Self {
            p: field.p(),
            digits: vec![0; len],
            started: false,
            done: false,
        }
    }

    /// Advances to the next vector; `None` once exhausted.
    pub fn step(&mut self) -> Option<&[Elem]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.digits);
        }
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.p {
                return Some(&self.digits);
            }
            *d = 0;
        }
        self.done = true;
        None
    }
}

/// Stream of `r × k` matrices of rank exactly `r`.
#[derive(Clone, Debug)]
pub struct FullRank {
    field: Field,
    r: usize,
    k: usize,
    odo: LexOdometer,
}

impl Iterator for FullRank {
    type Item = Mat;

    fn next(&mut self) -> Option<Mat> {
        if self.r > self.k {
            return None;
        }
        while let Some(d) = self.odo.step() {
            let m = Mat::from_vec(&self.field, self.r, self.k, d.to_vec()).expect("in range");
            if m.rank() == self.r {
                return Some(m);
            }
        }
        None
    }
}

/// Every `r × k` matrix of full row rank, lexicographically.
pub fn enumerate_full_rank(field: &Field, r: usize, k: usize) -> FullRank {
    FullRank {
        field: field.clone(),
        r,
        k,
        odo: LexOdometer::new(field, r * k),
    }
}

/// Stream of all `V` with `u * V == m`.
#[derive(Clone, Debug)]
pub struct SolveRight {
    q: Mat,
    fixed: Mat,
    free_rows: usize,
    odo: Option<LexOdometer>,
}

impl Iterator for SolveRight {
    type Item = Mat;

    fn next(&mut self) -> Option<Mat> {
        let odo = self.odo.as_mut()?;
        let free = odo.step()?;
        let f = self.fixed.field();
        let n = self.fixed.cols();
        let block = Mat::from_vec(f, self.free_rows, n, free.to_vec()).expect("in range");
        let v_prime = self.fixed.vstack(&block).expect("same width");
        Some(self.q.mul(&v_prime).expect("k×k by k×n"))
    }
}

impl SolveRight {
    /// Whether the system has any solution at all.
    pub fn is_solvable(&self) -> bool {
        self.odo.is_some()
    }

    /// Dimension of the free block; the stream has `p^(free_rows * n)` items when solvable.
    pub fn free_rows(&self) -> usize {
        self.free_rows
    }
}

/// Streams every `V` (`k × n`) with `u * V == m`, each exactly once, ordered
/// lexicographically by the free block of the solution.
///
/// With `P u Q = [[I_s, 0], [0, 0]]` the solutions are `V = Q [ (P m)_{:s} ; L ]`
/// for arbitrary `L` in `F^{(k-s) × n}`, provided the bottom rows of `P m`
/// vanish; otherwise the stream is empty.
pub fn solve_right_factors(u: &Mat, m: &Mat) -> Result<SolveRight> {
    u.field().ensure_same(m.field())?;
    if u.rows() != m.rows() {
        return Err(Error::Shape(format!(
            "u has {} rows but m has {}",
            u.rows(),
            m.rows()
        )));
    }
    let f = u.field();
    let k = u.cols();
    let n = m.cols();
    let nf = u.rank_normal_form();
    let s = nf.rank;
    let m_prime = nf.p_left.mul(m)?;
    let solvable = m_prime.select_rows(s..m_prime.rows()).is_zero();
    Ok(SolveRight {
        q: nf.q_right,
        fixed: m_prime.select_rows(0..s),
        free_rows: k - s,
        odo: solvable.then(|| LexOdometer::new(f, (k - s) * n)),
    })
}

/// Stream of all pairs `(U, V)` with `U * V == m` and inner dimension `k`.
///
/// With `P m Q = [[I_r, 0], [0, 0]]`, write `P U = [U0 ; U1]` and `V Q = V'`.
/// The stream walks full-rank `U0` (r × k), then every `V'` with
/// `U0 V' = [I_r | 0]`, then every `U1` with `U1 V' = 0`, and maps each triple
/// back through `P^-1` and `Q^-1`.
#[derive(Clone, Debug)]
pub struct Factorizations {
    p_inv: Mat,
    q_inv: Mat,
    target: Mat,
    zero_t: Mat,
    u0_stream: FullRank,
    u0: Option<Mat>,
    v_stream: Option<SolveRight>,
    v_prime: Option<Mat>,
    u1_stream: Option<SolveRight>,
}

impl Iterator for Factorizations {
    type Item = (Mat, Mat);

    fn next(&mut self) -> Option<(Mat, Mat)> {
        loop {
            if let Some(u1_stream) = self.u1_stream.as_mut() {
                if let Some(u1_t) = u1_stream.next() {
                    let u0 = self.u0.as_ref().expect("set with u1 stream");
                    let v_prime = self.v_prime.as_ref().expect("set with u1 stream");
                    let u_prime = u0.vstack(&u1_t.transpose()).expect("width k");
                    let u = self.p_inv.mul(&u_prime).expect("m×m by m×k");
                    let v = v_prime.mul(&self.q_inv).expect("k×n by n×n");
                    return Some((u, v));
                }
                self.u1_stream = None;
            }
            if let Some(v_stream) = self.v_stream.as_mut() {
                if let Some(v_prime) = v_stream.next() {
                    self.u1_stream = Some(
                        solve_right_factors(&v_prime.transpose(), &self.zero_t)
                            .expect("n rows on both sides"),
                    );
                    self.v_prime = Some(v_prime);
                    continue;
                }
                self.v_stream = None;
            }
            let u0 = self.u0_stream.next()?;
            self.v_stream =
                Some(solve_right_factors(&u0, &self.target).expect("r rows on both sides"));
            self.u0 = Some(u0);
        }
    }
}

/// Streams every factorization `m = U V` with `U: rows × k`, `V: k × cols`.
pub fn enumerate_factorizations(m: &Mat, k: usize) -> Result<Factorizations> {
    let f = m.field();
    let (rows, cols) = m.shape();
    let nf = m.rank_normal_form();
    let r = nf.rank;
    if k < r {
        return Err(Error::InfeasibleInnerDim { k, rank: r });
    }
    let mut target = Mat::zeros(f, r, cols);
    for i in 0..r {
        target.set(i, i, 1);
    }
    Ok(Factorizations {
        p_inv: nf.p_left.inverse()?,
        q_inv: nf.q_right.inverse()?,
        target,
        zero_t: Mat::zeros(f, cols, rows - r),
        u0_stream: enumerate_full_rank(f, r, k),
        u0: None,
        v_stream: None,
        v_prime: None,
        u1_stream: None,
    })
}
