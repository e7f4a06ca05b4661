//! Good pairs `(v, c)` for a fixed partial assignment, and the TEST step.
//!
//! A pair is good when `v ×_0 T - ⟦c, Y_1, …, Y_{D-1}⟧` has rank at most one.

use crate::gf::{Elem, Field};
use crate::linalg::{EchelonBasis, LexOdometer, Mat};
use crate::tensor::{is_rank_at_most_one, rank1_decompose, Cpd, Tensor};

/// How good pairs are generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Branch {
    /// Direct when `n_0 + k ≤ Σ_{d≥2} n_d`, otherwise kernel.
    #[default]
    Auto,
    /// Enumerate every `(v, c)` and test the residual.
    Direct,
    /// Enumerate `(u_2, …, u_{D-1})` and solve for `(v, c, u_1)` linearly.
    Kernel,
}

impl Branch {
    /// The concrete branch used for `n_0 + k` variables against tail length `tail`.
    pub fn resolve(self, n0_plus_k: usize, tail: usize) -> Branch {
        match self {
            Branch::Auto if n0_plus_k <= tail => Branch::Direct,
            Branch::Auto => Branch::Kernel,
            b => b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodPair {
    pub v: Vec<Elem>,
    pub c: Vec<Elem>,
}

/// Shared flattened data of a tensor and an assignment.
struct Frame {
    field: Field,
    n0: usize,
    k: usize,
    rest: Vec<usize>,
    slices: Vec<Vec<Elem>>,
    rank_ones: Vec<Vec<Elem>>,
}

impl Frame {
    fn new(t: &Tensor, y: &[Mat]) -> Self {
        let f = t.field().clone();
        let n0 = t.dims()[0];
        let rest = t.dims()[1..].to_vec();
        let m = t.slice_len();
        let slices = (0..n0)
            .map(|i| t.data()[i * m..(i + 1) * m].to_vec())
            .collect();
        let k = y.first().map_or(0, Mat::cols);
        let rank_ones = (0..k)
            .map(|r| {
                let cols: Vec<Vec<Elem>> = y.iter().map(|yd| yd.column(r)).collect();
                let refs: Vec<&[Elem]> = cols.iter().map(Vec::as_slice).collect();
                Tensor::outer(&f, &refs).data().to_vec()
            })
            .collect();
        Self {
            field: f,
            n0,
            k,
            rest,
            slices,
            rank_ones,
        }
    }

    /// `v ×_0 T - Σ_r c_r ⊗_d (Y_d)_{:,r}` as a tensor over axes `1..D`.
    fn residual(&self, v: &[Elem], c: &[Elem]) -> Tensor {
        let f = &self.field;
        let mut out = vec![0; self.slices.first().map_or(0, Vec::len)];
        for (&vi, s) in v.iter().zip(&self.slices) {
            if vi != 0 {
                for (o, &x) in out.iter_mut().zip(s) {
                    *o = f.mul_add(*o, vi, x);
                }
            }
        }
        for (&cr, w) in c.iter().zip(&self.rank_ones) {
            if cr != 0 {
                let neg = f.neg(cr);
                for (o, &x) in out.iter_mut().zip(w) {
                    *o = f.mul_add(*o, neg, x);
                }
            }
        }
        Tensor::from_vec(f, &self.rest, out).expect("residual shape")
    }
}

enum Mode {
    Direct {
        odo: LexOdometer,
    },
    Kernel {
        odo: LexOdometer,
        rows: Mat,
        next_row: usize,
    },
}

/// Iterator over the good pairs of `(T, Y)`.
///
/// The direct branch yields every good pair in lexicographic order of `[v|c]`.
/// The kernel branch yields, for each `(u_2, …, u_{D-1})` in lexicographic
/// order of their concatenation, the reduced row echelon kernel basis of the
/// linear system in `(v, c, u_1)`; these pairs span the same subspace.
pub struct GoodPairs {
    frame: Frame,
    mode: Mode,
}

/// Good pairs for concise `t` (`D ≥ 2`) and assignment `y = (Y_1, …, Y_{D-1})`.
pub fn good_pairs(t: &Tensor, y: &[Mat], branch: Branch) -> GoodPairs {
    assert!(t.ndim() >= 2, "good pairs need at least two axes");
    assert_eq!(y.len(), t.ndim() - 1, "one Y factor per axis after the first");
    let frame = Frame::new(t, y);
    let tail: usize = frame.rest[1..].iter().sum();
    let mode = match branch.resolve(frame.n0 + frame.k, tail) {
        Branch::Kernel => Mode::Kernel {
            odo: LexOdometer::new(&frame.field, tail),
            rows: Mat::zeros(&frame.field, 0, 0),
            next_row: 0,
        },
        _ => Mode::Direct {
            odo: LexOdometer::new(&frame.field, frame.n0 + frame.k),
        },
    };
    GoodPairs { frame, mode }
}

impl GoodPairs {
    /// Builds the system `[vec T_i | -vec W_r | -vec(e_j ⊗ u_2 ⊗ …)]` for `u`.
    fn kernel_rows(frame: &Frame, u: &[Elem]) -> Mat {
        let f = &frame.field;
        let n1 = frame.rest[0];
        let mut tail_parts = Vec::new();
        let mut at = 0;
        for &n in &frame.rest[1..] {
            tail_parts.push(&u[at..at + n]);
            at += n;
        }
        let tail_vec: Vec<Elem> = if tail_parts.is_empty() {
            vec![1]
        } else {
            Tensor::outer(f, &tail_parts).data().to_vec()
        };
        let m = frame.slices.first().map_or(0, Vec::len);
        let vars = frame.n0 + frame.k + n1;
        let mut e = Mat::zeros(f, m, vars);
        for (i, s) in frame.slices.iter().enumerate() {
            for (row, &x) in s.iter().enumerate() {
                e.set(row, i, x);
            }
        }
        for (r, w) in frame.rank_ones.iter().enumerate() {
            for (row, &x) in w.iter().enumerate() {
                e.set(row, frame.n0 + r, f.neg(x));
            }
        }
        let tl = tail_vec.len();
        for j in 0..n1 {
            for (q, &x) in tail_vec.iter().enumerate() {
                e.set(j * tl + q, frame.n0 + frame.k + j, f.neg(x));
            }
        }
        e.kernel_basis()
    }
}

impl Iterator for GoodPairs {
    type Item = GoodPair;

    fn next(&mut self) -> Option<GoodPair> {
        let frame = &self.frame;
        match &mut self.mode {
            Mode::Direct { odo } => loop {
                let x = odo.step()?;
                let (v, c) = x.split_at(frame.n0);
                if is_rank_at_most_one(&frame.residual(v, c)) {
                    return Some(GoodPair {
                        v: v.to_vec(),
                        c: c.to_vec(),
                    });
                }
            },
            Mode::Kernel {
                odo,
                rows,
                next_row,
            } => loop {
                if *next_row < rows.rows() {
                    let row = rows.row(*next_row);
                    *next_row += 1;
                    return Some(GoodPair {
                        v: row[..frame.n0].to_vec(),
                        c: row[frame.n0..frame.n0 + frame.k].to_vec(),
                    });
                }
                let u = odo.step()?;
                *rows = Self::kernel_rows(frame, u);
                *next_row = 0;
            },
        }
    }
}

/// Outcome of testing one assignment.
#[derive(Clone, Debug)]
pub struct TestResult {
    pub cpd: Option<Cpd>,
    /// Good pairs consumed before the test concluded.
    pub pairs: u64,
}

/// CPD `(Q^{-1}[I | C], [X_1 | Y_1], …)` from rows `Q` and `C` whose residuals
/// all have rank at most one.
pub(crate) fn reconstruct(t: &Tensor, y: &[Mat], q: &Mat, c: &Mat) -> Cpd {
    let f = t.field();
    let frame = Frame::new(t, y);
    let n0 = frame.n0;
    let mut x: Vec<Mat> = frame.rest.iter().map(|&n| Mat::zeros(f, n, n0)).collect();
    for i in 0..n0 {
        let res = frame.residual(q.row(i), c.row(i));
        let us = rank1_decompose(&res).expect("good pair residual has rank at most one");
        for (xd, u) in x.iter_mut().zip(&us) {
            for (j, &val) in u.iter().enumerate() {
                xd.set(j, i, val);
            }
        }
    }
    let a0 = q
        .inverse()
        .expect("independent rows")
        .mul(&Mat::identity(f, n0).hstack(c).expect("rows agree"))
        .expect("shapes agree");
    let mut factors = vec![a0];
    for (xd, yd) in x.iter().zip(y) {
        factors.push(xd.hstack(yd).expect("rows agree"));
    }
    let cpd = Cpd::new(factors).expect("consistent CPD");
    debug_assert!(cpd.verify(t).unwrap_or(false));
    cpd
}

/// Greedily collects good pairs with independent `v` until `n_0` are found.
pub fn test_assignment(t: &Tensor, y: &[Mat], branch: Branch) -> TestResult {
    let f = t.field();
    let n0 = t.dims()[0];
    let k = y.first().map_or(0, Mat::cols);
    let mut basis = EchelonBasis::new(f, n0);
    let mut q = Mat::zeros(f, 0, n0);
    let mut c = Mat::zeros(f, 0, k);
    let mut pairs = 0;
    for pair in good_pairs(t, y, branch) {
        pairs += 1;
        if basis.insert(&pair.v) {
            q.push_row(&pair.v);
            c.push_row(&pair.c);
            if basis.rank() == n0 {
                return TestResult {
                    cpd: Some(reconstruct(t, y, &q, &c)),
                    pairs,
                };
            }
        }
    }
    TestResult { cpd: None, pairs }
}
