//! CPD search specialised to three axes.
//!
//! A rank-`R` CPD has a row `v` of its axis-0 change of basis whose slice
//! `v ×_0 T` has rank at least `⌊R/n_0⌋ + 1` (unless the shortcut applies),
//! and whose coefficient row can be normalised to `0…0 1…1`. The slice then
//! factors as `W_1 W_2`, which pins down most of `(Y_1, Y_2)`; each candidate
//! pair goes to the same TEST as the general search.

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::linalg::{enumerate_factorizations, EchelonBasis, Factorizations, LexOdometer, Mat};
use crate::search_general::{
    check_concise, run_workers, Progress, SearchConfig, SearchOutcome, SearchStats, Tester,
};
use crate::tensor::{Cpd, Tensor};

/// `v ×_0 T` of a three-axis tensor as an `n_1 × n_2` matrix.
pub fn slice_matrix(t: &Tensor, v: &[Elem]) -> Mat {
    let s = t.axis0_combination(v);
    let d = t.dims();
    Mat::from_vec(t.field(), d[1], d[2], s.data().to_vec()).expect("slice shape")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RStarResult {
    /// Smallest `r` such that `{v : rank(v ×_0 T) ≤ r}` spans `F^{n_0}`.
    pub r_star: usize,
    /// `n_0 × n_0`; independent rows, each of slice rank at most `r_star`.
    pub witness_vectors: Mat,
    /// Slice rank of each witness row.
    pub witness_ranks: Vec<usize>,
}

fn check_three_axes(t: &Tensor) -> Result<()> {
    if t.ndim() != 3 {
        return Err(Error::Input(format!(
            "three-axis search got {} axes",
            t.ndim()
        )));
    }
    check_concise(t)
}

/// Exact `r★` by one pass over `F^{n_0}`, with witnesses chosen greedily:
/// lower slice rank first, then lexicographic order.
pub fn compute_rstar(t: &Tensor) -> Result<RStarResult> {
    check_three_axes(t)?;
    let f = t.field();
    let n0 = t.dims()[0];
    let max_rank = t.dims()[1].min(t.dims()[2]);
    let mut buckets: Vec<Vec<Vec<Elem>>> = vec![Vec::new(); max_rank + 1];
    let mut odo = LexOdometer::new(f, n0);
    while let Some(v) = odo.step() {
        buckets[slice_matrix(t, v).rank()].push(v.to_vec());
    }
    let mut basis = EchelonBasis::new(f, n0);
    let mut witness_vectors = Mat::zeros(f, 0, n0);
    let mut witness_ranks = Vec::new();
    for (r, bucket) in buckets.iter().enumerate() {
        for v in bucket {
            if basis.insert(v) {
                witness_vectors.push_row(v);
                witness_ranks.push(r);
            }
        }
        if basis.rank() == n0 {
            return Ok(RStarResult {
                r_star: r,
                witness_vectors,
                witness_ranks,
            });
        }
    }
    unreachable!("a concise tensor's slices span")
}

/// Rank-`Σ rank(V_i ×_0 T)` CPD from the witnesses `V`: factor each slice of
/// `V ×_0 T` through its reduced row echelon form, then undo `V` on axis 0.
pub fn shortcut_construct(t: &Tensor, rs: &RStarResult) -> Result<Cpd> {
    check_three_axes(t)?;
    let f = t.field();
    let n0 = t.dims()[0];
    let v = &rs.witness_vectors;
    let mut a0 = Mat::zeros(f, n0, 0);
    let mut a1 = Mat::zeros(f, t.dims()[1], 0);
    let mut a2 = Mat::zeros(f, t.dims()[2], 0);
    for i in 0..n0 {
        let s = slice_matrix(t, v.row(i));
        let (rref, pivots) = s.rref();
        let mut e = Mat::zeros(f, n0, pivots.len());
        let mut b = Mat::zeros(f, s.rows(), pivots.len());
        for (j, &pc) in pivots.iter().enumerate() {
            e.set(i, j, 1);
            for row in 0..s.rows() {
                b.set(row, j, s.get(row, pc));
            }
        }
        a0 = a0.hstack(&e)?;
        a1 = a1.hstack(&b)?;
        a2 = a2.hstack(&rref.select_rows(0..pivots.len()).transpose())?;
    }
    let cpd = Cpd::new(vec![v.inverse()?.mul(&a0)?, a1, a2])?;
    debug_assert!(cpd.verify(t).unwrap_or(false));
    Ok(cpd)
}

/// One candidate `(Y_1, Y_2)` together with the slice decomposition it came from:
/// `v ×_0 T = Σ_{r ≥ z} (Y_1)_{:,r} (Y_2)_{:,r}^T + a b^T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Y12 {
    pub y1: Mat,
    pub y2: Mat,
    /// Number of leading zero coefficients; columns `z..` carry coefficient 1.
    pub z: usize,
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
}

/// Stream of [`Y12`] candidates for one `v`; see [`enumerate_y12`].
pub struct Y12Stream {
    field: Field,
    slice: Mat,
    k: usize,
    z: usize,
    z_max: Option<usize>,
    factors: Option<Factorizations>,
    current: Option<(Mat, Mat)>,
    free: LexOdometer,
}

impl Y12Stream {
    fn open_z(&mut self) -> bool {
        let Some(z_max) = self.z_max else {
            return false;
        };
        if self.z > z_max {
            return false;
        }
        let inner = self.k - self.z;
        self.factors =
            Some(enumerate_factorizations(&self.slice, inner).expect("inner dim at least rank"));
        self.current = None;
        true
    }
}

impl Iterator for Y12Stream {
    type Item = Y12;

    fn next(&mut self) -> Option<Y12> {
        let (n1, n2) = self.slice.shape();
        loop {
            if let Some((w1, w2)) = &self.current {
                if let Some(l) = self.free.step() {
                    let z = self.z;
                    let keep = self.k - z - 1;
                    let l1 = Mat::from_vec(&self.field, n1, z, l[..n1 * z].to_vec())
                        .expect("entries in field");
                    let l2 = Mat::from_vec(&self.field, z, n2, l[n1 * z..].to_vec())
                        .expect("entries in field");
                    let y1 = l1.hstack(&w1.select_cols(0..keep)).expect("rows agree");
                    let y2 = l2
                        .transpose()
                        .hstack(&w2.select_rows(0..keep).transpose())
                        .expect("rows agree");
                    return Some(Y12 {
                        y1,
                        y2,
                        z,
                        a: w1.column(keep),
                        b: w2.row(keep).to_vec(),
                    });
                }
                self.current = None;
            }
            match self.factors.as_mut().and_then(Iterator::next) {
                Some(pair) => {
                    self.current = Some(pair);
                    self.free = LexOdometer::new(&self.field, self.z * (n1 + n2));
                }
                None => {
                    if self.factors.is_some() {
                        self.z += 1;
                    }
                    if !self.open_z() {
                        self.factors = None;
                        self.z_max = None;
                        return None;
                    }
                }
            }
        }
    }
}

/// All candidate `(Y_1, Y_2)` with `R - n_0` columns for the slice of `v`.
///
/// With `K = R - n_0 + 1` and `r = rank(v ×_0 T)`, for `z = 0, …, K - max(r, 1)`
/// every factorization `W_1 W_2` of the slice with inner dimension `K - z` gives
/// `Y_1 = [L_1 | (W_1)_{:, :K-z-1}]`, `Y_2 = [L_2^T | ((W_2)_{:K-z-1, :})^T]` for
/// all `L_1 ∈ F^{n_1 × z}`, `L_2 ∈ F^{z × n_2}`. Empty when `R < n_0` or `r > K`.
pub fn enumerate_y12(t: &Tensor, v: &[Elem], rank: usize) -> Result<Y12Stream> {
    if t.ndim() != 3 {
        return Err(Error::Input("enumerate_y12 needs three axes".into()));
    }
    let n0 = t.dims()[0];
    let slice = slice_matrix(t, v);
    let r = slice.rank();
    let (k, z_max) = if rank < n0 {
        (0, None)
    } else {
        let k = rank - n0 + 1;
        (k, k.checked_sub(r.max(1)))
    };
    let mut stream = Y12Stream {
        field: t.field().clone(),
        slice,
        k,
        z: 0,
        z_max,
        factors: None,
        current: None,
        free: LexOdometer::new(t.field(), 0),
    };
    stream.open_z();
    Ok(stream)
}

/// Decides whether concise three-axis `t` has a CPD of rank at most `rank`.
///
/// The outer loop over nonzero `v` (lexicographic) is split across shards and
/// threads by the position of `v`; `witness_index` reports that position, 0 when
/// the shortcut applies.
pub fn search_3d(t: &Tensor, rank: usize, config: &SearchConfig) -> Result<SearchOutcome> {
    check_three_axes(t)?;
    let progress = Progress::new(config.progress);
    let n0 = t.dims()[0];
    let done = |cpd: Option<Cpd>, index: Option<u64>, states, pairs, shortcut| SearchOutcome {
        cpd,
        witness_index: index,
        via_shortcut: shortcut,
        stats: SearchStats {
            states_tested: states,
            good_pairs: pairs,
            elapsed: progress.started.elapsed(),
        },
    };
    if rank < n0 {
        return Ok(done(None, None, 0, 0, false));
    }
    let rs = compute_rstar(t)?;
    if rank >= n0 * rs.r_star {
        return Ok(done(Some(shortcut_construct(t, &rs)?), Some(0), 0, 0, true));
    }
    let rho = (rank / n0 + 1).max(rs.r_star);
    let tester = Tester::new(t, rank - n0, config);
    let threads = config.threads.max(1) as u64;
    let shard = config.shard;
    let f = t.field();

    let (states, pairs, best) = run_workers(threads as usize, |worker| {
        let mut odo = LexOdometer::new(f, n0);
        odo.step(); // v = 0
        let mut position = 0u64;
        let mut states = 0u64;
        let mut pairs = 0u64;
        let mut found = None;
        'outer: while let Some(v) = odo.step() {
            let here = position;
            position += 1;
            if !shard.owns(here) || (here / shard.count) % threads != worker as u64 {
                continue;
            }
            if !config.count_states && here > progress.best() {
                break;
            }
            if slice_matrix(t, v).rank() < rho {
                continue;
            }
            for cand in enumerate_y12(t, v, rank).expect("three axes") {
                let result = tester.test(&[cand.y1, cand.y2]);
                states += 1;
                pairs += result.pairs;
                progress.tick();
                if let Some(cpd) = result.cpd {
                    if found.is_none() {
                        found = Some((here, cpd));
                        progress.offer(here);
                    }
                    if !config.count_states {
                        break 'outer;
                    }
                }
            }
        }
        (states, pairs, found)
    });
    Ok(done(
        best.as_ref().map(|(_, c)| c.clone()),
        best.map(|(i, _)| i),
        states,
        pairs,
        false,
    ))
}
