//! Enumeration of partial factor assignments `(Y_1, …, Y_{D-1})`.
//!
//! Each column of every `Y_d` is nonzero with topmost nonzero entry 1, and the
//! column tuples `((Y_1)_{:,r}, …, (Y_{D-1})_{:,r})` are strictly increasing.
//! Tuples are ordered by comparing their concatenation entry-wise, which is
//! the mixed-radix order over the per-axis lists of normalized vectors.

use crate::gf::{Elem, Field};
use crate::linalg::{LexOdometer, Mat};

/// Nonzero length-`n` vectors whose first nonzero entry is 1, lexicographically.
pub fn normalized_vectors(field: &Field, n: usize) -> Vec<Vec<Elem>> {
    let mut odo = LexOdometer::new(field, n);
    let mut out = Vec::new();
    while let Some(v) = odo.step() {
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v.to_vec());
        }
    }
    out
}

/// The ordered set of normalized factor tuples for axes `1..D`.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    field: Field,
    per_axis: Vec<Vec<Vec<Elem>>>,
    len: usize,
}

impl TupleSpace {
    /// `dims` are the dims of axes `1..D` (axis 0 excluded).
    pub fn new(field: &Field, dims: &[usize]) -> Self {
        let per_axis: Vec<_> = dims.iter().map(|&n| normalized_vectors(field, n)).collect();
        let len = per_axis.iter().map(Vec::len).product();
        Self {
            field: field.clone(),
            per_axis,
            len,
        }
    }

    /// Number of tuples, `Π_d (p^{n_d} - 1) / (p - 1)`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The vectors of tuple `index`, axis 1 first.
    pub fn tuple(&self, mut index: usize) -> Vec<&[Elem]> {
        let mut out = vec![&[][..]; self.per_axis.len()];
        for (d, list) in self.per_axis.iter().enumerate().rev() {
            out[d] = &list[index % list.len()];
            index /= list.len();
        }
        out
    }

    /// The factor matrices `Y_d` (`n_d × k`) whose columns are the given tuples.
    pub fn factors(&self, tuples: &[usize]) -> Vec<Mat> {
        let k = tuples.len();
        let mut ys: Vec<Mat> = self
            .per_axis
            .iter()
            .map(|list| Mat::zeros(&self.field, list.first().map_or(0, Vec::len), k))
            .collect();
        for (r, &t) in tuples.iter().enumerate() {
            for (d, v) in self.tuple(t).into_iter().enumerate() {
                for (i, &x) in v.iter().enumerate() {
                    ys[d].set(i, r, x);
                }
            }
        }
        ys
    }
}

/// Lexicographic `k`-combinations of `0..n` for `k = 0, 1, …, k_max` in turn.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    k_max: usize,
    current: Vec<usize>,
    fresh: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k_max: usize) -> Self {
        Self {
            n,
            k_max,
            current: Vec::new(),
            fresh: true,
            done: false,
        }
    }

    /// Advances to the next combination.
    pub fn step(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
            return Some(&self.current);
        }
        let k = self.current.len();
        // rightmost position that can still move
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.current[i] < self.n - (k - i) {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return Some(&self.current);
            }
        }
        // next size
        let k = k + 1;
        if k > self.k_max || k > self.n {
            self.done = true;
            return None;
        }
        self.current = (0..k).collect();
        Some(&self.current)
    }
}

/// One partial assignment: `k` strictly increasing normalized tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YAssignment {
    /// Position in the full assignment stream.
    pub index: u64,
    /// Tuple indices into the [`TupleSpace`], strictly increasing.
    pub tuples: Vec<usize>,
    /// `Y_1, …, Y_{D-1}`, each `n_d × k`.
    pub factors: Vec<Mat>,
}

impl YAssignment {
    pub fn columns(&self) -> usize {
        self.tuples.len()
    }
}

/// Stream of all assignments with at most `R - n_0` columns.
#[derive(Clone, Debug)]
pub struct YAssignments {
    space: TupleSpace,
    combos: Combinations,
    index: u64,
}

impl Iterator for YAssignments {
    type Item = YAssignment;

    fn next(&mut self) -> Option<YAssignment> {
        let tuples = self.combos.step()?.to_vec();
        let factors = self.space.factors(&tuples);
        let index = self.index;
        self.index += 1;
        Some(YAssignment {
            index,
            tuples,
            factors,
        })
    }
}

/// Every assignment for a search of a tensor with `dims` at threshold `rank`.
///
/// Sizes ascend from 0 to `rank - dims[0]`; within a size, tuple
/// combinations ascend lexicographically.
pub fn enumerate_y_assignments(dims: &[usize], field: &Field, rank: usize) -> YAssignments {
    let space = TupleSpace::new(field, &dims[1..]);
    let k_max = rank.saturating_sub(dims[0]);
    let combos = if rank < dims[0] {
        let mut c = Combinations::new(0, 0);
        c.done = true;
        c
    } else {
        Combinations::new(space.len(), k_max)
    };
    YAssignments {
        space,
        combos,
        index: 0,
    }
}

/// `Σ_{k ≤ R - n_0} C(N, k)`, the length of [`enumerate_y_assignments`].
pub fn assignment_count(dims: &[usize], field: &Field, rank: usize) -> u128 {
    if rank < dims[0] {
        return 0;
    }
    let n = TupleSpace::new(field, &dims[1..]).len() as u128;
    let k_max = (rank - dims[0]) as u128;
    let mut total = 0u128;
    let mut binom = 1u128;
    for k in 0..=k_max.min(n) {
        if k > 0 {
            binom = binom * (n - k + 1) / k;
        }
        total += binom;
    }
    total
}
