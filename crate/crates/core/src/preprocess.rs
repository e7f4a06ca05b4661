//! Reduction of an arbitrary tensor to a concise one, and back.
//!
//! Row reducing every unfolding gives invertible `Q_d` with
//! `Q_d T_(d) = rref(T_(d))`. Contracting axis `d` by the first `r_d = rk T_(d)`
//! rows of `Q_d` yields a concise tensor of the same rank. Axes whose rank is
//! 1 are squeezed away and the remaining axes are sorted by nonincreasing
//! length, which is the shape the searches expect.

use crate::gf::Elem;
use crate::linalg::Mat;
use crate::tensor::{Cpd, Tensor};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ConciseReduction {
    /// Concise tensor with nonincreasing dims; `[0]` when the input is zero.
    pub reduced: Tensor,
    /// `Q_d` for every original axis.
    pub transforms: Vec<Mat>,
    /// `r_d` for every original axis.
    pub axis_ranks: Vec<usize>,
    /// Axis `j` of `reduced` is original axis `axis_permutation[j]`.
    pub axis_permutation: Vec<usize>,
    pub original_dims: Vec<usize>,
}

impl ConciseReduction {
    /// Whether the original tensor was zero.
    pub fn is_zero(&self) -> bool {
        self.axis_permutation.is_empty()
    }

    /// Original axes squeezed away because their axis rank is 1.
    pub fn squeezed_axes(&self) -> Vec<usize> {
        if self.is_zero() {
            return Vec::new();
        }
        (0..self.original_dims.len())
            .filter(|a| !self.axis_permutation.contains(a))
            .collect()
    }
}

pub fn concise_reduce(t: &Tensor) -> ConciseReduction {
    let f = t.field();
    let mut transforms = Vec::with_capacity(t.ndim());
    let mut axis_ranks = Vec::with_capacity(t.ndim());
    for d in 0..t.ndim() {
        let r = t.unfold(d).rref_transform();
        transforms.push(r.transform);
        axis_ranks.push(r.rank);
    }
    let original_dims = t.dims().to_vec();
    if axis_ranks.iter().any(|&r| r == 0) {
        return ConciseReduction {
            reduced: Tensor::zeros(f, &[0]),
            transforms,
            axis_ranks,
            axis_permutation: Vec::new(),
            original_dims,
        };
    }

    let mut shrunk = t.clone();
    for d in 0..t.ndim() {
        let rows = transforms[d].select_rows(0..axis_ranks[d]);
        shrunk = shrunk.contract(&rows, d).expect("matching axis length");
    }

    let mut kept: Vec<usize> = (0..t.ndim()).filter(|&d| axis_ranks[d] >= 2).collect();
    if kept.is_empty() {
        // A nonzero rank-1 tensor: keep one length-1 axis to hold the scalar.
        kept.push(0);
    }
    let squeezed: Vec<usize> = (0..t.ndim()).filter(|d| !kept.contains(d)).collect();
    let squeezed_tensor = shrunk.squeeze_axes(&squeezed);

    let mut order = kept.clone();
    order.sort_by(|&a, &b| axis_ranks[b].cmp(&axis_ranks[a]));
    // Positions of the sorted axes among the ascending kept list.
    let perm: Vec<usize> = order
        .iter()
        .map(|a| kept.iter().position(|k| k == a).expect("kept axis"))
        .collect();
    let reduced = squeezed_tensor.permute_axes(&perm);

    ConciseReduction {
        reduced,
        transforms,
        axis_ranks,
        axis_permutation: order,
        original_dims,
    }
}

/// Maps a CPD of `red.reduced` to a CPD of the original tensor with the same
/// number of summands.
pub fn lift_cpd(red: &ConciseReduction, c: &Cpd) -> Result<Cpd> {
    let f = red.reduced.field();
    if c.dims() != red.reduced.dims() || c.eval() != red.reduced {
        return Err(Error::NotACpd);
    }
    let r = c.rank();
    if red.is_zero() {
        let factors = red.original_dims.iter().map(|&n| Mat::zeros(f, n, r)).collect();
        return Cpd::new(factors);
    }
    let ones = Mat::from_vec(f, 1, r, vec![1; r]).expect("valid");
    let mut factors = Vec::with_capacity(red.original_dims.len());
    for d in 0..red.original_dims.len() {
        let inv = red.transforms[d].inverse().expect("row reduction transform is invertible");
        let rd = red.axis_ranks[d];
        let basis = inv.select_cols(0..rd);
        let local = match red.axis_permutation.iter().position(|&a| a == d) {
            Some(j) => &c.factors()[j],
            None => &ones,
        };
        factors.push(basis.mul(local)?);
    }
    Cpd::new(factors)
}

/// `max_d n_d` of the reduced tensor; every CPD needs at least this many summands.
pub fn rank_lower_bound(red: &ConciseReduction) -> usize {
    if red.is_zero() {
        0
    } else {
        red.reduced.dims().iter().copied().max().unwrap_or(0)
    }
}

/// The CPD with one summand per nonzero axis-0 fiber:
/// `T = Σ_{i_1..} T[:, i_1, ..] ⊗ e_{i_1} ⊗ …`.
pub fn trivial_cpd(t: &Tensor) -> Cpd {
    let f = t.field();
    let n0 = t.dims()[0];
    let rest = &t.dims()[1..];
    let fibers: usize = rest.iter().product();
    let mut cols: Vec<(Vec<Elem>, usize)> = Vec::new();
    for j in 0..fibers {
        let fiber: Vec<Elem> = (0..n0).map(|i| t.data()[i * fibers + j]).collect();
        if fiber.iter().any(|&x| x != 0) {
            cols.push((fiber, j));
        }
    }
    let r = cols.len();
    let mut factors = vec![Mat::zeros(f, n0, r)];
    factors.extend(rest.iter().map(|&n| Mat::zeros(f, n, r)));
    for (col, (fiber, j)) in cols.iter().enumerate() {
        for (i, &x) in fiber.iter().enumerate() {
            factors[0].set(i, col, x);
        }
        let mut rem = *j;
        for d in (0..rest.len()).rev() {
            factors[d + 1].set(rem % rest[d], col, 1);
            rem /= rest[d];
        }
    }
    Cpd::new(factors).expect("shared column count")
}

/// Minimal CPD of a matrix (2-axis tensor) from its rank factorization
/// `M = M[:, pivots] · rref(M)[:r]`.
pub fn matrix_cpd(t: &Tensor) -> Cpd {
    assert_eq!(t.ndim(), 2, "matrix_cpd needs a 2-axis tensor");
    let m = t.unfold(0);
    let (rref, pivots) = m.rref();
    let r = pivots.len();
    let mut left = Mat::zeros(t.field(), m.rows(), r);
    for (j, &c) in pivots.iter().enumerate() {
        for i in 0..m.rows() {
            left.set(i, j, m.get(i, c));
        }
    }
    let right = rref.select_rows(0..r).transpose();
    Cpd::new(vec![left, right]).expect("shared column count")
}

/// Minimal CPD of a vector (1-axis tensor): itself, or nothing if zero.
pub fn vector_cpd(t: &Tensor) -> Cpd {
    assert_eq!(t.ndim(), 1, "vector_cpd needs a 1-axis tensor");
    if t.is_zero() {
        Cpd::empty(t.field(), t.dims())
    } else {
        Cpd::new(vec![Mat::column_vector(t.field(), t.data())]).expect("one factor")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use crate::tensor::cpd_verify;

    fn gf2() -> Field {
        Field::gf2()
    }

    fn is_concise(t: &Tensor) -> bool {
        (0..t.ndim()).all(|d| t.unfold(d).rank() == t.dims()[d])
    }

    #[test]
    fn concise_sorted_input_is_unchanged() {
        let f = gf2();
        // Diagonal 2×2×2 tensor is concise with equal dims.
        let mut t = Tensor::zeros(&f, &[2, 2, 2]);
        t.set(&[0, 0, 0], 1);
        t.set(&[1, 1, 1], 1);
        let red = concise_reduce(&t);
        assert_eq!(red.reduced, t);
        assert_eq!(red.axis_permutation, vec![0, 1, 2]);
        for q in &red.transforms {
            assert_eq!(*q, Mat::identity(&f, 2));
        }
        let c = trivial_cpd(&t);
        assert_eq!(lift_cpd(&red, &c).unwrap(), c);
    }

    #[test]
    fn squeezes_rank_one_axis() {
        let f = gf2();
        // T_0 = I_2, T_1 = 0
        let t = Tensor::from_vec(&f, &[2, 2, 2], vec![1, 0, 0, 1, 0, 0, 0, 0]).unwrap();
        let red = concise_reduce(&t);
        assert_eq!(red.axis_ranks, vec![1, 2, 2]);
        assert_eq!(red.reduced.dims(), &[2, 2]);
        assert_eq!(red.squeezed_axes(), vec![0]);
        assert!(is_concise(&red.reduced));

        let c = matrix_cpd(&red.reduced);
        assert_eq!(c.rank(), 2);
        let lifted = lift_cpd(&red, &c).unwrap();
        assert_eq!(lifted.rank(), 2);
        assert!(cpd_verify(&t, &lifted).unwrap());
    }

    #[test]
    fn zero_tensor_reduces_to_empty() {
        let f = gf2();
        let t = Tensor::zeros(&f, &[3, 2, 2]);
        let red = concise_reduce(&t);
        assert!(red.is_zero());
        assert_eq!(rank_lower_bound(&red), 0);
        let c = Cpd::empty(&f, red.reduced.dims());
        let lifted = lift_cpd(&red, &c).unwrap();
        assert_eq!(lifted.rank(), 0);
        assert_eq!(lifted.dims(), vec![3, 2, 2]);
        assert!(cpd_verify(&t, &lifted).unwrap());
    }

    #[test]
    fn lift_rejects_non_cpd() {
        let f = gf2();
        let t = Tensor::from_vec(&f, &[2, 2, 2], vec![1, 0, 0, 1, 0, 0, 0, 0]).unwrap();
        let red = concise_reduce(&t);
        let bad = Cpd::new(vec![Mat::identity(&f, 2), Mat::zeros(&f, 2, 2)]).unwrap();
        assert!(matches!(lift_cpd(&red, &bad), Err(Error::NotACpd)));
    }

    #[test]
    fn lower_bound_examples() {
        let f = gf2();
        let mut t = Tensor::zeros(&f, &[3, 3, 2]);
        t.set(&[0, 0, 0], 1);
        t.set(&[1, 1, 1], 1);
        t.set(&[2, 2, 0], 1);
        let red = concise_reduce(&t);
        assert_eq!(red.reduced.dims(), &[3, 3, 2]);
        assert_eq!(rank_lower_bound(&red), 3);

        // sorted descending with a stable tie-break
        let p = t.permute_axes(&[2, 0, 1]);
        let red = concise_reduce(&p);
        assert_eq!(red.reduced.dims(), &[3, 3, 2]);
        assert_eq!(red.axis_permutation, vec![1, 2, 0]);
    }

    #[test]
    fn rank_one_tensor_keeps_scalar_axis() {
        let f = Field::new(3).unwrap();
        let t = Tensor::outer(&f, &[&[1, 2], &[2, 0, 1], &[1, 1]]);
        let red = concise_reduce(&t);
        assert_eq!(red.reduced.dims(), &[1]);
        assert_eq!(rank_lower_bound(&red), 1);
        let c = vector_cpd(&red.reduced);
        let lifted = lift_cpd(&red, &c).unwrap();
        assert_eq!(lifted.rank(), 1);
        assert!(cpd_verify(&t, &lifted).unwrap());
    }

    #[test]
    fn trivial_cpd_examples() {
        let f = gf2();
        assert_eq!(trivial_cpd(&Tensor::zeros(&f, &[2, 2, 2])).rank(), 0);
        let i2 = Tensor::from_vec(&f, &[2, 2], vec![1, 0, 0, 1]).unwrap();
        let c = trivial_cpd(&i2);
        assert_eq!(c.rank(), 2);
        assert!(cpd_verify(&i2, &c).unwrap());
        let v = Tensor::from_vec(&f, &[3], vec![1, 0, 1]).unwrap();
        assert!(cpd_verify(&v, &trivial_cpd(&v)).unwrap());
    }

    #[test]
    fn round_trip_on_all_small_tensors() {
        let f = gf2();
        for bits in 0u32..256 {
            let data = (0..8).map(|i| (bits >> i) & 1).collect();
            let t = Tensor::from_vec(&f, &[2, 2, 2], data).unwrap();
            let red = concise_reduce(&t);
            if !red.is_zero() {
                assert!(is_concise(&red.reduced));
                assert!(red.reduced.dims().windows(2).all(|w| w[0] >= w[1]));
            }
            let c = match red.reduced.ndim() {
                1 => vector_cpd(&red.reduced),
                2 => matrix_cpd(&red.reduced),
                _ => trivial_cpd(&red.reduced),
            };
            let lifted = lift_cpd(&red, &c).unwrap();
            assert!(cpd_verify(&t, &lifted).unwrap(), "bits {bits:08b}");
        }
    }
}
