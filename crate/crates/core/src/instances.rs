//! Benchmark tensors, published decompositions and seeded randomness.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), a counter-based stream
//! cipher generator seeded from a `u64`. Results are reproducible across
//! runs of this crate; no equality with other implementations is promised.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf::Field;
use crate::linalg::Mat;
use crate::tensor::{Cpd, Tensor};

/// The matrix multiplication tensor `<m, k, n>` of dims `(mk, kn, nm)`.
///
/// Entry `(i·k + j, j·n + l, l·m + i)` is 1 for every `i < m`, `j < k`,
/// `l < n`, and all other entries are 0.
pub fn mmt(m: usize, k: usize, n: usize, field: &Field) -> Tensor {
    assert!(m >= 1 && k >= 1 && n >= 1, "mmt dims must be positive");
    let mut t = Tensor::zeros(field, &[m * k, k * n, n * m]);
    for i in 0..m {
        for j in 0..k {
            for l in 0..n {
                t.set(&[i * k + j, j * n + l, l * m + i], 1);
            }
        }
    }
    t
}

/// A 4×4×4 tensor of rank 8 over GF(2) (and rank ≤ 7 in odd characteristic).
///
/// Axis-0 slices: `E_00`, `E_01 + E_10`, `E_02 + E_20`, and the full
/// anti-diagonal `E_03 + E_12 + E_21 + E_30`.
pub fn lysikov(field: &Field) -> Tensor {
    const ONES: [[usize; 3]; 9] = [
        [0, 0, 0],
        [1, 0, 1],
        [1, 1, 0],
        [2, 0, 2],
        [2, 2, 0],
        [3, 0, 3],
        [3, 1, 2],
        [3, 2, 1],
        [3, 3, 0],
    ];
    let mut t = Tensor::zeros(field, &[4, 4, 4]);
    for idx in ONES {
        t.set(&idx, 1);
    }
    t
}

/// `3 log_{mkn} R`, the exponent of the recursive matrix multiplication
/// algorithm built from a rank-`R` CPD of `<m, k, n>`.
pub fn runtime_exponent(m: usize, k: usize, n: usize, rank: usize) -> f64 {
    let mkn = (m * k * n) as f64;
    assert!(mkn >= 2.0 && rank >= 1, "exponent needs mkn >= 2 and R >= 1");
    3.0 * (rank as f64).ln() / mkn.ln()
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform invertible `n × n` matrix by rejection sampling.
pub fn random_gl_with<R: Rng>(n: usize, field: &Field, rng: &mut R) -> Mat {
    loop {
        let data = (0..n * n).map(|_| rng.random_range(0..field.p())).collect();
        let m = Mat::from_vec(field, n, n, data).expect("entries in range");
        if m.rank() == n {
            return m;
        }
    }
}

pub fn random_gl(n: usize, field: &Field, seed: u64) -> Mat {
    random_gl_with(n, field, &mut rng_from_seed(seed))
}

/// Uniformly random tensor with the given dims.
pub fn random_tensor(field: &Field, dims: &[usize], seed: u64) -> Tensor {
    let mut rng = rng_from_seed(seed);
    let len: usize = dims.iter().product();
    let data = (0..len).map(|_| rng.random_range(0..field.p())).collect();
    Tensor::from_vec(field, dims, data).expect("entries in range")
}

/// `Q_0 ×_0 (… (Q_{D-1} ×_{D-1} T))` for independent uniform `Q_d`.
/// Returns the scrambled tensor and the `Q_d` in axis order.
pub fn scramble(t: &Tensor, seed: u64) -> (Tensor, Vec<Mat>) {
    let mut rng = rng_from_seed(seed);
    let transforms: Vec<Mat> = t
        .dims()
        .iter()
        .map(|&n| random_gl_with(n, t.field(), &mut rng))
        .collect();
    let mut out = t.clone();
    for (d, q) in transforms.iter().enumerate().rev() {
        out = out.contract(q, d).expect("square transform");
    }
    (out, transforms)
}

fn gf2_mat(rows: &[&[i64]]) -> Mat {
    Mat::from_rows(&Field::gf2(), rows).expect("rectangular")
}

/// Rank-7 CPD of `<2,2,2>` over GF(2).
pub fn mmt222_rank7_cpd() -> Cpd {
    let a0 = gf2_mat(&[
        &[0, 0, 1, 0, 0, 1, 0],
        &[1, 0, 1, 1, 1, 0, 0],
        &[0, 1, 0, 1, 0, 1, 1],
        &[0, 1, 0, 0, 1, 0, 0],
    ]);
    let a1 = gf2_mat(&[
        &[1, 0, 1, 1, 0, 0, 1],
        &[1, 0, 1, 1, 0, 1, 0],
        &[1, 1, 0, 1, 0, 0, 1],
        &[1, 0, 0, 0, 1, 0, 0],
    ]);
    let a2 = gf2_mat(&[
        &[0, 0, 1, 1, 0, 1, 1],
        &[0, 1, 0, 0, 0, 0, 1],
        &[1, 0, 0, 1, 0, 1, 1],
        &[1, 0, 0, 1, 1, 0, 1],
    ]);
    Cpd::new(vec![a0, a1, a2]).expect("shared rank")
}

/// Rank-8 CPD of [`lysikov`] over GF(2); its second and third factors coincide.
pub fn lysikov_rank8_cpd() -> Cpd {
    let a0 = gf2_mat(&[
        &[1, 0, 0, 0, 0, 0, 0, 0],
        &[1, 0, 0, 1, 0, 0, 1, 0],
        &[1, 0, 1, 0, 0, 1, 0, 0],
        &[1, 1, 0, 0, 1, 1, 1, 1],
    ]);
    let a1 = gf2_mat(&[
        &[1, 1, 1, 1, 0, 0, 0, 0],
        &[0, 0, 0, 1, 0, 0, 1, 1],
        &[0, 0, 1, 0, 0, 1, 0, 1],
        &[0, 1, 0, 0, 1, 0, 0, 0],
    ]);
    Cpd::new(vec![a0, a1.clone(), a1]).expect("shared rank")
}

/// Both published minimal CPDs: `(<2,2,2> rank 7, lysikov rank 8)`.
pub fn paper_cpds() -> (Cpd, Cpd) {
    (mmt222_rank7_cpd(), lysikov_rank8_cpd())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::cpd_verify;

    #[test]
    fn mmt_shapes_and_counts() {
        let f = Field::gf2();
        let t = mmt(1, 1, 1, &f);
        assert_eq!(t.dims(), &[1, 1, 1]);
        assert_eq!(t.data(), &[1]);
        let t = mmt(2, 2, 2, &f);
        assert_eq!(t.dims(), &[4, 4, 4]);
        assert_eq!(t.data().iter().filter(|&&x| x == 1).count(), 8);
        let t = mmt(2, 3, 4, &f);
        assert_eq!(t.dims(), &[6, 12, 8]);
        assert_eq!(t.data().iter().filter(|&&x| x == 1).count(), 24);
    }

    #[test]
    fn published_cpds_verify() {
        let f = Field::gf2();
        let (c7, c8) = paper_cpds();
        assert!(cpd_verify(&mmt(2, 2, 2, &f), &c7).unwrap());
        assert!(cpd_verify(&lysikov(&f), &c8).unwrap());
        assert_eq!(c8.factors()[1], c8.factors()[2]);
    }

    #[test]
    fn flipped_entry_breaks_verification() {
        let f = Field::gf2();
        let c = mmt222_rank7_cpd();
        let mut factors = c.into_factors();
        let x = factors[1].get(2, 3);
        factors[1].set(2, 3, 1 - x);
        let bad = Cpd::new(factors).unwrap();
        assert!(!cpd_verify(&mmt(2, 2, 2, &f), &bad).unwrap());
    }

    #[test]
    fn lysikov_entries() {
        let f = Field::gf2();
        let t = lysikov(&f);
        let ones: Vec<[usize; 3]> = (0..64)
            .filter(|&o| t.data()[o] == 1)
            .map(|o| [o / 16, (o / 4) % 4, o % 4])
            .collect();
        assert_eq!(
            ones,
            vec![
                [0, 0, 0],
                [1, 0, 1],
                [1, 1, 0],
                [2, 0, 2],
                [2, 2, 0],
                [3, 0, 3],
                [3, 1, 2],
                [3, 2, 1],
                [3, 3, 0]
            ]
        );
        for d in 0..3 {
            assert_eq!(t.unfold(d).rank(), 4);
        }
    }

    #[test]
    fn exponent_examples() {
        assert!((runtime_exponent(2, 2, 2, 8) - 3.0).abs() < 1e-12);
        assert!((runtime_exponent(2, 2, 2, 7) - 2.807_354_922).abs() < 1e-6);
        assert!((runtime_exponent(5, 5, 5, 94) - 2.8229).abs() < 5e-5);
        // <3,3,3> at the Laderman bound.
        assert!((runtime_exponent(3, 3, 3, 23) - 2.854_049).abs() < 1e-5);
    }

    #[test]
    fn random_gl_properties() {
        let f = Field::gf2();
        for seed in 0..5 {
            assert_eq!(random_gl(1, &f, seed), Mat::identity(&f, 1));
        }
        let f3 = Field::new(3).unwrap();
        for seed in 0..20 {
            let q = random_gl(4, &f3, seed);
            assert!(q.inverse().is_ok());
            assert_eq!(q, random_gl(4, &f3, seed));
        }
    }

    #[test]
    fn scramble_preserves_dims_and_axis_ranks() {
        let f = Field::gf2();
        let t = lysikov(&f);
        let (s, qs) = scramble(&t, 11);
        assert_eq!(s.dims(), t.dims());
        assert_eq!(qs.len(), 3);
        for d in 0..3 {
            assert_eq!(s.unfold(d).rank(), 4);
        }
        assert_eq!(scramble(&t, 11).0, s);

        let v = Tensor::from_vec(&f, &[1, 1, 1], vec![1]).unwrap();
        assert_eq!(scramble(&v, 3).0, v);
    }

    #[test]
    fn scrambled_published_cpd_follows_transforms() {
        let f = Field::gf2();
        let t = mmt(2, 2, 2, &f);
        let (s, qs) = scramble(&t, 5);
        let c = mmt222_rank7_cpd();
        let moved: Vec<Mat> = c
            .factors()
            .iter()
            .zip(&qs)
            .map(|(a, q)| q.mul(a).unwrap())
            .collect();
        assert!(cpd_verify(&s, &Cpd::new(moved).unwrap()).unwrap());
    }
}
