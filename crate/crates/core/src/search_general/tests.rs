use super::*;
use crate::gf::Field;
use crate::instances::{lysikov, mmt, random_tensor};
use crate::linalg::Mat;

fn concise_random(field: &Field, dims: &[usize], seed: u64) -> Tensor {
    (seed..)
        .map(|s| random_tensor(field, dims, s))
        .find(|t| check_concise(t).is_ok())
        .expect("some seed is concise")
}

fn generic() -> SearchConfig {
    SearchConfig {
        packed: false,
        ..SearchConfig::default()
    }
}

fn span_rank(rows: &[Vec<u32>], field: &Field, width: usize) -> usize {
    let mut m = Mat::zeros(field, 0, width);
    for r in rows {
        m.push_row(r);
    }
    m.rank()
}

#[test]
fn rejects_non_concise_input() {
    let f = Field::gf2();
    let mut t = Tensor::zeros(&f, &[2, 2, 2]);
    t.set(&[0, 0, 0], 1);
    assert!(search_general(&t, 3, &SearchConfig::default()).is_err());
    let t = Tensor::from_vec(&f, &[2, 4], vec![1, 0, 0, 0, 0, 1, 0, 0]).unwrap();
    assert!(search_general(&t, 3, &SearchConfig::default()).is_err());
}

#[test]
fn matrix_rank_decided() {
    let f = Field::new(5).unwrap();
    let t = Tensor::from_vec(&f, &[2, 2], vec![1, 2, 3, 4]).unwrap();
    let cfg = generic();
    assert!(!search_general(&t, 1, &cfg).unwrap().found());
    let out = search_general(&t, 2, &cfg).unwrap();
    assert!(out.cpd.unwrap().verify(&t).unwrap());
    assert_eq!(out.witness_index, Some(0));
}

#[test]
fn mmt222_rank6_state_count() {
    let f = Field::gf2();
    let t = mmt(2, 2, 2, &f);
    let cfg = SearchConfig {
        count_states: true,
        ..SearchConfig::default()
    };
    let out = search_general(&t, 6, &cfg).unwrap();
    assert!(!out.found());
    assert_eq!(out.stats.states_tested, 25426);
}

#[test]
fn mmt222_rank7_found_and_verified() {
    let f = Field::gf2();
    let t = mmt(2, 2, 2, &f);
    let out = search_general(&t, 7, &SearchConfig::default()).unwrap();
    let cpd = out.cpd.expect("rank 7 exists");
    assert_eq!(cpd.rank(), 7);
    assert!(cpd.verify(&t).unwrap());
}

#[test]
fn lysikov_rank8_found() {
    let f = Field::gf2();
    let t = lysikov(&f);
    let out = search_general(&t, 8, &SearchConfig::default()).unwrap();
    assert!(out.cpd.expect("rank 8 exists").verify(&t).unwrap());
}

#[test]
fn packed_matches_generic_per_assignment() {
    let f = Field::gf2();
    for (dims, rank, seed) in [
        (vec![2, 2, 2], 4, 1),
        (vec![3, 3, 2], 5, 2),
        (vec![3, 3, 3], 5, 3),
        (vec![2, 2, 2, 2], 4, 4),
        (vec![2, 2], 3, 5),
    ] {
        let t = concise_random(&f, &dims, seed);
        let k_max = rank - dims[0];
        for branch in [Branch::Auto, Branch::Direct, Branch::Kernel] {
            let cfg = SearchConfig {
                branch,
                ..SearchConfig::default()
            };
            let fast = Tester::new(&t, k_max, &cfg);
            assert!(fast.is_packed());
            let space = TupleSpace::new(&f, &dims[1..]);
            let bound = fast.over(&space);
            for a in enumerate_y_assignments(&dims, &f, rank) {
                let x = fast.test(&a.factors);
                let y = test_assignment(&t, &a.factors, branch);
                let z = bound.test(&a.tuples);
                assert_eq!(x.pairs, y.pairs, "{dims:?} {branch:?} {:?}", a.tuples);
                assert_eq!(x.cpd, y.cpd);
                assert_eq!(z.pairs, y.pairs);
                assert_eq!(z.cpd, y.cpd);
            }
        }
    }
}

#[test]
fn branches_span_the_same_pairs() {
    for p in [2u64, 3] {
        let f = Field::new(p).unwrap();
        for (dims, rank, seed) in [(vec![2, 2, 2], 4, 10), (vec![3, 2, 2], 4, 11)] {
            let t = concise_random(&f, &dims, seed);
            for a in enumerate_y_assignments(&dims, &f, rank) {
                let k = a.columns();
                let width = dims[0] + k;
                let join = |g: GoodPair| [g.v, g.c].concat();
                let direct: Vec<_> = good_pairs(&t, &a.factors, Branch::Direct)
                    .map(join)
                    .collect();
                let kernel: Vec<_> = good_pairs(&t, &a.factors, Branch::Kernel)
                    .map(join)
                    .collect();
                let both: Vec<_> = direct.iter().chain(&kernel).cloned().collect();
                let rd = span_rank(&direct, &f, width);
                assert_eq!(rd, span_rank(&kernel, &f, width));
                assert_eq!(rd, span_rank(&both, &f, width));
                let sd = test_assignment(&t, &a.factors, Branch::Direct);
                let sk = test_assignment(&t, &a.factors, Branch::Kernel);
                assert_eq!(sd.cpd.is_some(), sk.cpd.is_some());
                for c in sd.cpd.iter().chain(&sk.cpd) {
                    assert!(c.verify(&t).unwrap());
                    assert_eq!(c.rank(), rank.min(dims[0] + k));
                }
            }
        }
    }
}

#[test]
fn direct_branch_yields_only_good_pairs() {
    let f = Field::new(3).unwrap();
    let t = concise_random(&f, &[2, 2, 2], 20);
    let a = enumerate_y_assignments(&[2, 2, 2], &f, 3).nth(2).unwrap();
    let count = good_pairs(&t, &a.factors, Branch::Direct)
        .inspect(|g| {
            let mut res = t.axis0_combination(&g.v);
            let cols: Vec<Vec<u32>> = a.factors.iter().map(|y| y.column(0)).collect();
            let refs: Vec<&[u32]> = cols.iter().map(Vec::as_slice).collect();
            res.add_outer(f.neg(g.c[0]), &refs);
            assert!(crate::tensor::is_rank_at_most_one(&res));
        })
        .count();
    // v = 0, c = 0 is always good
    assert!(count >= 1);
}

#[test]
fn generic_and_packed_searches_agree_with_oracle_sizes() {
    let f = Field::gf2();
    for seed in 0..6 {
        let t = concise_random(&f, &[3, 3, 3], 100 + seed);
        let mut fast_rank = None;
        let mut slow_rank = None;
        for r in 3..=6 {
            if fast_rank.is_none() && search_general(&t, r, &SearchConfig::default()).unwrap().found() {
                fast_rank = Some(r);
            }
            let slow = search_general(&t, r, &generic()).unwrap();
            if slow_rank.is_none() && slow.found() {
                slow_rank = Some(r);
                assert!(slow.cpd.unwrap().verify(&t).unwrap());
            }
        }
        assert_eq!(fast_rank, slow_rank);
        assert!(fast_rank.is_some(), "3x3x3 rank is at most 5 over GF(2)");
    }
}

#[test]
fn shards_partition_the_stream() {
    let f = Field::gf2();
    let t = mmt(2, 2, 2, &f);
    let mut total = 0;
    for i in 0..3 {
        let cfg = SearchConfig {
            count_states: true,
            shard: Shard::new(i, 3).unwrap(),
            ..SearchConfig::default()
        };
        total += search_general(&t, 6, &cfg).unwrap().stats.states_tested;
    }
    assert_eq!(total, 25426);
    assert!(Shard::new(3, 3).is_err());
    assert!(Shard::new(0, 0).is_err());
}

#[test]
fn threads_preserve_the_witness() {
    let f = Field::new(3).unwrap();
    let t = concise_random(&f, &[3, 3, 2], 7);
    let mut witness = None;
    for r in 3..=6 {
        let one = search_general(&t, r, &SearchConfig::default()).unwrap();
        if one.found() {
            witness = Some((r, one.witness_index, one.cpd));
            break;
        }
    }
    let (r, index, cpd) = witness.expect("rank at most 6");
    for threads in [2, 4] {
        let cfg = SearchConfig {
            threads,
            ..SearchConfig::default()
        };
        let many = search_general(&t, r, &cfg).unwrap();
        assert_eq!(many.witness_index, index);
        assert_eq!(many.cpd, cpd);
    }
    let cfg = SearchConfig {
        threads: 3,
        count_states: true,
        ..SearchConfig::default()
    };
    let counted = search_general(&t, r, &cfg).unwrap();
    assert_eq!(
        u128::from(counted.stats.states_tested),
        assignment_count(t.dims(), &f, r)
    );
}

#[test]
fn order_four_tensor() {
    let f = Field::gf2();
    // a ⊗ a ⊗ a ⊗ a + b ⊗ b ⊗ b ⊗ b with independent a, b: rank 2
    let a = [1u32, 0];
    let b = [1u32, 1];
    let mut t = Tensor::outer(&f, &[&a, &a, &a, &a]);
    t.add_outer(1, &[&b, &b, &b, &b]);
    assert!(!search_general(&t, 1, &SearchConfig::default()).unwrap().found());
    for cfg in [SearchConfig::default(), generic()] {
        let out = search_general(&t, 2, &cfg).unwrap();
        assert!(out.cpd.unwrap().verify(&t).unwrap());
    }
}
