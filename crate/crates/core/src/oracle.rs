//! Brute-force reference decomposition for small tensors.
//!
//! Axes `1..D` are enumerated as sets of distinct normalized column tuples;
//! the axis-0 factor is then linear in the data, so it is solved rather than
//! enumerated. Scaling a column into axis 0, dropping zero columns and merging
//! repeated tuples never increases rank, so taking `min(R, N)` distinct tuples
//! loses no CPD.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::linalg::Mat;
use crate::search_general::{SearchOutcome, SearchStats};
use crate::tensor::{Cpd, Tensor};

/// Default cap on candidate tuple sets per rank.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

fn normalized(field: &Field, n: usize) -> Vec<Vec<Elem>> {
    let p = field.p() as usize;
    let total = p.pow(n as u32);
    (1..total)
        .map(|mut x| {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = (x % p) as Elem;
                x /= p;
            }
            v
        })
        .filter(|v| v.iter().find(|&&x| x != 0) == Some(&1))
        .collect()
}

/// All normalized tuples over axes `1..D` with their flattened outer products.
fn tuples(t: &Tensor) -> Vec<(Vec<Vec<Elem>>, Vec<Elem>)> {
    let f = t.field();
    let mut out: Vec<Vec<Vec<Elem>>> = vec![Vec::new()];
    for &n in &t.dims()[1..] {
        let vs = normalized(f, n);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                vs.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|tuple| {
            let mut flat = vec![1 as Elem];
            for v in &tuple {
                flat = flat
                    .iter()
                    .flat_map(|&a| v.iter().map(move |&b| f.mul(a, b)))
                    .collect();
            }
            (tuple, flat)
        })
        .collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// `X` with `X · w == target`, if the rows of `target` lie in the row space of `w`.
fn solve_left(w: &Mat, target: &Mat) -> Option<Mat> {
    let f = w.field();
    let red = w.rref_transform();
    let mut x = Mat::zeros(f, target.rows(), w.rows());
    for i in 0..target.rows() {
        for (j, &pc) in red.pivots.iter().enumerate() {
            let s = target.get(i, pc);
            if s == 0 {
                continue;
            }
            for c in 0..w.rows() {
                let val = f.mul_add(x.get(i, c), s, red.transform.get(j, c));
                x.set(i, c, val);
            }
        }
    }
    (x.mul(w).ok()? == *target).then_some(x)
}

/// Exhaustive decision of rank at most `rank`, refusing more than `budget` candidates.
pub fn oracle_decompose_with_budget(t: &Tensor, rank: usize, budget: u128) -> Result<SearchOutcome> {
    let started = Instant::now();
    let f = t.field();
    let outcome = |cpd: Option<Cpd>, states: u64| SearchOutcome {
        witness_index: cpd.as_ref().map(|_| states.saturating_sub(1)),
        cpd,
        via_shortcut: false,
        stats: SearchStats {
            states_tested: states,
            good_pairs: 0,
            elapsed: started.elapsed(),
        },
    };
    if t.is_zero() {
        return Ok(outcome(Some(Cpd::empty(f, t.dims())), 0));
    }
    if t.is_empty() {
        return Err(Error::Input("tensor has no entries".into()));
    }
    let all = tuples(t);
    let k = rank.min(all.len());
    let needed = binomial(all.len() as u128, k as u128);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let n0 = t.dims()[0];
    let m = t.len() / n0;
    let target = Mat::from_vec(f, n0, m, t.data().to_vec())?;
    let mut pick: Vec<usize> = (0..k).collect();
    let mut states = 0u64;
    loop {
        states += 1;
        let mut w = Mat::zeros(f, 0, m);
        for &i in &pick {
            w.push_row(&all[i].1);
        }
        if let Some(a0) = solve_left(&w, &target) {
            let mut factors = vec![a0];
            for d in 1..t.ndim() {
                let mut a = Mat::zeros(f, t.dims()[d], k);
                for (r, &i) in pick.iter().enumerate() {
                    for (row, &x) in all[i].0[d - 1].iter().enumerate() {
                        a.set(row, r, x);
                    }
                }
                factors.push(a);
            }
            let cpd = Cpd::new(factors)?;
            assert!(cpd.verify(t)?, "oracle produced an invalid CPD");
            return Ok(outcome(Some(cpd), states));
        }
        // next k-combination of 0..N
        let n = all.len();
        let Some(i) = (0..k).rev().find(|&i| pick[i] < n - (k - i)) else {
            return Ok(outcome(None, states));
        };
        pick[i] += 1;
        for j in i + 1..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

/// [`oracle_decompose_with_budget`] with [`DEFAULT_BUDGET`].
pub fn oracle_decompose(t: &Tensor, rank: usize) -> Result<SearchOutcome> {
    oracle_decompose_with_budget(t, rank, DEFAULT_BUDGET)
}

/// Smallest `R` for which [`oracle_decompose`] finds a CPD.
pub fn oracle_rank(t: &Tensor) -> Result<usize> {
    (0..)
        .find_map(|r| match oracle_decompose(t, r) {
            Ok(o) if o.found() => Some(Ok(r)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .expect("some rank succeeds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::mmt;

    #[test]
    fn examples() {
        let f = Field::gf2();
        let zero = Tensor::zeros(&f, &[2, 2, 2]);
        let out = oracle_decompose(&zero, 0).unwrap();
        assert_eq!(out.cpd.unwrap().rank(), 0);
        assert_eq!(oracle_rank(&zero).unwrap(), 0);

        let mut unit = Tensor::zeros(&f, &[2, 2, 2]);
        unit.set(&[1, 0, 1], 1);
        assert!(oracle_decompose(&unit, 1).unwrap().found());
        assert_eq!(oracle_rank(&unit).unwrap(), 1);

        let mut diag = Tensor::zeros(&f, &[2, 2, 2]);
        diag.set(&[0, 0, 0], 1);
        diag.set(&[1, 1, 1], 1);
        assert!(!oracle_decompose(&diag, 1).unwrap().found());
        assert_eq!(oracle_rank(&diag).unwrap(), 2);
    }

    #[test]
    fn monotone_in_rank() {
        let f = Field::new(3).unwrap();
        for seed in 0..10 {
            let t = crate::instances::random_tensor(&f, &[2, 2, 2], seed);
            let r = oracle_rank(&t).unwrap();
            for extra in r..=r + 2 {
                assert!(oracle_decompose(&t, extra).unwrap().found());
            }
        }
    }

    #[test]
    fn other_orders() {
        let f = Field::new(5).unwrap();
        let v = Tensor::from_vec(&f, &[3], vec![0, 4, 1]).unwrap();
        assert_eq!(oracle_rank(&v).unwrap(), 1);
        let m = Tensor::from_vec(&f, &[2, 3], vec![1, 2, 3, 2, 4, 2]).unwrap();
        assert_eq!(oracle_rank(&m).unwrap(), 2);
    }

    #[test]
    fn budget_is_enforced() {
        let f = Field::gf2();
        let t = mmt(2, 2, 2, &f);
        match oracle_decompose_with_budget(&t, 7, 1000) {
            Err(Error::BudgetExceeded { needed, budget }) => {
                assert_eq!(budget, 1000);
                assert!(needed > 1000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
