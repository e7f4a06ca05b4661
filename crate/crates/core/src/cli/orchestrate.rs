//! Search orchestration: reduce, pick a route, search, lift back.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::oracle::{oracle_decompose_with_budget, DEFAULT_BUDGET};
use crate::preprocess::{
    concise_reduce, lift_cpd, matrix_cpd, rank_lower_bound, trivial_cpd, vector_cpd,
};
use crate::search_3d::{compute_rstar, search_3d};
use crate::search_general::{search_general, SearchConfig, SearchOutcome, SearchStats};
use crate::tensor::{Cpd, Tensor};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    #[default]
    Auto,
    General,
    ThreeD,
    Oracle,
}

/// How a decomposition question was settled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    ZeroTensor,
    BelowLowerBound,
    Vector,
    Matrix,
    Trivial,
    General,
    ThreeD,
    Oracle,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::ZeroTensor => "zero",
            Route::BelowLowerBound => "lower-bound",
            Route::Vector => "vector",
            Route::Matrix => "matrix",
            Route::Trivial => "trivial",
            Route::General => "general",
            Route::ThreeD => "three-d",
            Route::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    pub algorithm: Algorithm,
    pub search: SearchConfig,
    pub oracle_budget: u128,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Auto,
            search: SearchConfig::default(),
            oracle_budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// A verified CPD of the input tensor with at most `threshold` columns.
    pub cpd: Option<Cpd>,
    pub threshold: usize,
    pub route: Route,
    pub via_shortcut: bool,
    pub stats: SearchStats,
}

impl Decomposition {
    pub fn found(&self) -> bool {
        self.cpd.is_some()
    }
}

fn binomial_f64(n: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i as f64) / (i as f64 + 1.0))
}

/// Predicted work of the general search on concise `dims` over `GF(p)`:
/// `Σ_{k ≤ R - n_0} C(N, k) p^{min(n_0 + k, Σ_{d≥2} n_d)}`.
pub fn predicted_cost_general(dims: &[usize], p: u32, rank: usize) -> f64 {
    if rank < dims[0] {
        return 0.0;
    }
    let pf = f64::from(p);
    let n: f64 = dims[1..]
        .iter()
        .map(|&d| (pf.powi(d as i32) - 1.0) / (pf - 1.0))
        .product();
    let tail: usize = dims.get(2..).map_or(0, |s| s.iter().sum());
    (0..=rank - dims[0])
        .map(|k| binomial_f64(n, k) * pf.powi((dims[0] + k).min(tail) as i32))
        .sum()
}

/// Predicted work of the three-axis search:
/// `p^{n_0 + n_2 + (R - n_0 + 1 - ρ)(n_1 + n_2) + ρ^2}`, or `p^{n_0}` when the
/// shortcut applies, with `ρ = max(⌊R / n_0⌋ + 1, r★)`.
pub fn predicted_cost_3d(dims: &[usize], p: u32, rank: usize, r_star: usize) -> f64 {
    let (n0, n1, n2) = (dims[0], dims[1], dims[2]);
    let pf = f64::from(p);
    if rank >= n0 * r_star {
        return pf.powi(n0 as i32);
    }
    let rho = (rank / n0 + 1).max(r_star);
    let free = (rank + 1).saturating_sub(n0 + rho);
    pf.powi((n0 + n2 + free * (n1 + n2) + rho * rho) as i32)
}

fn settled(
    cpd: Option<Cpd>,
    threshold: usize,
    route: Route,
    started: Instant,
) -> Decomposition {
    Decomposition {
        cpd,
        threshold,
        route,
        via_shortcut: false,
        stats: SearchStats {
            elapsed: started.elapsed(),
            ..SearchStats::default()
        },
    }
}

/// Decides whether `t` has a CPD with at most `rank` columns.
pub fn decompose(t: &Tensor, rank: usize, opts: &DecomposeOptions) -> Result<Decomposition> {
    let started = Instant::now();
    if opts.algorithm == Algorithm::Oracle {
        let out = oracle_decompose_with_budget(t, rank, opts.oracle_budget)?;
        return Ok(from_outcome(out, rank, Route::Oracle));
    }
    let red = concise_reduce(t);
    if red.is_zero() {
        return Ok(settled(
            Some(Cpd::empty(t.field(), t.dims())),
            rank,
            Route::ZeroTensor,
            started,
        ));
    }
    if rank < rank_lower_bound(&red) {
        return Ok(settled(None, rank, Route::BelowLowerBound, started));
    }
    let r = &red.reduced;
    let lift = |c: &Cpd| lift_cpd(&red, c);
    match r.ndim() {
        1 => {
            let c = lift(&vector_cpd(r))?;
            return Ok(settled(Some(c), rank, Route::Vector, started));
        }
        2 => {
            let c = lift(&matrix_cpd(r))?;
            return Ok(settled(Some(c), rank, Route::Matrix, started));
        }
        _ => {}
    }
    if opts.algorithm == Algorithm::Auto {
        let trivial = trivial_cpd(r);
        if trivial.rank() <= rank {
            return Ok(settled(Some(lift(&trivial)?), rank, Route::Trivial, started));
        }
    }
    let route = match opts.algorithm {
        Algorithm::General => Route::General,
        Algorithm::ThreeD if r.ndim() == 3 => Route::ThreeD,
        Algorithm::ThreeD => {
            return Err(Error::Input(format!(
                "three-d needs three axes after reduction, got dims {:?}",
                r.dims()
            )))
        }
        _ => choose_route(r, rank)?,
    };
    let out = match route {
        Route::ThreeD => search_3d(r, rank, &opts.search)?,
        _ => search_general(r, rank, &opts.search)?,
    };
    let mut d = from_outcome(out, rank, route);
    d.cpd = d.cpd.map(|c| lift(&c)).transpose()?;
    if let Some(c) = &d.cpd {
        debug_assert!(c.verify(t)?);
    }
    d.stats.elapsed = started.elapsed();
    Ok(d)
}

fn choose_route(r: &Tensor, rank: usize) -> Result<Route> {
    let dims = r.dims();
    if dims.len() != 3 || rank <= dims[0] {
        return Ok(Route::General);
    }
    let p = r.field().p();
    let rs = compute_rstar(r)?;
    let three = predicted_cost_3d(dims, p, rank, rs.r_star);
    Ok(if three < predicted_cost_general(dims, p, rank) {
        Route::ThreeD
    } else {
        Route::General
    })
}

fn from_outcome(out: SearchOutcome, rank: usize, route: Route) -> Decomposition {
    Decomposition {
        cpd: out.cpd,
        threshold: rank,
        route,
        via_shortcut: out.via_shortcut,
        stats: out.stats,
    }
}

/// Searches `R = lower bound, lower bound + 1, …` and returns the first success;
/// statistics accumulate over every threshold tried.
pub fn find_rank(t: &Tensor, opts: &DecomposeOptions) -> Result<Decomposition> {
    let started = Instant::now();
    let red = concise_reduce(t);
    let mut states = 0;
    let mut pairs = 0;
    for r in rank_lower_bound(&red).. {
        let mut d = decompose(t, r, opts)?;
        states += d.stats.states_tested;
        pairs += d.stats.good_pairs;
        if d.found() {
            d.stats = SearchStats {
                states_tested: states,
                good_pairs: pairs,
                elapsed: started.elapsed(),
            };
            return Ok(d);
        }
    }
    unreachable!("the trivial decomposition bounds the rank")
}

pub fn elapsed_ms(d: Duration) -> u64 {
    d.as_millis().try_into().unwrap_or(u64::MAX)
}
