//! Exact CPD search for concise tensors of any order.
//!
//! For every partial assignment `(Y_1, …, Y_{D-1})` of `k ≤ R - n_0`
//! normalized columns, look for `n_0` good pairs `(v, c)` with independent `v`.
//! Such pairs exist for some assignment iff the tensor has rank at most `R`.

mod assign;
mod packed;
mod pairs;

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

pub use assign::{
    assignment_count, enumerate_y_assignments, normalized_vectors, Combinations, TupleSpace,
    YAssignment, YAssignments,
};
pub use packed::Gf2Tester;
pub use pairs::{good_pairs, test_assignment, Branch, GoodPair, GoodPairs, TestResult};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::tensor::{Cpd, Tensor};

/// Worker `index` of `count` handles stream positions `i` with `i % count == index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shard {
    pub index: u64,
    pub count: u64,
}

impl Shard {
    pub fn new(index: u64, count: u64) -> Result<Self> {
        if count == 0 || index >= count {
            return Err(Error::Input(format!("invalid shard {index}/{count}")));
        }
        Ok(Self { index, count })
    }

    pub fn whole() -> Self {
        Self { index: 0, count: 1 }
    }

    pub fn owns(&self, position: u64) -> bool {
        position % self.count == self.index
    }
}

impl Default for Shard {
    fn default() -> Self {
        Self::whole()
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub branch: Branch,
    /// Visit every state instead of stopping at the first witness.
    pub count_states: bool,
    pub shard: Shard,
    /// Worker threads inside this shard (at least 1).
    pub threads: usize,
    /// Use the packed GF(2) tester whenever it applies.
    pub packed: bool,
    /// Report progress on stderr every million states.
    pub progress: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            branch: Branch::Auto,
            count_states: false,
            shard: Shard::whole(),
            threads: 1,
            packed: true,
            progress: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Assignments handed to TEST.
    pub states_tested: u64,
    /// Good pairs consumed across all tests.
    pub good_pairs: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// A verified CPD of rank at most `R`, if one was found.
    pub cpd: Option<Cpd>,
    /// Stream position of the assignment that produced `cpd`.
    pub witness_index: Option<u64>,
    /// Whether the CPD came from a direct construction without search.
    pub via_shortcut: bool,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn found(&self) -> bool {
        self.cpd.is_some()
    }
}

/// TEST with the packed GF(2) path when available, else the generic one.
#[derive(Clone, Debug)]
pub struct Tester {
    tensor: Tensor,
    branch: Branch,
    packed: Option<Gf2Tester>,
}

impl Tester {
    /// Tester for assignments with at most `max_columns` columns.
    pub fn new(t: &Tensor, max_columns: usize, config: &SearchConfig) -> Self {
        let packed = if config.packed {
            Gf2Tester::new(t, max_columns)
        } else {
            None
        };
        Self {
            tensor: t.clone(),
            branch: config.branch,
            packed,
        }
    }

    pub fn is_packed(&self) -> bool {
        self.packed.is_some()
    }

    pub fn test(&self, y: &[Mat]) -> TestResult {
        match &self.packed {
            Some(p) => p.test(y, self.branch),
            None => test_assignment(&self.tensor, y, self.branch),
        }
    }

    /// A tester bound to the tuples of `space`.
    pub fn over<'a>(&'a self, space: &'a TupleSpace) -> SpaceTester<'a> {
        let masks = match &self.packed {
            Some(p) if space.len() <= 1 << 22 => (0..space.len())
                .map(|i| p.tuple_mask(&space.tuple(i)))
                .collect(),
            _ => Vec::new(),
        };
        SpaceTester {
            tester: self,
            space,
            masks,
        }
    }
}

/// [`Tester`] for assignments given as tuple indices.
pub struct SpaceTester<'a> {
    tester: &'a Tester,
    space: &'a TupleSpace,
    masks: Vec<u64>,
}

impl SpaceTester<'_> {
    pub fn test(&self, tuples: &[usize]) -> TestResult {
        match &self.tester.packed {
            Some(p) if !self.masks.is_empty() || self.space.is_empty() => {
                let w: Vec<u64> = tuples.iter().map(|&i| self.masks[i]).collect();
                p.test_masks(&w, self.tester.branch, || self.space.factors(tuples))
            }
            _ => self.tester.test(&self.space.factors(tuples)),
        }
    }
}

/// Checks the search preconditions: at least two axes, dims non-increasing,
/// every unfolding of full rank.
pub(crate) fn check_concise(t: &Tensor) -> Result<()> {
    if t.ndim() < 2 {
        return Err(Error::Input("search needs at least two axes".into()));
    }
    if t.dims().windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Input(format!(
            "dims {:?} are not non-increasing",
            t.dims()
        )));
    }
    for d in 0..t.ndim() {
        if t.unfold(d).rank() != t.dims()[d] {
            return Err(Error::Input(format!("tensor is not concise on axis {d}")));
        }
    }
    Ok(())
}

/// Shared state for the workers of one search.
pub(crate) struct Progress {
    best: AtomicU64,
    states: AtomicU64,
    enabled: bool,
    pub(crate) started: Instant,
}

impl Progress {
    pub(crate) fn new(enabled: bool) -> Self {
        Self {
            best: AtomicU64::new(u64::MAX),
            states: AtomicU64::new(0),
            enabled,
            started: Instant::now(),
        }
    }

    /// Best witness position found so far.
    pub(crate) fn best(&self) -> u64 {
        self.best.load(Ordering::Relaxed)
    }

    pub(crate) fn offer(&self, position: u64) {
        self.best.fetch_min(position, Ordering::Relaxed);
    }

    pub(crate) fn tick(&self) {
        let n = self.states.fetch_add(1, Ordering::Relaxed) + 1;
        if self.enabled && n % 1_000_000 == 0 {
            eprintln!(
                "[progress] {n} states, {:.1}s",
                self.started.elapsed().as_secs_f64()
            );
        }
    }
}

/// Result of one worker: states, pairs, and its lowest witness.
pub(crate) type WorkerResult = (u64, u64, Option<(u64, Cpd)>);

/// Runs `work(worker)` on `threads` scoped threads and merges the results,
/// keeping the witness at the lowest position.
pub(crate) fn run_workers<F>(threads: usize, work: F) -> WorkerResult
where
    F: Fn(usize) -> WorkerResult + Sync,
{
    let threads = threads.max(1);
    let results: Vec<WorkerResult> = if threads == 1 {
        vec![work(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    let work = &work;
                    s.spawn(move || work(w))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("search worker panicked"))
                .collect()
        })
    };
    let mut states = 0;
    let mut pairs = 0;
    let mut best: Option<(u64, Cpd)> = None;
    for (s, p, w) in results {
        states += s;
        pairs += p;
        if let Some((pos, cpd)) = w {
            if best.as_ref().is_none_or(|(b, _)| pos < *b) {
                best = Some((pos, cpd));
            }
        }
    }
    (states, pairs, best)
}

/// Decides whether concise `t` has a CPD of rank at most `rank`.
///
/// Positions in the assignment stream are split first across shards, then
/// across threads. Without `count_states` the search stops once a witness is
/// found, and the reported witness is always the lowest position in the shard.
pub fn search_general(t: &Tensor, rank: usize, config: &SearchConfig) -> Result<SearchOutcome> {
    check_concise(t)?;
    let n0 = t.dims()[0];
    let progress = Progress::new(config.progress);
    if rank < n0 {
        return Ok(SearchOutcome {
            cpd: None,
            witness_index: None,
            via_shortcut: false,
            stats: SearchStats {
                elapsed: progress.started.elapsed(),
                ..Default::default()
            },
        });
    }
    let k_max = rank - n0;
    let space = TupleSpace::new(t.field(), &t.dims()[1..]);
    let tester = Tester::new(t, k_max, config);
    let tester = tester.over(&space);
    let threads = config.threads.max(1) as u64;
    let shard = config.shard;

    let (states, pairs, best) = run_workers(threads as usize, |worker| {
        let mut combos = Combinations::new(space.len(), k_max);
        let mut position = 0u64;
        let mut states = 0u64;
        let mut pairs = 0u64;
        let mut found = None;
        while let Some(tuples) = combos.step() {
            let here = position;
            position += 1;
            if !shard.owns(here) || (here / shard.count) % threads != worker as u64 {
                continue;
            }
            if !config.count_states && here > progress.best() {
                break;
            }
            let result = tester.test(tuples);
            states += 1;
            pairs += result.pairs;
            progress.tick();
            if let Some(cpd) = result.cpd {
                if found.is_none() {
                    found = Some((here, cpd));
                    progress.offer(here);
                }
                if !config.count_states {
                    break;
                }
            }
        }
        (states, pairs, found)
    });

    Ok(SearchOutcome {
        witness_index: best.as_ref().map(|(i, _)| *i),
        cpd: best.map(|(_, c)| c),
        via_shortcut: false,
        stats: SearchStats {
            states_tested: states,
            good_pairs: pairs,
            elapsed: progress.started.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests;
