//! GF(2) tester with every vector packed into a `u64`.
//!
//! Entry `i` of a vector lives in bit `i`. Lexicographic order over `L`
//! coordinates (last coordinate fastest) is a counter whose bits are reversed
//! into coordinate positions. The pair stream and its order match
//! [`super::pairs::good_pairs`] exactly, so results coincide with the generic path.

use super::pairs::{reconstruct, Branch, TestResult};
use crate::gf::Field;
use crate::linalg::Mat;
use crate::tensor::Tensor;

/// Precomputed packed form of a GF(2) tensor.
#[derive(Clone, Debug)]
pub struct Gf2Tester {
    tensor: Tensor,
    n0: usize,
    rest: Vec<usize>,
    /// Axis-0 slices, flattened over axes `1..D`.
    slices: Vec<u64>,
    tail_len: usize,
    tail_sum: usize,
    prepared: Vec<Prepared>,
}

fn lex_coords(counter: u64, len: usize) -> u64 {
    if len == 0 {
        0
    } else {
        counter.reverse_bits() >> (64 - len)
    }
}

fn pack(v: &[u32]) -> u64 {
    v.iter()
        .enumerate()
        .fold(0, |acc, (i, &x)| acc | (u64::from(x & 1) << i))
}

/// Packed row-major outer product; `parts` are `(mask, length)`, fastest axis first.
fn outer(parts: &[(u64, usize)]) -> u64 {
    let mut acc = 1u64;
    let mut len = 1usize;
    for &(mask, n) in parts {
        let mut next = 0u64;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                next |= acc << (i * len);
            }
        }
        acc = next;
        len *= n;
    }
    acc
}

fn rank_le1(mask: u64, dims: &[usize], len: usize) -> bool {
    if mask == 0 || dims.len() <= 1 {
        return true;
    }
    let chunk = len / dims[0];
    let chunk_mask = if chunk == 64 { u64::MAX } else { (1u64 << chunk) - 1 };
    let mut base = 0u64;
    for i in 0..dims[0] {
        let part = mask >> (i * chunk) & chunk_mask;
        if part != 0 {
            if base == 0 {
                base = part;
            } else if part != base {
                return false;
            }
        }
    }
    rank_le1(base, &dims[1..], chunk)
}

/// Insertion into an echelon set keyed by lowest set bit.
#[derive(Clone, Debug)]
struct BitBasis {
    by_pivot: [u8; 64],
    rows: Vec<(u64, u64)>,
}

impl BitBasis {
    fn new() -> Self {
        Self {
            by_pivot: [u8::MAX; 64],
            rows: Vec::new(),
        }
    }

    /// Reduces `x` (tracking `combo`); inserts and returns `None` if independent,
    /// otherwise returns the combination that reduces to zero.
    fn insert(&mut self, mut x: u64, mut combo: u64) -> Option<u64> {
        while x != 0 {
            let lb = x.trailing_zeros() as usize;
            let slot = self.by_pivot[lb];
            if slot == u8::MAX {
                self.by_pivot[lb] = self.rows.len() as u8;
                self.rows.push((x, combo));
                return None;
            }
            let (bx, bc) = self.rows[slot as usize];
            x ^= bx;
            combo ^= bc;
        }
        Some(combo)
    }

    /// Like [`Self::insert`] but leaves `self` unchanged, keeping new rows in `extra`.
    fn insert_over(&self, extra: &mut Vec<(u64, u64)>, mut x: u64, mut combo: u64) -> Option<u64> {
        'reduce: while x != 0 {
            let lb = x.trailing_zeros() as usize;
            let slot = self.by_pivot[lb];
            if slot != u8::MAX {
                let (bx, bc) = self.rows[slot as usize];
                x ^= bx;
                combo ^= bc;
                continue;
            }
            for &(ex, ec) in extra.iter() {
                if ex.trailing_zeros() as usize == lb {
                    x ^= ex;
                    combo ^= ec;
                    continue 'reduce;
                }
            }
            extra.push((x, combo));
            return None;
        }
        Some(combo)
    }
}

/// Fully reduced row echelon form of packed rows, pivots ascending.
fn rref_bits(rows: &mut Vec<u64>) {
    let mut out: Vec<u64> = Vec::with_capacity(rows.len());
    for &r0 in rows.iter() {
        let mut r = r0;
        for &b in &out {
            if r >> b.trailing_zeros() & 1 == 1 {
                r ^= b;
            }
        }
        if r == 0 {
            continue;
        }
        let p = r.trailing_zeros();
        for b in &mut out {
            if *b >> p & 1 == 1 {
                *b ^= r;
            }
        }
        out.push(r);
    }
    out.sort_unstable_by_key(|r| r.trailing_zeros());
    *rows = out;
}

/// Elimination state of the tensor and `u_1` columns for one `(u_2, …)`.
///
/// Variables are laid out as `[v | u_1 | c]` internally so this part does not
/// depend on `k`; [`Gf2Tester::canonical`] maps combos to `[v | c | u_1]`.
#[derive(Clone, Debug)]
struct Prepared {
    basis: BitBasis,
    kernel: Vec<u64>,
}

/// Tail lengths up to this are prepared once per tester.
const PREPARE_LIMIT: usize = 16;

impl Gf2Tester {
    /// Packed tester for `t`, or `None` when `t` is not over GF(2) or does not fit.
    pub fn new(t: &Tensor, max_columns: usize) -> Option<Self> {
        if t.field().p() != 2 || t.ndim() < 2 {
            return None;
        }
        let n0 = t.dims()[0];
        let rest = t.dims()[1..].to_vec();
        let m = t.slice_len();
        let tail_sum: usize = rest[1..].iter().sum();
        if m > 64 || n0 + max_columns >= 64 || n0 + max_columns + rest[0] > 64 || tail_sum > 40 {
            return None;
        }
        let slices = (0..n0)
            .map(|i| pack(&t.data()[i * m..(i + 1) * m]))
            .collect();
        let mut tester = Self {
            tensor: t.clone(),
            n0,
            tail_len: m / rest[0],
            slices,
            rest,
            tail_sum,
            prepared: Vec::new(),
        };
        if tail_sum <= PREPARE_LIMIT {
            tester.prepared = (0..1u64 << tail_sum).map(|c| tester.prepare(c)).collect();
        }
        Some(tester)
    }

    fn prepare(&self, counter: u64) -> Prepared {
        let u = lex_coords(counter, self.tail_sum);
        let mut parts = Vec::with_capacity(self.rest.len() - 1);
        let mut at = 0;
        for &n in &self.rest[1..] {
            parts.push((u >> at & ((1u64 << n) - 1), n));
            at += n;
        }
        parts.reverse();
        let tail = outer(&parts);
        let mut basis = BitBasis::new();
        let mut kernel = Vec::new();
        let columns = self
            .slices
            .iter()
            .copied()
            .chain((0..self.rest[0]).map(|j| tail << (j * self.tail_len)));
        for (var, col) in columns.enumerate() {
            if let Some(combo) = basis.insert(col, 1u64 << var) {
                kernel.push(combo);
            }
        }
        Prepared { basis, kernel }
    }

    /// Maps an internal `[v | u_1 | c]` combo to `[v | c | u_1]` for `k` columns.
    fn canonical(&self, combo: u64, k: usize) -> u64 {
        let n0 = self.n0;
        let n1 = self.rest[0];
        let v = combo & ((1u64 << n0) - 1);
        let u1 = combo >> n0 & ((1u64 << n1) - 1);
        let c = combo >> (n0 + n1);
        v | c << n0 | u1 << (n0 + k)
    }

    /// Packed rank-one mask `⊗_d y_d` of one factor tuple (axis 1 first).
    pub fn tuple_mask(&self, vectors: &[&[u32]]) -> u64 {
        let parts: Vec<(u64, usize)> = vectors.iter().rev().map(|v| (pack(v), v.len())).collect();
        outer(&parts)
    }

    fn rank_ones(&self, y: &[Mat]) -> Vec<u64> {
        let k = y.first().map_or(0, Mat::cols);
        (0..k)
            .map(|r| {
                let cols: Vec<Vec<u32>> = y.iter().map(|yd| yd.column(r)).collect();
                let refs: Vec<&[u32]> = cols.iter().map(Vec::as_slice).collect();
                self.tuple_mask(&refs)
            })
            .collect()
    }

    /// Same contract as [`super::test_assignment`].
    pub fn test(&self, y: &[Mat], branch: Branch) -> TestResult {
        let w = self.rank_ones(y);
        self.test_masks(&w, branch, || y.to_vec())
    }

    /// TEST on precomputed rank-one masks `w`; `factors` builds `Y` on success.
    pub fn test_masks(
        &self,
        w: &[u64],
        branch: Branch,
        factors: impl FnOnce() -> Vec<Mat>,
    ) -> TestResult {
        let n0 = self.n0;
        let k = w.len();
        let mut qb = BitBasis::new();
        let mut picked: Vec<(u64, u64)> = Vec::with_capacity(n0);
        let mut pairs = 0u64;
        let mut accept = |v: u64, c: u64| -> bool {
            pairs += 1;
            if qb.insert(v, 0).is_none() {
                picked.push((v, c));
            }
            picked.len() == n0
        };
        let full = match branch.resolve(n0 + k, self.tail_sum) {
            Branch::Kernel => self.kernel_scan(w, &mut accept),
            _ => self.direct_scan(w, &mut accept),
        };
        if !full {
            return TestResult { cpd: None, pairs };
        }
        let f = Field::gf2();
        let mut q = Mat::zeros(&f, n0, n0);
        let mut c = Mat::zeros(&f, n0, k);
        for (i, &(vm, cm)) in picked.iter().enumerate() {
            for j in 0..n0 {
                q.set(i, j, (vm >> j & 1) as u32);
            }
            for r in 0..k {
                c.set(i, r, (cm >> r & 1) as u32);
            }
        }
        TestResult {
            cpd: Some(reconstruct(&self.tensor, &factors(), &q, &c)),
            pairs,
        }
    }

    fn direct_scan(&self, w: &[u64], sink: &mut dyn FnMut(u64, u64) -> bool) -> bool {
        let n0 = self.n0;
        let len = n0 + w.len();
        let m = self.tail_len * self.rest[0];
        for counter in 0..1u64 << len {
            let x = lex_coords(counter, len);
            let mut res = 0u64;
            for (i, &s) in self.slices.iter().enumerate() {
                if x >> i & 1 == 1 {
                    res ^= s;
                }
            }
            for (r, &wr) in w.iter().enumerate() {
                if x >> (n0 + r) & 1 == 1 {
                    res ^= wr;
                }
            }
            if rank_le1(res, &self.rest, m) {
                let v = x & ((1u64 << n0) - 1);
                if sink(v, x >> n0) {
                    return true;
                }
            }
        }
        false
    }

    fn kernel_scan(&self, w: &[u64], sink: &mut dyn FnMut(u64, u64) -> bool) -> bool {
        let n0 = self.n0;
        let k = w.len();
        let first_c = n0 + self.rest[0];
        let kmask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        let mut extra = Vec::with_capacity(k);
        let mut kernel = Vec::new();
        let mut scratch = None;
        for counter in 0..1u64 << self.tail_sum {
            let prep = match self.prepared.get(counter as usize) {
                Some(p) => p,
                None => scratch.insert(self.prepare(counter)),
            };
            extra.clear();
            kernel.clear();
            kernel.extend(prep.kernel.iter().map(|&c| self.canonical(c, k)));
            for (r, &col) in w.iter().enumerate() {
                if let Some(combo) = prep.basis.insert_over(&mut extra, col, 1u64 << (first_c + r)) {
                    kernel.push(self.canonical(combo, k));
                }
            }
            rref_bits(&mut kernel);
            for &row in &kernel {
                let v = row & ((1u64 << n0) - 1);
                let c = (row >> n0) & kmask;
                if sink(v, c) {
                    return true;
                }
            }
        }
        false
    }
}
