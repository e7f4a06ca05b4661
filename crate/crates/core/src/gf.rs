//! Arithmetic in prime fields GF(p).
//!
//! Elements are plain integers in `0..p`. That canonical representation also
//! fixes the total order used by every lexicographic enumeration in the crate.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Largest supported modulus.
pub const MAX_MODULUS: u64 = 1 << 16;

/// A field element, always reduced into `0..p` for its field.
pub type Elem = u32;

/// A prime field GF(p) with a precomputed inverse table.
#[derive(Clone)]
pub struct Field {
    p: u32,
    inverses: Arc<[u32]>,
}

impl Field {
    /// Builds GF(p), rejecting composite or out-of-range moduli.
    pub fn new(p: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidField(p));
        }
        let p = p as u32;
        let mut inverses = vec![0u32; p as usize];
        for x in 1..p {
            if inverses[x as usize] != 0 {
                continue;
            }
            let y = pow_mod(x, p - 2, p);
            inverses[x as usize] = y;
            inverses[y as usize] = x;
        }
        Ok(Self {
            p,
            inverses: inverses.into(),
        })
    }

    /// GF(2), the field used by every published experiment.
    pub fn gf2() -> Self {
        Self::new(2).expect("2 is prime")
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of elements as a `usize`.
    #[inline]
    pub fn order(&self) -> usize {
        self.p as usize
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        x < self.p
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, x: i64) -> Elem {
        x.rem_euclid(self.p as i64) as Elem
    }

    #[inline]
    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        let s = x + y;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        if x >= y {
            x - y
        } else {
            x + self.p - y
        }
    }

    #[inline]
    pub fn neg(&self, x: Elem) -> Elem {
        if x == 0 {
            0
        } else {
            self.p - x
        }
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        ((x as u64 * y as u64) % self.p as u64) as Elem
    }

    /// `x + a * b`, the elimination workhorse.
    #[inline]
    pub fn mul_add(&self, x: Elem, a: Elem, b: Elem) -> Elem {
        ((x as u64 + a as u64 * b as u64) % self.p as u64) as Elem
    }

    pub fn inv(&self, x: Elem) -> Result<Elem> {
        if x == 0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.inverses[x as usize])
        }
    }

    /// Inverse of a value already known to be nonzero.
    #[inline]
    pub(crate) fn inv_nonzero(&self, x: Elem) -> Elem {
        debug_assert!(x != 0);
        self.inverses[x as usize]
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.p
    }

    pub(crate) fn ensure_same(&self, other: &Field) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::FieldMismatch(self.p, other.p))
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(base: u32, mut exp: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        exp >>= 1;
    }
    acc as u32
}
