use std::fmt;

use crate::error::RingError;

/// Residue of an element of Z/p, always kept canonical (`0 <= r < p`).
pub type Elem = u32;

/// A prime modulus `2 < p < 2^31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u32,
    /// Number of products `(p-1)^2` that can be summed in a `u64` before reduction.
    lazy_terms: usize,
}

/// Default test modulus: the largest prime below 2^16.
pub const DEFAULT_MODULUS: u32 = 65521;

impl Modulus {
    pub fn new(p: u64) -> Result<Self, RingError> {
        if p <= 2 || p >= (1 << 31) || !is_prime(p) {
            return Err(RingError::InvalidModulus(p));
        }
        let sq = (p - 1) * (p - 1);
        let lazy_terms = (u64::MAX / sq).min(usize::MAX as u64) as usize;
        Ok(Modulus { p: p as u32, lazy_terms })
    }

    #[inline]
    pub fn value(&self) -> u32 {
        self.p
    }

    #[inline]
    pub(crate) fn lazy_terms(&self) -> usize {
        self.lazy_terms
    }

    /// Reduces an arbitrary signed integer.
    pub fn from_i64(&self, v: i64) -> Elem {
        v.rem_euclid(self.p as i64) as Elem
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> Elem {
        (v % self.p as u64) as Elem
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let s = a as u64 + b as u64;
        if s >= self.p as u64 {
            (s - self.p as u64) as Elem
        } else {
            s as Elem
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        ((a as u64 * b as u64) % self.p as u64) as Elem
    }

    /// `p - 1`, i.e. the residue of -1.
    #[inline]
    pub fn minus_one(&self) -> Elem {
        self.p - 1
    }
}

impl Default for Modulus {
    fn default() -> Self {
        Modulus::new(DEFAULT_MODULUS as u64).expect("65521 is prime")
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
