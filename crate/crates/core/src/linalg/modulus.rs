use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest supported `p^s`. Products of two residues are formed in `u128`.
pub const MAX_ORDER: u64 = 1 << 62;

/// The coefficient ring `Z/p^s` for an odd prime `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawModulus", into = "RawModulus")]
pub struct RingModulus {
    p: u64,
    s: u32,
    order: u64,
}

#[derive(Serialize, Deserialize)]
struct RawModulus {
    p: u64,
    s: u32,
}

impl TryFrom<RawModulus> for RingModulus {
    type Error = crate::Error;
    fn try_from(raw: RawModulus) -> Result<Self> {
        RingModulus::new(raw.p, raw.s)
    }
}

impl From<RingModulus> for RawModulus {
    fn from(m: RingModulus) -> Self {
        RawModulus { p: m.p, s: m.s }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `n` as `p^e` for a prime `p`, if possible.
pub fn prime_power_decompose(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= n && !n.is_multiple_of(p) {
        p += 1;
    }
    if !n.is_multiple_of(p) {
        p = n;
    }
    let mut m = n;
    let mut e = 0;
    while m.is_multiple_of(p) {
        m /= p;
        e += 1;
    }
    (m == 1).then_some((p, e))
}

impl RingModulus {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return invalid(format!("{p} is not an odd prime"));
        }
        if s == 0 {
            return invalid("precision exponent must be positive");
        }
        let mut order: u64 = 1;
        for _ in 0..s {
            order = match order.checked_mul(p) {
                Some(o) if o <= MAX_ORDER => o,
                _ => return invalid(format!("{p}^{s} exceeds the supported range")),
            };
        }
        Ok(RingModulus { p, s, order })
    }

    /// Builds the modulus from `p^s` given as a single integer.
    pub fn from_order(order: u64) -> Result<Self> {
        match prime_power_decompose(order) {
            Some((p, s)) => RingModulus::new(p, s),
            None => invalid(format!("{order} is not a prime power")),
        }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn s(&self) -> u32 {
        self.s
    }

    /// `p^s`.
    #[inline]
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn with_precision(&self, s: u32) -> Result<Self> {
        RingModulus::new(self.p, s)
    }

    pub fn residue_field(&self) -> Self {
        RingModulus { p: self.p, s: 1, order: self.p }
    }

    pub fn pow_p(&self, e: u32) -> u64 {
        if e >= self.s {
            0
        } else {
            self.p.pow(e)
        }
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.order
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.order as i64) as u64
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.order as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.order {
            s - self.order
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.order - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.order - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.order as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.order;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    #[inline]
    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// p-adic valuation of a residue; `s` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.s;
        }
        let mut v = 0;
        let mut a = a;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (mut old_r, mut r) = (a as i128, self.order as i128);
        let (mut old_t, mut t) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_t, t) = (t, old_t - q * t);
        }
        Some(self.reduce_i128(old_t))
    }

    /// Inverse of 2, always available since p is odd.
    pub fn half(&self) -> u64 {
        self.order.div_ceil(2)
    }

    /// Writes a nonzero residue as `p^v * unit` and returns `(v, unit)`.
    pub fn split(&self, a: u64) -> (u32, u64) {
        let v = self.valuation(a);
        (v, a / self.p.pow(v))
    }

    /// Reduces a residue of a finer modulus with the same prime.
    pub fn reduce_from(&self, a: u64) -> u64 {
        a % self.order
    }
}

impl std::fmt::Display for RingModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.s)
    }
}
