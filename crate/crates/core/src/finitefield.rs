//! Arithmetic in `F_p` and `F_{p^2}`.
//!
//! `F_{p^2}` is `F_p[x]/(x^2 - c)` with `c` the smallest positive quadratic
//! nonresidue for odd `p`, and `F_2[x]/(x^2 + x + 1)` for `p = 2`. The choice is
//! fixed so reductions (and hence certificates) are reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{invmod, is_prime, kronecker, mulmod, powmod, reduce_i64};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GFElement(pub [u64; 2]);

impl GFElement {
    pub const ZERO: GFElement = GFElement([0, 0]);
    pub const ONE: GFElement = GFElement([1, 0]);

    pub fn is_zero(self) -> bool {
        self.0 == [0, 0]
    }

    pub fn coords(self) -> [u64; 2] {
        self.0
    }
}

impl fmt::Display for GFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0[1] == 0 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "{}+{}x", self.0[0], self.0[1])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaloisField {
    p: u64,
    f: u32,
    /// For odd `p`: the constant `c` in `x^2 - c`. Unused when `p = 2`.
    c: u64,
}

pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&c| kronecker(c as i64, p) == -1).expect("odd prime has a nonresidue")
}

impl GaloisField {
    pub fn new(p: u64, f: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        if !(1..=2).contains(&f) {
            return Err(Error::InvalidArgument(format!("residue degree {f} not in {{1,2}}")));
        }
        if f == 2 && p.checked_mul(p).is_none() {
            return Err(Error::Overflow(format!("{p}^2")));
        }
        let c = if f == 2 && p != 2 { smallest_nonresidue(p) } else { 0 };
        Ok(GaloisField { p, f, c })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.f
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.f)
    }

    /// Coefficients `(c0, c1)` of the monic modulus `x^2 + c1 x + c0`; `None` for prime fields.
    pub fn modulus(&self) -> Option<(u64, u64)> {
        match (self.f, self.p) {
            (1, _) => None,
            (_, 2) => Some((1, 1)),
            _ => Some(((self.p - self.c) % self.p, 0)),
        }
    }

    /// The constant `c` with `x^2 = c` (odd `p`, `f = 2`).
    pub fn nonresidue(&self) -> u64 {
        self.c
    }

    pub fn int(&self, a: i64) -> GFElement {
        GFElement([reduce_i64(a, self.p), 0])
    }

    pub fn elem(&self, c0: u64, c1: u64) -> GFElement {
        if self.f == 1 {
            GFElement([c0 % self.p, 0])
        } else {
            GFElement([c0 % self.p, c1 % self.p])
        }
    }

    /// The generator `x` of `F_{p^2}` over `F_p`.
    pub fn gen(&self) -> GFElement {
        assert_eq!(self.f, 2);
        GFElement([0, 1])
    }

    /// Element with index `i` in `[0, q)`.
    pub fn from_index(&self, i: u64) -> GFElement {
        GFElement([i % self.p, if self.f == 2 { (i / self.p) % self.p } else { 0 }])
    }

    pub fn elements(&self) -> impl Iterator<Item = GFElement> + '_ {
        (0..self.order()).map(move |i| self.from_index(i))
    }

    #[inline]
    pub fn add(&self, a: GFElement, b: GFElement) -> GFElement {
        let p = self.p;
        let s0 = a.0[0] + b.0[0];
        let s1 = a.0[1] + b.0[1];
        GFElement([if s0 >= p { s0 - p } else { s0 }, if s1 >= p { s1 - p } else { s1 }])
    }

    #[inline]
    pub fn neg(&self, a: GFElement) -> GFElement {
        let p = self.p;
        GFElement([if a.0[0] == 0 { 0 } else { p - a.0[0] }, if a.0[1] == 0 { 0 } else { p - a.0[1] }])
    }

    #[inline]
    pub fn sub(&self, a: GFElement, b: GFElement) -> GFElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: GFElement, b: GFElement) -> GFElement {
        let p = self.p;
        if self.f == 1 {
            return GFElement([mulmod(a.0[0], b.0[0], p), 0]);
        }
        let a0b0 = mulmod(a.0[0], b.0[0], p);
        let a1b1 = mulmod(a.0[1], b.0[1], p);
        let cross = (mulmod(a.0[0], b.0[1], p) + mulmod(a.0[1], b.0[0], p)) % p;
        if p == 2 {
            // x^2 = x + 1
            GFElement([(a0b0 + a1b1) % 2, (cross + a1b1) % 2])
        } else {
            GFElement([(a0b0 + mulmod(self.c, a1b1, p)) % p, cross])
        }
    }

    pub fn square(&self, a: GFElement) -> GFElement {
        self.mul(a, a)
    }

    pub fn mul_int(&self, a: GFElement, k: i64) -> GFElement {
        self.mul(a, self.int(k))
    }

    pub fn pow(&self, a: GFElement, mut e: u64) -> GFElement {
        let mut acc = GFElement::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Norm to `F_p`.
    pub fn norm(&self, a: GFElement) -> u64 {
        if self.f == 1 {
            return a.0[0];
        }
        self.mul(a, self.frobenius(a)).0[0]
    }

    pub fn frobenius(&self, a: GFElement) -> GFElement {
        if self.f == 1 {
            return a;
        }
        if self.p == 2 {
            // (a0 + a1 x)^2 = a0 + a1 (x + 1)
            GFElement([(a.0[0] + a.0[1]) % 2, a.0[1]])
        } else {
            // x^p = c^((p-1)/2) x = -x
            GFElement([a.0[0], if a.0[1] == 0 { 0 } else { self.p - a.0[1] }])
        }
    }

    pub fn inv(&self, a: GFElement) -> Result<GFElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.f == 1 {
            return Ok(GFElement([invmod(a.0[0], self.p).unwrap(), 0]));
        }
        let conj = self.frobenius(a);
        let n = self.mul(a, conj).0[0];
        let ninv = invmod(n, self.p).unwrap();
        Ok(self.mul(conj, GFElement([ninv, 0])))
    }

    pub fn div(&self, a: GFElement, b: GFElement) -> Result<GFElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Quadratic character: 0 for zero, 1 for nonzero squares, -1 otherwise.
    pub fn chi(&self, a: GFElement) -> i32 {
        if a.is_zero() {
            return 0;
        }
        if self.p == 2 {
            return 1;
        }
        // a is a square in F_{p^2} iff its norm is a square in F_p
        let n = self.norm(a);
        if powmod(n, (self.p - 1) / 2, self.p) == 1 {
            1
        } else {
            -1
        }
    }

    pub fn is_square(&self, a: GFElement) -> bool {
        self.chi(a) >= 0
    }

    /// Absolute trace to `F_2` (characteristic 2 only).
    pub fn trace_f2(&self, a: GFElement) -> u64 {
        assert_eq!(self.p, 2);
        if self.f == 1 {
            a.0[0]
        } else {
            self.add(a, self.frobenius(a)).0[0]
        }
    }

    /// Canonical square root: the lexicographically least coordinate vector
    /// among the roots, or `None` for nonsquares.
    pub fn sqrt(&self, a: GFElement) -> Option<GFElement> {
        if a.is_zero() {
            return Some(a);
        }
        if self.p == 2 {
            // squaring is a bijection; its inverse is a -> a^(q/2)
            return Some(self.pow(a, self.order() / 2));
        }
        if self.chi(a) != 1 {
            return None;
        }
        let r = if self.f == 1 { GFElement([sqrt_mod_prime(a.0[0], self.p)?, 0]) } else { self.sqrt_quadratic(a)? };
        let s = self.neg(r);
        Some(if s.0 < r.0 { s } else { r })
    }

    fn sqrt_quadratic(&self, a: GFElement) -> Option<GFElement> {
        let p = self.p;
        let [a0, a1] = a.0;
        if a1 == 0 {
            if let Some(s) = sqrt_mod_prime(a0, p) {
                return Some(GFElement([s, 0]));
            }
            // a0 = c * v^2
            let v = sqrt_mod_prime(mulmod(a0, invmod(self.c, p)?, p), p)?;
            return Some(GFElement([0, v]));
        }
        // (u + v x)^2 = u^2 + c v^2 + 2uv x
        let n = sqrt_mod_prime(self.norm(a), p)?;
        let half = invmod(2, p)?;
        for cand in [(a0 + n) % p, (a0 + p - n) % p] {
            let u2 = mulmod(cand, half, p);
            if let Some(u) = sqrt_mod_prime(u2, p) {
                if u == 0 {
                    continue;
                }
                let v = mulmod(a1, invmod(mulmod(2, u, p), p)?, p);
                let r = GFElement([u, v]);
                if self.square(r) == a {
                    return Some(r);
                }
            }
        }
        None
    }
}

/// Tonelli-Shanks square root modulo an odd prime (any root).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = smallest_nonresidue(p);
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt, p);
            i += 1;
        }
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}
