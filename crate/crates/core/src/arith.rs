//! Exact integer utilities and upward-rounded real arithmetic.
//!
//! Everything that feeds a prime-enumeration bound goes through [`UpperReal`],
//! whose operations only ever round toward +∞. Integer work is either exact
//! `u64`/`i64` arithmetic with overflow checks or `num-bigint`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// modular arithmetic on machine words

#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    if m <= (1 << 32) {
        a * b % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

pub fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn invmod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn reduce_i64(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

pub fn reduce_bigint(a: &BigInt, m: u64) -> u64 {
    let r = a.mod_floor(&BigInt::from(m));
    r.to_u64().expect("residue fits")
}

// ---------------------------------------------------------------------------
// Kronecker symbol and discriminants

/// The Kronecker symbol `(a | n)` for `n >= 1`.
pub fn kronecker(a: i64, n: u64) -> i32 {
    assert!(n >= 1, "kronecker requires n >= 1");
    let mut n = n;
    let mut a = a as i128;
    let mut result = 1i32;
    // factor out powers of two from n
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a.rem_euclid(2) == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r8 = a.rem_euclid(8);
            if r8 == 3 || r8 == 5 {
                result = -result;
            }
        }
        n >>= twos;
    }
    // n is now odd: Jacobi symbol
    let mut m = n as i128;
    a = a.rem_euclid(m);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r8 = m % 8;
            if r8 == 3 || r8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

/// Squarefree kernel of a nonzero integer, keeping its sign.
pub fn squarefree_kernel(d: i64) -> Result<i64> {
    if d == 0 {
        return Err(Error::NotQuadratic("0".into()));
    }
    let mut k: i64 = d.signum();
    for (p, e) in factor_u64(d.unsigned_abs()) {
        if e % 2 == 1 {
            k = k.checked_mul(p as i64).ok_or_else(|| Error::Overflow(d.to_string()))?;
        }
    }
    Ok(k)
}

/// Discriminant of the quadratic field `Q(sqrt d)`.
pub fn fundamental_discriminant(d: i64) -> Result<i64> {
    if d == 0 || (d > 0 && is_square_u64(d as u64)) {
        return Err(Error::NotQuadratic(d.to_string()));
    }
    let m = squarefree_kernel(d)?;
    if m.rem_euclid(4) == 1 {
        Ok(m)
    } else {
        m.checked_mul(4).ok_or_else(|| Error::Overflow(d.to_string()))
    }
}

/// Squarefree kernel of a fundamental discriminant.
pub fn kernel_of_discriminant(disc: i64) -> i64 {
    if disc.rem_euclid(4) == 0 {
        disc / 4
    } else {
        disc
    }
}

// ---------------------------------------------------------------------------
// square roots and primality

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

pub fn isqrt_big(n: &BigUint) -> BigUint {
    n.sqrt()
}

pub fn is_square_u64(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Deterministic primality for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES[..12] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Deterministic primality below 3.3e24 (first thirteen prime bases);
/// larger inputs are rejected.
pub fn is_prime_big(n: &BigUint) -> Result<bool> {
    if let Some(small) = n.to_u64() {
        return Ok(is_prime(small));
    }
    let limit: BigUint = "3317044064679887385961981".parse().unwrap();
    if *n >= limit {
        return Err(Error::Overflow(format!("primality of {n} is outside the proved range")));
    }
    let one = BigUint::one();
    let n1 = n - &one;
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return Ok(false);
        }
    }
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for &a in &MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

fn pollard_rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of a machine word, ascending.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut n = n;
    if n <= 1 {
        return out;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = vec![n];
    let mut primes = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
            continue;
        }
        let d = pollard_rho_u64(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

fn pollard_rho_big(n: &BigUint) -> BigUint {
    let two = BigUint::from(2u32);
    if (n % &two).is_zero() {
        return two;
    }
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let (mut x, mut y, mut d) = (two.clone(), two.clone(), BigUint::one());
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1u32;
    }
}

/// Prime factorization of a nonzero big integer (sign ignored). Every prime
/// factor must fit in a `u64`.
pub fn factor_big(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let mut m = n.magnitude().clone();
    if m.is_zero() {
        return Err(Error::InvalidArgument("cannot factor zero".into()));
    }
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut p = 2u64;
    while p < 1 << 12 {
        if (&m % p).is_zero() {
            let mut e = 0;
            while (&m % p).is_zero() {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![m];
    let mut primes: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(small) = m.to_u64() {
            for (q, e) in factor_u64(small) {
                primes.extend(std::iter::repeat_n(q, e as usize));
            }
            continue;
        }
        if is_prime_big(&m)? {
            return Err(Error::Overflow(format!("prime factor {m} exceeds 64 bits")));
        }
        let d = pollard_rho_big(&m);
        let rest = &m / &d;
        stack.push(d);
        stack.push(rest);
    }
    primes.sort_unstable();
    for p in primes {
        match out.iter_mut().find(|(q, _)| *q == p) {
            Some((_, e)) => *e += 1,
            None => out.push((p, 1)),
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// The p-adic valuation of a nonzero big integer.
pub fn valuation_big(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero());
    let mut m = n.magnitude().clone();
    let mut v = 0;
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    v
}

/// p-adic valuation of a nonzero rational.
pub fn valuation_rational(x: &BigRational, p: u64) -> i64 {
    valuation_big(x.numer(), p) as i64 - valuation_big(x.denom(), p) as i64
}

// ---------------------------------------------------------------------------
// prime streaming

/// Segmented sieve yielding every prime `<= limit` in increasing order.
#[derive(Clone, Debug)]
pub struct PrimeStream {
    limit: u64,
    base: Vec<u64>,
    seg_lo: u64,
    seg: Vec<bool>,
    pos: usize,
}

const SEGMENT: u64 = 1 << 16;

impl PrimeStream {
    pub fn new(limit: u64) -> Self {
        Self::starting_at(2, limit)
    }

    /// Primes in `[start, limit]`.
    pub fn starting_at(start: u64, limit: u64) -> Self {
        let root = isqrt(limit) + 1;
        let mut small = vec![true; root as usize + 1];
        let mut base = Vec::new();
        for i in 2..=root as usize {
            if small[i] {
                base.push(i as u64);
                let mut j = i * i;
                while j <= root as usize {
                    small[j] = false;
                    j += i;
                }
            }
        }
        let mut s = PrimeStream { limit, base, seg_lo: start.max(2), seg: Vec::new(), pos: 0 };
        s.fill();
        s
    }

    fn fill(&mut self) {
        self.seg.clear();
        self.pos = 0;
        if self.seg_lo > self.limit {
            return;
        }
        let hi = (self.seg_lo + SEGMENT - 1).min(self.limit);
        let len = (hi - self.seg_lo + 1) as usize;
        self.seg.resize(len, true);
        for &p in &self.base {
            if p * p > hi {
                break;
            }
            let mut start = (self.seg_lo.div_ceil(p) * p).max(p * p);
            while start <= hi {
                self.seg[(start - self.seg_lo) as usize] = false;
                start += p;
            }
        }
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if self.seg.is_empty() {
                return None;
            }
            while self.pos < self.seg.len() {
                let i = self.pos;
                self.pos += 1;
                if self.seg[i] {
                    return Some(self.seg_lo + i as u64);
                }
            }
            self.seg_lo += self.seg.len() as u64;
            self.fill();
        }
    }
}

pub fn primes_stream(limit: u64) -> PrimeStream {
    PrimeStream::new(limit)
}

// ---------------------------------------------------------------------------
// upward-rounded reals

/// A real number stored as an `f64` that is never below the true value of
/// the expression that produced it.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UpperReal(f64);

fn up(x: f64) -> f64 {
    x.next_up()
}

fn down(x: f64) -> f64 {
    x.next_down()
}

fn add_dir(a: f64, b: f64, upward: bool) -> f64 {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if upward && err > 0.0 {
        up(s)
    } else if !upward && err < 0.0 {
        down(s)
    } else {
        s
    }
}

fn mul_dir(a: f64, b: f64, upward: bool) -> f64 {
    let p = a * b;
    let err = a.mul_add(b, -p);
    if upward && err > 0.0 {
        up(p)
    } else if !upward && err < 0.0 {
        down(p)
    } else {
        p
    }
}

const LN2_HI: f64 = 0.693_147_180_559_945_4; // > ln 2
const LN2_LO: f64 = 0.693_147_180_559_945_2; // < ln 2

/// ln of a positive f64 that is exactly representable; rounded in the
/// requested direction with a few ulps of margin for libm error.
fn ln_f64_dir(x: f64, upward: bool) -> f64 {
    if x == 1.0 {
        return 0.0;
    }
    let l = x.ln();
    if upward {
        up(up(up(l)))
    } else {
        down(down(down(l)))
    }
}

fn ln_biguint_dir(n: &BigUint, upward: bool) -> f64 {
    assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 53 {
        return ln_f64_dir(n.to_u64().unwrap() as f64, upward);
    }
    let shift = bits - 53;
    let mant = (n >> shift).to_u64().unwrap();
    let k = shift as f64;
    if upward {
        // n < (mant + 1) * 2^shift, and mant + 1 <= 2^53 is exact
        let head = ln_f64_dir((mant + 1) as f64, true);
        add_dir(head, mul_dir(k, LN2_HI, true), true)
    } else {
        let head = ln_f64_dir(mant as f64, false);
        add_dir(head, mul_dir(k, LN2_LO, false), false)
    }
}

impl UpperReal {
    pub const ZERO: UpperReal = UpperReal(0.0);

    /// Wrap a value that is already exact (or already an upper bound).
    pub fn exact(v: f64) -> Self {
        UpperReal(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn plus(self, other: UpperReal) -> UpperReal {
        UpperReal(add_dir(self.0, other.0, true))
    }

    /// Product; both factors must be nonnegative for the bound to hold.
    pub fn times(self, other: UpperReal) -> UpperReal {
        debug_assert!(self.0 >= 0.0 && other.0 >= 0.0);
        UpperReal(mul_dir(self.0, other.0, true))
    }

    pub fn mul_f64(self, k: f64) -> UpperReal {
        self.times(UpperReal::exact(k))
    }

    pub fn square(self) -> UpperReal {
        self.times(self)
    }

    pub fn min(self, other: UpperReal) -> UpperReal {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }

    /// Smallest integer not below the value, if it fits in a `u64`.
    pub fn ceil_u64(self) -> Option<u64> {
        let c = self.0.ceil();
        if c.is_finite() && (0.0..1.8e19).contains(&c) {
            Some(c as u64)
        } else {
            None
        }
    }
}

/// Natural logarithm of a positive integer, rounded up.
pub fn log_upper_int(n: &BigUint) -> UpperReal {
    UpperReal(ln_biguint_dir(n, true))
}

pub fn log_upper_u64(n: u64) -> UpperReal {
    log_upper_int(&BigUint::from(n))
}

/// Natural logarithm of a positive rational, rounded up.
pub fn log_upper(x: &BigRational) -> Result<UpperReal> {
    if !x.is_positive() {
        return Err(Error::InvalidArgument(format!("log of nonpositive value {x}")));
    }
    if x.is_one() {
        return Ok(UpperReal::ZERO);
    }
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    let hi = ln_biguint_dir(num, true);
    if den.is_one() {
        return Ok(UpperReal(hi));
    }
    let lo = ln_biguint_dir(den, false);
    Ok(UpperReal(add_dir(hi, -lo, true)))
}

/// Convenience: a `BigInt` from a sign and magnitude.
pub fn signed(sign: Sign, mag: BigUint) -> BigInt {
    BigInt::from_biguint(sign, mag)
}
