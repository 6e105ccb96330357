//! Completion `K_P` of a multiquadratic field at a prime with `e <= 2`,
//! truncated at a fixed `p`-adic precision.
//!
//! `K_P = U[pi]` where `U` is `Q_p` or its unramified quadratic extension
//! `Q_p(w)`. For odd `p`, `w^2 = c` with `c` the least quadratic nonresidue;
//! for `p = 2`, `w^2 + w + 1 = 0`. These match the residue field models in
//! [`crate::finitefield`], so residues of `w` are the generator there.
//! The uniformizer satisfies `pi^2 = a pi + b` with rational integers `a, b`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{NFElement, NumberField, PrimeIdeal};
use crate::arith::{squarefree_kernel, valuation_big};
use crate::error::{Error, Result};
use crate::finitefield::{GFElement, GaloisField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Omega {
    Trivial,
    Sqrt,
    Cyclotomic,
}

/// Element `x0 + x1 w` of the unramified ring, coordinates in `[0, p^prec)`.
pub type Unr = [BigInt; 2];

/// Element `alpha + beta pi` of the ring of integers of `K_P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LElem {
    pub alpha: Unr,
    pub beta: Unr,
}

/// `y / p^shift` with `y` integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalNum {
    pub y: LElem,
    pub shift: u32,
}

#[derive(Clone, Debug)]
pub struct LocalField {
    p: u64,
    pb: BigInt,
    prec: u32,
    modulus: BigInt,
    e: u32,
    omega: Omega,
    c: BigInt,
    pi_a: BigInt,
    pi_b: BigInt,
    /// `(b / p)^{-1}` when `e = 2`.
    b_cofactor_inv: BigInt,
    /// Images of the basis elements `prod_{i in S} sqrt(m_i)`, indexed by mask.
    basis_images: Vec<LElem>,
    residue: GaloisField,
}

fn zero_u() -> Unr {
    [BigInt::zero(), BigInt::zero()]
}

impl LocalField {
    /// Completion of `k` at `prime`, keeping `prec` `p`-adic digits.
    pub fn new(k: &NumberField, prime: &PrimeIdeal, prec: u32) -> Result<Self> {
        let p = prime.p;
        if prime.e > 2 {
            return Err(Error::Unsupported(format!(
                "ramification index {} at {p} (all quadratic subfields ramify)",
                prime.e
            )));
        }
        let residue = prime.residue_field();
        let omega = match (prime.f, p) {
            (1, _) => Omega::Trivial,
            (_, 2) => Omega::Cyclotomic,
            _ => Omega::Sqrt,
        };
        let pb = BigInt::from(p);
        let mut lf = LocalField {
            p,
            pb: pb.clone(),
            prec,
            modulus: pb.pow(prec),
            e: prime.e,
            omega,
            c: BigInt::from(residue.nonresidue()),
            pi_a: BigInt::zero(),
            pi_b: pb.clone(),
            b_cofactor_inv: BigInt::one(),
            basis_images: Vec::new(),
            residue,
        };

        let kernels = k.kernels();
        let mut roots: Vec<LElem> = Vec::with_capacity(kernels.len());
        if prime.e == 1 {
            for &m in kernels {
                roots.push(lf.lift_unr(lf.unit_sqrt_int(m)?));
            }
        } else {
            let r = (0..kernels.len()).find(|&i| is_ramified_kernel(kernels[i], p)).expect("some generator ramifies");
            let m_r = kernels[r];
            let rho_r = if p == 2 && m_r.rem_euclid(4) == 3 {
                // pi = sqrt(m_r) - 1, pi^2 = -2 pi + (m_r - 1)
                lf.pi_a = BigInt::from(-2);
                lf.pi_b = BigInt::from(m_r - 1);
                LElem { alpha: lf.u_int(1), beta: lf.u_int(1) }
            } else {
                lf.pi_a = BigInt::zero();
                lf.pi_b = BigInt::from(m_r);
                LElem { alpha: zero_u(), beta: lf.u_int(1) }
            };
            let cofactor = &lf.pi_b / &lf.pb;
            debug_assert!((&lf.pi_b % &lf.pb).is_zero() && !(&cofactor % &lf.pb).is_zero());
            lf.b_cofactor_inv = lf.inv_int(&cofactor)?;
            for (j, &m_j) in kernels.iter().enumerate() {
                if j == r {
                    roots.push(rho_r.clone());
                } else if !is_ramified_kernel(m_j, p) {
                    roots.push(lf.lift_unr(lf.unit_sqrt_int(m_j)?));
                } else {
                    // sqrt(m_j) = sqrt(m_r) sqrt(q) t / m_r with m_r m_j = q t^2
                    let prod = m_r * m_j;
                    let q = squarefree_kernel(prod)?;
                    let t = crate::arith::isqrt((prod / q) as u64) as i64;
                    let mut num = BigInt::from(t);
                    let mut den = BigInt::from(m_r);
                    while (&num % &lf.pb).is_zero() && (&den % &lf.pb).is_zero() {
                        num /= &lf.pb;
                        den /= &lf.pb;
                    }
                    let ratio = lf.red(&(num * lf.inv_int(&den)?));
                    let sq = lf.lift_unr(lf.unit_sqrt_int(q)?);
                    let rho = lf.mul(&lf.mul(&rho_r, &sq), &lf.lift_unr([ratio, BigInt::zero()]));
                    roots.push(rho);
                }
            }
        }
        for (i, rho) in roots.iter_mut().enumerate() {
            if prime.signs[i] < 0 {
                *rho = lf.neg(rho);
            }
            debug_assert_eq!(lf.residue_of(rho), prime.embedding[i], "local root disagrees with residue embedding");
        }
        let mut images = Vec::with_capacity(k.degree());
        for mask in 0..k.degree() {
            let mut acc = lf.one();
            for (i, rho) in roots.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc = lf.mul(&acc, rho);
                }
            }
            images.push(acc);
        }
        lf.basis_images = images;
        Ok(lf)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn residue_field(&self) -> &GaloisField {
        &self.residue
    }

    // -- unramified ring ----------------------------------------------------

    fn red(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.modulus)
    }

    fn u_int(&self, n: i64) -> Unr {
        [self.red(&BigInt::from(n)), BigInt::zero()]
    }

    fn u_add(&self, x: &Unr, y: &Unr) -> Unr {
        [self.red(&(&x[0] + &y[0])), self.red(&(&x[1] + &y[1]))]
    }

    fn u_sub(&self, x: &Unr, y: &Unr) -> Unr {
        [self.red(&(&x[0] - &y[0])), self.red(&(&x[1] - &y[1]))]
    }

    fn u_scale(&self, x: &Unr, k: &BigInt) -> Unr {
        [self.red(&(&x[0] * k)), self.red(&(&x[1] * k))]
    }

    fn u_mul(&self, x: &Unr, y: &Unr) -> Unr {
        let a = &x[0] * &y[0];
        let d = &x[1] * &y[1];
        let cross = &x[0] * &y[1] + &x[1] * &y[0];
        match self.omega {
            Omega::Trivial => [self.red(&a), BigInt::zero()],
            Omega::Sqrt => [self.red(&(a + &self.c * d)), self.red(&cross)],
            Omega::Cyclotomic => [self.red(&(a - &d)), self.red(&(cross - d))],
        }
    }

    fn u_conj(&self, x: &Unr) -> Unr {
        match self.omega {
            Omega::Trivial => x.clone(),
            Omega::Sqrt => [x[0].clone(), self.red(&-&x[1])],
            Omega::Cyclotomic => [self.red(&(&x[0] - &x[1])), self.red(&-&x[1])],
        }
    }

    fn u_valuation(&self, x: &Unr) -> Option<u32> {
        let v = |n: &BigInt| if n.is_zero() { None } else { Some(valuation_big(n, self.p)) };
        match (v(&x[0]), v(&x[1])) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    fn u_div_p(&self, x: &Unr) -> Unr {
        debug_assert!((&x[0] % &self.pb).is_zero() && (&x[1] % &self.pb).is_zero());
        [&x[0] / &self.pb, &x[1] / &self.pb]
    }

    fn inv_int(&self, n: &BigInt) -> Result<BigInt> {
        self.red(n).modinv(&self.modulus).ok_or(Error::DivisionByZero)
    }

    fn u_inv(&self, x: &Unr) -> Result<Unr> {
        let conj = self.u_conj(x);
        let n = self.u_mul(x, &conj);
        debug_assert!(n[1].is_zero());
        Ok(self.u_scale(&conj, &self.inv_int(&n[0])?))
    }

    /// Square root of a rational integer unit that is a square in `U`,
    /// normalized to the canonical residue root.
    fn unit_sqrt_int(&self, m: i64) -> Result<Unr> {
        if self.p == 2 {
            if m.rem_euclid(8) == 1 {
                return Ok([self.sqrt_2adic_1mod8(&BigInt::from(m)), BigInt::zero()]);
            }
            if m.rem_euclid(8) == 5 && self.omega == Omega::Cyclotomic {
                // sqrt(m) = (2w + 1) sqrt(m / -3), since (2w + 1)^2 = -3
                let u = self.red(&(BigInt::from(m) * self.inv_int(&BigInt::from(-3))?));
                let s = self.sqrt_2adic_1mod8(&u);
                return Ok(self.u_mul(&[s, BigInt::zero()], &[BigInt::one(), BigInt::from(2)]));
            }
            return Err(Error::Unsupported(format!("{m} has no square root in the unramified ring at 2")));
        }
        let target = self.u_int(m);
        let r0 = self
            .residue
            .sqrt(self.residue.int(m))
            .ok_or_else(|| Error::Unsupported(format!("{m} is not a square mod {}", self.p)))?;
        if r0.is_zero() {
            return Err(Error::Unsupported(format!("{m} is not a unit at {}", self.p)));
        }
        let mut x: Unr = [BigInt::from(r0.0[0]), BigInt::from(r0.0[1])];
        let half = self.inv_int(&BigInt::from(2))?;
        let mut digits = 1u32;
        while digits < self.prec {
            // x <- (x + m / x) / 2
            let q = self.u_mul(&target, &self.u_inv(&x)?);
            x = self.u_scale(&self.u_add(&x, &q), &half);
            digits *= 2;
        }
        Ok(x)
    }

    /// The root `= 1 mod 4` of a 2-adic integer `u = 1 mod 8`.
    fn sqrt_2adic_1mod8(&self, u: &BigInt) -> BigInt {
        let u = self.red(u);
        let mut x = BigInt::one();
        for k in 3..=self.prec {
            let m = BigInt::one() << (k + 1);
            if !((&x * &x - &u).mod_floor(&m)).is_zero() {
                x += BigInt::one() << (k - 1);
            }
        }
        self.red(&x)
    }

    // -- the completion ------------------------------------------------------

    fn lift_unr(&self, alpha: Unr) -> LElem {
        LElem { alpha, beta: zero_u() }
    }

    pub fn zero(&self) -> LElem {
        LElem { alpha: zero_u(), beta: zero_u() }
    }

    pub fn one(&self) -> LElem {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> LElem {
        self.lift_unr(self.u_int(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> LElem {
        self.lift_unr([self.red(n), BigInt::zero()])
    }

    /// The uniformizer.
    pub fn pi(&self) -> LElem {
        if self.e == 1 {
            self.lift_unr([self.pb.clone(), BigInt::zero()])
        } else {
            LElem { alpha: zero_u(), beta: self.u_int(1) }
        }
    }

    /// Teichmuller-free lift of a residue: coordinates taken as integers.
    pub fn lift(&self, g: GFElement) -> LElem {
        self.lift_unr([BigInt::from(g.0[0]), BigInt::from(g.0[1])])
    }

    pub fn add(&self, x: &LElem, y: &LElem) -> LElem {
        LElem { alpha: self.u_add(&x.alpha, &y.alpha), beta: self.u_add(&x.beta, &y.beta) }
    }

    pub fn sub(&self, x: &LElem, y: &LElem) -> LElem {
        LElem { alpha: self.u_sub(&x.alpha, &y.alpha), beta: self.u_sub(&x.beta, &y.beta) }
    }

    pub fn neg(&self, x: &LElem) -> LElem {
        self.sub(&self.zero(), x)
    }

    pub fn mul_int(&self, x: &LElem, n: i64) -> LElem {
        let k = BigInt::from(n);
        LElem { alpha: self.u_scale(&x.alpha, &k), beta: self.u_scale(&x.beta, &k) }
    }

    pub fn mul(&self, x: &LElem, y: &LElem) -> LElem {
        if self.e == 1 {
            return self.lift_unr(self.u_mul(&x.alpha, &y.alpha));
        }
        // (a + b pi)(c + d pi) = ac + bd B + (ad + bc + bd A) pi
        let ac = self.u_mul(&x.alpha, &y.alpha);
        let bd = self.u_mul(&x.beta, &y.beta);
        let ad = self.u_mul(&x.alpha, &y.beta);
        let bc = self.u_mul(&x.beta, &y.alpha);
        LElem {
            alpha: self.u_add(&ac, &self.u_scale(&bd, &self.pi_b)),
            beta: self.u_add(&self.u_add(&ad, &bc), &self.u_scale(&bd, &self.pi_a)),
        }
    }

    pub fn square(&self, x: &LElem) -> LElem {
        self.mul(x, x)
    }

    pub fn pow(&self, x: &LElem, mut n: u32) -> LElem {
        let mut base = x.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.square(&base);
            n >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, x: &LElem) -> bool {
        x.alpha.iter().chain(&x.beta).all(Zero::is_zero)
    }

    /// Valuation normalized so that `v(pi) = 1`; `None` for zero at this precision.
    pub fn valuation(&self, x: &LElem) -> Option<u32> {
        let va = self.u_valuation(&x.alpha).map(|v| self.e * v);
        let vb = if self.e == 1 { None } else { self.u_valuation(&x.beta).map(|v| 2 * v + 1) };
        match (va, vb) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    pub fn is_unit(&self, x: &LElem) -> bool {
        self.valuation(x) == Some(0)
    }

    /// `x / pi`, for `v(x) >= 1`.
    pub fn div_pi(&self, x: &LElem) -> Result<LElem> {
        if self.valuation(x) == Some(0) {
            return Err(Error::NotIntegral(self.p));
        }
        if self.e == 1 {
            return Ok(self.lift_unr(self.u_div_p(&x.alpha)));
        }
        // 1/pi = (pi - A) / B, so (a + b pi)/pi = (b - A a/B) + (a/B) pi
        let a_over_b = self.u_scale(&self.u_div_p(&x.alpha), &self.b_cofactor_inv);
        Ok(LElem { alpha: self.u_sub(&x.beta, &self.u_scale(&a_over_b, &self.pi_a)), beta: a_over_b })
    }

    pub fn div_pi_pow(&self, x: &LElem, n: u32) -> Result<LElem> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.div_pi(&y)?;
        }
        Ok(y)
    }

    pub fn mul_pi_pow(&self, x: &LElem, n: u32) -> LElem {
        self.mul(x, &self.pow(&self.pi(), n))
    }

    pub fn inv_unit(&self, x: &LElem) -> Result<LElem> {
        if !self.is_unit(x) {
            return Err(Error::DivisionByZero);
        }
        if self.e == 1 {
            return Ok(self.lift_unr(self.u_inv(&x.alpha)?));
        }
        // conjugate over U: pi -> A - pi
        let conj = LElem {
            alpha: self.u_add(&x.alpha, &self.u_scale(&x.beta, &self.pi_a)),
            beta: self.u_sub(&zero_u(), &x.beta),
        };
        let n = self.mul(x, &conj);
        debug_assert!(n.beta.iter().all(Zero::is_zero));
        let n_inv = self.u_inv(&n.alpha)?;
        Ok(self.mul(&conj, &self.lift_unr(n_inv)))
    }

    pub fn residue_of(&self, x: &LElem) -> GFElement {
        let p = &self.pb;
        let c = |n: &BigInt| u64::try_from(n.mod_floor(p)).expect("residue digit");
        self.residue.elem(c(&x.alpha[0]), c(&x.alpha[1]))
    }

    // -- embedding ----------------------------------------------------------

    /// Image of a global element as `y / p^shift`.
    pub fn embed(&self, x: &NFElement) -> Result<LocalNum> {
        if x.degree() != self.basis_images.len() {
            return Err(Error::FieldMismatch("element degree differs from local field".into()));
        }
        let mut shift = 0u32;
        for c in x.coords() {
            if !c.is_zero() {
                shift = shift.max(valuation_big(c.denom(), self.p));
            }
        }
        let pk = self.pb.pow(shift);
        let mut y = self.zero();
        for (mask, c) in x.coords().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut den = c.denom().clone();
            let mut num = c.numer() * &pk;
            while (&den % &self.pb).is_zero() {
                den /= &self.pb;
                num /= &self.pb;
            }
            let coeff = self.red(&(num * self.inv_int(&den)?));
            let term = self.mul(&self.basis_images[mask], &self.from_bigint(&coeff));
            y = self.add(&y, &term);
        }
        Ok(LocalNum { y, shift })
    }

    /// Valuation of a local number (`None` for zero at this precision).
    pub fn num_valuation(&self, x: &LocalNum) -> Option<i64> {
        self.valuation(&x.y).map(|v| v as i64 - (self.e * x.shift) as i64)
    }

    /// `x * pi^k` as an integral element; fails when the result is not integral.
    pub fn scaled_integral(&self, x: &LocalNum, k: i64) -> Result<LElem> {
        let mut y = x.y.clone();
        if let Some(v) = self.num_valuation(x) {
            if v + k < 0 {
                return Err(Error::NotIntegral(self.p));
            }
        } else {
            return Ok(self.zero());
        }
        if k >= 0 {
            y = self.mul_pi_pow(&y, k as u32);
        } else {
            y = self.div_pi_pow(&y, (-k) as u32)?;
        }
        // v(y) >= e * shift, so both coordinates are divisible by p^shift
        for _ in 0..x.shift {
            y = LElem { alpha: self.u_div_p(&y.alpha), beta: self.u_div_p(&y.beta) };
        }
        Ok(y)
    }

    /// Residue of a global element integral at this prime.
    pub fn residue(&self, x: &NFElement) -> Result<GFElement> {
        let n = self.embed(x)?;
        let y = self.scaled_integral(&n, 0)?;
        Ok(self.residue_of(&y))
    }
}

fn is_ramified_kernel(m: i64, p: u64) -> bool {
    if p == 2 {
        m.rem_euclid(4) != 1
    } else {
        m.rem_euclid(p as i64) == 0
    }
}

/// Precision (in `p`-digits) sufficient to read off valuations of `x`.
pub fn precision_for(x: &NFElement, p: u64) -> u32 {
    if x.is_zero() {
        return 8;
    }
    let d = x.denominator();
    let y = x.scale(&num_rational::BigRational::from_integer(d.clone()));
    let n = y.norm();
    let vn = valuation_big(n.numer(), p);
    let vd = valuation_big(&d, p);
    vn + 2 * vd + 8
}

/// `v_P(x)` normalized so `v_P(pi) = 1`; `None` for `x = 0`.
pub fn valuation_at(k: &NumberField, prime: &PrimeIdeal, x: &NFElement) -> Result<Option<i64>> {
    if x.is_zero() {
        return Ok(None);
    }
    let lf = LocalField::new(k, prime, precision_for(x, prime.p))?;
    let n = lf.embed(x)?;
    Ok(Some(lf.num_valuation(&n).expect("precision covers the valuation of a nonzero element")))
}

/// Reduction of `x` modulo `prime`.
///
/// Odd `p` with `p`-integral coordinates uses the coordinate map directly;
/// otherwise the element is pushed through the completion.
pub fn reduce_element(k: &NumberField, prime: &PrimeIdeal, x: &NFElement) -> Result<GFElement> {
    let p = prime.p;
    let pb = BigInt::from(p);
    if p != 2 && x.coords().iter().all(|c| !(c.denom() % &pb).is_zero()) {
        let gf = prime.residue_field();
        let mut acc = GFElement::ZERO;
        for (mask, c) in x.coords().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let num = gf.int(crate::arith::reduce_bigint(c.numer(), p) as i64);
            let den = gf.int(crate::arith::reduce_bigint(c.denom(), p) as i64);
            let mut term = gf.div(num, den)?;
            for (i, r) in prime.embedding.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    term = gf.mul(term, *r);
                }
            }
            acc = gf.add(acc, term);
        }
        return Ok(acc);
    }
    let lf = LocalField::new(k, prime, precision_for(x, p).max(16))?;
    lf.residue(x)
}
