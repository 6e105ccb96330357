//! Weierstrass models over multiquadratic fields: invariants, twists,
//! reduction at primes, local good-reduction tests, and minimal models over `Q`.

pub mod finite;
mod spec;
pub mod tate;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{factor_big, valuation_big};
use crate::error::{Error, Result};
use crate::finitefield::GFElement;
use crate::numberfield::local::{reduce_element, valuation_at, LocalField};
use crate::numberfield::{NFElement, NumberField, PrimeIdeal};

pub use finite::{FFCurve, Point};
pub use spec::{parse_rational, CurveSpec};

/// Minimal ring interface shared by global and local coefficient domains.
pub(crate) trait Ring {
    type T: Clone;
    fn add(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn sub(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn mul(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn int(&self, n: i64) -> Self::T;
    fn scale(&self, a: &Self::T, n: i64) -> Self::T {
        self.mul(a, &self.int(n))
    }
}

impl Ring for NumberField {
    type T = NFElement;
    fn add(&self, a: &NFElement, b: &NFElement) -> NFElement {
        a + b
    }
    fn sub(&self, a: &NFElement, b: &NFElement) -> NFElement {
        a - b
    }
    fn mul(&self, a: &NFElement, b: &NFElement) -> NFElement {
        a * b
    }
    fn int(&self, n: i64) -> NFElement {
        NumberField::int(self, n)
    }
    fn scale(&self, a: &NFElement, n: i64) -> NFElement {
        a.scale_int(n)
    }
}

impl Ring for LocalField {
    type T = crate::numberfield::LElem;
    fn add(&self, a: &Self::T, b: &Self::T) -> Self::T {
        LocalField::add(self, a, b)
    }
    fn sub(&self, a: &Self::T, b: &Self::T) -> Self::T {
        LocalField::sub(self, a, b)
    }
    fn mul(&self, a: &Self::T, b: &Self::T) -> Self::T {
        LocalField::mul(self, a, b)
    }
    fn int(&self, n: i64) -> Self::T {
        LocalField::int(self, n)
    }
    fn scale(&self, a: &Self::T, n: i64) -> Self::T {
        self.mul_int(a, n)
    }
}

pub(crate) fn b_invariants<R: Ring>(r: &R, a: &[R::T; 5]) -> [R::T; 4] {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = r.add(&r.mul(a1, a1), &r.scale(a2, 4));
    let b4 = r.add(&r.scale(a4, 2), &r.mul(a1, a3));
    let b6 = r.add(&r.mul(a3, a3), &r.scale(a6, 4));
    let b8 = r.sub(
        &r.add(&r.add(&r.mul(&r.mul(a1, a1), a6), &r.scale(&r.mul(a2, a6), 4)), &r.mul(a2, &r.mul(a3, a3))),
        &r.add(&r.mul(&r.mul(a1, a3), a4), &r.mul(a4, a4)),
    );
    [b2, b4, b6, b8]
}

/// `(c4, c6, disc)`.
pub(crate) fn c_invariants<R: Ring>(r: &R, a: &[R::T; 5]) -> (R::T, R::T, R::T) {
    let [b2, b4, b6, b8] = b_invariants(r, a);
    let b2sq = r.mul(&b2, &b2);
    let c4 = r.sub(&b2sq, &r.scale(&b4, 24));
    let c6 = r.sub(&r.add(&r.scale(&r.mul(&b2sq, &b2), -1), &r.scale(&r.mul(&b2, &b4), 36)), &r.scale(&b6, 216));
    let disc = r.add(
        &r.sub(
            &r.sub(&r.scale(&r.mul(&b2sq, &b8), -1), &r.scale(&r.mul(&r.mul(&b4, &b4), &b4), 8)),
            &r.scale(&r.mul(&b6, &b6), 27),
        ),
        &r.scale(&r.mul(&r.mul(&b2, &b4), &b6), 9),
    );
    (c4, c6, disc)
}

/// Substitution `x = x' + r`, `y = y' + s x' + t`.
pub(crate) fn rst_transform<R: Ring>(ring: &R, a: &[R::T; 5], r: &R::T, s: &R::T, t: &R::T) -> [R::T; 5] {
    let [a1, a2, a3, a4, a6] = a;
    let m = |x: &R::T, y: &R::T| ring.mul(x, y);
    let rs = m(r, s);
    let n1 = ring.add(a1, &ring.scale(s, 2));
    let n2 = ring.sub(&ring.add(&ring.sub(a2, &m(s, a1)), &ring.scale(r, 3)), &m(s, s));
    let n3 = ring.add(&ring.add(a3, &m(r, a1)), &ring.scale(t, 2));
    let n4 = ring.sub(
        &ring.add(&ring.add(&ring.sub(a4, &m(s, a3)), &ring.scale(&m(r, a2), 2)), &ring.scale(&m(r, r), 3)),
        &ring.add(&m(&ring.add(t, &rs), a1), &ring.scale(&m(s, t), 2)),
    );
    let n6 = ring.sub(
        &ring.add(&ring.add(&ring.add(a6, &m(r, a4)), &m(&m(r, r), a2)), &m(&m(r, r), r)),
        &ring.add(&ring.add(&m(t, a3), &m(t, t)), &m(&m(r, t), a1)),
    );
    [n1, n2, n3, n4, n6]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: NFElement,
    pub b4: NFElement,
    pub b6: NFElement,
    pub b8: NFElement,
    pub c4: NFElement,
    pub c6: NFElement,
    pub disc: NFElement,
    pub j: NFElement,
}

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` over a multiquadratic field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    field: NumberField,
    a: [NFElement; 5],
}

impl Curve {
    pub fn new(field: NumberField, a: [NFElement; 5]) -> Result<Self> {
        if a.iter().any(|x| x.kernels() != field.kernels()) {
            return Err(Error::FieldMismatch("coefficient outside the declared field".into()));
        }
        let e = Curve { field, a };
        if e.discriminant().is_zero() {
            return Err(Error::SingularModel);
        }
        Ok(e)
    }

    /// Curve over `Q` with integer coefficients `[a1, a2, a3, a4, a6]`.
    pub fn from_ints(a: [i64; 5]) -> Result<Self> {
        Self::over_field_ints(NumberField::rationals(), a)
    }

    pub fn over_field_ints(field: NumberField, a: [i64; 5]) -> Result<Self> {
        let coeffs = a.map(|x| field.int(x));
        Self::new(field, coeffs)
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn ainvs(&self) -> &[NFElement; 5] {
        &self.a
    }

    pub fn has_rational_coefficients(&self) -> bool {
        self.a.iter().all(|x| x.is_rational())
    }

    pub fn invariants(&self) -> Invariants {
        let [b2, b4, b6, b8] = b_invariants(&self.field, &self.a);
        let (c4, c6, disc) = c_invariants(&self.field, &self.a);
        let j = (&(&c4 * &c4) * &c4).div(&disc).expect("nonsingular model");
        Invariants { b2, b4, b6, b8, c4, c6, disc, j }
    }

    pub fn discriminant(&self) -> NFElement {
        c_invariants(&self.field, &self.a).2
    }

    pub fn j_invariant(&self) -> NFElement {
        self.invariants().j
    }

    /// `j in {0, 1728}`.
    pub fn special_j(&self) -> Option<i64> {
        let j = self.j_invariant();
        if j.is_zero() {
            Some(0)
        } else if j == self.field.int(1728) {
            Some(1728)
        } else {
            None
        }
    }

    /// The same equation over a field containing `self.field()`.
    pub fn base_change(&self, target: &NumberField) -> Result<Curve> {
        let a = self.a.iter().map(|x| self.field.embed_into(x, target)).collect::<Result<Vec<_>>>()?;
        Curve::new(target.clone(), a.try_into().expect("five coefficients"))
    }

    /// Standard change of variables `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
    pub fn change_coords(&self, u: &NFElement, r: &NFElement, s: &NFElement, t: &NFElement) -> Result<Curve> {
        let moved = rst_transform(&self.field, &self.a, r, s, t);
        let uinv = u.inv()?;
        let mut out = Vec::with_capacity(5);
        for (x, w) in moved.iter().zip([1u32, 2, 3, 4, 6]) {
            out.push(x * &uinv.pow(w));
        }
        Curve::new(self.field.clone(), out.try_into().expect("five coefficients"))
    }

    /// Quadratic twist by `d`, isomorphic to `self` over `K(sqrt d)`:
    /// `c4 -> d^2 c4`, `c6 -> d^3 c6`, `disc -> d^6 disc`.
    pub fn quadratic_twist(&self, d: &NFElement) -> Result<Curve> {
        if d.is_zero() {
            return Err(Error::InvalidArgument("twist by zero".into()));
        }
        let k = &self.field;
        let [a1, a2, a3, a4, a6] = &self.a;
        let one = k.one();
        let dm1 = d - &one;
        let d2 = d * d;
        let q = |n: i64, den: i64| k.rational(BigRational::new(n.into(), den.into()));
        let n2 = &(d * a2) + &(&(&(a1 * a1) * &dm1) * &q(1, 4));
        let n3 = d * a3;
        let n4 = &(&d2 * a4) + &(&(&(a1 * a3) * &(d * &dm1)) * &q(1, 2));
        let n6 = &(&(&d2 * d) * a6) + &(&(&(a3 * a3) * &(&d2 * &dm1)) * &q(1, 4));
        Curve::new(k.clone(), [a1.clone(), n2, n3, n4, n6])
    }

    /// Coefficient-wise reduction when the model is integral with unit
    /// discriminant at `prime`; otherwise a reduced model from the local
    /// minimalization. Errors with `BadReduction` when no good model exists.
    pub fn reduce_at(&self, prime: &PrimeIdeal) -> Result<FFCurve> {
        if let Some(e) = self.reduce_direct(prime)? {
            return Ok(e);
        }
        match tate::local_good_model(self, prime)? {
            Some(e) => Ok(e),
            None => Err(Error::BadReduction(prime.p)),
        }
    }

    fn reduce_direct(&self, prime: &PrimeIdeal) -> Result<Option<FFCurve>> {
        let gf = prime.residue_field();
        let mut out = [GFElement::ZERO; 5];
        for (slot, x) in out.iter_mut().zip(&self.a) {
            match reduce_element(&self.field, prime, x) {
                Ok(r) => *slot = r,
                Err(Error::NotIntegral(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        match FFCurve::new(gf, out) {
            Ok(e) => Ok(Some(e)),
            Err(Error::SingularModel) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// True iff some `prime`-integral model has unit discriminant.
    pub fn good_reduction_at(&self, prime: &PrimeIdeal) -> Result<bool> {
        match self.reduce_at(prime) {
            Ok(_) => Ok(true),
            Err(Error::BadReduction(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Rational primes below every prime where the model is not visibly good:
    /// support of `N(disc)` and of the coefficient denominators.
    pub fn suspect_rational_primes(&self) -> Result<BTreeSet<u64>> {
        let mut out = crate::numberfield::critical_primes(&self.discriminant())?;
        for x in &self.a {
            for (p, _) in factor_big(&x.denominator())? {
                out.insert(p);
            }
        }
        Ok(out)
    }

    /// Primes of bad reduction. Over `Q` this is the support of the minimal
    /// discriminant; otherwise every suspect prime is tested locally.
    pub fn bad_primes(&self) -> Result<Vec<PrimeIdeal>> {
        if self.field.is_rational() {
            let m = self.minimal_model_q()?;
            let d = m.discriminant().as_rational().expect("rational").numer().clone();
            return Ok(factor_big(&d)?.into_iter().map(|(p, _)| self.field.decompose_prime(p)[0].clone()).collect());
        }
        let mut out = Vec::new();
        for p in self.suspect_rational_primes()? {
            for prime in self.field.decompose_prime(p) {
                if !self.good_reduction_at(&prime)? {
                    out.push(prime);
                }
            }
        }
        Ok(out)
    }

    /// First prime (in rational-prime order) where `v(j) < 0`, if any.
    pub fn j_nonintegral_prime(&self) -> Result<Option<PrimeIdeal>> {
        let j = self.j_invariant();
        if j.is_zero() {
            return Ok(None);
        }
        let mut suspects = BTreeSet::new();
        for (p, _) in factor_big(&j.denominator())? {
            suspects.insert(p);
        }
        for (p, _) in factor_big(j.norm().denom())? {
            suspects.insert(p);
        }
        for p in suspects {
            for prime in self.field.decompose_prime(p) {
                if valuation_at(&self.field, &prime, &j)?.is_some_and(|v| v < 0) {
                    return Ok(Some(prime));
                }
            }
        }
        Ok(None)
    }

    pub fn j_is_integral(&self) -> Result<bool> {
        Ok(self.j_nonintegral_prime()?.is_none())
    }

    /// Global minimal model over `Q` in reduced form
    /// (`a1, a3 in {0, 1}`, `a2 in {-1, 0, 1}`).
    pub fn minimal_model_q(&self) -> Result<Curve> {
        if !self.field.is_rational() {
            return Err(Error::InvalidArgument("minimal models are computed over Q only".into()));
        }
        let q = NumberField::rationals();
        // clear denominators: a_i -> a_i d^i
        let den = self.a.iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, &x.denominator()));
        let mut ints: Vec<BigInt> = Vec::with_capacity(5);
        for (x, w) in self.a.iter().zip([1u32, 2, 3, 4, 6]) {
            let v = x.as_rational().expect("rational") * BigRational::from_integer(den.pow(w));
            debug_assert!(v.is_integer());
            ints.push(v.to_integer());
        }
        let integral = Curve::new(
            q.clone(),
            ints.iter()
                .map(|n| q.rational(BigRational::from_integer(n.clone())))
                .collect::<Vec<_>>()
                .try_into()
                .unwrap(),
        )?;
        let (c4, c6, disc) = c_invariants(&q, &integral.a);
        let c4 = c4.as_rational().unwrap().to_integer();
        let c6 = c6.as_rational().unwrap().to_integer();
        let disc = disc.as_rational().unwrap().to_integer();
        let mut u = BigInt::one();
        for (p, _) in factor_big(&disc)? {
            let k = if p >= 5 {
                let v = |n: &BigInt, w: u32| if n.is_zero() { u32::MAX } else { valuation_big(n, p) / w };
                v(&c4, 4).min(v(&c6, 6)).min(valuation_big(&disc, p) / 12)
            } else {
                tate::minimal_scalings(&integral, &q.decompose_prime(p)[0])?
            };
            u *= BigInt::from(p).pow(k);
        }
        let c4m = &c4 / u.pow(4);
        let c6m = &c6 / u.pow(6);
        let a = kraus_model(&c4m, &c6m)
            .ok_or_else(|| Error::Unsupported("minimal c-invariants admit no integral model".into()))?;
        let out = Curve::new(q.clone(), a.map(|n| q.rational(BigRational::from_integer(n))))?;
        let (oc4, oc6, _) = c_invariants(&q, &out.a);
        if oc4.as_rational().unwrap().to_integer() != c4m || oc6.as_rational().unwrap().to_integer() != c6m {
            return Err(Error::Unsupported("minimal model reconstruction mismatch".into()));
        }
        Ok(out)
    }
}

/// Reduced integral model with the given `c4, c6`, when one exists.
fn kraus_model(c4: &BigInt, c6: &BigInt) -> Option<[BigInt; 5]> {
    let twelve = BigInt::from(12);
    let mut b2 = num_integer::Integer::mod_floor(&(-c6), &twelve);
    if b2 > BigInt::from(6) {
        b2 -= &twelve;
    }
    let b4n = &b2 * &b2 - c4;
    if !(&b4n % BigInt::from(24)).is_zero() {
        return None;
    }
    let b4 = b4n / 24;
    let b6n: BigInt = -(&b2 * &b2 * &b2) + BigInt::from(36) * &b2 * &b4 - c6;
    if !(&b6n % BigInt::from(216)).is_zero() {
        return None;
    }
    let b6 = b6n / 216;
    let two = BigInt::from(2);
    let a1 = num_integer::Integer::mod_floor(&b2, &two);
    let a3 = num_integer::Integer::mod_floor(&b6, &two);
    let div = |n: BigInt, d: i64| -> Option<BigInt> {
        if (&n % BigInt::from(d)).is_zero() {
            Some(n / d)
        } else {
            None
        }
    };
    let a2 = div(&b2 - &a1, 4)?;
    let a4 = div(&b4 - &a1 * &a3, 2)?;
    let a6 = div(&b6 - &a3, 4)?;
    debug_assert!(a2.abs() <= BigInt::one());
    Some([a1, a2, a3, a4, a6])
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}] over {}", parts.join(", "), self.field)
    }
}

#[cfg(test)]
mod tests;
