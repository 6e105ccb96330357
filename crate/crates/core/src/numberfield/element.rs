use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::NumberField;
use crate::error::{Error, Result};

/// An element of a multiquadratic field with exact rational coordinates.
///
/// The generator kernels travel with the element so the usual operators work
/// without a field handle; mixing elements of different fields panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NFElement {
    kernels: Vec<i64>,
    coords: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl NFElement {
    pub(super) fn zero(k: &NumberField) -> Self {
        NFElement { kernels: k.kernels().to_vec(), coords: vec![BigRational::zero(); k.degree()] }
    }

    pub(super) fn from_rational(k: &NumberField, q: BigRational) -> Self {
        let mut x = Self::zero(k);
        x.coords[0] = q;
        x
    }

    pub(super) fn basis(k: &NumberField, mask: usize) -> Self {
        let mut x = Self::zero(k);
        x.coords[mask] = BigRational::one();
        x
    }

    pub(super) fn from_coords(k: &NumberField, coords: Vec<BigRational>) -> Self {
        debug_assert_eq!(coords.len(), k.degree());
        NFElement { kernels: k.kernels().to_vec(), coords }
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn kernels(&self) -> &[i64] {
        &self.kernels
    }

    pub fn degree(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    /// The rational value, when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then(|| &self.coords[0])
    }

    pub fn is_integer_coords(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.kernels, other.kernels, "elements of different fields");
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        NFElement { kernels: self.kernels.clone(), coords: self.coords.iter().map(|c| c * q).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&rat(n))
    }

    /// Galois conjugate flipping the signs of `sqrt(m_i)` for `i` in `sigma`.
    pub fn conjugate(&self, sigma: usize) -> Self {
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(s, c)| if (s & sigma).count_ones() % 2 == 1 { -c } else { c.clone() })
            .collect();
        NFElement { kernels: self.kernels.clone(), coords }
    }

    /// Product of the nontrivial conjugates.
    fn conjugate_product(&self) -> Self {
        let mut acc = self.unit_like();
        for sigma in 1..self.degree() {
            acc = &acc * &self.conjugate(sigma);
        }
        acc
    }

    fn unit_like(&self) -> Self {
        let mut c = vec![BigRational::zero(); self.degree()];
        c[0] = BigRational::one();
        NFElement { kernels: self.kernels.clone(), coords: c }
    }

    pub fn norm(&self) -> BigRational {
        let prod = self * &self.conjugate_product();
        debug_assert!(prod.is_rational());
        prod.coords[0].clone()
    }

    /// Trace to `Q`.
    pub fn trace(&self) -> BigRational {
        &self.coords[0] * rat(self.degree() as i64)
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.conjugate_product().scale(&n.recip()))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.unit_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn square(&self) -> Self {
        self * self
    }
}

impl<'a> Add<&'a NFElement> for &'a NFElement {
    type Output = NFElement;
    fn add(self, rhs: &NFElement) -> NFElement {
        self.check_same(rhs);
        NFElement {
            kernels: self.kernels.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a NFElement> for &'a NFElement {
    type Output = NFElement;
    fn sub(self, rhs: &NFElement) -> NFElement {
        self.check_same(rhs);
        NFElement {
            kernels: self.kernels.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &NFElement {
    type Output = NFElement;
    fn neg(self) -> NFElement {
        NFElement { kernels: self.kernels.clone(), coords: self.coords.iter().map(|c| -c).collect() }
    }
}

impl<'a> Mul<&'a NFElement> for &'a NFElement {
    type Output = NFElement;
    fn mul(self, rhs: &NFElement) -> NFElement {
        self.check_same(rhs);
        let n = self.coords.len();
        let mut out = vec![BigRational::zero(); n];
        for (s, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (t, b) in rhs.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                // basis_S * basis_T = (prod_{i in S & T} m_i) basis_{S ^ T}
                let both = s & t;
                let factor: i64 =
                    self.kernels.iter().enumerate().filter(|(i, _)| both >> i & 1 == 1).map(|(_, &m)| m).product();
                out[s ^ t] += a * b * rat(factor);
            }
        }
        NFElement { kernels: self.kernels.clone(), coords: out }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr<NFElement> for NFElement {
            type Output = NFElement;
            fn $f(self, rhs: NFElement) -> NFElement {
                (&self).$f(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl fmt::Display for NFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (s, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let basis: Vec<String> = self
                .kernels
                .iter()
                .enumerate()
                .filter(|(i, _)| s >> i & 1 == 1)
                .map(|(_, m)| format!("sqrt({m})"))
                .collect();
            let coeff = if c.is_integer() { c.numer().to_string() } else { format!("({c})") };
            if basis.is_empty() {
                parts.push(coeff);
            } else if c.is_one() {
                parts.push(basis.join("*"));
            } else if (-c).is_one() {
                parts.push(format!("-{}", basis.join("*")));
            } else {
                parts.push(format!("{}*{}", coeff, basis.join("*")));
            }
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        f.write_str(&s)
    }
}
