//! Multiquadratic number fields `Q`, `Q(sqrt d1)`, `Q(sqrt d1, sqrt d2)`.
//!
//! Elements are stored on the basis `{prod_{i in S} sqrt(m_i)}` indexed by the
//! bitmask `S`, where `m_i` are the squarefree kernels of the generators. Prime
//! decomposition reduces to Kronecker symbols of the quadratic subfields.

mod element;
pub mod local;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{
    factor_big, fundamental_discriminant, kernel_of_discriminant, kronecker, squarefree_kernel, UpperReal,
};
use crate::error::{Error, Result};
use crate::finitefield::{GFElement, GaloisField};

pub use element::NFElement;
pub use local::{LElem, LocalField};

/// A quadratic subfield `Q(sqrt q)` of a multiquadratic field, indexed by the
/// generator subset `mask` with `prod_{i in mask} m_i = q * t^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticSubfield {
    pub mask: usize,
    pub kernel: i64,
    pub disc: i64,
    pub t: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumberField {
    gens: Vec<i64>,
    kernels: Vec<i64>,
    disc: BigInt,
    subfields: Vec<QuadraticSubfield>,
}

/// JSON shape `{"generators": [d1, d2]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FieldSpec {
    pub generators: Vec<i64>,
}

impl NumberField {
    pub fn rationals() -> Self {
        make_field(&[]).unwrap()
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        make_field(&spec.generators)
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { generators: self.gens.clone() }
    }

    /// Fundamental discriminants of the generators.
    pub fn generators(&self) -> &[i64] {
        &self.gens
    }

    /// Squarefree kernels `m_i` of the generators.
    pub fn kernels(&self) -> &[i64] {
        &self.kernels
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn degree(&self) -> usize {
        1 << self.gens.len()
    }

    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    pub fn is_rational(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn subfields(&self) -> &[QuadraticSubfield] {
        &self.subfields
    }

    pub fn quadratic_subfield_discs(&self) -> Vec<i64> {
        self.subfields.iter().map(|s| s.disc).collect()
    }

    pub fn contains_quadratic(&self, d: i64) -> bool {
        let Ok(m) = squarefree_kernel(d) else { return false };
        self.subfields.iter().any(|s| s.kernel == m)
    }

    pub fn zero(&self) -> NFElement {
        NFElement::zero(self)
    }

    pub fn one(&self) -> NFElement {
        NFElement::from_rational(self, BigRational::one())
    }

    pub fn int(&self, n: i64) -> NFElement {
        NFElement::from_rational(self, BigRational::from_integer(n.into()))
    }

    pub fn rational(&self, q: BigRational) -> NFElement {
        NFElement::from_rational(self, q)
    }

    /// The basis element `prod_{i in mask} sqrt(m_i)`.
    pub fn basis(&self, mask: usize) -> NFElement {
        NFElement::basis(self, mask)
    }

    /// Element from coordinates in basis order `{1, sqrt m1, sqrt m2, sqrt m1 sqrt m2}`.
    pub fn element(&self, coords: Vec<BigRational>) -> Result<NFElement> {
        if coords.len() > self.degree() {
            return Err(Error::Malformed(format!(
                "{} coordinates for a field of degree {}",
                coords.len(),
                self.degree()
            )));
        }
        let mut c = coords;
        c.resize(self.degree(), BigRational::from_integer(0.into()));
        Ok(NFElement::from_coords(self, c))
    }

    /// An element whose square is `m` (any nonzero integer), if one exists.
    pub fn sqrt_of_int(&self, m: i64) -> Option<NFElement> {
        if m == 0 {
            return Some(self.zero());
        }
        let k = squarefree_kernel(m).ok()?;
        let outer = crate::arith::isqrt((m / k) as u64) as i64;
        if k == 1 {
            return Some(self.int(outer));
        }
        let sub = self.subfields.iter().find(|s| s.kernel == k)?;
        let scale = BigRational::new(outer.into(), sub.t.into());
        Some(self.basis(sub.mask).scale(&scale))
    }

    /// Image of `x` (an element of `self`) in a field `target` containing `self`.
    pub fn embed_into(&self, x: &NFElement, target: &NumberField) -> Result<NFElement> {
        let roots: Vec<NFElement> = self
            .kernels
            .iter()
            .map(|&m| {
                target.sqrt_of_int(m).ok_or_else(|| Error::FieldMismatch(format!("sqrt({m}) not in target field")))
            })
            .collect::<Result<_>>()?;
        let mut acc = target.zero();
        for (mask, c) in x.coords().iter().enumerate() {
            if num_traits::Zero::is_zero(c) {
                continue;
            }
            let mut term = target.rational(c.clone());
            for (i, r) in roots.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    term = &term * r;
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// `K(sqrt d)`; `self` when `sqrt d` already lies in `K`.
    pub fn adjoin(&self, d: i64) -> Result<NumberField> {
        if d == 0 {
            return Err(Error::NotQuadratic("0".into()));
        }
        if squarefree_kernel(d)? == 1 || self.contains_quadratic(d) {
            return Ok(self.clone());
        }
        let mut gens = self.gens.clone();
        gens.push(d);
        make_field(&gens)
    }

    /// Compositum of two multiquadratic fields.
    pub fn compositum(&self, other: &NumberField) -> Result<NumberField> {
        let mut k = self.clone();
        for &g in other.generators() {
            k = k.adjoin(g)?;
        }
        Ok(k)
    }

    /// Rational primes dividing the discriminant.
    pub fn ramified_rational_primes(&self) -> BTreeSet<u64> {
        if self.is_rational() {
            return BTreeSet::new();
        }
        factor_big(&self.disc).expect("field discriminants factor").into_iter().map(|(p, _)| p).collect()
    }

    /// Imaginary quadratic subfields, in subfield order.
    pub fn imaginary_quadratic_subfields(&self) -> Vec<QuadImagField> {
        self.subfields
            .iter()
            .filter(|s| s.disc < 0)
            .map(|s| QuadImagField::new(s.disc).expect("subfield discriminant is fundamental"))
            .collect()
    }

    pub fn norm(&self, x: &NFElement) -> BigRational {
        x.norm()
    }

    /// All primes of `K` above the rational prime `p`, in canonical order.
    pub fn decompose_prime(&self, p: u64) -> Vec<PrimeIdeal> {
        decompose_prime(self, p)
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gens.is_empty() {
            return write!(f, "Q");
        }
        let parts: Vec<String> = self.kernels.iter().map(|m| format!("sqrt({m})")).collect();
        write!(f, "Q({})", parts.join(", "))
    }
}

/// Build `Q(sqrt d : d in discs)`. Inputs are reduced to fundamental
/// discriminants; at most two independent generators are allowed.
pub fn make_field(discs: &[i64]) -> Result<NumberField> {
    let mut gens: Vec<i64> = Vec::new();
    let mut kernels: Vec<i64> = Vec::new();
    for &d in discs {
        let fd = fundamental_discriminant(d)?;
        let m = kernel_of_discriminant(fd);
        // dependent on what we already have?
        let span: Vec<i64> = span_kernels(&kernels)?;
        if span.contains(&m) {
            return Err(Error::DependentGenerators);
        }
        if gens.len() == 2 {
            return Err(Error::FieldTowerTooLarge);
        }
        gens.push(fd);
        kernels.push(m);
    }
    let mut subfields = Vec::new();
    for mask in 1..(1usize << kernels.len()) {
        let mut prod: i64 = 1;
        for (i, &m) in kernels.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prod = prod.checked_mul(m).ok_or_else(|| Error::Overflow("kernel product".into()))?;
            }
        }
        let kernel = squarefree_kernel(prod)?;
        let t = crate::arith::isqrt((prod / kernel) as u64) as i64;
        let disc = fundamental_discriminant(kernel)?;
        subfields.push(QuadraticSubfield { mask, kernel, disc, t });
    }
    let disc = subfields.iter().fold(BigInt::one(), |acc, s| acc * BigInt::from(s.disc));
    Ok(NumberField { gens, kernels, disc, subfields })
}

fn span_kernels(kernels: &[i64]) -> Result<Vec<i64>> {
    let mut out = vec![1i64];
    for mask in 1..(1usize << kernels.len()) {
        let mut prod: i64 = 1;
        for (i, &m) in kernels.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prod = prod.checked_mul(m).ok_or_else(|| Error::Overflow("kernel product".into()))?;
            }
        }
        out.push(squarefree_kernel(prod)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// prime ideals

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

fn split_type(disc: i64, p: u64) -> SplitType {
    match kronecker(disc, p) {
        1 => SplitType::Split,
        -1 => SplitType::Inert,
        _ => SplitType::Ramified,
    }
}

/// A prime of a multiquadratic field, identified by the residue images and
/// local signs of the generator square roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub p: u64,
    pub e: u32,
    pub f: u32,
    pub g_count: u32,
    /// Image of `sqrt(m_i)` in the residue field, per generator.
    pub embedding: Vec<GFElement>,
    /// Sign of `sqrt(m_i)` relative to the canonical local root, per generator.
    pub signs: Vec<i8>,
    /// Kernels of the quadratic subfields ramified at `p`.
    pub ramified_directions: Vec<i64>,
}

impl PrimeIdeal {
    pub fn norm(&self) -> u64 {
        self.p.pow(self.f)
    }

    pub fn residue_field(&self) -> GaloisField {
        GaloisField::new(self.p, self.f).expect("prime ideal residue field")
    }

    pub fn is_unramified(&self) -> bool {
        self.e == 1
    }

    /// Compact label, e.g. `7` over Q or `2:f1:+-`.
    pub fn label(&self) -> String {
        if self.signs.is_empty() {
            return self.p.to_string();
        }
        let s: String = self.signs.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
        format!("{}:f{}:{}", self.p, self.f, s)
    }

    fn order_key(&self) -> (Vec<[u64; 2]>, Vec<i8>) {
        (self.embedding.iter().map(|g| g.0).collect(), self.signs.clone())
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Local shape of `K` at `p`: `(e, f, split masks)`.
pub(crate) fn local_shape(k: &NumberField, p: u64) -> (u32, u32, Vec<usize>, Vec<i64>) {
    let mut ramified = Vec::new();
    let mut split_masks = Vec::new();
    let mut inert = false;
    for s in &k.subfields {
        match split_type(s.disc, p) {
            SplitType::Ramified => ramified.push(s.kernel),
            SplitType::Split => split_masks.push(s.mask),
            SplitType::Inert => inert = true,
        }
    }
    let e = match ramified.len() {
        0 => 1,
        n if n == k.subfields.len() && k.rank() == 2 => 4,
        _ => 2,
    };
    let f = if inert { 2 } else { 1 };
    (e, f, split_masks, ramified)
}

/// Residue image of the canonical local root of `m` at `p` in `gf`.
pub(crate) fn canonical_residue_root(m: i64, p: u64, gf: &GaloisField) -> GFElement {
    if p == 2 {
        return if m % 2 == 0 { GFElement::ZERO } else { GFElement::ONE };
    }
    let r = gf.int(m);
    if r.is_zero() {
        return r;
    }
    gf.sqrt(r).expect("unramified direction has a residue root")
}

pub fn decompose_prime(k: &NumberField, p: u64) -> Vec<PrimeIdeal> {
    let (e, f, split_masks, ramified) = local_shape(k, p);
    let g_count = (k.degree() as u32) / (e * f);
    let gf = GaloisField::new(p, f).expect("p is prime");
    let roots: Vec<GFElement> = k.kernels.iter().map(|&m| canonical_residue_root(m, p, &gf)).collect();
    let mut seen: Vec<Vec<i8>> = Vec::new();
    let mut out = Vec::new();
    for mask in 0..(1usize << k.rank()) {
        let signs: Vec<i8> = (0..k.rank()).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let key: Vec<i8> = split_masks
            .iter()
            .map(|&s| (0..k.rank()).filter(|i| s >> i & 1 == 1).map(|i| signs[i]).product())
            .collect();
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let embedding = roots.iter().zip(&signs).map(|(&r, &s)| if s < 0 { gf.neg(r) } else { r }).collect();
        out.push(PrimeIdeal { p, e, f, g_count, embedding, signs, ramified_directions: ramified.clone() });
    }
    debug_assert_eq!(out.len() as u32, g_count);
    out.sort_by_key(|q| q.order_key());
    out
}

// ---------------------------------------------------------------------------
// imaginary quadratic fields

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadImagField {
    disc: i64,
}

impl QuadImagField {
    pub fn new(disc: i64) -> Result<Self> {
        if disc >= 0 {
            return Err(Error::InvalidArgument(format!("{disc} is not negative")));
        }
        if fundamental_discriminant(disc)? != disc {
            return Err(Error::InvalidArgument(format!("{disc} is not a fundamental discriminant")));
        }
        Ok(QuadImagField { disc })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn class_number(&self) -> u64 {
        class_number_imag(self.disc)
    }

    pub fn h_star(&self) -> UpperReal {
        h_star(self.disc)
    }

    pub fn as_field(&self) -> NumberField {
        make_field(&[self.disc]).expect("fundamental discriminant")
    }
}

/// Class number by counting reduced forms `(a, b, c)` of discriminant `disc < 0`.
pub fn class_number_imag(disc: i64) -> u64 {
    assert!(disc < 0 && disc.rem_euclid(4) <= 1);
    let d = disc.unsigned_abs() as i128;
    let mut h = 0u64;
    let mut a: i128 = 1;
    while 3 * a * a <= d {
        for b in -a + 1..=a {
            if (b - disc as i128).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if b < 0 && a == c {
                continue;
            }
            if num_integer::gcd(num_integer::gcd(a, b.abs()), c) != 1 {
                continue;
            }
            h += 1;
        }
        a += 1;
    }
    h
}

/// `2 sqrt|disc| / pi`, rounded up.
pub fn h_star(disc: i64) -> UpperReal {
    let abs = disc.unsigned_abs() as f64;
    let root = abs.sqrt().next_up();
    let inv_pi_up = std::f64::consts::FRAC_1_PI.next_up();
    UpperReal::exact(root).mul_f64(2.0).mul_f64(inv_pi_up)
}

/// Rational primes at which `x` (nonzero) may fail to be a unit:
/// support of the norm numerator and of the coordinate denominators.
pub fn critical_primes(x: &NFElement) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    let n = x.norm();
    if num_traits::Zero::is_zero(&n) {
        return Err(Error::InvalidArgument("zero has no finite support".into()));
    }
    for (p, _) in factor_big(n.numer())? {
        out.insert(p);
    }
    for (p, _) in factor_big(n.denom())? {
        out.insert(p);
    }
    for c in x.coords() {
        for (p, _) in factor_big(c.denom())? {
            out.insert(p);
        }
    }
    Ok(out)
}
