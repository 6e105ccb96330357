//! Local good-reduction tests.
//!
//! Residue characteristic at least 5 uses the `c4, c6` scaling criterion.
//! Characteristics 2 and 3 run Tate's algorithm, stopping at the first
//! Kodaira-type exit (bad) or at a unit discriminant (good); only the
//! good/bad answer and the number of non-minimal rescalings are tracked.

use crate::arith::valuation_big;
use crate::error::{Error, Result};
use crate::finitefield::{GFElement, GaloisField};
use crate::numberfield::local::LocalField;
use crate::numberfield::{LElem, PrimeIdeal};

use super::{b_invariants, c_invariants, rst_transform, Curve, FFCurve};

const INF: u32 = u32::MAX;

/// `p`-adic digits kept for local work on `curve`.
pub(crate) fn local_precision(curve: &Curve, p: u64) -> u32 {
    let disc = curve.discriminant();
    let n = disc.norm();
    let vd = valuation_big(n.numer(), p) + valuation_big(n.denom(), p);
    let vden = curve.ainvs().iter().map(|x| valuation_big(&x.denominator(), p)).max().unwrap_or(0);
    48 + 2 * vd + 12 * vden
}

fn v(lf: &LocalField, x: &LElem) -> u32 {
    lf.valuation(x).unwrap_or(INF)
}

/// Coefficients of an integral model: `a_i pi^(i k)` with the least `k >= 0`.
fn integral_model(lf: &LocalField, curve: &Curve) -> Result<[LElem; 5]> {
    let weights = [1i64, 2, 3, 4, 6];
    let nums = curve.ainvs().iter().map(|x| lf.embed(x)).collect::<Result<Vec<_>>>()?;
    let mut k = 0i64;
    for (n, w) in nums.iter().zip(weights) {
        if let Some(val) = lf.num_valuation(n) {
            if val < 0 {
                k = k.max((-val + w - 1) / w);
            }
        }
    }
    let out = nums.iter().zip(weights).map(|(n, w)| lf.scaled_integral(n, w * k)).collect::<Result<Vec<_>>>()?;
    Ok(out.try_into().expect("five coefficients"))
}

fn residues(lf: &LocalField, a: &[LElem; 5]) -> [GFElement; 5] {
    [0, 1, 2, 3, 4].map(|i| lf.residue_of(&a[i]))
}

/// A good reduced model at `prime`, or `None` when reduction is bad.
pub fn local_good_model(curve: &Curve, prime: &PrimeIdeal) -> Result<Option<FFCurve>> {
    let lf = LocalField::new(curve.field(), prime, local_precision(curve, prime.p))?;
    let gf = prime.residue_field();
    if prime.p >= 5 {
        return short_model(&lf, curve, gf);
    }
    let a = integral_model(&lf, curve)?;
    let out = run_tate(&lf, a)?;
    if !out.good {
        return Ok(None);
    }
    Ok(Some(FFCurve::new(gf, residues(&lf, &out.model))?))
}

/// Number of non-minimal rescalings Tate's algorithm performs on `curve`
/// (assumed integral) at `prime`.
pub fn minimal_scalings(curve: &Curve, prime: &PrimeIdeal) -> Result<u32> {
    let lf = LocalField::new(curve.field(), prime, local_precision(curve, prime.p))?;
    let a = integral_model(&lf, curve)?;
    Ok(run_tate(&lf, a)?.scalings)
}

/// `y^2 = x^3 - 27 c4' x - 54 c6'` with `c4' = c4 / pi^(4m)`, `c6' = c6 / pi^(6m)`.
fn short_model(lf: &LocalField, curve: &Curve, gf: GaloisField) -> Result<Option<FFCurve>> {
    let inv = curve.invariants();
    let c4 = lf.embed(&inv.c4)?;
    let c6 = lf.embed(&inv.c6)?;
    let d = lf.embed(&inv.disc)?;
    let vd = lf.num_valuation(&d).ok_or_else(|| Error::Overflow("discriminant below local precision".into()))?;
    let floor_div = |x: Option<i64>, w: i64| x.map_or(i64::MAX, |x| x.div_euclid(w));
    let m = floor_div(lf.num_valuation(&c4), 4).min(floor_div(lf.num_valuation(&c6), 6));
    if vd != 12 * m {
        return Ok(None);
    }
    let c4r = lf.residue_of(&lf.scaled_integral(&c4, -4 * m)?);
    let c6r = lf.residue_of(&lf.scaled_integral(&c6, -6 * m)?);
    let a4 = gf.mul_int(c4r, -27);
    let a6 = gf.mul_int(c6r, -54);
    Ok(Some(FFCurve::new(gf, [GFElement::ZERO, GFElement::ZERO, GFElement::ZERO, a4, a6])?))
}

struct TateOutcome {
    model: [LElem; 5],
    scalings: u32,
    good: bool,
}

fn run_tate(lf: &LocalField, mut a: [LElem; 5]) -> Result<TateOutcome> {
    let k = *lf.residue_field();
    let zero = lf.zero();
    let mut scalings = 0u32;
    loop {
        let (c4, _, disc) = c_invariants(lf, &a);
        let vd = v(lf, &disc);
        if vd == INF {
            return Err(Error::Overflow("discriminant below local precision".into()));
        }
        if vd == 0 {
            return Ok(TateOutcome { model: a, scalings, good: true });
        }
        let bad = |a: [LElem; 5], scalings| Ok(TateOutcome { model: a, scalings, good: false });
        // multiplicative reduction: the model is minimal
        if v(lf, &c4) == 0 {
            return bad(a, scalings);
        }
        // move the singular point to (0, 0)
        let (x0, y0) = singular_point(&k, &residues(lf, &a))
            .ok_or_else(|| Error::Unsupported("no singular point on a singular reduction".into()))?;
        a = rst_transform(lf, &a, &lf.lift(x0), &zero, &lf.lift(y0));
        let [_, _, b6, b8] = b_invariants(lf, &a);
        if v(lf, &a[4]) < 2 {
            return bad(a, scalings); // II
        }
        if v(lf, &b8) < 3 {
            return bad(a, scalings); // III
        }
        if v(lf, &b6) < 3 {
            return bad(a, scalings); // IV
        }
        // arrange pi | a1, a2; pi^2 | a3, a4; pi^3 | a6
        let (s, t) = if lf.p() == 2 {
            let s = lf.lift(k.sqrt(lf.residue_of(&a[1])).expect("char 2 square root"));
            let a6_2 = lf.div_pi_pow(&a[4], 2)?;
            let r = k.sqrt(lf.residue_of(&a6_2)).expect("char 2 square root");
            (s, lf.mul(&lf.pi(), &lf.lift(r)))
        } else {
            (a[0].clone(), a[2].clone())
        };
        a = rst_transform(lf, &a, &zero, &s, &t);
        debug_assert!(v(lf, &a[0]) >= 1 && v(lf, &a[1]) >= 1 && v(lf, &a[2]) >= 2);
        debug_assert!(v(lf, &a[3]) >= 2 && v(lf, &a[4]) >= 3);
        // P(T) = T^3 + a2/pi T^2 + a4/pi^2 T + a6/pi^3
        let b = lf.residue_of(&lf.div_pi_pow(&a[1], 1)?);
        let c = lf.residue_of(&lf.div_pi_pow(&a[3], 2)?);
        let d = lf.residue_of(&lf.div_pi_pow(&a[4], 3)?);
        let disc_p = cubic_discriminant(&k, b, c, d);
        if !disc_p.is_zero() {
            return bad(a, scalings); // I0*
        }
        let x = k.sub(k.mul_int(c, 3), k.square(b));
        if !x.is_zero() {
            return bad(a, scalings); // Im*
        }
        // triple root: move it to T = 0
        let root = k
            .elements()
            .find(|&r| eval_cubic(&k, b, c, d, r).is_zero())
            .ok_or_else(|| Error::Unsupported("cubic triple root not found".into()))?;
        let r = lf.mul(&lf.pi(), &lf.lift(root));
        a = rst_transform(lf, &a, &r, &zero, &zero);
        // Y^2 + a3/pi^2 Y - a6/pi^4
        let a3t = lf.residue_of(&lf.div_pi_pow(&a[2], 2)?);
        let a6t = lf.residue_of(&lf.div_pi_pow(&a[4], 4)?);
        if !k.add(k.square(a3t), k.mul_int(a6t, 4)).is_zero() {
            return bad(a, scalings); // IV*
        }
        let y = k
            .elements()
            .find(|&y| k.sub(k.add(k.square(y), k.mul(a3t, y)), a6t).is_zero())
            .ok_or_else(|| Error::Unsupported("quadratic double root not found".into()))?;
        let t = lf.mul(&lf.pow(&lf.pi(), 2), &lf.lift(y));
        a = rst_transform(lf, &a, &zero, &zero, &t);
        if v(lf, &a[3]) < 4 {
            return bad(a, scalings); // III*
        }
        if v(lf, &a[4]) < 6 {
            return bad(a, scalings); // II*
        }
        // not minimal: divide a_i by pi^i and start over
        let weights = [1u32, 2, 3, 4, 6];
        let mut next = Vec::with_capacity(5);
        for (x, w) in a.iter().zip(weights) {
            next.push(lf.div_pi_pow(x, w)?);
        }
        a = next.try_into().expect("five coefficients");
        scalings += 1;
    }
}

fn singular_point(k: &GaloisField, a: &[GFElement; 5]) -> Option<(GFElement, GFElement)> {
    let [a1, a2, a3, a4, a6] = *a;
    for x in k.elements() {
        for y in k.elements() {
            let f = k.sub(
                k.add(k.add(k.square(y), k.mul(k.mul(a1, x), y)), k.mul(a3, y)),
                k.add(k.add(k.add(k.mul(k.square(x), x), k.mul(a2, k.square(x))), k.mul(a4, x)), a6),
            );
            let fx = k.sub(k.mul(a1, y), k.add(k.add(k.mul_int(k.square(x), 3), k.mul_int(k.mul(a2, x), 2)), a4));
            let fy = k.add(k.add(k.mul_int(y, 2), k.mul(a1, x)), a3);
            if f.is_zero() && fx.is_zero() && fy.is_zero() {
                return Some((x, y));
            }
        }
    }
    None
}

fn eval_cubic(k: &GaloisField, b: GFElement, c: GFElement, d: GFElement, t: GFElement) -> GFElement {
    k.add(k.mul(k.add(k.mul(k.add(t, b), t), c), t), d)
}

/// `-disc(T^3 + b T^2 + c T + d)`; zero iff the cubic has a repeated root.
fn cubic_discriminant(k: &GaloisField, b: GFElement, c: GFElement, d: GFElement) -> GFElement {
    let terms = [
        k.mul_int(k.square(d), 27),
        k.neg(k.mul(k.square(b), k.square(c))),
        k.mul_int(k.mul(k.mul(k.square(b), b), d), 4),
        k.mul_int(k.mul(k.mul(b, c), d), -18),
        k.mul_int(k.mul(k.square(c), c), 4),
    ];
    terms.iter().fold(GFElement::ZERO, |acc, &t| k.add(acc, t))
}
