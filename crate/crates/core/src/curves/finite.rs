//! Weierstrass curves over `F_q` and their group law in every characteristic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finitefield::{GFElement, GaloisField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Point {
    Infinity,
    Affine(GFElement, GFElement),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FFCurve {
    gf: GaloisField,
    /// `[a1, a2, a3, a4, a6]`.
    a: [GFElement; 5],
}

impl FFCurve {
    pub fn new(gf: GaloisField, a: [GFElement; 5]) -> Result<Self> {
        let e = FFCurve { gf, a };
        if e.discriminant().is_zero() {
            return Err(Error::SingularModel);
        }
        Ok(e)
    }

    pub fn from_ints(gf: GaloisField, a: [i64; 5]) -> Result<Self> {
        Self::new(gf, a.map(|x| gf.int(x)))
    }

    pub fn field(&self) -> &GaloisField {
        &self.gf
    }

    pub fn ainvs(&self) -> [GFElement; 5] {
        self.a
    }

    /// `[b2, b4, b6, b8]`.
    pub fn b_invariants(&self) -> [GFElement; 4] {
        let g = &self.gf;
        let [a1, a2, a3, a4, a6] = self.a;
        let b2 = g.add(g.square(a1), g.mul_int(a2, 4));
        let b4 = g.add(g.mul_int(a4, 2), g.mul(a1, a3));
        let b6 = g.add(g.square(a3), g.mul_int(a6, 4));
        let b8 = g.sub(
            g.add(g.add(g.mul(g.square(a1), a6), g.mul_int(g.mul(a2, a6), 4)), g.mul(a2, g.square(a3))),
            g.add(g.mul(g.mul(a1, a3), a4), g.square(a4)),
        );
        [b2, b4, b6, b8]
    }

    pub fn c_invariants(&self) -> [GFElement; 2] {
        let g = &self.gf;
        let [b2, b4, b6, _] = self.b_invariants();
        let c4 = g.sub(g.square(b2), g.mul_int(b4, 24));
        let c6 = g.sub(g.add(g.neg(g.mul(g.square(b2), b2)), g.mul_int(g.mul(b2, b4), 36)), g.mul_int(b6, 216));
        [c4, c6]
    }

    pub fn discriminant(&self) -> GFElement {
        let g = &self.gf;
        let [b2, b4, b6, b8] = self.b_invariants();
        let t1 = g.neg(g.mul(g.square(b2), b8));
        let t2 = g.mul_int(g.mul(g.square(b4), b4), 8);
        let t3 = g.mul_int(g.square(b6), 27);
        let t4 = g.mul_int(g.mul(g.mul(b2, b4), b6), 9);
        g.add(g.sub(g.sub(t1, t2), t3), t4)
    }

    pub fn j_invariant(&self) -> GFElement {
        let g = &self.gf;
        let [c4, _] = self.c_invariants();
        g.div(g.mul(g.square(c4), c4), self.discriminant()).expect("nonsingular")
    }

    /// Right-hand side `x^3 + a2 x^2 + a4 x + a6` and linear term `a1 x + a3`.
    fn sides(&self, x: GFElement) -> (GFElement, GFElement) {
        let g = &self.gf;
        let [a1, a2, a3, a4, a6] = self.a;
        let rhs = g.add(g.mul(g.add(g.mul(g.add(x, a2), x), a4), x), a6);
        (rhs, g.add(g.mul(a1, x), a3))
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *p {
            Point::Infinity => true,
            Point::Affine(x, y) => {
                let g = &self.gf;
                let (rhs, lin) = self.sides(x);
                g.add(g.square(y), g.mul(lin, y)) == rhs
            }
        }
    }

    pub fn neg(&self, p: &Point) -> Point {
        match *p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                let g = &self.gf;
                let (_, lin) = self.sides(x);
                Point::Affine(x, g.neg(g.add(y, lin)))
            }
        }
    }

    pub fn add(&self, p: &Point, q: &Point) -> Point {
        let (x1, y1, x2, y2) = match (*p, *q) {
            (Point::Infinity, _) => return *q,
            (_, Point::Infinity) => return *p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let g = &self.gf;
        let [a1, a2, a3, a4, a6] = self.a;
        let (lambda, nu) = if x1 == x2 {
            // P = -Q, or doubling
            let ysum = g.add(g.add(y1, y2), g.add(g.mul(a1, x2), a3));
            if ysum.is_zero() {
                return Point::Infinity;
            }
            let num = g.sub(g.add(g.add(g.mul_int(g.square(x1), 3), g.mul_int(g.mul(a2, x1), 2)), a4), g.mul(a1, y1));
            let den = g.add(g.add(g.mul_int(y1, 2), g.mul(a1, x1)), a3);
            let lambda = g.div(num, den).expect("nonzero tangent denominator");
            let nnum =
                g.sub(g.add(g.neg(g.mul(g.square(x1), x1)), g.mul(a4, x1)), g.sub(g.mul(a3, y1), g.mul_int(a6, 2)));
            let nu = g.div(nnum, den).expect("nonzero tangent denominator");
            (lambda, nu)
        } else {
            let dx = g.sub(x2, x1);
            let lambda = g.div(g.sub(y2, y1), dx).expect("distinct x");
            let nu = g.div(g.sub(g.mul(y1, x2), g.mul(y2, x1)), dx).expect("distinct x");
            (lambda, nu)
        };
        let x3 = g.sub(g.sub(g.sub(g.add(g.square(lambda), g.mul(a1, lambda)), a2), x1), x2);
        let y3 = g.sub(g.neg(g.mul(g.add(lambda, a1), x3)), g.add(nu, a3));
        Point::Affine(x3, y3)
    }

    pub fn double(&self, p: &Point) -> Point {
        self.add(p, p)
    }

    pub fn scalar_mul(&self, n: i64, p: &Point) -> Point {
        let base = if n < 0 { self.neg(p) } else { *p };
        self.mul_u64(n.unsigned_abs(), &base)
    }

    pub fn mul_u64(&self, mut n: u64, p: &Point) -> Point {
        let mut acc = Point::Infinity;
        let mut base = *p;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// A point with the given `x`, if any; the `y` chosen is deterministic.
    pub fn lift_x(&self, x: GFElement) -> Option<Point> {
        let g = &self.gf;
        let (rhs, lin) = self.sides(x);
        if g.p() != 2 {
            // (2y + lin)^2 = lin^2 + 4 rhs
            let d = g.add(g.square(lin), g.mul_int(rhs, 4));
            let s = g.sqrt(d)?;
            let y = g.div(g.sub(s, lin), g.int(2)).ok()?;
            return Some(Point::Affine(x, y));
        }
        if lin.is_zero() {
            return Some(Point::Affine(x, g.sqrt(rhs)?));
        }
        // y = lin z with z^2 + z = rhs / lin^2
        let c = g.div(rhs, g.square(lin)).ok()?;
        if g.trace_f2(c) != 0 {
            return None;
        }
        let z = solve_artin_schreier(g, c)?;
        Some(Point::Affine(x, g.mul(lin, z)))
    }

    /// Quadratic twist by a nonsquare (odd `p`) or a trace-one element (`p = 2`).
    pub fn quadratic_twist(&self) -> FFCurve {
        let g = &self.gf;
        if g.p() == 2 {
            let delta = g.elements().find(|&d| g.trace_f2(d) == 1).expect("trace-one element");
            let [a1, a2, a3, a4, a6] = self.a;
            return FFCurve::new(
                *g,
                [a1, g.add(a2, g.mul(delta, g.square(a1))), a3, a4, g.add(a6, g.mul(delta, g.square(a3)))],
            )
            .expect("twist of a nonsingular curve");
        }
        let d = nonsquare(g);
        let [b2, b4, b6, _] = self.b_invariants();
        let quarter = g.inv(g.int(4)).expect("odd characteristic");
        let half = g.inv(g.int(2)).expect("odd characteristic");
        let a2 = g.mul(d, g.mul(b2, quarter));
        let a4 = g.mul(g.square(d), g.mul(b4, half));
        let a6 = g.mul(g.mul(g.square(d), d), g.mul(b6, quarter));
        FFCurve::new(*g, [GFElement::ZERO, a2, GFElement::ZERO, a4, a6]).expect("twist of a nonsingular curve")
    }
}

/// Least nonsquare of `F_q` in index order.
pub fn nonsquare(g: &GaloisField) -> GFElement {
    g.elements().find(|&d| g.chi(d) == -1).expect("odd field has a nonsquare")
}

/// A root of `z^2 + z = c` over `F_{2^f}` (requires trace zero).
fn solve_artin_schreier(g: &GaloisField, c: GFElement) -> Option<GFElement> {
    if g.degree() == 1 {
        // z^2 + z = 0 for both elements of F_2
        return if c.is_zero() { Some(GFElement::ZERO) } else { None };
    }
    g.elements().find(|&z| g.add(g.square(z), z) == c)
}

impl fmt::Display for FFCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}] over F_{}", parts.join(","), self.gf.order())
    }
}
