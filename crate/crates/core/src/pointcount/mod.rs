//! Point counts of reduced curves, Frobenius traces, and the persistent trace cache.
//!
//! Small fields are counted by enumerating `x`. Larger fields use baby-step
//! giant-step inside the Hasse interval on pseudorandom points of the curve and
//! of its quadratic twist, narrowing the candidate orders until one remains.

mod cache;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{factor_u64, fundamental_discriminant, isqrt};
use crate::curves::{FFCurve, Point};
use crate::error::{Error, Result};

pub use cache::{cache_key, TraceCache};

/// Fields with fewer elements are always counted by enumeration.
pub const NAIVE_THRESHOLD: u64 = 5000;

/// Points sampled (curve and twist together) before giving up on BSGS.
const MAX_SAMPLES: usize = 48;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub q: u64,
    pub count: u64,
    pub trace: i64,
    pub supersingular: bool,
    /// Fundamental discriminant of `a^2 - 4q`; `None` when supersingular.
    pub frobenius_disc: Option<i64>,
}

impl LocalData {
    /// Derives the remaining fields from `q`, the characteristic, and the trace.
    pub fn from_trace(q: u64, p: u64, trace: i64) -> Result<Self> {
        let bound = isqrt(4 * q) as i64;
        if trace.abs() > bound {
            return Err(Error::InvalidArgument(format!("trace {trace} violates the Hasse bound for q = {q}")));
        }
        let count = (q as i64 + 1 - trace) as u64;
        let supersingular = trace.rem_euclid(p as i64) == 0;
        let frobenius_disc =
            if supersingular { None } else { Some(fundamental_discriminant(trace * trace - 4 * q as i64)?) };
        Ok(LocalData { q, count, trace, supersingular, frobenius_disc })
    }
}

/// Discriminant of the imaginary quadratic field generated by Frobenius.
pub fn frobenius_cm_field(ld: &LocalData) -> Result<i64> {
    ld.frobenius_disc.ok_or(Error::Supersingular)
}

/// A source of exact group orders. BSGS is the only backend shipped.
pub trait CountBackend: Sync {
    fn order(&self, e: &FFCurve) -> u64;
}

/// Enumeration below [`NAIVE_THRESHOLD`], BSGS above.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bsgs;

impl CountBackend for Bsgs {
    fn order(&self, e: &FFCurve) -> u64 {
        if e.field().order() < NAIVE_THRESHOLD {
            count_naive(e)
        } else {
            count_bsgs(e)
        }
    }
}

/// `1 + #{(x, y)}` by running over `x` and counting the roots in `y`.
pub fn count_naive(e: &FFCurve) -> u64 {
    let g = e.field();
    let [a1, a2, a3, a4, a6] = e.ainvs();
    let mut n = 1u64;
    for x in g.elements() {
        let rhs = g.add(g.mul(g.add(g.mul(g.add(x, a2), x), a4), x), a6);
        let lin = g.add(g.mul(a1, x), a3);
        if g.p() == 2 {
            if lin.is_zero() {
                n += 1;
            } else if g.trace_f2(g.div(rhs, g.square(lin)).expect("nonzero")) == 0 {
                n += 2;
            }
        } else {
            n += (1 + g.chi(g.add(g.square(lin), g.mul_int(rhs, 4)))) as u64;
        }
    }
    n
}

/// Group order by BSGS, falling back to enumeration when the samples leave
/// more than one candidate.
pub fn count_bsgs(e: &FFCurve) -> u64 {
    bsgs_order(e).unwrap_or_else(|| count_naive(e))
}

/// The exact order when BSGS pins it down, `None` if ambiguity persists.
pub fn bsgs_order(e: &FFCurve) -> Option<u64> {
    let q = e.field().order();
    let width = isqrt(4 * q);
    let (lo, hi) = (q + 1 - width, q + 1 + width);
    let twist = e.quadratic_twist();
    let mut rng = ChaCha8Rng::from_seed(sampling_seed(e));
    // every order of E divisible by lcm_e, every twist order by lcm_t
    let (mut lcm_e, mut lcm_t) = (1u64, 1u64);
    for i in 0..MAX_SAMPLES {
        let on_twist = i % 2 == 1;
        let curve = if on_twist { &twist } else { e };
        let Some(p) = random_point(curve, &mut rng) else { continue };
        let ord = point_order(curve, &p, lo, hi)?;
        if on_twist {
            lcm_t = lcm(lcm_t, ord);
        } else {
            lcm_e = lcm(lcm_e, ord);
        }
        let mut found = None;
        let mut n = lo.div_ceil(lcm_e) * lcm_e;
        let mut several = false;
        while n <= hi {
            if (2 * q + 2 - n).is_multiple_of(lcm_t) {
                if found.is_some() {
                    several = true;
                    break;
                }
                found = Some(n);
            }
            n += lcm_e;
        }
        match (found, several) {
            (None, _) => return None,
            (Some(n), false) => return Some(n),
            _ => {}
        }
    }
    None
}

/// The local data of a reduced curve; asserts the Hasse bound.
pub fn count_points(e: &FFCurve) -> LocalData {
    count_with(&Bsgs, e)
}

pub fn count_with(backend: &dyn CountBackend, e: &FFCurve) -> LocalData {
    let g = e.field();
    let q = g.order();
    let n = backend.order(e);
    let trace = q as i64 + 1 - n as i64;
    assert!(trace.unsigned_abs() <= isqrt(4 * q), "Hasse bound violated: {n} points on {e}");
    LocalData::from_trace(q, g.p(), trace).expect("trace within the Hasse bound")
}

fn sampling_seed(e: &FFCurve) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(e.field().order().to_le_bytes());
    for a in e.ainvs() {
        for c in a.coords() {
            h.update(c.to_le_bytes());
        }
    }
    h.finalize().into()
}

fn random_point(e: &FFCurve, rng: &mut ChaCha8Rng) -> Option<Point> {
    let g = e.field();
    for _ in 0..64 {
        let x = g.from_index(rng.gen_range(0..g.order()));
        if let Some(p) = e.lift_x(x) {
            return Some(p);
        }
    }
    None
}

fn lcm(a: u64, b: u64) -> u64 {
    a / num_integer::gcd(a, b) * b
}

/// Exact order of `p`, found as a divisor of the least `n` in `[lo, hi]` with
/// `n p = O`. `None` if no such `n` exists.
fn point_order(e: &FFCurve, p: &Point, lo: u64, hi: u64) -> Option<u64> {
    let width = hi - lo;
    let m = isqrt(width) + 1;
    let mut baby: HashMap<Point, u64> = HashMap::with_capacity(m as usize);
    let mut acc = Point::Infinity;
    for j in 0..m {
        if j > 0 && acc == Point::Infinity {
            // the order is smaller than the table
            return Some(j);
        }
        baby.entry(acc).or_insert(j);
        acc = e.add(&acc, p);
    }
    // find k = i m + j with j p = -(lo + i m) p
    let step = e.neg(&e.mul_u64(m, p));
    let mut giant = e.neg(&e.mul_u64(lo, p));
    let mut i = 0;
    while i * m <= width {
        if let Some(&j) = baby.get(&giant) {
            let n = lo + i * m + j;
            if n <= hi {
                return Some(reduce_order(e, p, n));
            }
        }
        giant = e.add(&giant, &step);
        i += 1;
    }
    None
}

fn reduce_order(e: &FFCurve, p: &Point, mut n: u64) -> u64 {
    for (l, k) in factor_u64(n) {
        for _ in 0..k {
            if e.mul_u64(n / l, p) == Point::Infinity {
                n /= l;
            } else {
                break;
            }
        }
    }
    n
}
