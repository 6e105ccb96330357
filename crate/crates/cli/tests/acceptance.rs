//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
//!
//! Runs the full desk-scale decisions (about five minutes on one core), so it
//! uses its own `main` and prints regardless of test capture.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{anyhow, ensure, Result};
use ecdecide_core::chebotarev::{bound_report, bounds, delta_star, delta_star_lifted, nu, BoundConfig};
use ecdecide_core::curves::{Curve, FFCurve};
use ecdecide_core::decision::{
    certificate_verify, decide_cm, decide_cm_by_field, decide_isogenous, has_everywhere_good_reduction, DecisionConfig,
    Outcome, Verdict, WitnessKind,
};
use ecdecide_core::finitefield::{GFElement, GaloisField};
use ecdecide_core::numberfield::{class_number_imag, make_field, NumberField, PrimeIdeal};
use ecdecide_core::pointcount::{bsgs_order, count_bsgs};
use ecdecide_core::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const E11A1: [i64; 5] = [0, -1, 1, -10, -20];
const E11A3: [i64; 5] = [0, -1, 1, 0, 0];
const E15A1: [i64; 5] = [1, 1, 1, -10, -10];
const E17A1: [i64; 5] = [1, -1, 1, -1, -14];
const E49A1: [i64; 5] = [1, -1, 0, -2, -1];
const E121B1: [i64; 5] = [0, -1, 1, -7, 10];

/// Upward-only relative tolerance for logarithmic bounds.
const LOG_TOL: f64 = 1.0 / (1u64 << 20) as f64;
/// Relative agreement with the rounded figures quoted for B_BS, B_LO.
const QUOTED_TOL: f64 = 0.01;
/// Absolute tolerance on the lifted discriminant bound 755.9.
const LIFTED_TOL: f64 = 0.05;
const CURVES_PER_FIELD: usize = 200;
const TRACE_SAMPLES: usize = 120;

fn curve(a: [i64; 5]) -> Curve {
    Curve::from_ints(a).unwrap()
}

fn primes(k: &NumberField, ps: &[u64]) -> Vec<PrimeIdeal> {
    ps.iter().flat_map(|&p| k.decompose_prime(p)).collect()
}

fn within_upward(got: f64, exact: f64) -> bool {
    got >= exact && got <= exact * (1.0 + LOG_TOL)
}

fn close(got: f64, quoted: f64) -> bool {
    ((got - quoted) / quoted).abs() <= QUOTED_TOL
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// ---- independent oracles ----

fn is_prime_small(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn kronecker_oracle(d: i64, p: u64) -> i32 {
    if p == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let r = d.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    let mut acc = 1u64;
    let (mut b, mut e) = (r, (p - 1) / 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// Reduced forms of discriminant `d`.
fn class_number_oracle(d: i64) -> u64 {
    let mut h = 0;
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if num_integer_gcd(num_integer_gcd(a, b.abs()), c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    h
}

fn num_integer_gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn fundamental(d: i64) -> bool {
    let squarefree = |m: i64| (2..).take_while(|k: &i64| k * k <= m.abs()).all(|k| m % (k * k) != 0);
    match d.rem_euclid(4) {
        1 => squarefree(d),
        0 => matches!((d / 4).rem_euclid(4), 2 | 3) && squarefree(d / 4),
        _ => false,
    }
}

/// `#E(F_p)` for integral a-invariants: all pairs for `p = 2`, else by
/// completing the square.
fn naive_count_p(a: [i64; 5], p: u64) -> u64 {
    let m = |x: i64| x.rem_euclid(p as i64) as u64;
    if p == 2 {
        let on = |x: i64, y: i64| m(y * y + a[0] * x * y + a[2] * y - x * x * x - a[1] * x * x - a[3] * x - a[4]) == 0;
        return 1 + (0..2).flat_map(|x| (0..2).map(move |y| (x, y))).filter(|&(x, y)| on(x, y)).count() as u64;
    }
    let mut squares = vec![0u8; p as usize];
    for y in 0..p {
        squares[(y * y % p) as usize] += 1;
    }
    let b2 = m(a[0] * a[0] + 4 * a[1]);
    let b4 = m(2 * a[3] + a[0] * a[2]);
    let b6 = m(a[2] * a[2] + 4 * a[4]);
    let mut n = 1u64;
    for x in 0..p {
        let v = ((4 * x % p + b2) % p * x % p + 2 * b4 % p) % p * x % p;
        n += squares[((v + b6) % p) as usize] as u64;
    }
    n
}

/// `#E(F_q)` by brute force in characteristic 2, by squares otherwise.
fn naive_count_gf(gf: &GaloisField, a: [GFElement; 5]) -> u64 {
    let q = gf.order();
    let idx = |e: GFElement| (e.0[0] + gf.p() * e.0[1]) as usize;
    let cubic = |x: GFElement| {
        let x2 = gf.mul(x, x);
        let rhs = gf.add(gf.add(gf.mul(x2, x), gf.mul(a[1], x2)), gf.add(gf.mul(a[3], x), a[4]));
        (rhs, gf.add(gf.mul(a[0], x), a[2]))
    };
    if gf.p() == 2 {
        let mut n = 1;
        for x in gf.elements() {
            let (rhs, lin) = cubic(x);
            n += gf.elements().filter(|&y| gf.add(gf.mul(y, y), gf.mul(lin, y)) == rhs).count() as u64;
        }
        return n;
    }
    let mut squares = vec![0u64; q as usize];
    for y in gf.elements() {
        squares[idx(gf.mul(y, y))] += 1;
    }
    gf.elements()
        .map(|x| {
            let (rhs, lin) = cubic(x);
            squares[idx(gf.add(gf.mul_int(rhs, 4), gf.mul(lin, lin)))]
        })
        .sum::<u64>()
        + 1
}

fn label_norm(label: &str) -> u64 {
    let mut parts = label.split(':');
    let p: u64 = parts.next().unwrap().parse().unwrap();
    let f: u32 = parts.next().map_or(1, |f| f.trim_start_matches('f').parse().unwrap());
    p.pow(f)
}

fn hasse_ok(v: &Verdict) -> bool {
    v.digest.as_ref().is_none_or(|d| {
        d.entries.iter().all(|e| {
            let q = label_norm(&e.0) as i128;
            e.1.iter().all(|&t| (t as i128).pow(2) <= 4 * q)
        })
    })
}

// ---- criteria ----

struct Shared {
    iso_single: Option<(Verdict, Duration)>,
    cm_run: Option<Verdict>,
}

fn c1_bounds() -> Result<String> {
    let start = Instant::now();
    let q = NumberField::rationals();
    let n = nu(1, 2)?.pow(2);
    ensure!(n == 36, "N = {n}");
    let l = delta_star(&q, &primes(&q, &[11]), n);
    let exact = 36.0 * 36f64.ln() + 35.0 * 11f64.ln();
    ensure!(within_upward(l.value(), exact), "log Delta* = {} vs {exact}", l.value());
    let r = bounds(&BoundConfig::default(), l, n, true)?;
    let bs = (4.0 * exact + 95.0).powi(2);
    let lo = 70.0 * exact * exact;
    ensure!(within_upward(r.b_bs.value(), bs), "B_BS = {} vs {bs}", r.b_bs.value());
    ensure!(close(r.b_bs.value(), 8.97e5), "B_BS = {} not near 8.97e5", r.b_bs.value());
    ensure!(close(r.b_lo.value(), 3.17e6), "B_LO = {} not near 3.17e6", r.b_lo.value());
    ensure!(within_upward(r.b_lo.value(), lo), "B_LO = {} vs {lo}", r.b_lo.value());
    ensure!(r.b_grh.value() == r.b_bs.value().min(r.b_lo.value()), "B_GRH is not the minimum");
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(1), "took {}", secs(took));
    Ok(format!(
        "log Delta* = {:.6} (exact {exact:.6}), B_BS = {:.1}, B_LO = {:.1}, B_GRH = {:?}, {}",
        l.value(),
        r.b_bs.value(),
        r.b_lo.value(),
        r.winner,
        secs(took)
    ))
}

fn c2_isogeny_positive(shared: &mut Shared) -> Result<String> {
    let cfg = DecisionConfig::default();
    let start = Instant::now();
    let v = decide_isogenous(&curve(E11A1), &curve(E11A3), &cfg, None)?;
    let took = start.elapsed();
    shared.iso_single = Some((v.clone(), took));
    ensure!(v.outcome == Outcome::Isogenous, "outcome {}", v.outcome);
    let b = v.bound.as_ref().and_then(|b| b.effective_b).ok_or_else(|| anyhow!("no bound"))?;
    let d = v.digest.as_ref().ok_or_else(|| anyhow!("no digest"))?;
    let expected = (2..=b).filter(|&p| p != 11 && is_prime_small(p)).count() as u64;
    ensure!(d.primes_checked == expected, "checked {} primes, expected {expected}", d.primes_checked);
    ensure!(close(b as f64, 9e5), "effective_B = {b}");
    let step = d.entries.len() / TRACE_SAMPLES;
    for e in d.entries.iter().step_by(step).take(TRACE_SAMPLES) {
        let p: u64 = e.0.parse()?;
        for (i, a) in [E11A1, E11A3].into_iter().enumerate() {
            let t = p as i64 + 1 - naive_count_p(a, p) as i64;
            ensure!(e.1[i] == t, "trace at {p} is {} but the oracle gives {t}", e.1[i]);
        }
    }
    ensure!(took < Duration::from_secs(600), "took {}", secs(took));
    Ok(format!(
        "ISOGENOUS, effective_B = {b}, {} primes, {TRACE_SAMPLES} sampled traces match, {} single-threaded",
        d.primes_checked,
        secs(took)
    ))
}

fn c3_isogeny_negative() -> Result<String> {
    let cfg = DecisionConfig::default();
    let start = Instant::now();
    let v = decide_isogenous(&curve(E11A1), &curve(E17A1), &cfg, None)?;
    let took = start.elapsed();
    ensure!(v.outcome == Outcome::NotIsogenous, "(11a1, 17a1) outcome {}", v.outcome);
    let w = v.witness.as_ref().ok_or_else(|| anyhow!("no witness"))?;
    // bad sets {11} and {17}: the least prime where exactly one is bad
    ensure!((w.kind, w.p) == (WitnessKind::BadReduction, 11), "(11a1, 17a1) witness {:?} at {}", w.kind, w.p);
    ensure!(took < Duration::from_secs(1), "took {}", secs(took));

    let v = decide_isogenous(&curve(E11A1), &curve(E121B1), &cfg, None)?;
    let w = v.witness.as_ref().ok_or_else(|| anyhow!("no witness"))?;
    let least = (2..).find(|&p| p != 11 && naive_count_p(E11A1, p) != naive_count_p(E121B1, p)).unwrap();
    ensure!((w.kind, w.p) == (WitnessKind::TraceMismatch, least), "(11a1, 121b1) witness {:?} at {}", w.kind, w.p);

    let v = decide_isogenous(&curve(E11A1), &curve(E15A1), &cfg, None)?;
    let d = v.digest.as_ref().ok_or_else(|| anyhow!("no digest"))?;
    ensure!(v.outcome == Outcome::NotIsogenous && v.reason.as_deref() == Some("bad sets differ"), "(11a1, 15a1)");
    ensure!(d.primes_checked == 0 && v.bound.is_none(), "(11a1, 15a1) enumerated {} primes", d.primes_checked);
    Ok(format!(
        "(11a1,17a1) bad-set witness 11 in {}; (11a1,121b1) trace witness {least}; (11a1,15a1) shortcut, 0 primes",
        secs(took)
    ))
}

fn c4_cm_positive(shared: &mut Shared) -> Result<String> {
    let cfg = DecisionConfig { jobs: 8, ..DecisionConfig::default() };
    let start = Instant::now();
    let v = decide_cm(&curve(E49A1), &cfg, None)?;
    let took = start.elapsed();
    shared.cm_run = Some(v.clone());
    ensure!(v.outcome == Outcome::CmBy(-7), "outcome {}", v.outcome);
    let t = v.params.cm.as_ref().ok_or_else(|| anyhow!("no CM trace"))?;
    ensure!((t.ordinary_prime.as_deref(), t.ordinary_trace) == (Some("2"), Some(1)), "ordinary prime {t:?}");
    ensure!(t.candidate_disc == Some(-7), "candidate {:?}", t.candidate_disc);
    let work = NumberField::from_spec(t.working_field.as_ref().ok_or_else(|| anyhow!("no working field"))?)?;
    let mut subs = work.quadratic_subfield_discs();
    subs.sort();
    ensure!(subs == [-7, -4, 28], "working field subfields {subs:?}");
    ensure!(t.everywhere_good, "no everywhere-good twist");
    let coords = t.twist.as_ref().ok_or_else(|| anyhow!("no twist"))?;
    let d = work.element(coords.iter().map(|c| c.parse()).collect::<Result<_, _>>()?)?;
    ensure!(d.square() == work.int(-7), "twist element squares to {}", d.square());
    let base = curve(E49A1).base_change(&work)?;
    let seven = &primes(&work, &[7])[0];
    let twisted = base.quadratic_twist(&d)?;
    ensure!(!base.good_reduction_at(seven)?, "49a1 already good at 7");
    ensure!(has_everywhere_good_reduction(&twisted)?, "twist is not good everywhere");
    let good_at_7 = base.quadratic_twist(&work.sqrt_of_int(7).unwrap())?.good_reduction_at(seven)?;
    ensure!(good_at_7, "twist by sqrt 7 does not repair 7");
    ensure!((v.h_value, v.n_value) == (Some(1), Some(36)), "h, N = {:?}, {:?}", v.h_value, v.n_value);
    ensure!(class_number_oracle(-7) == 1, "h(-7)");
    let b = v.bound.as_ref().ok_or_else(|| anyhow!("no bound"))?;
    let lifted = delta_star_lifted(&work, &[], 1, 36).value();
    ensure!((b.log_delta_star.value() - 755.9).abs() < LIFTED_TOL, "log Delta* = {}", b.log_delta_star.value());
    ensure!(lifted == b.log_delta_star.value(), "recorded bound differs from a recomputation");
    ensure!(close(b.b_bs.value(), 1.15e7), "B_BS = {}", b.b_bs.value());
    let dig = v.digest.as_ref().ok_or_else(|| anyhow!("no digest"))?;
    ensure!(dig.primes_checked == dig.entries.len() as u64, "digest count");
    ensure!(took < Duration::from_secs(45 * 60), "took {}", secs(took));
    Ok(format!(
        "CM_BY(-7): ordinary (2, 1), twist sqrt(-7) = i sqrt 7 good everywhere, h = 1, N = 36, log Delta* = {:.2}, \
         B_BS = {:.4e}, {} primes pass, {} at 8 jobs",
        b.log_delta_star.value(),
        b.b_bs.value(),
        dig.primes_checked,
        secs(took)
    ))
}

fn c5_cm_negative() -> Result<String> {
    let cfg = DecisionConfig::default();
    let start = Instant::now();
    let v = decide_cm(&curve(E11A1), &cfg, None)?;
    let took = start.elapsed();
    let w = v.witness.as_ref().ok_or_else(|| anyhow!("no witness"))?;
    ensure!(v.outcome == Outcome::NotCm, "11a1 outcome {}", v.outcome);
    ensure!((w.kind, w.p) == (WitnessKind::NonIntegralJ, 11), "11a1 witness {:?} at {}", w.kind, w.p);
    ensure!(took < Duration::from_secs(1), "took {}", secs(took));
    let v = decide_cm_by_field(&curve(E49A1), -11, &cfg, None)?;
    let w = v.witness.as_ref().ok_or_else(|| anyhow!("no witness"))?;
    ensure!(v.outcome == Outcome::NotCm && w.p == 3, "49a1 vs -11: {} witness {}", v.outcome, w.p);
    Ok(format!("11a1 NOT_CM (j not integral at 11) in {}; 49a1 vs Q(sqrt -11) NOT_CM at {}", secs(took), w.prime))
}

fn c6_oracle_equivalence() -> Result<String> {
    let mut fields: Vec<(u64, u32)> =
        vec![(2, 1), (3, 1), (2, 2), (5, 1), (3, 2), (5, 2), (101, 1), (1009, 1), (2003, 1)];
    fields.extend((2..=43).filter(|&p| is_prime_small(p)).map(|p| (p, 2)));
    fields.sort();
    fields.dedup();
    let mut rng = StdRng::seed_from_u64(0x6563_6465);
    let (mut total, mut by_bsgs) = (0, 0);
    for &(p, f) in &fields {
        let gf = GaloisField::new(p, f)?;
        let mut made = 0;
        while made < CURVES_PER_FIELD {
            let a: [GFElement; 5] = std::array::from_fn(|_| gf.from_index(rng.gen_range(0..gf.order())));
            let Ok(e) = FFCurve::new(gf, a) else { continue };
            made += 1;
            let want = naive_count_gf(&gf, a);
            let got = count_bsgs(&e);
            ensure!(got == want, "F_{p}^{f} {a:?}: bsgs {got}, naive {want}");
            if let Some(n) = bsgs_order(&e) {
                ensure!(n == want, "F_{p}^{f} {a:?}: bsgs order {n}, naive {want}");
                by_bsgs += 1;
            }
            total += 1;
        }
    }
    Ok(format!("{total} curves over {} fields, 0 discrepancies ({by_bsgs} resolved without fallback)", fields.len()))
}

fn c7_invariants(shared: &Shared) -> Result<String> {
    let runs = [shared.iso_single.as_ref().map(|(v, _)| v), shared.cm_run.as_ref()];
    ensure!(runs.iter().all(|r| r.is_some()), "criterion 2 or 4 did not produce a certificate");
    ensure!(runs.iter().flatten().all(|v| hasse_ok(v)), "a recorded trace violates the Hasse bound");

    let mut rng = StdRng::seed_from_u64(7);
    for &(p, f) in &[(101u64, 1u32), (1009, 1), (10007, 1), (31, 2)] {
        let gf = GaloisField::new(p, f)?;
        let mut n = 0;
        while n < 50 {
            let a: [GFElement; 5] = std::array::from_fn(|_| gf.from_index(rng.gen_range(0..gf.order())));
            let Ok(e) = FFCurve::new(gf, a) else { continue };
            let (c, t) = (count_bsgs(&e), count_bsgs(&e.quadratic_twist()));
            ensure!(c + t == 2 * gf.order() + 2, "twist sum over F_{p}^{f}");
            ensure!((c as i128 - gf.order() as i128 - 1).pow(2) <= 4 * gf.order() as i128, "Hasse over F_{p}^{f}");
            n += 1;
        }
    }

    for (g, l) in [(1u32, 2u64), (1, 3), (1, 5), (2, 2)] {
        let dim = 2 * g as usize;
        let brute = (0..l.pow((dim * dim) as u32)).filter(|&m| det_nonzero(m, dim, l)).count() as u64;
        ensure!(nu(g, l)? == brute, "nu({g}, {l})");
    }

    ensure!([-7, -15, -23].map(class_number_imag) == [1, 2, 3], "h(-7, -15, -23)");
    let discs: Vec<i64> = (-499..0).filter(|&d| fundamental(d)).collect();
    for &d in &discs {
        ensure!(class_number_imag(d) == class_number_oracle(d), "h({d})");
    }

    for d in [-4i64, -7, 5, 8, -15] {
        let k = make_field(&[d])?;
        for p in (2..1000).filter(|&p| is_prime_small(p)) {
            let above = k.decompose_prime(p);
            let shape: Vec<(u32, u32)> = above.iter().map(|q| (q.e, q.f)).collect();
            let want = match kronecker_oracle(d, p) {
                1 => vec![(1, 1), (1, 1)],
                0 => vec![(2, 1)],
                _ => vec![(1, 2)],
            };
            ensure!(shape == want, "decomposition of {p} in Q(sqrt {d})");
        }
    }

    let k = make_field(&[-7])?;
    for i in 0..1000 {
        let a: [i64; 5] = std::array::from_fn(|_| rng.gen_range(-50..=50));
        let e = if i % 2 == 0 { Curve::from_ints(a) } else { Curve::over_field_ints(k.clone(), a) };
        let e = match e {
            Ok(e) => e,
            Err(Error::SingularModel) => continue,
            Err(err) => return Err(err.into()),
        };
        let inv = e.invariants();
        ensure!(&inv.c4.pow(3) - &inv.c6.square() == inv.disc.scale_int(1728), "1728 Delta for {a:?}");
    }
    Ok(format!(
        "Hasse on all recorded traces, twist sums, nu brute force, h for {} fundamental discs, decomposition for 5 fields, 1728 Delta",
        discs.len()
    ))
}

/// Matrix number `m` (base-`l` digits, row major) is invertible.
fn det_nonzero(mut m: u64, dim: usize, l: u64) -> bool {
    let mut rows = vec![vec![0i64; dim]; dim];
    for row in rows.iter_mut() {
        for x in row.iter_mut() {
            *x = (m % l) as i64;
            m /= l;
        }
    }
    let l = l as i64;
    for col in 0..dim {
        let Some(piv) = (col..dim).find(|&r| rows[r][col] % l != 0) else { return false };
        rows.swap(col, piv);
        let pivot = rows[col].clone();
        let inv = (1..l).find(|&x| pivot[col] * x % l == 1).unwrap();
        for row in rows.iter_mut().skip(col + 1) {
            let factor = row[col] * inv % l;
            for (x, p) in row.iter_mut().zip(&pivot) {
                *x = (*x - factor * p).rem_euclid(l);
            }
        }
    }
    true
}

fn c8_determinism(shared: &Shared) -> Result<String> {
    let (single, _) = shared.iso_single.as_ref().ok_or_else(|| anyhow!("criterion 2 did not produce a certificate"))?;
    let cfg = DecisionConfig { jobs: 8, ..DecisionConfig::default() };
    let start = Instant::now();
    let eight = decide_isogenous(&curve(E11A1), &curve(E11A3), &cfg, None)?;
    let took = start.elapsed();
    ensure!(single.to_json() == eight.to_json(), "certificates differ between 1 and 8 jobs");
    for v in [single, &eight] {
        let parsed = Verdict::from_json(&v.to_json())?;
        let r = certificate_verify(&parsed, None, &DecisionConfig::default(), None)?;
        ensure!(r.accepted, "verify rejected: {:?}", r.mismatch);
    }
    ensure!(took < Duration::from_secs(120), "8-job run took {}", secs(took));
    Ok(format!(
        "{} bytes identical at 1 and 8 jobs, both verified cold; 8-job run {}",
        single.to_json().len(),
        secs(took)
    ))
}

fn c9_unconditional() -> Result<String> {
    let k = make_field(&[-7])?;
    let cfg = BoundConfig { grh: false, c_u: 40.0, ..BoundConfig::default() };
    let r = bound_report(&cfg, delta_star(&k, &[], 2), 4, false);
    let exact = 40.0 * 784f64.ln();
    ensure!(within_upward(r.b_u_log.value(), exact), "b_u_log = {} vs {exact}", r.b_u_log.value());
    ensure!(
        matches!(bounds(&cfg, delta_star(&k, &[], 2), 4, false), Err(Error::BoundInfeasible { .. })),
        "not refused"
    );

    let bin = env!("CARGO_BIN_EXE_ecdecide");
    let out = Command::new(bin).args(["bound", "--field=-7", "--n", "2", "--unconditional", "--c-u", "40"]).output()?;
    ensure!(out.status.code() == Some(3), "bound exit {:?}", out.status.code());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout)?;
    let cli_log = report["b_u_log"].as_f64().ok_or_else(|| anyhow!("no b_u_log"))?;
    ensure!(within_upward(cli_log, exact), "cli b_u_log = {cli_log}");
    let run = Command::new(bin)
        .args(["cm", r#"{"ainvs":[1,-1,0,-2,-1]}"#, "--unconditional", "--i-understand-huge-bounds"])
        .output()?;
    ensure!(run.status.code() == Some(3), "unconditional cm exit {:?}", run.status.code());
    Ok(format!("b_u_log = {cli_log:.3} (40 ln 784 = {exact:.3}), bound and cm runs exit 3 above the ceiling"))
}

fn main() {
    let mut shared = Shared { iso_single: None, cm_run: None };
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Result<String>| {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(anyhow!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({})", secs(start.elapsed())),
            Err(e) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {e:#} ({})", secs(start.elapsed()));
            }
        }
    };
    report(1, "bound reproduction", &mut c1_bounds);
    report(2, "isogeny positive run", &mut || c2_isogeny_positive(&mut shared));
    report(3, "isogeny negative runs", &mut c3_isogeny_negative);
    report(4, "CM positive run", &mut || c4_cm_positive(&mut shared));
    report(5, "CM negative runs", &mut c5_cm_negative);
    report(6, "BSGS against naive counts", &mut c6_oracle_equivalence);
    report(7, "invariant suites", &mut || c7_invariants(&shared));
    report(8, "determinism", &mut || c8_determinism(&shared));
    report(9, "unconditional-mode honesty", &mut c9_unconditional);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
