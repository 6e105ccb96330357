//! Complex multiplication: find a candidate field from an ordinary prime,
//! move to a field where a twist of the curve has good reduction everywhere,
//! then check the reduction type at every prime up to the lifted bound.

use std::collections::BTreeSet;

use super::isogeny::bad_set;
use super::{
    run_stream, CachedCounter, Check, CmTrace, DecisionConfig, Evidence, LocalTester, Outcome, Params, Task, Verdict,
    Witness, WitnessKind,
};
use crate::arith::{kronecker, PrimeStream};
use crate::chebotarev::{bound_report, bounds, delta_star, delta_star_lifted, nu};
use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::numberfield::{NFElement, NumberField, PrimeIdeal, QuadImagField};
use crate::pointcount::{count_points, frobenius_cm_field, LocalData, TraceCache};

/// The field generated by Frobenius at an ordinary prime.
pub fn candidate_cm_field(ld: &LocalData) -> Result<QuadImagField> {
    QuadImagField::new(frobenius_cm_field(ld)?)
}

/// Whether the reduction at a good prime over `p` is consistent with CM by `f`:
/// supersingular with `p` not split in `f`, or ordinary with Frobenius field
/// `f` and `p` split.
pub fn classify_prime(ld: &LocalData, f: &QuadImagField, p: u64) -> bool {
    let k = kronecker(f.disc(), p);
    if ld.supersingular {
        k != 1
    } else {
        ld.frobenius_disc == Some(f.disc()) && k == 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrdinarySearch {
    pub found: Option<(PrimeIdeal, LocalData)>,
    /// Largest rational prime scanned.
    pub limit: u64,
    /// True when `limit` reaches the full bound rather than the ceiling.
    pub complete: bool,
}

/// First prime of good ordinary reduction, scanning rational primes up to
/// `B(Q, ramified, 2)` and the primes of `K` above each.
pub fn find_ordinary_prime(curve: &Curve, ramified: &BTreeSet<u64>, cfg: &DecisionConfig) -> Result<OrdinarySearch> {
    let q = NumberField::rationals();
    let s: Vec<PrimeIdeal> = ramified.iter().flat_map(|&p| q.decompose_prime(p)).collect();
    let report = bound_report(&cfg.bound, delta_star(&q, &s, 2), 2, true);
    let full = report.effective_b.unwrap_or(u64::MAX);
    let limit = full.min(cfg.bound.ceiling);
    for p in PrimeStream::new(limit) {
        for prime in curve.field().decompose_prime(p) {
            let e = match curve.reduce_at(&prime) {
                Ok(e) => e,
                Err(Error::BadReduction(_) | Error::Unsupported(_)) => continue,
                Err(e) => return Err(e),
            };
            let ld = count_points(&e);
            if !ld.supersingular {
                return Ok(OrdinarySearch { found: Some((prime, ld)), limit, complete: full <= limit });
            }
        }
    }
    Ok(OrdinarySearch { found: None, limit, complete: full <= limit })
}

/// Good reduction at every prime of the curve's field.
pub fn has_everywhere_good_reduction(curve: &Curve) -> Result<bool> {
    for p in curve.suspect_rational_primes()? {
        for prime in curve.field().decompose_prime(p) {
            if !curve.good_reduction_at(&prime)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// First quadratic twist with everywhere good reduction, over products of
/// `-1`, the given rational primes, and the square roots generating the field,
/// in order of the number of factors. The identity comes first.
pub fn egr_twist_search(curve: &Curve, primes: &[u64]) -> Result<Option<(NFElement, Curve)>> {
    let k = curve.field();
    let mut atoms = vec![k.int(-1)];
    atoms.extend(primes.iter().map(|&p| k.int(p as i64)));
    atoms.extend((0..k.rank()).map(|i| k.basis(1 << i)));
    let mut masks: Vec<usize> = (0..1usize << atoms.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let mut d = k.one();
        for (i, a) in atoms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d = &d * a;
            }
        }
        let twist = curve.quadratic_twist(&d)?;
        match has_everywhere_good_reduction(&twist) {
            Ok(true) => return Ok(Some((d, twist))),
            Ok(false) | Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

struct CmTester<'a> {
    counter: CachedCounter<'a>,
    field: QuadImagField,
    everywhere_good: bool,
}

impl LocalTester for CmTester<'_> {
    fn check(&self, prime: &PrimeIdeal) -> Result<Check> {
        match self.counter.local_data(prime) {
            Ok(ld) => Ok(Check { traces: vec![ld.trace], pass: classify_prime(&ld, &self.field, prime.p) }),
            // without a good model everywhere, bad primes carry no information
            Err(Error::BadReduction(_) | Error::Unsupported(_)) if !self.everywhere_good => {
                Ok(Check { traces: vec![], pass: true })
            }
            Err(e) => Err(e),
        }
    }
}

fn check_disc(disc: i64) -> Result<QuadImagField> {
    if disc == -3 || disc == -4 {
        return Err(Error::RootsOfUnityExcluded(disc));
    }
    QuadImagField::new(disc)
}

fn early(outcome: Outcome, reason: &str, witness: Option<Witness>, params: Params) -> Verdict {
    Verdict {
        outcome,
        reason: Some(reason.into()),
        witness,
        bound: None,
        ell: None,
        n_value: None,
        h_value: None,
        digest: Some(Evidence::build(&params, vec![])),
        params,
    }
}

/// Tests CM by `F` prime by prime for a curve over a field containing `F`.
pub fn test_cm_by_field(curve: &Curve, disc: i64, cfg: &DecisionConfig, cache: Option<&TraceCache>) -> Result<Verdict> {
    let mut params = cfg.params(Task::CmByField, &[curve], curve.field());
    params.requested_disc = Some(disc);
    let egr = match has_everywhere_good_reduction(curve) {
        Ok(b) => b,
        Err(Error::Unsupported(_)) => false,
        Err(e) => return Err(e),
    };
    cm_stream(curve, disc, egr, cfg, cache, params)
}

fn cm_stream(
    curve: &Curve,
    disc: i64,
    everywhere_good: bool,
    cfg: &DecisionConfig,
    cache: Option<&TraceCache>,
    mut params: Params,
) -> Result<Verdict> {
    let field = check_disc(disc)?;
    let k = curve.field();
    if !k.contains_quadratic(disc) {
        return Err(Error::FieldNotContained(disc));
    }
    let h = field.class_number();
    let n = nu(1, 2)?.pow(2);
    let log_ds = delta_star_lifted(k, &[], h, n);
    let report = bounds(&cfg.bound, log_ds, n * h * k.degree() as u64, k.is_rational())?;
    params.degree_one_only = report.degree_one_allowed;
    let tester = CmTester { counter: CachedCounter::new(curve, cache), field, everywhere_good };
    let limit = report.effective_b.expect("feasible bound");
    let run = run_stream(k, &[], limit, report.degree_one_allowed, &tester, cfg.jobs)?;
    let (outcome, reason, witness) = match run.failure {
        Some((prime, traces)) => (Outcome::NotCm, None, Some(Witness::at(WitnessKind::ClassifyFail, &prime, traces))),
        None if everywhere_good => (Outcome::CmBy(disc), None, None),
        None => (
            Outcome::Inconclusive,
            Some("every prime passed, but no model with everywhere good reduction was verified".into()),
            None,
        ),
    };
    Ok(Verdict {
        outcome,
        reason,
        witness,
        bound: Some(report),
        ell: Some(2),
        n_value: Some(n),
        h_value: Some(h),
        digest: Some(Evidence::build(&params, run.entries)),
        params,
    })
}

fn check_base_field(k: &NumberField) -> Result<()> {
    let imaginary_quadratic = k.rank() == 1 && k.generators()[0] < 0;
    if k.is_rational() || imaginary_quadratic {
        Ok(())
    } else {
        Err(Error::InvalidArgument("CM decisions need a curve over Q or an imaginary quadratic field".into()))
    }
}

/// Residue characteristics of the bad primes and `K(sqrt(product))`.
struct Radical {
    model: Curve,
    chars: Vec<u64>,
    field: NumberField,
}

fn radical_field(curve: &Curve) -> Result<Radical> {
    let model = if curve.field().is_rational() { curve.minimal_model_q()? } else { curve.clone() };
    let (bad, _) = bad_set(&model)?;
    let chars: Vec<u64> = bad.iter().map(|p| p.p).collect::<BTreeSet<_>>().into_iter().collect();
    let mut prod: i64 = 1;
    for &p in &chars {
        prod = prod.checked_mul(p as i64).ok_or_else(|| Error::Overflow("product of bad characteristics".into()))?;
    }
    let field = curve.field().adjoin(prod)?;
    Ok(Radical { model, chars, field })
}

/// Twist search and the stream test over `K(sqrt N)` joined with `F`.
fn finish(
    rad: &Radical,
    disc: i64,
    cfg: &DecisionConfig,
    cache: Option<&TraceCache>,
    mut params: Params,
    mut trace: CmTrace,
) -> Result<Verdict> {
    let work = match rad.field.adjoin(disc) {
        Ok(k) => k,
        Err(Error::FieldTowerTooLarge) => {
            params.cm = Some(trace);
            return Ok(early(Outcome::Inconclusive, "field tower too large", None, params));
        }
        Err(e) => return Err(e),
    };
    trace.working_field = Some(work.spec());
    let base = rad.model.base_change(&work)?;
    let mut primes: BTreeSet<u64> = rad.chars.iter().copied().collect();
    primes.extend(work.ramified_rational_primes());
    let primes: Vec<u64> = primes.into_iter().collect();
    let (curve, egr) = match egr_twist_search(&base, &primes)? {
        Some((d, twisted)) => {
            trace.twist = Some(d.coords().iter().map(|c| c.to_string()).collect());
            (twisted, true)
        }
        None => (base, false),
    };
    trace.everywhere_good = egr;
    params.cm = Some(trace);
    cm_stream(&curve, disc, egr, cfg, cache, params)
}

/// Decides whether `curve` (over `Q` or an imaginary quadratic field) has
/// potential complex multiplication.
pub fn decide_cm(curve: &Curve, cfg: &DecisionConfig, cache: Option<&TraceCache>) -> Result<Verdict> {
    let k = curve.field();
    check_base_field(k)?;
    let mut params = cfg.params(Task::Cm, &[curve], k);
    match curve.special_j() {
        Some(0) => return Ok(early(Outcome::CmBy(-3), "j = 0", None, params)),
        Some(1728) => return Ok(early(Outcome::CmBy(-4), "j = 1728", None, params)),
        _ => {}
    }
    if let Some(prime) = curve.j_nonintegral_prime()? {
        let w = Witness::at(WitnessKind::NonIntegralJ, &prime, vec![]);
        return Ok(early(Outcome::NotCm, "j is not integral", Some(w), params));
    }
    let rad = match radical_field(curve) {
        Ok(r) => r,
        Err(Error::FieldTowerTooLarge) => {
            return Ok(early(Outcome::Inconclusive, "field tower too large", None, params))
        }
        Err(e) => return Err(e),
    };
    let mut trace =
        CmTrace { bad_characteristics: rad.chars.clone(), radical_field: Some(rad.field.spec()), ..CmTrace::default() };
    let search = find_ordinary_prime(&rad.model, &rad.field.ramified_rational_primes(), cfg)?;
    trace.ordinary_search_limit = Some(search.limit);
    let Some((prime, ld)) = search.found else {
        params.cm = Some(trace);
        return Ok(if search.complete {
            early(Outcome::NotCm, "no ordinary prime below the bound", None, params)
        } else {
            early(Outcome::Inconclusive, "ordinary prime search stopped at the ceiling", None, params)
        });
    };
    let disc = candidate_cm_field(&ld)?.disc();
    trace.ordinary_prime = Some(prime.label());
    trace.ordinary_trace = Some(ld.trace);
    trace.candidate_disc = Some(disc);
    if disc == -3 || disc == -4 {
        params.cm = Some(trace);
        return Ok(early(Outcome::Inconclusive, "candidate field has extra roots of unity", None, params));
    }
    finish(&rad, disc, cfg, cache, params, trace)
}

/// Tests CM by a given field `F` after moving to
/// `K(sqrt N) F` and searching for a twist with good reduction everywhere.
pub fn decide_cm_by_field(
    curve: &Curve,
    disc: i64,
    cfg: &DecisionConfig,
    cache: Option<&TraceCache>,
) -> Result<Verdict> {
    check_disc(disc)?;
    let mut params = cfg.params(Task::CmByField, &[curve], curve.field());
    params.requested_disc = Some(disc);
    let rad = match radical_field(curve) {
        Ok(r) => r,
        Err(Error::FieldTowerTooLarge) => {
            return Ok(early(Outcome::Inconclusive, "field tower too large", None, params))
        }
        Err(e) => return Err(e),
    };
    let trace = CmTrace {
        bad_characteristics: rad.chars.clone(),
        radical_field: Some(rad.field.spec()),
        candidate_disc: Some(disc),
        ..CmTrace::default()
    };
    finish(&rad, disc, cfg, cache, params, trace)
}

/// CM defined over the curve's own field: test CM by
/// every imaginary quadratic subfield whose only roots of unity are `±1`.
/// Subfields `Q(i)` and `Q(sqrt -3)` are reported as inconclusive verdicts.
pub fn decide_cm_over_subfields(
    curve: &Curve,
    cfg: &DecisionConfig,
    cache: Option<&TraceCache>,
) -> Result<(Outcome, Vec<Verdict>)> {
    let mut verdicts = Vec::new();
    for f in curve.field().imaginary_quadratic_subfields() {
        let disc = f.disc();
        let v = if disc == -3 || disc == -4 {
            let mut params = cfg.params(Task::CmByField, &[curve], curve.field());
            params.requested_disc = Some(disc);
            early(Outcome::Inconclusive, "extra roots of unity", None, params)
        } else {
            test_cm_by_field(curve, disc, cfg, cache)?
        };
        verdicts.push(v);
    }
    let outcome = if let Some(v) = verdicts.iter().find(|v| matches!(v.outcome, Outcome::CmBy(_))) {
        v.outcome
    } else if verdicts.iter().all(|v| v.outcome == Outcome::NotCm) {
        Outcome::NotCm
    } else {
        Outcome::Inconclusive
    };
    Ok((outcome, verdicts))
}
