//! Isogeny of two elliptic curves over the same field: compare point counts at
//! every prime up to the Chebotarev bound for `N = |GL_2(Z/l)|^2`.

use std::collections::BTreeSet;

use super::{
    run_stream, CachedCounter, Check, DecisionConfig, Evidence, LocalTester, Outcome, Task, Verdict, Witness,
    WitnessKind,
};
use crate::arith::is_prime;
use crate::chebotarev::{bounds, delta_star, nu};
use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::numberfield::PrimeIdeal;
use crate::pointcount::{LocalData, TraceCache};

/// Least prime not among the residue characteristics of `s`.
pub fn select_ell(s: &[PrimeIdeal]) -> u64 {
    let chars: BTreeSet<u64> = s.iter().map(|p| p.p).collect();
    (2u64..).find(|&l| is_prime(l) && !chars.contains(&l)).expect("infinitely many primes")
}

/// Curves over the same finite field are isogenous iff their counts agree.
pub fn isogenous_over_residue(a: &LocalData, b: &LocalData) -> Result<bool> {
    if a.q != b.q {
        return Err(Error::FieldMismatch(format!("F_{} vs F_{}", a.q, b.q)));
    }
    Ok(a.count == b.count)
}

/// Compares point counts of two curves at a prime.
pub struct CountingTester<'a> {
    first: CachedCounter<'a>,
    second: CachedCounter<'a>,
}

impl<'a> CountingTester<'a> {
    pub fn new(first: &'a Curve, second: &'a Curve, cache: Option<&'a TraceCache>) -> Self {
        CountingTester { first: CachedCounter::new(first, cache), second: CachedCounter::new(second, cache) }
    }
}

impl LocalTester for CountingTester<'_> {
    fn check(&self, prime: &PrimeIdeal) -> Result<Check> {
        let a = self.first.local_data(prime)?;
        let b = self.second.local_data(prime)?;
        Ok(Check { traces: vec![a.trace, b.trace], pass: isogenous_over_residue(&a, &b)? })
    }
}

/// Primes of bad reduction, with a flag that is false when some prime could
/// not be decided and was included conservatively.
pub(super) fn bad_set(curve: &Curve) -> Result<(Vec<PrimeIdeal>, bool)> {
    if curve.field().is_rational() {
        return Ok((curve.bad_primes()?, true));
    }
    let mut out = Vec::new();
    let mut exact = true;
    for p in curve.suspect_rational_primes()? {
        for prime in curve.field().decompose_prime(p) {
            match curve.good_reduction_at(&prime) {
                Ok(true) => {}
                Ok(false) => out.push(prime),
                Err(Error::Unsupported(_)) => {
                    exact = false;
                    out.push(prime);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok((out, exact))
}

fn sort_primes(v: &mut [PrimeIdeal]) {
    v.sort_by_key(|p| (p.norm(), p.p));
}

pub fn decide_isogenous(e1: &Curve, e2: &Curve, cfg: &DecisionConfig, cache: Option<&TraceCache>) -> Result<Verdict> {
    if e1.field() != e2.field() {
        return Err(Error::FieldMismatch("the curves are defined over different fields".into()));
    }
    let k = e1.field().clone();
    let mut params = cfg.params(Task::Isogeny, &[e1, e2], &k);
    let (c1, c2) =
        if k.is_rational() { (e1.minimal_model_q()?, e2.minimal_model_q()?) } else { (e1.clone(), e2.clone()) };
    let (s1, exact1) = bad_set(&c1)?;
    let (s2, exact2) = bad_set(&c2)?;
    let mut diff: Vec<PrimeIdeal> =
        s1.iter().filter(|p| !s2.contains(p)).chain(s2.iter().filter(|p| !s1.contains(p))).cloned().collect();
    sort_primes(&mut diff);
    if exact1 && exact2 {
        if let Some(w) = diff.first() {
            return Ok(Verdict {
                outcome: Outcome::NotIsogenous,
                reason: Some("bad sets differ".into()),
                witness: Some(Witness::at(WitnessKind::BadReduction, w, vec![])),
                bound: None,
                ell: None,
                n_value: None,
                h_value: None,
                digest: Some(Evidence::build(&params, vec![])),
                params,
            });
        }
    }
    let mut s = s1;
    s.extend(s2.into_iter().filter(|p| !s.contains(p)).collect::<Vec<_>>());
    sort_primes(&mut s);
    let tester = CountingTester::new(&c1, &c2, cache);
    decide_with_tester(&k, &s, 1, &tester, cfg, &mut params)
}

/// The isogeny loop for abelian varieties of dimension `g` with bad primes in
/// `s`, given a local tester.
pub fn decide_with_tester(
    k: &crate::numberfield::NumberField,
    s: &[PrimeIdeal],
    g: u32,
    tester: &dyn LocalTester,
    cfg: &DecisionConfig,
    params: &mut super::Params,
) -> Result<Verdict> {
    let ell = match cfg.ell_override {
        Some(l) => {
            if !is_prime(l) || s.iter().any(|p| p.p == l) {
                return Err(Error::InvalidArgument(format!("l = {l} must be a prime outside the bad characteristics")));
            }
            l
        }
        None => select_ell(s),
    };
    let nu_value = nu(g, ell)?;
    let n = nu_value.checked_mul(nu_value).ok_or_else(|| Error::Overflow("N = nu^2".into()))?;
    let log_ds = delta_star(k, s, n);
    let n_times_deg = n.checked_mul(k.degree() as u64).ok_or_else(|| Error::Overflow("N [K:Q]".into()))?;
    let report = bounds(&cfg.bound, log_ds, n_times_deg, k.is_rational())?;
    params.excluded = s.iter().map(|p| p.label()).collect();
    params.degree_one_only = report.degree_one_allowed;
    let limit = report.effective_b.expect("feasible bound");
    let run = run_stream(k, s, limit, report.degree_one_allowed, tester, cfg.jobs)?;
    let (outcome, witness) = match run.failure {
        Some((prime, traces)) => (Outcome::NotIsogenous, Some(Witness::at(WitnessKind::TraceMismatch, &prime, traces))),
        None => (Outcome::Isogenous, None),
    };
    Ok(Verdict {
        outcome,
        reason: None,
        witness,
        bound: Some(report),
        ell: Some(ell),
        n_value: Some(n),
        h_value: None,
        digest: Some(Evidence::build(params, run.entries)),
        params: params.clone(),
    })
}
