//! Certificate replay: recompute the verdict and locate the first divergence.

use serde::{Deserialize, Serialize};

use super::{decide_cm, decide_cm_by_field, decide_isogenous, hash_chain, DecisionConfig, Task, Verdict};
use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::pointcount::TraceCache;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub accepted: bool,
    pub mismatch: Option<String>,
    /// Label of the first prime whose recorded traces differ.
    pub prime: Option<String>,
}

impl VerifyReport {
    fn reject(why: impl Into<String>, prime: Option<String>) -> Self {
        VerifyReport { accepted: false, mismatch: Some(why.into()), prime }
    }
}

/// Replays `cert` under `cfg`. Curves default to those recorded in the
/// certificate; when given they must match the recorded ones.
pub fn certificate_verify(
    cert: &Verdict,
    curves: Option<&[Curve]>,
    cfg: &DecisionConfig,
    cache: Option<&TraceCache>,
) -> Result<VerifyReport> {
    let p = &cert.params;
    let echo = [
        ("grh", p.grh == cfg.bound.grh),
        ("c_u", p.c_u == cfg.bound.c_u),
        ("ceiling", p.ceiling == cfg.bound.ceiling),
        ("ell_override", p.ell_override == cfg.ell_override),
    ];
    if let Some((name, _)) = echo.iter().find(|(_, ok)| !ok) {
        return Ok(VerifyReport::reject(format!("parameter mismatch: {name}"), None));
    }
    let recorded = p.curves.iter().map(|s| s.to_curve()).collect::<Result<Vec<_>>>()?;
    if let Some(given) = curves {
        if given.iter().map(|c| c.to_spec()).collect::<Vec<_>>() != p.curves {
            return Ok(VerifyReport::reject("curve mismatch", None));
        }
    }
    let chain_ok = cert
        .digest
        .as_ref()
        .is_none_or(|d| d.primes_checked == d.entries.len() as u64 && hash_chain(p, &d.entries) == d.chain);
    let need = |n: usize| {
        if recorded.len() == n {
            Ok(())
        } else {
            Err(Error::Malformed(format!("expected {n} curves in the certificate")))
        }
    };
    let fresh = match p.task {
        Task::Isogeny => {
            need(2)?;
            decide_isogenous(&recorded[0], &recorded[1], cfg, cache)?
        }
        Task::Cm => {
            need(1)?;
            decide_cm(&recorded[0], cfg, cache)?
        }
        Task::CmByField => {
            need(1)?;
            let disc = p.requested_disc.ok_or_else(|| Error::Malformed("missing requested_disc".into()))?;
            decide_cm_by_field(&recorded[0], disc, cfg, cache)?
        }
    };
    let report = compare(cert, &fresh);
    if report.accepted && !chain_ok {
        return Ok(VerifyReport::reject("digest chain does not match its entries", None));
    }
    Ok(report)
}

fn compare(cert: &Verdict, fresh: &Verdict) -> VerifyReport {
    if let (Some(a), Some(b)) = (&cert.digest, &fresh.digest) {
        let n = a.entries.len().max(b.entries.len());
        for i in 0..n {
            let (x, y) = (a.entries.get(i), b.entries.get(i));
            if x != y {
                let label = x.or(y).map(|e| e.0.clone());
                return VerifyReport::reject("recorded traces differ from recomputed ones", label);
            }
        }
    }
    let checks = [
        ("parameter mismatch", cert.params == fresh.params),
        ("bound report differs", cert.bound == fresh.bound),
        ("outcome differs", cert.outcome == fresh.outcome),
        ("witness differs", cert.witness == fresh.witness),
        ("ell, N or h differs", (cert.ell, cert.n_value, cert.h_value) == (fresh.ell, fresh.n_value, fresh.h_value)),
        ("digest differs", cert.digest == fresh.digest),
        ("reason differs", cert.reason == fresh.reason),
    ];
    match checks.iter().find(|(_, ok)| !ok) {
        Some((why, _)) => VerifyReport::reject(*why, cert.witness.as_ref().map(|w| w.prime.clone())),
        None => VerifyReport { accepted: true, mismatch: None, prime: None },
    }
}
