//! Isogeny and complex multiplication decisions, with replayable certificates.
//!
//! Both procedures reduce to a per-prime local check over every prime of a
//! working field up to an effective Chebotarev bound. The prime stream is cut
//! into fixed norm ranges that are checked in parallel waves; results are
//! reassembled in stream order, so verdicts do not depend on the shard count.

mod cm;
mod isogeny;
mod verify;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use crate::chebotarev::{BoundConfig, BoundReport, TestPrimes};
use crate::curves::{Curve, CurveSpec, FFCurve};
use crate::error::{Error, Result};
use crate::numberfield::{FieldSpec, NumberField, PrimeIdeal};
use crate::pointcount::{count_points, LocalData, TraceCache};

pub use cm::{
    candidate_cm_field, classify_prime, decide_cm, decide_cm_by_field, decide_cm_over_subfields, egr_twist_search,
    find_ordinary_prime, has_everywhere_good_reduction, test_cm_by_field, OrdinarySearch,
};
pub use isogeny::{decide_isogenous, decide_with_tester, isogenous_over_residue, select_ell, CountingTester};
pub use verify::{certificate_verify, VerifyReport};

/// Width of the norm ranges the prime stream is split into.
pub const CHUNK_WIDTH: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Isogenous,
    NotIsogenous,
    CmBy(i64),
    NotCm,
    Inconclusive,
}

impl Outcome {
    /// Process exit code: 0 positive, 1 negative, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Isogenous | Outcome::CmBy(_) => 0,
            Outcome::NotIsogenous | Outcome::NotCm => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Isogenous => f.write_str("ISOGENOUS"),
            Outcome::NotIsogenous => f.write_str("NOT_ISOGENOUS"),
            Outcome::CmBy(d) => write!(f, "CM_BY({d})"),
            Outcome::NotCm => f.write_str("NOT_CM"),
            Outcome::Inconclusive => f.write_str("INCONCLUSIVE"),
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ISOGENOUS" => Outcome::Isogenous,
            "NOT_ISOGENOUS" => Outcome::NotIsogenous,
            "NOT_CM" => Outcome::NotCm,
            "INCONCLUSIVE" => Outcome::Inconclusive,
            _ => {
                let d = s
                    .strip_prefix("CM_BY(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::Malformed(format!("unknown outcome {s:?}")))?;
                Outcome::CmBy(d)
            }
        })
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Point counts differ at the prime.
    TraceMismatch,
    /// One curve has good and the other bad reduction at the prime.
    BadReduction,
    /// `v(j) < 0` at the prime.
    NonIntegralJ,
    /// The local reduction type contradicts CM by the candidate field.
    ClassifyFail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub prime: String,
    pub p: u64,
    pub norm: u64,
    pub traces: Vec<i64>,
}

impl Witness {
    pub fn at(kind: WitnessKind, prime: &PrimeIdeal, traces: Vec<i64>) -> Self {
        Witness { kind, prime: prime.label(), p: prime.p, norm: prime.norm(), traces }
    }
}

/// One checked prime: its label and the traces computed there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry(pub String, pub Vec<i64>);

impl Entry {
    fn digest_bytes(&self) -> String {
        let t: Vec<String> = self.1.iter().map(|t| t.to_string()).collect();
        format!("{}={}", self.0, t.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    /// Hex SHA-256 hash chain seeded by the parameters, one link per entry.
    pub chain: String,
    pub primes_checked: u64,
    pub entries: Vec<Entry>,
}

impl Evidence {
    pub fn build(params: &Params, entries: Vec<Entry>) -> Self {
        let chain = hash_chain(params, &entries);
        Evidence { chain, primes_checked: entries.len() as u64, entries }
    }
}

pub fn hash_chain(params: &Params, entries: &[Entry]) -> String {
    let seed = serde_json::to_string(params).expect("parameters serialize");
    let mut h: [u8; 32] = Sha256::digest(seed.as_bytes()).into();
    for e in entries {
        let mut s = Sha256::new();
        s.update(h);
        s.update(e.digest_bytes().as_bytes());
        h = s.finalize().into();
    }
    hex::encode(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Isogeny,
    Cm,
    CmByField,
}

/// Intermediate results of the CM pipeline.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CmTrace {
    pub ordinary_prime: Option<String>,
    pub ordinary_trace: Option<i64>,
    pub ordinary_search_limit: Option<u64>,
    pub candidate_disc: Option<i64>,
    pub bad_characteristics: Vec<u64>,
    pub radical_field: Option<FieldSpec>,
    pub working_field: Option<FieldSpec>,
    /// Coordinates of the twisting element, or `None` if no twist was verified.
    pub twist: Option<Vec<String>>,
    pub everywhere_good: bool,
}

/// Everything needed to replay a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub task: Task,
    pub curves: Vec<CurveSpec>,
    pub field: FieldSpec,
    pub grh: bool,
    pub c_u: f64,
    pub ceiling: u64,
    pub ell_override: Option<u64>,
    /// Candidate field requested directly (`Task::CmByField`).
    pub requested_disc: Option<i64>,
    /// Labels of the excluded primes.
    pub excluded: Vec<String>,
    pub degree_one_only: bool,
    pub cm: Option<CmTrace>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reason: Option<String>,
    pub witness: Option<Witness>,
    pub bound: Option<BoundReport>,
    pub ell: Option<u64>,
    pub n_value: Option<u64>,
    pub h_value: Option<u64>,
    pub digest: Option<Evidence>,
    pub params: Params,
}

impl Verdict {
    /// Compact JSON; evidence lists can hold hundreds of thousands of entries.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionConfig {
    pub bound: BoundConfig,
    pub ell_override: Option<u64>,
    /// Norm ranges checked concurrently; does not affect results.
    pub jobs: usize,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        DecisionConfig { bound: BoundConfig::default(), ell_override: None, jobs: 1 }
    }
}

impl DecisionConfig {
    fn params(&self, task: Task, curves: &[&Curve], field: &NumberField) -> Params {
        Params {
            task,
            curves: curves.iter().map(|c| c.to_spec()).collect(),
            field: field.spec(),
            grh: self.bound.grh,
            c_u: self.bound.c_u,
            ceiling: self.bound.ceiling,
            ell_override: self.ell_override,
            requested_disc: None,
            excluded: Vec::new(),
            degree_one_only: false,
            cm: None,
        }
    }
}

/// Result of a local check at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub traces: Vec<i64>,
    pub pass: bool,
}

/// A per-prime test. For abelian varieties of dimension `g` the caller
/// supplies a tester comparing characteristic polynomials of Frobenius.
pub trait LocalTester: Sync {
    fn check(&self, prime: &PrimeIdeal) -> Result<Check>;
}

/// Local data of `curve` at `prime`, through the cache when present.
pub(crate) struct CachedCounter<'a> {
    curve: &'a Curve,
    prefix: String,
    cache: Option<&'a TraceCache>,
}

impl<'a> CachedCounter<'a> {
    pub(crate) fn new(curve: &'a Curve, cache: Option<&'a TraceCache>) -> Self {
        let field = serde_json::to_string(&curve.field().spec()).expect("field serializes");
        let spec = serde_json::to_string(&curve.to_spec()).expect("curve serializes");
        CachedCounter { curve, prefix: format!("[{field},{spec},"), cache }
    }

    fn key(&self, prime: &PrimeIdeal) -> String {
        let label = serde_json::to_string(&prime.label()).expect("label serializes");
        hex::encode(Sha256::digest(format!("{}{label}]", self.prefix).as_bytes()))
    }

    /// Errors with `BadReduction` when the curve is bad at `prime`.
    pub(crate) fn local_data(&self, prime: &PrimeIdeal) -> Result<LocalData> {
        let count = |e: FFCurve| count_points(&e).trace;
        let trace = match self.cache {
            Some(c) => {
                let key = self.key(prime);
                c.get_or_insert_with(&key, || Ok(count(self.curve.reduce_at(prime)?)))?
            }
            None => count(self.curve.reduce_at(prime)?),
        };
        LocalData::from_trace(prime.norm(), prime.p, trace)
    }
}

pub(crate) struct StreamResult {
    pub entries: Vec<Entry>,
    pub failure: Option<(PrimeIdeal, Vec<i64>)>,
}

struct ChunkResult {
    entries: Vec<Entry>,
    failure: Option<(PrimeIdeal, Vec<i64>)>,
}

fn run_chunk(
    k: &NumberField,
    excluded: &[PrimeIdeal],
    range: (u64, u64),
    degree_one_only: bool,
    tester: &dyn LocalTester,
) -> Result<ChunkResult> {
    let mut entries = Vec::new();
    for prime in TestPrimes::in_range(k, excluded, range.0, range.1, degree_one_only) {
        let c = tester.check(&prime)?;
        entries.push(Entry(prime.label(), c.traces.clone()));
        if !c.pass {
            return Ok(ChunkResult { entries, failure: Some((prime, c.traces)) });
        }
    }
    Ok(ChunkResult { entries, failure: None })
}

/// Checks every prime of norm at most `bound` outside `excluded`, in stream
/// order, stopping at the first failure.
pub(crate) fn run_stream(
    k: &NumberField,
    excluded: &[PrimeIdeal],
    bound: u64,
    degree_one_only: bool,
    tester: &dyn LocalTester,
    jobs: usize,
) -> Result<StreamResult> {
    let mut ranges = Vec::new();
    let mut lo = 2;
    while lo <= bound {
        let hi = (lo / CHUNK_WIDTH + 1) * CHUNK_WIDTH - 1;
        ranges.push((lo, hi.min(bound)));
        lo = hi + 1;
    }
    let jobs = jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut entries = Vec::new();
    for wave in ranges.chunks(jobs) {
        let results: Vec<Result<ChunkResult>> =
            pool.install(|| wave.par_iter().map(|&r| run_chunk(k, excluded, r, degree_one_only, tester)).collect());
        for r in results {
            let r = r?;
            entries.extend(r.entries);
            if r.failure.is_some() {
                return Ok(StreamResult { entries, failure: r.failure });
            }
        }
    }
    Ok(StreamResult { entries, failure: None })
}
