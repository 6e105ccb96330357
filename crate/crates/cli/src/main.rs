//! `ecdecide`: isogeny and complex multiplication decisions from the shell.
//!
//! Every subcommand prints JSON on stdout and a one-line summary on stderr.
//! Exit codes: 0 positive, 1 negative (or rejected certificate), 2
//! inconclusive, 3 error or infeasible bound.

mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ecdecide_core::chebotarev::{bound_report, delta_star, test_primes, BoundConfig};
use ecdecide_core::decision::{
    certificate_verify, decide_cm, decide_cm_by_field, decide_cm_over_subfields, decide_isogenous, DecisionConfig,
    Verdict,
};
use ecdecide_core::pointcount::{count_points, TraceCache};
use serde_json::json;

const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "ecdecide", version, about = "Decide isogeny and complex multiplication of elliptic curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chebotarev bounds for a field, an excluded set and a group order.
    Bound {
        /// `{"generators": [...]}`, a comma list such as `28,-4`, or `Q`.
        #[arg(long, default_value = "Q", allow_hyphen_values = true)]
        field: String,
        /// Excluded primes: rational primes (all primes above) or labels.
        #[arg(long)]
        bad: Option<String>,
        /// Order of the Galois group being detected.
        #[arg(long, default_value_t = 36)]
        n: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// List the test primes up to a norm bound.
    Primes {
        #[arg(long, default_value = "Q", allow_hyphen_values = true)]
        field: String,
        #[arg(long)]
        bad: Option<String>,
        #[arg(long)]
        bound: u64,
        /// Only primes of residue degree one.
        #[arg(long)]
        degree_one: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Point count of a curve at one prime.
    Count {
        curve: String,
        /// A rational prime, or a prime label such as `7:f1:+-`.
        prime: String,
    },
    /// Decide whether two curves are isogenous.
    Isogeny {
        curve1: String,
        curve2: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decide whether a curve has complex multiplication.
    Cm {
        curve: String,
        /// Test against one imaginary quadratic field, by discriminant.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "enumerate_subfields")]
        field: Option<i64>,
        /// Test against each imaginary quadratic subfield of the curve's field.
        #[arg(long)]
        enumerate_subfields: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Replay a certificate and report the first divergence.
    Verify {
        certificate: String,
        /// Curves to check against those recorded in the certificate.
        curves: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Use the unconditional bound instead of the GRH bounds.
    #[arg(long)]
    unconditional: bool,
    /// Confirms an unconditional run.
    #[arg(long)]
    i_understand_huge_bounds: bool,
    /// Constant of the unconditional bound [default: 40].
    #[arg(long)]
    c_u: Option<f64>,
    /// Refuse to enumerate primes above this norm [default: 2^40].
    #[arg(long)]
    ceiling: Option<u64>,
    /// Use this prime l instead of the least good one.
    #[arg(long)]
    ell: Option<u64>,
    /// Parallel chunks per wave; does not change certificates.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Point-count cache file.
    #[arg(long, env = "ECDECIDE_CACHE")]
    cache: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self, base: DecisionConfig, enumerates: bool) -> Result<DecisionConfig> {
        if self.unconditional && enumerates && !self.i_understand_huge_bounds {
            bail!("unconditional runs need --i-understand-huge-bounds");
        }
        if self.jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        let bound = BoundConfig {
            grh: if self.unconditional { false } else { base.bound.grh },
            c_u: self.c_u.unwrap_or(base.bound.c_u),
            ceiling: self.ceiling.unwrap_or(base.bound.ceiling),
        };
        if bound.ceiling < 2 {
            bail!("--ceiling must be at least 2");
        }
        if !(bound.c_u.is_finite() && bound.c_u > 0.0) {
            bail!("--c-u must be positive");
        }
        Ok(DecisionConfig { bound, ell_override: self.ell.or(base.ell_override), jobs: self.jobs })
    }

    fn cache(&self) -> Result<Option<TraceCache>> {
        self.cache
            .as_deref()
            .map(|p| TraceCache::open(p).with_context(|| format!("opening cache {}", p.display())))
            .transpose()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn summarize(v: &Verdict) {
    let checked = v.digest.as_ref().map_or(0, |d| d.primes_checked);
    let witness = v.witness.as_ref().map(|w| format!(", witness {} ({:?})", w.prime, w.kind)).unwrap_or_default();
    let reason = v.reason.as_ref().map(|r| format!(", {r}")).unwrap_or_default();
    eprintln!("{} after {checked} primes{witness}{reason}", v.outcome);
}

fn finish(v: &Verdict, run: &RunArgs, cache: Option<&TraceCache>) -> Result<u8> {
    if let Some(c) = cache {
        c.flush()?;
    }
    summarize(v);
    emit(run.out.as_deref(), &v.to_json())?;
    Ok(v.outcome.exit_code() as u8)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Bound { field, bad, n, run } => {
            let k = input::field(&field)?;
            let s = input::prime_set(&k, bad.as_deref())?;
            let cfg = run.config(DecisionConfig::default(), false)?;
            let nd = n.checked_mul(k.degree() as u64).context("N [K:Q] overflows")?;
            let report = bound_report(&cfg.bound, delta_star(&k, &s, n), nd, k.is_rational());
            emit(run.out.as_deref(), &serde_json::to_string(&report)?)?;
            if report.is_feasible(cfg.bound.ceiling) {
                Ok(0)
            } else {
                eprintln!("enumeration refused: the bound exceeds the ceiling {}", cfg.bound.ceiling);
                Ok(EXIT_ERROR)
            }
        }
        Command::Primes { field, bad, bound, degree_one, run } => {
            let k = input::field(&field)?;
            let s = input::prime_set(&k, bad.as_deref())?;
            let cfg = run.config(DecisionConfig::default(), false)?;
            if bound > cfg.bound.ceiling {
                bail!("bound {bound} exceeds the ceiling {}", cfg.bound.ceiling);
            }
            let primes: Vec<_> =
                test_primes(&k, &s, bound, degree_one).map(|p| json!({"label": p.label(), "norm": p.norm()})).collect();
            eprintln!("{} primes", primes.len());
            emit(run.out.as_deref(), &serde_json::to_string(&primes)?)?;
            Ok(0)
        }
        Command::Count { curve, prime } => {
            let e = input::curve(&curve)?;
            let p = input::prime(e.field(), &prime)?;
            let ld = count_points(&e.reduce_at(&p)?);
            emit(None, &serde_json::to_string(&json!({"prime": p.label(), "local": ld}))?)?;
            Ok(0)
        }
        Command::Isogeny { curve1, curve2, run } => {
            let (e1, e2) = (input::curve(&curve1)?, input::curve(&curve2)?);
            let cfg = run.config(DecisionConfig::default(), true)?;
            let cache = run.cache()?;
            let v = decide_isogenous(&e1, &e2, &cfg, cache.as_ref())?;
            finish(&v, &run, cache.as_ref())
        }
        Command::Cm { curve, field, enumerate_subfields, run } => {
            let e = input::curve(&curve)?;
            let cfg = run.config(DecisionConfig::default(), true)?;
            let cache = run.cache()?;
            if enumerate_subfields {
                let (outcome, verdicts) = decide_cm_over_subfields(&e, &cfg, cache.as_ref())?;
                if let Some(c) = &cache {
                    c.flush()?;
                }
                verdicts.iter().for_each(summarize);
                eprintln!("{outcome} over {} subfields", verdicts.len());
                let verdicts: Vec<serde_json::Value> =
                    verdicts.iter().map(|v| serde_json::from_str(&v.to_json())).collect::<Result<_, _>>()?;
                let text = serde_json::to_string(&json!({"outcome": outcome.to_string(), "verdicts": verdicts}))?;
                emit(run.out.as_deref(), &text)?;
                return Ok(outcome.exit_code() as u8);
            }
            let v = match field {
                Some(d) => decide_cm_by_field(&e, d, &cfg, cache.as_ref())?,
                None => decide_cm(&e, &cfg, cache.as_ref())?,
            };
            finish(&v, &run, cache.as_ref())
        }
        Command::Verify { certificate, curves, run } => {
            let cert = input::certificate(&certificate)?;
            let p = &cert.params;
            let recorded = DecisionConfig {
                bound: BoundConfig { grh: p.grh, c_u: p.c_u, ceiling: p.ceiling },
                ell_override: p.ell_override,
                jobs: 1,
            };
            let cfg = run.config(recorded, !p.grh)?;
            let given = curves.iter().map(|c| input::curve(c)).collect::<Result<Vec<_>>>()?;
            let cache = run.cache()?;
            let report =
                certificate_verify(&cert, (!given.is_empty()).then_some(given.as_slice()), &cfg, cache.as_ref())?;
            if let Some(c) = &cache {
                c.flush()?;
            }
            match &report.mismatch {
                None => eprintln!("certificate accepted"),
                Some(why) => eprintln!("certificate rejected: {why}"),
            }
            emit(run.out.as_deref(), &serde_json::to_string(&report)?)?;
            Ok(if report.accepted { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
