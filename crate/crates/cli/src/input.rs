//! Reading curves, fields, primes and certificates from arguments.

use std::fs;
use std::io::Read;

use anyhow::{anyhow, bail, Context, Result};
use ecdecide_core::curves::{Curve, CurveSpec};
use ecdecide_core::decision::Verdict;
use ecdecide_core::numberfield::{FieldSpec, NumberField, PrimeIdeal};

/// Inline JSON when the argument starts with `{`, standard input for `-`,
/// otherwise a file path.
pub fn read_text(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
}

pub fn curve(arg: &str) -> Result<Curve> {
    let text = read_text(arg)?;
    let spec = CurveSpec::parse(&text).with_context(|| format!("parsing curve {arg}"))?;
    Ok(spec.to_curve()?)
}

/// `{"generators": [...]}`, a comma-separated generator list, or `Q`.
pub fn field(arg: &str) -> Result<NumberField> {
    let arg = arg.trim();
    let spec = if arg.starts_with('{') {
        serde_json::from_str::<FieldSpec>(arg).context("parsing field")?
    } else if arg.is_empty() || arg.eq_ignore_ascii_case("q") {
        FieldSpec { generators: vec![] }
    } else {
        let generators = arg
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|_| anyhow!("bad generator {s:?}")))
            .collect::<Result<_>>()?;
        FieldSpec { generators }
    };
    Ok(NumberField::from_spec(&spec)?)
}

/// A prime of `k` given by its label, or by a rational prime when exactly
/// one prime of `k` lies above it.
pub fn prime(k: &NumberField, arg: &str) -> Result<PrimeIdeal> {
    let p: u64 = arg.split(':').next().unwrap_or("").parse().map_err(|_| anyhow!("bad prime {arg:?}"))?;
    if !ecdecide_core::arith::is_prime(p) {
        bail!("{p} is not prime");
    }
    let above = k.decompose_prime(p);
    if let Some(found) = above.iter().find(|q| q.label() == arg) {
        return Ok(found.clone());
    }
    match above.as_slice() {
        [only] if !arg.contains(':') => Ok(only.clone()),
        _ => {
            let labels: Vec<String> = above.iter().map(|q| q.label()).collect();
            bail!("{arg:?} does not name a single prime; primes above {p}: {}", labels.join(", "))
        }
    }
}

/// Primes given as a comma-separated list; each entry expands to every
/// prime above it unless it is a full label.
pub fn prime_set(k: &NumberField, arg: Option<&str>) -> Result<Vec<PrimeIdeal>> {
    let mut out: Vec<PrimeIdeal> = Vec::new();
    for item in arg.unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let found = if item.contains(':') {
            vec![prime(k, item)?]
        } else {
            let p: u64 = item.parse().map_err(|_| anyhow!("bad prime {item:?}"))?;
            if !ecdecide_core::arith::is_prime(p) {
                bail!("{p} is not prime");
            }
            k.decompose_prime(p)
        };
        for q in found {
            if !out.contains(&q) {
                out.push(q);
            }
        }
    }
    Ok(out)
}

pub fn certificate(arg: &str) -> Result<Verdict> {
    let text = read_text(arg)?;
    Verdict::from_json(&text).with_context(|| format!("parsing certificate {arg}"))
}
