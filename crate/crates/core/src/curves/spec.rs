//! JSON encoding of curves.
//!
//! `{"field": {"generators": [d1, d2]}, "ainvs": [a1, a2, a3, a4, a6]}` where
//! each a-invariant is an integer, a rational string `"n/d"`, or an array of
//! coordinates in the basis order `{1, sqrt m1, sqrt m2, sqrt m1 sqrt m2}`.
//! A coordinate is an integer, a string `"n/d"`, or a pair `[n, d]`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Curve;
use crate::error::{Error, Result};
use crate::numberfield::{FieldSpec, NumberField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    #[serde(default)]
    pub field: FieldSpec,
    pub ainvs: Vec<Value>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

fn parse_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| malformed(format!("{n} is not an integer"))),
        Value::String(s) => BigInt::from_str(s.trim()).map_err(|_| malformed(format!("bad integer {s:?}"))),
        other => Err(malformed(format!("expected an integer, got {other}"))),
    }
}

/// An exact rational from an integer, `"n/d"` string, or `[n, d]` pair.
pub fn parse_rational(v: &Value) -> Result<BigRational> {
    let (n, d) = match v {
        Value::String(s) => match s.split_once('/') {
            Some((n, d)) => (parse_int(&Value::String(n.into()))?, parse_int(&Value::String(d.into()))?),
            None => (parse_int(v)?, BigInt::from(1)),
        },
        Value::Array(pair) if pair.len() == 2 => (parse_int(&pair[0])?, parse_int(&pair[1])?),
        _ => (parse_int(v)?, BigInt::from(1)),
    };
    if d.is_zero() {
        return Err(malformed("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

fn render_rational(q: &BigRational) -> Value {
    if q.is_integer() {
        Value::String(q.numer().to_string())
    } else {
        Value::String(format!("{}/{}", q.numer(), q.denom()))
    }
}

impl CurveSpec {
    pub fn to_curve(&self) -> Result<Curve> {
        let field = NumberField::from_spec(&self.field)?;
        if self.ainvs.len() != 5 {
            return Err(malformed(format!("expected 5 a-invariants, got {}", self.ainvs.len())));
        }
        let mut a = Vec::with_capacity(5);
        for v in &self.ainvs {
            let coords = match v {
                Value::Array(items) => items.iter().map(parse_rational).collect::<Result<Vec<_>>>()?,
                _ => vec![parse_rational(v)?],
            };
            a.push(field.element(coords)?);
        }
        Curve::new(field, a.try_into().expect("five coefficients"))
    }

    /// Canonical encoding: every a-invariant as a full coordinate array of strings.
    pub fn from_curve(curve: &Curve) -> Self {
        let ainvs =
            curve.ainvs().iter().map(|x| Value::Array(x.coords().iter().map(render_rational).collect())).collect();
        CurveSpec { field: curve.field().spec(), ainvs }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| malformed(e.to_string()))
    }
}

impl Curve {
    pub fn to_spec(&self) -> CurveSpec {
        CurveSpec::from_curve(self)
    }

    pub fn from_json(text: &str) -> Result<Curve> {
        CurveSpec::parse(text)?.to_curve()
    }
}
