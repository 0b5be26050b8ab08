//! Matrix JSON, exact scalar strings, and CSV helpers.
//!
//! A matrix file looks like `{"n": 2, "entries": [[1, "1/2"], ["0.25", 3]]}`.
//! Entries may be JSON integers or decimals, decimal strings (with an
//! optional exponent) or fraction strings `"p/q"`. Numbers are converted
//! from their source text, so `0.1` is exactly `1/10`.

use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use permlab_core::rational::fraction_string;
use permlab_core::{FlowMatrix, Rational, RationalMatrix};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

const MAX_EXPONENT: u32 = 4096;

#[derive(Debug, Deserialize)]
struct RawMatrix {
    n: usize,
    entries: Vec<Vec<Value>>,
}

/// Serialized form of a matrix: exact entries as fraction strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<String>>,
}

impl From<&RationalMatrix> for MatrixJson {
    fn from(m: &RationalMatrix) -> Self {
        Self {
            n: m.n(),
            entries: m
                .rows()
                .map(|r| r.iter().map(fraction_string).collect())
                .collect(),
        }
    }
}

/// Parses `"p/q"`, `"p"`, or a decimal such as `"-1.25e-3"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || CliError::Parse(format!("{text:?} is not a number"));
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_integer(p.trim()).ok_or_else(bad)?;
        let q = parse_integer(q.trim()).ok_or_else(bad)?;
        if q == BigInt::from(0) {
            return Err(CliError::Parse(format!("{text:?} has a zero denominator")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    if exponent.unsigned_abs() > MAX_EXPONENT {
        return Err(CliError::Parse(format!("exponent of {text:?} is out of range")));
    }
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut numer = BigInt::from_str(&format!("0{whole}{frac}")).map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent as i64 - frac.len() as i64;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(numer * ten.pow(scale as u32))
    } else {
        Rational::new(numer, ten.pow(scale.unsigned_abs() as u32))
    })
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s.strip_prefix('+').unwrap_or(s)).ok()
}

fn parse_entry(v: &Value, i: usize, j: usize) -> Result<Rational> {
    match v {
        Value::Number(num) => parse_rational(&num.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(CliError::Parse(format!(
            "entry ({i}, {j}) must be a number or string, got {other}"
        ))),
    }
}

/// Parses matrix JSON text into an exact matrix.
pub fn parse_matrix(text: &str) -> Result<RationalMatrix> {
    let raw: RawMatrix = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if raw.entries.len() != raw.n {
        return Err(CliError::Parse(format!(
            "\"n\" is {} but \"entries\" has {} rows",
            raw.n,
            raw.entries.len()
        )));
    }
    let rows = raw
        .entries
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != raw.n {
                return Err(CliError::Parse(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    raw.n
                )));
            }
            row.iter()
                .enumerate()
                .map(|(j, v)| parse_entry(v, i, j))
                .collect()
        })
        .collect::<Result<Vec<Vec<Rational>>>>()?;
    Ok(RationalMatrix::from_rows(rows)?)
}

/// Reads matrix JSON from `path`, or from `stdin` when no path is given or
/// the path is `-`.
pub fn read_matrix(path: Option<&Path>, stdin: &mut dyn Read) -> Result<RationalMatrix> {
    let text = match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })?,
        _ => {
            let mut buf = String::new();
            stdin.read_to_string(&mut buf).map_err(|source| CliError::Io {
                path: "<stdin>".into(),
                source,
            })?;
            buf
        }
    };
    parse_matrix(&text)
}

/// Interprets a doubly stochastic `gamma` as a point of `Γ_{M,n}`. Without an
/// explicit `m`, the least `M` making `M·γ` integral is used.
pub fn gamma_to_flow(gamma: &RationalMatrix, m: Option<u32>) -> Result<FlowMatrix> {
    let m = match m {
        Some(m) => m,
        None => {
            let d = permlab_core::rational::common_denominator(gamma.entries());
            u32::try_from(d).map_err(|_| CliError::Parse("denominators of γ are too large".into()))?
        }
    };
    Ok(FlowMatrix::from_gamma(gamma, m)?)
}

/// Row-major counts of `T` as nested rows.
pub fn flow_rows(t: &FlowMatrix) -> Vec<Vec<u32>> {
    t.counts().chunks(t.n()).map(<[u32]>::to_vec).collect()
}

/// Compact cell encoding for CSV: rows separated by `;`, cells by spaces.
pub fn flow_cell(t: &FlowMatrix) -> String {
    flow_rows(t)
        .iter()
        .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(";")
}

/// Row-major `f64` entries as nested rows.
pub fn float_rows(entries: &[f64], n: usize) -> Vec<Vec<f64>> {
    entries.chunks(n).map(<[f64]>::to_vec).collect()
}

/// Serializes `records` as CSV with a header row.
pub fn to_csv<S: Serialize>(records: &[S]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| CliError::Parse(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Parse(e.to_string()))
}
