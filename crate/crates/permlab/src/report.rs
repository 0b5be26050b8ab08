//! Serialized shapes of every command's output.
//!
//! Exact values are fraction strings; floats are written as the shortest
//! decimal that round-trips. Field order is fixed by the struct definitions,
//! so identical inputs give byte-identical output.

use permlab_core::bounds::{BoundsReport, Check, CoefficientBoundCheck, M2Ratio, TrendRow};
use permlab_core::coefficients::{CoefficientTriple, PascalEntry};
use permlab_core::degree_m::{DegreeMValue, PowerValue};
use permlab_core::free_energy::{EntropyValues, MinimizationReport};
use permlab_core::rational::{fraction_string, from_biguint};
use permlab_core::{FlowMatrix, Rational};
use serde::Serialize;
use serde_json::Value;

use crate::format::{float_rows, flow_cell, flow_rows, MatrixJson};

fn frac(v: &Rational) -> String {
    fraction_string(v)
}

#[derive(Debug, Serialize)]
pub struct PermOutput {
    pub perm: String,
}

#[derive(Debug, Serialize)]
pub struct BetheOutput {
    pub perm_bethe: f64,
    pub free_energy: f64,
    pub iterations: u64,
    pub gap: f64,
    pub converged: bool,
    pub minimizer: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
}

impl BetheOutput {
    pub fn new(r: &MinimizationReport, with_trace: bool) -> Self {
        Self {
            perm_bethe: r.value,
            free_energy: r.objective,
            iterations: r.iterations,
            gap: r.gap_or_residual,
            converged: r.converged,
            minimizer: float_rows(r.minimizer.entries(), r.minimizer.n()),
            trace: with_trace.then(|| r.trace.clone()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SinkhornOutput {
    pub perm_scs: f64,
    pub perm_sinkhorn: f64,
    pub free_energy: f64,
    pub iterations: u64,
    pub residual: f64,
    pub converged: bool,
    pub minimizer: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
}

impl SinkhornOutput {
    pub fn new(r: &MinimizationReport, with_trace: bool) -> Self {
        Self {
            perm_scs: r.value,
            perm_sinkhorn: r.sinkhorn_permanent(),
            free_energy: r.objective,
            iterations: r.iterations,
            residual: r.gap_or_residual,
            converged: r.converged,
            minimizer: float_rows(r.minimizer.entries(), r.minimizer.n()),
            trace: with_trace.then(|| r.trace.clone()),
        }
    }
}

/// An exact power as a fraction string, an approximate one as a number.
pub fn power_json(p: &PowerValue) -> Value {
    match p {
        PowerValue::Exact(r) => Value::String(frac(r)),
        PowerValue::Approx(f) => serde_json::json!(f),
    }
}

#[derive(Debug, Serialize)]
pub struct RouteValue {
    pub route: &'static str,
    pub exact: bool,
    #[serde(rename = "value_to_the_M")]
    pub value_to_the_m: Value,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

impl RouteValue {
    pub fn new(route: &'static str, v: &DegreeMValue) -> Self {
        Self {
            route,
            exact: v.value_to_the_m.exact().is_some(),
            value_to_the_m: power_json(&v.value_to_the_m),
            value: v.value,
            std_error: v.std_error,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DegreeMOutput {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bethe: Option<RouteValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sinkhorn: Option<RouteValue>,
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> Self {
        Self {
            name: c.name.clone(),
            lhs: frac(&c.lhs),
            rhs: frac(&c.rhs),
            holds: c.holds,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BoundsOutput {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub theta: MatrixJson,
    pub perm: String,
    pub degree_m_bethe: RouteValue,
    pub degree_m_sinkhorn: RouteValue,
    pub perm_bethe: Option<f64>,
    pub perm_scs: Option<f64>,
    #[serde(rename = "ratio_bethe_to_the_M")]
    pub ratio_bethe_to_the_m: String,
    #[serde(rename = "ratio_sinkhorn_to_the_M")]
    pub ratio_sinkhorn_to_the_m: String,
    pub ratio_bethe: f64,
    pub ratio_sinkhorn: f64,
    pub bethe_upper_constant: f64,
    pub sinkhorn_lower_constant: f64,
    pub sinkhorn_upper_constant: f64,
    pub checks: Vec<CheckJson>,
    pub all_hold: bool,
}

impl From<&BoundsReport> for BoundsOutput {
    fn from(r: &BoundsReport) -> Self {
        let sinkhorn_route = if r.n * r.m as usize <= permlab_core::degree_m::KRONECKER_EXACT_MAX {
            "kronecker"
        } else {
            "coefficients"
        };
        Self {
            n: r.n,
            m: r.m,
            theta: MatrixJson::from(&r.theta),
            perm: frac(&r.perm),
            degree_m_bethe: RouteValue::new("coefficients", &r.degree_m_bethe),
            degree_m_sinkhorn: RouteValue::new(sinkhorn_route, &r.degree_m_sinkhorn),
            perm_bethe: r.perm_bethe,
            perm_scs: r.perm_scs,
            ratio_bethe_to_the_m: frac(&r.ratio_bethe_to_the_m),
            ratio_sinkhorn_to_the_m: frac(&r.ratio_sinkhorn_to_the_m),
            ratio_bethe: r.ratio_bethe,
            ratio_sinkhorn: r.ratio_sinkhorn,
            bethe_upper_constant: r.bethe_upper_constant,
            sinkhorn_lower_constant: r.sinkhorn_lower_constant,
            sinkhorn_upper_constant: r.sinkhorn_upper_constant,
            checks: r.checks.iter().map(CheckJson::from).collect(),
            all_hold: r.all_hold(),
        }
    }
}

/// One matrix of a randomized bounds sweep.
#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub theta: MatrixJson,
    pub ratio_bethe: f64,
    pub ratio_sinkhorn: f64,
    pub all_hold: bool,
}

#[derive(Debug, Serialize)]
pub struct RandomSweepOutput {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub seed: u64,
    pub matrices: usize,
    pub all_hold: bool,
    pub max_ratio_bethe: f64,
    pub max_ratio_sinkhorn: f64,
    pub min_ratio_sinkhorn: f64,
    pub entries: Vec<SweepEntry>,
}

#[derive(Debug, Serialize)]
pub struct CoefficientViolation {
    #[serde(rename = "T")]
    pub t: Vec<Vec<u32>>,
    pub checks: Vec<CheckJson>,
}

#[derive(Debug, Serialize)]
pub struct CoefficientSweepOutput {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub points: usize,
    pub all_hold: bool,
    pub violations: Vec<CoefficientViolation>,
}

impl CoefficientSweepOutput {
    pub fn new(n: usize, m: u32, results: &[CoefficientBoundCheck]) -> Self {
        Self {
            n,
            m,
            points: results.len(),
            all_hold: results.iter().all(|r| r.holds),
            violations: results
                .iter()
                .filter(|r| !r.holds)
                .map(|r| CoefficientViolation {
                    t: flow_rows(&r.gamma),
                    checks: r.checks.iter().map(CheckJson::from).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CoefficientRow {
    #[serde(rename = "T")]
    pub t: Vec<Vec<u32>>,
    pub c_gibbs: String,
    pub c_bethe: String,
    pub c_sinkhorn: String,
}

#[derive(Debug, Serialize)]
pub struct CoefficientCsvRow {
    pub index: usize,
    #[serde(rename = "T")]
    pub t: String,
    pub c_gibbs: String,
    pub c_bethe: String,
    pub c_sinkhorn: String,
}

impl From<&CoefficientTriple> for CoefficientRow {
    fn from(c: &CoefficientTriple) -> Self {
        Self {
            t: flow_rows(&c.gamma),
            c_gibbs: frac(&from_biguint(c.c_gibbs.clone())),
            c_bethe: frac(&c.c_bethe),
            c_sinkhorn: frac(&c.c_sinkhorn),
        }
    }
}

impl CoefficientCsvRow {
    pub fn new(index: usize, c: &CoefficientTriple) -> Self {
        Self {
            index,
            t: flow_cell(&c.gamma),
            c_gibbs: c.c_gibbs.to_string(),
            c_bethe: frac(&c.c_bethe),
            c_sinkhorn: frac(&c.c_sinkhorn),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CoefficientsOutput {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub points: Vec<CoefficientRow>,
}

#[derive(Debug, Serialize)]
pub struct RecursionRow {
    pub kind: &'static str,
    #[serde(rename = "T")]
    pub t: Vec<Vec<u32>>,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

impl RecursionRow {
    pub fn new(kind: &'static str, t: &FlowMatrix, lhs: &Rational, rhs: &Rational, holds: bool) -> Self {
        Self {
            kind,
            t: flow_rows(t),
            lhs: frac(lhs),
            rhs: frac(rhs),
            holds,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RecursionOutput {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub checked: usize,
    pub all_hold: bool,
    pub checks: Vec<RecursionRow>,
}

#[derive(Debug, Serialize)]
pub struct M2Output {
    pub ratio_squared: String,
    pub cycle_sum: String,
    pub ratio: f64,
    pub via_cycles: f64,
    pub agree: bool,
    pub bounds_ok: bool,
}

impl From<&M2Ratio> for M2Output {
    fn from(r: &M2Ratio) -> Self {
        Self {
            ratio_squared: frac(&r.ratio_squared),
            cycle_sum: frac(&r.cycle_sum),
            ratio: r.ratio,
            via_cycles: r.via_cycles,
            agree: r.agree,
            bounds_ok: r.bounds_ok,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PascalRow {
    #[serde(rename = "M")]
    pub m: u32,
    pub k1: u32,
    pub value: String,
}

impl From<&PascalEntry> for PascalRow {
    fn from(e: &PascalEntry) -> Self {
        Self {
            m: e.m,
            k1: e.k1,
            value: frac(&e.value),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PascalOutput {
    pub kind: &'static str,
    pub rows: Vec<PascalRow>,
}

#[derive(Debug, Serialize)]
pub struct EntropyOutput {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "T")]
    pub t: Vec<Vec<u32>>,
    pub h_gibbs_mod: f64,
    pub h_bethe: f64,
    pub h_sinkhorn: f64,
}

impl EntropyOutput {
    pub fn new(t: &FlowMatrix, v: &EntropyValues) -> Self {
        Self {
            m: t.m(),
            t: flow_rows(t),
            h_gibbs_mod: v.h_gibbs_mod,
            h_bethe: v.h_bethe,
            h_sinkhorn: v.h_sinkhorn,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TrendRowJson {
    #[serde(rename = "M")]
    pub m: u32,
    pub k: u32,
    pub normalized_log_count: f64,
    pub entropy: f64,
    pub gap: f64,
    pub bound: f64,
    pub holds: bool,
}

impl From<&TrendRow> for TrendRowJson {
    fn from(r: &TrendRow) -> Self {
        Self {
            m: r.m,
            k: r.k,
            normalized_log_count: r.normalized_log_count,
            entropy: r.entropy,
            gap: r.gap,
            bound: r.bound,
            holds: r.holds,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TrendOutput {
    pub fraction: String,
    pub rows: Vec<TrendRowJson>,
}
