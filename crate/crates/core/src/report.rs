//! The versioned JSON report emitted by the command-line tool.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::certificates::{CriticalConeSummary, MultiplierPair, Verdict};
use crate::deriv::{DerivativeEstimate, LimitSchedule};
use crate::oracle::OracleResult;
use crate::parser;
use crate::problem::{Tolerances, VectorProblem};
use crate::sufficiency::{GlobalVerdict, IsolationVerdict};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    /// SHA-256 of the canonical serialization, hex encoded.
    pub digest: String,
    pub vars: Vec<String>,
    pub objectives: usize,
    pub constraints: usize,
}

impl ProblemSummary {
    pub fn of(problem: &VectorProblem) -> Self {
        Self {
            digest: digest(problem),
            vars: problem.vars().to_vec(),
            objectives: problem.num_objectives(),
            constraints: problem.num_constraints(),
        }
    }
}

pub fn digest(problem: &VectorProblem) -> String {
    hex::encode(Sha256::digest(parser::serialize(problem).as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSection {
    pub found: bool,
    pub pair: Option<MultiplierPair>,
}

impl CertificateSection {
    pub fn from(pair: Option<MultiplierPair>) -> Self {
        Self {
            found: pair.is_some(),
            pair,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencySection {
    pub first_order: Option<GlobalVerdict>,
    pub second_order: Option<GlobalVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolatedSection {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub first_order: Option<IsolationVerdict>,
    pub second_order: Option<IsolationVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    /// `local` (cube around the point) or `global` (whole box).
    pub kind: String,
    pub bounds: Vec<(f64, f64)>,
    pub result: OracleResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSection {
    pub kind: String,
    /// `f1`, `g2`, ... or `gap`.
    pub function: String,
    pub direction: Option<Vec<f64>>,
    pub at: Option<Vec<f64>>,
    pub value: f64,
    pub estimate: Option<DerivativeEstimate>,
    pub schedule: Option<LimitSchedule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarSection {
    pub generators: Vec<Vec<f64>>,
    pub halfspace_normals: Vec<Vec<f64>>,
    pub polar_generators: Vec<Vec<f64>>,
    pub polar_halfspace_normals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub schema: u32,
    pub command: String,
    pub tool: Tool,
    pub problem: Option<ProblemSummary>,
    pub point: Option<Vec<f64>>,
    pub feasible: Option<bool>,
    pub tolerances: Option<Tolerances>,
    pub seed: Option<u64>,
    pub first_order: Option<CertificateSection>,
    pub totally_degenerate: Option<bool>,
    pub critical_cone: Option<CriticalConeSummary>,
    pub directions: Option<Vec<Vec<f64>>>,
    pub second_order: Option<CertificateSection>,
    pub verdict: Option<Verdict>,
    pub summary: Option<String>,
    pub sufficiency: Option<SufficiencySection>,
    pub isolated: Option<IsolatedSection>,
    pub oracle: Option<OracleSection>,
    pub derivative: Option<DerivativeSection>,
    pub polar: Option<PolarSection>,
    pub warnings: Vec<String>,
    pub meta: Option<Meta>,
}

impl CertificateReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            command: command.into(),
            tool: Tool {
                name: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
            problem: None,
            point: None,
            feasible: None,
            tolerances: None,
            seed: None,
            first_order: None,
            totally_degenerate: None,
            critical_cone: None,
            directions: None,
            second_order: None,
            verdict: None,
            summary: None,
            sufficiency: None,
            isolated: None,
            oracle: None,
            derivative: None,
            polar: None,
            warnings: Vec::new(),
            meta: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Whether every number is finite (non-finite values would not survive
    /// a JSON round trip).
    pub fn all_finite(&self) -> bool {
        fn walk(v: &Value) -> bool {
            match v {
                Value::Null => true,
                Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
                Value::Array(a) => a.iter().all(walk),
                Value::Object(o) => o.values().all(walk),
                _ => true,
            }
        }
        // serde_json writes NaN and ±inf as null, so look for nulls in
        // numeric slots by comparing against a strict re-parse.
        let v = serde_json::to_value(self).expect("report serializes");
        walk(&v) && serde_json::from_value::<CertificateReport>(v).is_ok_and(|r| &r == self)
    }

    /// Two-column `path  value` listing of the non-null fields.
    pub fn to_text(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut rows = Vec::new();
        flatten("", &v, &mut rows);
        let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, val) in rows {
            let pad = width - k.chars().count();
            out.push_str(&format!("{k}{}  {val}\n", " ".repeat(pad)));
        }
        out
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Null => {}
        Value::Object(o) => {
            for (k, child) in o {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, rows);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, child) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, rows);
            }
        }
        Value::String(s) => rows.push((prefix.into(), s.clone())),
        other => rows.push((prefix.into(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::check_candidate;
    use crate::testutil::{problem, E1, E2};

    #[test]
    fn digest_is_stable_and_distinguishes_problems() {
        let a = digest(&problem(E1));
        assert_eq!(a.len(), 64);
        assert_eq!(a, digest(&problem(E1)));
        assert_ne!(a, digest(&problem(E2)));
        let spaced = "vars x\n\nobjective [ x ]\nconstraint [-x]\nconeC orthant(1)\nconeK orthant(1)";
        assert_eq!(a, digest(&problem(spaced)));
    }

    #[test]
    fn report_round_trips() {
        let p = problem(E1);
        let c = check_candidate(&p, &[0.0], 8, 0).unwrap();
        let mut r = CertificateReport::new("check2");
        r.problem = Some(ProblemSummary::of(&p));
        r.point = Some(c.point.clone());
        r.feasible = Some(true);
        r.tolerances = Some(*p.tolerances());
        r.first_order = Some(CertificateSection::from(c.first_order));
        r.critical_cone = c.critical_cone;
        r.second_order = Some(CertificateSection::from(c.second_order));
        r.verdict = Some(c.verdict);
        let back: CertificateReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.all_finite());
        assert!(r.to_text().contains("verdict"));
    }

    #[test]
    fn non_finite_numbers_are_detected() {
        let mut r = CertificateReport::new("deriv");
        r.point = Some(vec![f64::INFINITY]);
        assert!(!r.all_finite());
    }
}
