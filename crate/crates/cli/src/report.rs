//! Report records and their JSON/CSV encodings.
//!
//! JSON floats use the shortest representation that reads back to the same
//! value; CSV floats are written as `{:.16e}` (17 significant digits).
//!
//! CSV columns:
//!
//! - `evaluate`: `key,value`
//! - `optimize`: `restart,seed,value,iters,converged,best`
//! - `verify`: `suite,check,value,target,pass,note`
//! - `scan --what werner`: `p,bell_at_fixed_settings,max_bell,is_ebt`
//! - `scan --what canonical-e`: `theta,phi,max_bell,non_unitary_by_margin,pass`

use serde::Serialize;
use tbell_core::optimizer::{ParamBlock, RestartRecord};
use tbell_core::scenario::CorrelationSet;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn csv_table<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r.as_ref()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlations {
    #[serde(rename = "E13")]
    pub e13: f64,
    #[serde(rename = "E14")]
    pub e14: f64,
    #[serde(rename = "E23")]
    pub e23: f64,
    #[serde(rename = "E24")]
    pub e24: f64,
}

impl From<CorrelationSet> for Correlations {
    fn from(c: CorrelationSet) -> Self {
        Self { e13: c.e13, e14: c.e14, e23: c.e23, e24: c.e24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSummary {
    pub name: &'static str,
    pub cptp: bool,
    pub min_choi_eigenvalue: f64,
    pub unital: bool,
    pub unitary: bool,
    pub ebt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilitySummary {
    pub divisible: bool,
    pub residual: f64,
    pub factor_is_cptp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub correlations: Correlations,
    pub bell: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateReport {
    pub kind: &'static str,
    pub correlations: Correlations,
    pub bell: f64,
    pub channels: Vec<ChannelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divisibility: Option<DivisibilitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
}

impl EvaluateReport {
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<[String; 2]> = Vec::new();
        let mut push = |k: String, v: String| rows.push([k, v]);
        let corr = |c: &Correlations| [("E13", c.e13), ("E14", c.e14), ("E23", c.e23), ("E24", c.e24)];
        push("kind".into(), self.kind.into());
        for (k, v) in corr(&self.correlations) {
            push(k.into(), num(v));
        }
        push("bell".into(), num(self.bell));
        for c in &self.channels {
            push(format!("{}.cptp", c.name), c.cptp.to_string());
            push(format!("{}.min_choi_eigenvalue", c.name), num(c.min_choi_eigenvalue));
            push(format!("{}.unital", c.name), c.unital.to_string());
            push(format!("{}.unitary", c.name), c.unitary.to_string());
            push(format!("{}.ebt", c.name), c.ebt.to_string());
        }
        if let Some(d) = &self.divisibility {
            push("divisible".into(), d.divisible.to_string());
            push("divisibility_residual".into(), num(d.residual));
            push("factor_is_cptp".into(), d.factor_is_cptp.to_string());
        }
        if let Some(o) = &self.oracle {
            for (k, v) in corr(&o.correlations) {
                push(format!("oracle.{k}"), num(v));
            }
            push("oracle.bell".into(), num(o.bell));
            push("oracle.max_deviation".into(), num(o.max_deviation));
        }
        csv_table(&["key", "value"], &rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestartRow {
    pub seed: u64,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
}

impl From<&RestartRecord> for RestartRow {
    fn from(r: &RestartRecord) -> Self {
        Self { seed: r.seed, value: r.value, iters: r.iters, converged: r.converged }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub name: &'static str,
    pub len: usize,
}

impl From<&ParamBlock> for Block {
    fn from(b: &ParamBlock) -> Self {
        Self { name: b.name, len: b.len }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub v: [f64; 3],
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub class: &'static str,
    pub bias_mode: String,
    pub target: Option<f64>,
    pub best_value: f64,
    pub audit_cptp: bool,
    pub per_restart: Vec<RestartRow>,
    pub best_restart: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub convergence_tol: f64,
    pub constraint_mode: String,
    pub settings: Settings,
    pub schema: Vec<Block>,
    pub best_params: Vec<f64>,
}

impl OptimizeReport {
    pub fn to_csv(&self) -> String {
        let rows: Vec<[String; 6]> = self
            .per_restart
            .iter()
            .enumerate()
            .map(|(k, r)| {
                [
                    k.to_string(),
                    r.seed.to_string(),
                    num(r.value),
                    r.iters.to_string(),
                    r.converged.to_string(),
                    (k == self.best_restart).to_string(),
                ]
            })
            .collect();
        csv_table(&["restart", "seed", "value", "iters", "converged", "best"], &rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub check: String,
    pub value: Option<f64>,
    pub target: Option<f64>,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub seed: u64,
    pub restarts: usize,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn to_csv(&self) -> String {
        let rows: Vec<[String; 6]> = self
            .checks
            .iter()
            .map(|c| {
                [
                    c.suite.to_string(),
                    c.check.clone(),
                    opt_num(c.value),
                    opt_num(c.target),
                    c.pass.to_string(),
                    c.note.clone(),
                ]
            })
            .collect();
        csv_table(&["suite", "check", "value", "target", "pass", "note"], &rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WernerScanRow {
    pub p: f64,
    pub bell_at_fixed_settings: f64,
    pub max_bell: f64,
    pub is_ebt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalScanRow {
    pub theta: f64,
    pub phi: f64,
    pub max_bell: f64,
    pub non_unitary_by_margin: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScanRows {
    Werner(Vec<WernerScanRow>),
    CanonicalE(Vec<CanonicalScanRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub what: &'static str,
    pub seed: u64,
    pub rows: ScanRows,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        match &self.rows {
            ScanRows::Werner(rows) => {
                let rows: Vec<[String; 4]> = rows
                    .iter()
                    .map(|r| [num(r.p), num(r.bell_at_fixed_settings), num(r.max_bell), r.is_ebt.to_string()])
                    .collect();
                csv_table(&["p", "bell_at_fixed_settings", "max_bell", "is_ebt"], &rows)
            }
            ScanRows::CanonicalE(rows) => {
                let rows: Vec<[String; 5]> = rows
                    .iter()
                    .map(|r| {
                        [num(r.theta), num(r.phi), num(r.max_bell), r.non_unitary_by_margin.to_string(), r.pass.to_string()]
                    })
                    .collect();
                csv_table(&["theta", "phi", "max_bell", "non_unitary_by_margin", "pass"], &rows)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.0f64.sqrt(), 1e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_quotes_commas() {
        let rows = [vec!["a, b".to_string(), "1".to_string()]];
        assert_eq!(csv_table(&["k", "v"], &rows), "k,v\n\"a, b\",1\n");
    }
}
