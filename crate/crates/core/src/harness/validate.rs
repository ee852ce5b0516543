//! Pre-flight assumption table for an experiment.

use std::fmt;

use serde::Serialize;

use super::config::{Experiment, ExperimentSpec};
use crate::aggregate::{verify_assumption_a2, A2Options};
use crate::error::Result;
use crate::ldp::{verify_assumption_a1, AssumptionReport, Clause, RateFunction};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub check: String,
    pub clause: Clause,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationTable {
    pub rows: Vec<ValidationRow>,
    /// Asymptotic columns are meaningful for this spec.
    pub asymptotics_enabled: bool,
}

impl ValidationTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.clause.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationRow> {
        self.rows.iter().filter(|r| !r.clause.passed)
    }
}

impl fmt::Display for ValidationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rows.iter().map(|r| r.check.len() + r.clause.name.len() + 1).max().unwrap_or(0);
        for r in &self.rows {
            let label = format!("{}/{}", r.check, r.clause.name);
            let verdict = if r.clause.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{label:<w$}  {verdict}  {}", r.clause.detail)?;
        }
        write!(f, "asymptotics: {}", if self.asymptotics_enabled { "enabled" } else { "disabled" })
    }
}

fn push(rows: &mut Vec<ValidationRow>, check: &str, report: AssumptionReport) {
    rows.extend(report.clauses.into_iter().map(|clause| ValidationRow { check: check.to_string(), clause }));
}

/// Net profit, rate-function structure and counting-process checks.
pub fn validate(spec: &ExperimentSpec) -> Result<ValidationTable> {
    let rate = RateFunction::for_model(spec.experiment.model())?;
    validate_with_rate(spec, &rate)
}

/// As [`validate`], with an explicit rate function in place of the model's own.
pub fn validate_with_rate(spec: &ExperimentSpec, rate: &RateFunction) -> Result<ValidationTable> {
    let mut rows = Vec::new();
    let heavy = spec.experiment.claims().class().is_heavy();
    let mut asymptotics_enabled = heavy;
    if let Experiment::Ruin { risk, .. } = &spec.experiment {
        let rho = risk.rho();
        let ok = rho < 1.0;
        asymptotics_enabled &= ok;
        rows.push(ValidationRow { check: "risk".into(), clause: Clause::new("net_profit", ok, format!("rho = mu E[C] / p = {rho}")) });
    }
    rows.push(ValidationRow {
        check: "claims".into(),
        clause: Clause::new("subexponential", heavy, format!("{:?}", spec.experiment.claims().class())),
    });
    push(&mut rows, "rate", verify_assumption_a1(rate));
    let opts = A2Options { seed: spec.seed, workers: spec.workers, ..A2Options::default() };
    push(&mut rows, "counts", verify_assumption_a2(spec.experiment.model(), rate, opts)?);
    Ok(ValidationTable { rows, asymptotics_enabled })
}
