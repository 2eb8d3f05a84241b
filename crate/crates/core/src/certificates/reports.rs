use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INDECISIVE")]
    Indecisive,
    /// The instance does not meet the hypothesis the sub-check probes.
    #[serde(rename = "NOT-APPLICABLE")]
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Indecisive => "INDECISIVE",
            Verdict::NotApplicable => "NOT-APPLICABLE",
        }
    }

    /// Any failure fails; otherwise any indecisive part is indecisive.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Indecisive => out = Verdict::Indecisive,
                _ => {}
            }
        }
        out
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubCheck {
    pub name: String,
    pub verdict: Verdict,
    /// The check is a finite stand-in for a statement about infinite time.
    pub finite_surrogate: bool,
    pub summary: String,
    pub detail: Value,
}

impl SubCheck {
    pub fn new(name: &str, verdict: Verdict, finite_surrogate: bool, summary: impl Into<String>) -> Self {
        SubCheck { name: name.to_string(), verdict, finite_surrogate, summary: summary.into(), detail: Value::Null }
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "verdict": self.verdict,
            "finite_surrogate": self.finite_surrogate,
            "summary": self.summary,
            "detail": self.detail,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub name: String,
    /// The statement being reproduced, in words.
    pub anchor: String,
    pub operator: Value,
    pub mode: String,
    pub parameters: Value,
    pub verdict: Verdict,
    pub sub_checks: Vec<SubCheck>,
    pub witnesses: Vec<Value>,
    pub residuals: Value,
    pub seed: u64,
    pub warnings: Vec<String>,
    /// Wall-clock time; kept out of the JSON so reports are reproducible.
    pub runtime: Duration,
}

impl CertificateReport {
    pub fn new(name: &str, anchor: &str, operator: Value, mode: &str, parameters: Value, seed: u64) -> Self {
        CertificateReport {
            name: name.to_string(),
            anchor: anchor.to_string(),
            operator,
            mode: mode.to_string(),
            parameters,
            verdict: Verdict::Pass,
            sub_checks: Vec::new(),
            witnesses: Vec::new(),
            residuals: json!({}),
            seed,
            warnings: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn push(&mut self, check: SubCheck) {
        self.sub_checks.push(check);
        self.verdict = Verdict::combine(self.sub_checks.iter().map(|c| c.verdict));
    }

    pub fn sub_check(&self, name: &str) -> Option<&SubCheck> {
        self.sub_checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "anchor": self.anchor,
            "operator": self.operator,
            "mode": self.mode,
            "parameters": self.parameters,
            "verdict": self.verdict,
            "sub_checks": self.sub_checks.iter().map(SubCheck::to_json).collect::<Vec<_>>(),
            "residuals": self.residuals,
            "seed": self.seed,
            "warnings": self.warnings,
            "witnesses": self.witnesses,
        })
    }

    pub fn summary_line(&self) -> String {
        format!("{:<20} {:<10} {:>8.2}s", self.name, self.verdict.as_str(), self.runtime.as_secs_f64())
    }
}
