//! Uniform verification report: one JSON schema for every driver.

use serde::{Deserialize, Serialize};

/// One checked comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub name: String,
    /// Which identity or expansion the case exercises.
    pub paper_ref: String,
    pub lhs: serde_json::Value,
    pub rhs: serde_json::Value,
    /// Non-finite residuals serialize as `null`.
    #[serde(deserialize_with = "nullable_f64")]
    pub residual: f64,
    pub tolerance: f64,
    /// `"pass"`, `"fail"` or `"error"`.
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Case {
    /// Passes iff `residual <= tolerance` (a NaN residual fails).
    pub fn compare(
        name: impl Into<String>,
        identity: impl Into<String>,
        lhs: impl Serialize,
        rhs: impl Serialize,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        let ok = residual <= tolerance;
        Self {
            name: name.into(),
            paper_ref: identity.into(),
            lhs: serde_json::to_value(lhs).unwrap_or(serde_json::Value::Null),
            rhs: serde_json::to_value(rhs).unwrap_or(serde_json::Value::Null),
            residual,
            tolerance,
            verdict: if ok { "pass" } else { "fail" }.into(),
            error: None,
        }
    }

    /// A case that could not be evaluated.
    pub fn errored(name: impl Into<String>, identity: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            paper_ref: identity.into(),
            lhs: serde_json::Value::Null,
            rhs: serde_json::Value::Null,
            residual: f64::NAN,
            tolerance: 0.0,
            verdict: "error".into(),
            error: Some(err.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

fn nullable_f64<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config_echo: serde_json::Value,
    pub cases: Vec<Case>,
}

impl Report {
    pub fn new(command: impl Into<String>, config_echo: serde_json::Value) -> Self {
        Self { command: command.into(), config_echo, cases: Vec::new() }
    }

    pub fn push(&mut self, case: Case) {
        self.cases.push(case);
    }

    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(Case::passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let mut r = Report::new("demo", serde_json::json!({}));
        r.push(Case::compare("a", "x", 1.0, 1.0, 0.0, 1e-9));
        assert!(r.all_passed());
        r.push(Case::compare("b", "x", 1.0, 2.0, f64::NAN, 1e-9));
        assert!(!r.all_passed());
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.cases[0], r.cases[0]);
        assert!(back.cases[1].residual.is_nan());
    }
}
