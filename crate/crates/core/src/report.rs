//! Structured command reports.
//!
//! ```json
//! { "schema": "cstar-kernels/report/v1",
//!   "command": "check",
//!   "verdicts": { "positive_definite": true },
//!   "metrics": { "positive_definite.min_eigenvalue": 0.12, ... },
//!   "artifacts": { ... } }
//! ```
//!
//! Every verdict `v` is backed by at least one metric named `v.<something>`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "cstar-kernels/report/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub verdicts: IndexMap<String, bool>,
    pub metrics: IndexMap<String, f64>,
    #[serde(default)]
    pub artifacts: IndexMap<String, serde_json::Value>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            command: command.into(),
            verdicts: IndexMap::new(),
            metrics: IndexMap::new(),
            artifacts: IndexMap::new(),
        }
    }

    /// Records a verdict with its supporting metrics.
    pub fn verdict(&mut self, name: &str, passed: bool, metrics: &[(&str, f64)]) -> &mut Self {
        self.verdicts.insert(name.to_string(), passed);
        for (m, v) in metrics {
            self.metric(&format!("{name}.{m}"), *v);
        }
        self
    }

    /// Non-finite values are dropped since JSON cannot carry them.
    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.metrics.insert(name.to_string(), value);
        }
        self
    }

    pub fn artifact(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("artifacts are plain data");
        self.artifacts.insert(name.to_string(), v);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    /// Verdicts lacking a `name.*` metric.
    pub fn unsupported_verdicts(&self) -> Vec<&str> {
        self.verdicts
            .keys()
            .filter(|v| !self.metrics.keys().any(|m| m.starts_with(&format!("{v}."))))
            .map(String::as_str)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports are plain data")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_carry_metrics() {
        let mut r = Report::new("check");
        r.verdict("positive_definite", true, &[("min_eigenvalue", 0.5)]);
        r.metric("nan", f64::NAN);
        assert!(r.passed());
        assert!(r.unsupported_verdicts().is_empty());
        assert!(!r.metrics.contains_key("nan"));
        r.verdicts.insert("orphan".into(), false);
        assert_eq!(r.unsupported_verdicts(), vec!["orphan"]);
        assert!(!r.passed());
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
