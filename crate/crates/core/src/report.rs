//! Machine-readable run reports: one record per check, a config echo, and a
//! pass/fail summary. Serialization is byte-stable for a fixed config: field
//! order is fixed by the struct declarations and floats use the shortest
//! round-trip form.

use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A single analytic-vs-empirical comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: serde_json::Value,
    /// The analytic side (a bound, an exact value, or a tolerance).
    pub analytic: Option<f64>,
    /// The measured side (an estimate or an observed error).
    pub empirical: Option<f64>,
    pub se: Option<f64>,
    pub verdict: String,
}

impl CheckRecord {
    pub fn new(
        name: impl Into<String>,
        inputs: serde_json::Value,
        analytic: Option<f64>,
        empirical: Option<f64>,
        se: Option<f64>,
        pass: bool,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            inputs,
            analytic,
            empirical,
            se,
            verdict: if pass { "PASS" } else { "FAIL" }.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "PASS"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

/// The envelope written by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    /// Subcommand-specific payload (feature tables, diagnostic rows, ...).
    pub data: serde_json::Value,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        config: serde_json::Value,
        data: serde_json::Value,
        checks: Vec<CheckRecord>,
    ) -> Self {
        let passed = checks.iter().filter(|c| c.passed()).count();
        let failed = checks.len() - passed;
        Report {
            tool_version: TOOL_VERSION.to_string(),
            command: command.into(),
            config,
            data,
            checks,
            summary: Summary { passed, failed },
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Plain-text rendering of the same records.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{} v{}", self.command, self.tool_version);
        if self.data != serde_json::Value::Null {
            let _ = writeln!(out, "data: {}", self.data);
        }
        for c in &self.checks {
            let fmt = |v: Option<f64>| match v {
                Some(x) => format!("{x:.6e}"),
                None => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "[{}] {}  analytic={} empirical={} se={}",
                c.verdict,
                c.name,
                fmt(c.analytic),
                fmt(c.empirical),
                fmt(c.se),
            );
        }
        let _ = writeln!(
            out,
            "summary: {} passed, {} failed",
            self.summary.passed, self.summary.failed
        );
        out
    }
}
