//! Residual reports shared by all verification routines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
}

impl ResidualStats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return ResidualStats { max: 0.0, mean: 0.0 };
        }
        let mut max = 0.0f64;
        let mut sum = 0.0;
        for &v in values {
            let a = v.abs();
            // NaN must poison the maximum.
            if a.is_nan() || a > max {
                max = if max.is_nan() { max } else { a };
            }
            sum += a;
        }
        ResidualStats { max, mean: sum / values.len() as f64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub samples: usize,
    pub seed: Option<u64>,
    pub tol: f64,
    pub residuals: ResidualStats,
    pub components: BTreeMap<String, Component>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(check: &str, tol: f64) -> Self {
        VerificationReport {
            check: check.to_string(),
            samples: 0,
            seed: None,
            tol,
            residuals: ResidualStats { max: 0.0, mean: 0.0 },
            components: BTreeMap::new(),
            skipped: Vec::new(),
            notes: BTreeMap::new(),
            failures: Vec::new(),
            pass: true,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Records absolute residuals under `name`, checked against the report tolerance.
    pub fn record(&mut self, name: &str, values: &[f64]) {
        let tol = self.tol;
        self.record_with_tol(name, values, tol);
    }

    pub fn record_with_tol(&mut self, name: &str, values: &[f64], tol: f64) {
        let stats = ResidualStats::from_values(values);
        let pass = stats.max <= tol;
        self.components.insert(
            name.to_string(),
            Component { max: stats.max, mean: stats.mean, count: values.len(), tol, pass },
        );
        self.refresh();
    }

    pub fn skip(&mut self, name: &str) {
        self.skipped.push(name.to_string());
    }

    pub fn note<V: Into<Value>>(&mut self, key: &str, value: V) {
        self.notes.insert(key.to_string(), value.into());
    }

    /// Marks the report failed regardless of residuals.
    pub fn fail(&mut self, reason: &str) {
        self.failures.push(reason.to_string());
        self.pass = false;
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.get(name)
    }

    fn refresh(&mut self) {
        let mut max = 0.0f64;
        let mut weighted = 0.0;
        let mut count = 0usize;
        for c in self.components.values() {
            if c.max.is_nan() || c.max > max {
                max = if max.is_nan() { max } else { c.max };
            }
            weighted += c.mean * c.count as f64;
            count += c.count;
        }
        self.residuals = ResidualStats {
            max,
            mean: if count == 0 { 0.0 } else { weighted / count as f64 },
        };
        self.pass = self.failures.is_empty() && self.components.values().all(|c| c.pass);
    }

    /// Merges another report's components under a prefix.
    pub fn absorb(&mut self, prefix: &str, other: &VerificationReport) {
        for (k, c) in &other.components {
            self.components.insert(format!("{prefix}.{k}"), c.clone());
        }
        for s in &other.skipped {
            self.skipped.push(format!("{prefix}.{s}"));
        }
        for (k, v) in &other.notes {
            self.notes.insert(format!("{prefix}.{k}"), v.clone());
        }
        for f in &other.failures {
            self.failures.push(format!("{prefix}: {f}"));
        }
        self.refresh();
    }
}
