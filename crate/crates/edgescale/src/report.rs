//! Gate outcomes and summary statistics stored in `summary.json`.

use serde::Serialize;

/// One pass/fail check of a command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    /// Measured quantity the gate compares, if it is a number.
    pub value: Option<f64>,
    /// Human-readable rule, e.g. `"< 0.07"`.
    pub rule: String,
}

impl Gate {
    pub fn new(name: &str, passed: bool, value: Option<f64>, rule: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            value: value.filter(|v| v.is_finite()),
            rule: rule.into(),
        }
    }

    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value < limit, Some(value), format!("< {limit}"))
    }
}

/// Location and spread of a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
    pub sd: f64,
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len();
        let mean = sorted.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            count,
            mean,
            stderr: sd / (count as f64).sqrt(),
            sd,
            min: sorted.first().copied().unwrap_or(f64::NAN),
            q05: quantile(&sorted, 0.05),
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            q95: quantile(&sorted, 0.95),
            max: sorted.last().copied().unwrap_or(f64::NAN),
        }
    }
}
