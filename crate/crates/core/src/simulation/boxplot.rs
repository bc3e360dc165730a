use serde::Serialize;

use super::monte_carlo::MCReport;

/// Five-number summary plus mean. Quartiles use linear interpolation between
/// order statistics (position `(n - 1) q`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxplotSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl BoxplotSummary {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                min: f64::NAN,
                q1: f64::NAN,
                median: f64::NAN,
                q3: f64::NAN,
                max: f64::NAN,
                mean: f64::NAN,
            };
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (sorted.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Self {
            min: sorted[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: sorted[sorted.len() - 1],
            mean: values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

/// Boxplot summary of area-specific MSPEs for every estimator in the report.
pub fn summarize_boxplot(report: &MCReport) -> Vec<(String, BoxplotSummary)> {
    report
        .estimators
        .iter()
        .map(|e| (e.name.clone(), BoxplotSummary::from_values(&e.area_mspe)))
        .collect()
}
