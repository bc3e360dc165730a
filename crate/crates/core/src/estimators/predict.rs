use crate::data::SurveyData;
use crate::error::{Result, SaeError};

/// `n gamma / (1 + n gamma)`.
pub fn ner_shrinkage(n: usize, gamma: f64) -> f64 {
    let ng = n as f64 * gamma;
    ng / (1.0 + ng)
}

/// `D / (A + D)`.
pub fn fh_shrinkage(d: f64, a: f64) -> f64 {
    d / (a + d)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_beta(data: &SurveyData, beta: &[f64]) -> Result<()> {
    if beta.len() != data.dim() {
        return Err(SaeError::LengthMismatch {
            what: "beta",
            expected: data.dim(),
            actual: beta.len(),
        });
    }
    Ok(())
}

/// Best predictor under the nested error model:
/// `Xbar_i'b + B_i (ybar_i - xbar_i'b)`.
///
/// With `use_sample_xbar = false` the sample covariate mean is replaced by
/// the population mean, which is the unit-context predictor.
pub fn ner_predict(data: &SurveyData, beta: &[f64], gamma: f64, use_sample_xbar: bool) -> Result<Vec<f64>> {
    check_beta(data, beta)?;
    if !(gamma >= 0.0) {
        return Err(SaeError::InvalidInput(format!("gamma must be >= 0, got {gamma}")));
    }
    Ok(data
        .summaries()
        .iter()
        .map(|s| {
            let synthetic = dot(&s.pop_xbar, beta);
            let regression = if use_sample_xbar {
                dot(&s.xbar, beta)
            } else {
                synthetic
            };
            synthetic + ner_shrinkage(s.n, gamma) * (s.ybar - regression)
        })
        .collect())
}

/// Best predictor under the area-level model: `ybar_i - B_i (ybar_i - Xbar_i'b)`.
pub fn fh_predict(data: &SurveyData, beta: &[f64], area_variance: f64) -> Result<Vec<f64>> {
    check_beta(data, beta)?;
    if !(area_variance >= 0.0) {
        return Err(SaeError::InvalidInput(format!(
            "area variance must be >= 0, got {area_variance}"
        )));
    }
    data.summaries()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let d = known_d(s.known_d, i)?;
            let b = fh_shrinkage(d, area_variance);
            Ok(s.ybar - b * (s.ybar - dot(&s.pop_xbar, beta)))
        })
        .collect()
}

pub(crate) fn known_d(d: Option<f64>, area: usize) -> Result<f64> {
    match d {
        Some(d) if d > 0.0 && d.is_finite() => Ok(d),
        _ => Err(SaeError::MissingSamplingVariance { area }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::AreaSummary;
    use approx::assert_relative_eq;

    fn area(ybar: f64, xbar: f64, pop_xbar: f64, n: usize, d: Option<f64>) -> AreaSummary {
        AreaSummary {
            n,
            ybar,
            xbar: vec![xbar],
            s2: Some(1.0),
            pop_xbar: vec![pop_xbar],
            pop_size: 1000,
            known_d: d,
        }
    }

    #[test]
    fn zero_gamma_is_synthetic() {
        let data = SurveyData::from_summaries(vec![area(3.0, 2.0, 1.5, 4, None)]).unwrap();
        assert_eq!(ner_predict(&data, &[2.0], 0.0, true).unwrap(), vec![3.0]);
    }

    #[test]
    fn huge_gamma_adds_covariate_correction() {
        let data = SurveyData::from_summaries(vec![area(3.0, 2.0, 1.5, 4, None)]).unwrap();
        let t = ner_predict(&data, &[2.0], 1e9, true).unwrap()[0];
        assert_relative_eq!(t, 3.0 + (1.5 - 2.0) * 2.0, epsilon = 1e-8);
    }

    #[test]
    fn hand_evaluated_ner() {
        let data = SurveyData::from_summaries(vec![area(3.0, 1.0, 1.0, 4, None)]).unwrap();
        assert_relative_eq!(ner_shrinkage(4, 1.0), 0.8);
        let t = ner_predict(&data, &[2.0], 1.0, true).unwrap()[0];
        assert_relative_eq!(t, 2.8, epsilon = 1e-14);
    }

    #[test]
    fn unit_context_ignores_sample_xbar() {
        let data = SurveyData::from_summaries(vec![area(3.0, 7.0, 1.0, 4, None)]).unwrap();
        let t = ner_predict(&data, &[2.0], 1.0, false).unwrap()[0];
        assert_relative_eq!(t, 2.8, epsilon = 1e-14);
    }

    #[test]
    fn fh_examples() {
        let data = SurveyData::from_summaries(vec![area(4.0, 0.0, 1.0, 4, Some(1.0))]).unwrap();
        assert_eq!(fh_predict(&data, &[2.0], 0.0).unwrap(), vec![2.0]);
        assert_relative_eq!(fh_predict(&data, &[2.0], 1.0).unwrap()[0], 3.0, epsilon = 1e-14);
        assert!((fh_predict(&data, &[2.0], 1e12).unwrap()[0] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn fh_requires_known_d() {
        let data = SurveyData::from_summaries(vec![area(4.0, 0.0, 1.0, 4, None)]).unwrap();
        assert_eq!(
            fh_predict(&data, &[2.0], 1.0).unwrap_err(),
            SaeError::MissingSamplingVariance { area: 0 }
        );
    }

    #[test]
    fn beta_dimension_checked() {
        let data = SurveyData::from_summaries(vec![area(4.0, 0.0, 1.0, 4, Some(1.0))]).unwrap();
        assert!(ner_predict(&data, &[1.0, 2.0], 1.0, true).is_err());
    }
}
