//! The five area-mean predictors.
//!
//! Every model-based predictor has the shrinkage form
//! `theta_i = synthetic_i + B_i (ybar_i - regression_i)`; the estimators
//! differ in which regressors enter and in how `beta` and the variance
//! parameter are chosen (REML for EBLUP, observed-MSPE minimisation for OBP).

mod obp;
mod predict;
mod reml;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::data::SurveyData;
use crate::error::{Result, SaeError};
use crate::numerics::SearchConfig;

pub use obp::{fit_obp, fit_obp_with, obp_objective_fh, obp_objective_unit};
pub use predict::{fh_predict, fh_shrinkage, ner_predict, ner_shrinkage};
pub use reml::{fit_eblup_reml, fit_eblup_reml_with, RemlProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Estimator {
    #[serde(rename = "DIRECT")]
    Direct,
    #[serde(rename = "OBP-UC")]
    ObpUc,
    #[serde(rename = "OBP-FH")]
    ObpFh,
    #[serde(rename = "OBP-UNIT")]
    ObpUnit,
    #[serde(rename = "EBLUP")]
    Eblup,
}

impl Estimator {
    /// Column order used in reports.
    pub const ALL: [Estimator; 5] = [
        Estimator::Direct,
        Estimator::ObpUc,
        Estimator::ObpFh,
        Estimator::ObpUnit,
        Estimator::Eblup,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Estimator::Direct => "DIRECT",
            Estimator::ObpUc => "OBP-UC",
            Estimator::ObpFh => "OBP-FH",
            Estimator::ObpUnit => "OBP-UNIT",
            Estimator::Eblup => "EBLUP",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Estimator {
    type Err = SaeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(Estimator::Direct),
            "obp-uc" | "obp_uc" => Ok(Estimator::ObpUc),
            "obp-fh" | "obp_fh" => Ok(Estimator::ObpFh),
            "obp-unit" | "obp_unit" => Ok(Estimator::ObpUnit),
            "eblup" => Ok(Estimator::Eblup),
            other => Err(SaeError::InvalidInput(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Working model of an OBP fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObpModel {
    /// Nested error regression with sample covariate means.
    Unit,
    /// Unit-context model: area covariate means as regressors.
    UnitContext,
    /// Area-level model with known sampling variances.
    FayHerriot,
}

impl ObpModel {
    pub fn estimator(self) -> Estimator {
        match self {
            ObpModel::Unit => Estimator::ObpUnit,
            ObpModel::UnitContext => Estimator::ObpUc,
            ObpModel::FayHerriot => Estimator::ObpFh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionSet {
    pub estimator: Estimator,
    pub values: Vec<f64>,
}

/// `(variance parameter, profiled criterion)` pairs visited by the 1-D search.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ObjectiveTrace(pub Vec<(f64, f64)>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParams {
    pub estimator: Estimator,
    pub beta: Vec<f64>,
    /// Variance ratio `sigma_v^2 / sigma_e^2` (unit-level fits).
    pub gamma: Option<f64>,
    /// Area-effect variance `A` (Fay-Herriot fits).
    pub area_variance: Option<f64>,
    pub sigma_v2: Option<f64>,
    pub sigma_e2: Option<f64>,
    /// Standard errors of `beta` (REML fits).
    pub beta_se: Option<Vec<f64>>,
    pub shrinkage: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub evaluations: usize,
    #[serde(skip)]
    pub trace: ObjectiveTrace,
}

impl FitParams {
    pub fn predict(&self, data: &SurveyData) -> Result<PredictionSet> {
        let values = match self.estimator {
            Estimator::Direct => return Ok(direct_estimate(data)),
            Estimator::ObpFh => fh_predict(data, &self.beta, self.area_variance.unwrap_or(0.0))?,
            Estimator::ObpUc => ner_predict(data, &self.beta, self.gamma.unwrap_or(0.0), false)?,
            Estimator::ObpUnit | Estimator::Eblup => {
                ner_predict(data, &self.beta, self.gamma.unwrap_or(0.0), true)?
            }
        };
        Ok(PredictionSet {
            estimator: self.estimator,
            values,
        })
    }
}

/// The area sample means.
pub fn direct_estimate(data: &SurveyData) -> PredictionSet {
    PredictionSet {
        estimator: Estimator::Direct,
        values: data.summaries().iter().map(|s| s.ybar).collect(),
    }
}

/// Fit (when needed) and predict with one estimator.
pub fn estimate(estimator: Estimator, data: &SurveyData, search: &SearchConfig) -> Result<PredictionSet> {
    match estimator {
        Estimator::Direct => Ok(direct_estimate(data)),
        Estimator::ObpUc => fit_obp_with(data, ObpModel::UnitContext, search)?.predict(data),
        Estimator::ObpFh => fit_obp_with(data, ObpModel::FayHerriot, search)?.predict(data),
        Estimator::ObpUnit => fit_obp_with(data, ObpModel::Unit, search)?.predict(data),
        Estimator::Eblup => fit_eblup_reml_with(data, search)?.predict(data),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::AreaUnits;

    #[test]
    fn direct_is_sample_mean() {
        let data = SurveyData::from_units(
            1,
            vec![
                (AreaUnits { y: vec![2.0, 4.0, 6.0, 8.0], x: vec![1.0; 4] }, vec![1.0], 100),
                (AreaUnits { y: vec![7.0], x: vec![1.0] }, vec![1.0], 100),
            ],
        )
        .unwrap();
        let p = direct_estimate(&data);
        assert_eq!(p.values, vec![5.0, 7.0]);
        assert_eq!(p.estimator, Estimator::Direct);
    }

    #[test]
    fn estimator_tags_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.tag().parse::<Estimator>().unwrap(), e);
        }
        assert!("blup".parse::<Estimator>().is_err());
    }
}
