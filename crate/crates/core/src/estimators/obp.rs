//! Observed best prediction.
//!
//! The parameters are chosen to minimise an unbiased estimate of the total
//! prediction error computed from the observed direct estimates. Writing
//! `ybar_i = theta_i + e_i` with `Var(e_i) = D_i`, for any predictor linear in
//! `ybar_i` with weight `B_i`,
//!
//! ```text
//! E(theta_hat_i - theta_i)^2 = E(theta_hat_i - ybar_i)^2 + (2 B_i - 1) D_i
//! ```
//!
//! so summing the right-hand side over areas (with `D_i` replaced by its
//! SRSWOR-unbiased estimate) gives the unit-level criterion. The area-level
//! criterion is the usual Fay-Herriot form, which exceeds the total MSPE by
//! the constant `sum D_i` in expectation.

use super::predict::{check_beta, dot, fh_shrinkage, known_d, ner_predict, ner_shrinkage};
use super::{FitParams, ObjectiveTrace, ObpModel};
use crate::data::SurveyData;
use crate::error::{Result, SaeError};
use crate::numerics::{solve_wls, try_minimize_scalar, SearchConfig};

/// Observed-MSPE criterion for the nested error (`use_sample_xbar`) or
/// unit-context predictor:
/// `sum_i (theta_hat_i - ybar_i)^2 + (2 B_i - 1) D_hat_i`.
pub fn obp_objective_unit(data: &SurveyData, beta: &[f64], gamma: f64, use_sample_xbar: bool) -> Result<f64> {
    let theta = ner_predict(data, beta, gamma, use_sample_xbar)?;
    let mut q = 0.0;
    for (i, (s, t)) in data.summaries().iter().zip(&theta).enumerate() {
        let d_hat = s.estimated_sampling_variance().ok_or(SaeError::SampleTooSmall {
            area: i,
            n: s.n,
            required: 2,
        })?;
        let b = ner_shrinkage(s.n, gamma);
        q += (t - s.ybar).powi(2) + (2.0 * b - 1.0) * d_hat;
    }
    Ok(q)
}

/// Area-level criterion `sum_i B_i^2 (ybar_i - Xbar_i'b)^2 + 2 A B_i`.
pub fn obp_objective_fh(data: &SurveyData, beta: &[f64], area_variance: f64) -> Result<f64> {
    check_beta(data, beta)?;
    if !(area_variance >= 0.0) {
        return Err(SaeError::InvalidInput(format!(
            "area variance must be >= 0, got {area_variance}"
        )));
    }
    let mut q = 0.0;
    for (i, s) in data.summaries().iter().enumerate() {
        let b = fh_shrinkage(known_d(s.known_d, i)?, area_variance);
        let r = s.ybar - dot(&s.pop_xbar, beta);
        q += b * b * r * r + 2.0 * area_variance * b;
    }
    Ok(q)
}

pub fn fit_obp(data: &SurveyData, model: ObpModel) -> Result<FitParams> {
    fit_obp_with(data, model, &SearchConfig::default())
}

/// Two-stage fit: for each variance parameter `t` the criterion is quadratic
/// in `beta`, so `beta(t)` is an exact least-squares solution and only the
/// profile `q(t)` is searched numerically.
pub fn fit_obp_with(data: &SurveyData, model: ObpModel, search: &SearchConfig) -> Result<FitParams> {
    let m = data.area_count();
    let p = data.dim();
    if m <= p {
        return Err(SaeError::InvalidInput(format!(
            "OBP needs more areas than covariates (m={m}, p={p})"
        )));
    }
    validate_inputs(data, model)?;

    let mut trace = Vec::with_capacity(search.grid_points + 128);
    let mut last_singular = None;
    let mut profile = |t: f64| -> Result<f64> {
        match profiled_beta(data, model, t) {
            Ok(beta) => {
                let q = criterion(data, model, &beta, t)?;
                trace.push((t, q));
                Ok(q)
            }
            // Singular points are skipped rather than aborting the search.
            Err(e @ SaeError::Singular { .. }) => {
                last_singular = Some(e);
                Ok(f64::MAX)
            }
            Err(e) => Err(e),
        }
    };
    let result = try_minimize_scalar(&mut profile, search)?;
    if result.value == f64::MAX {
        return Err(last_singular.unwrap_or(SaeError::Singular { ratio: 0.0 }));
    }

    let t = result.argmin;
    let beta = profiled_beta(data, model, t)?;
    let objective = criterion(data, model, &beta, t)?;
    let shrinkage: Vec<f64> = match model {
        ObpModel::FayHerriot => data
            .summaries()
            .iter()
            .enumerate()
            .map(|(i, s)| Ok(fh_shrinkage(known_d(s.known_d, i)?, t)))
            .collect::<Result<_>>()?,
        _ => data.summaries().iter().map(|s| ner_shrinkage(s.n, t)).collect(),
    };
    let (gamma, area_variance, sigma_v2) = match model {
        ObpModel::FayHerriot => (None, Some(t), Some(t)),
        _ => (Some(t), None, None),
    };
    Ok(FitParams {
        estimator: model.estimator(),
        beta,
        gamma,
        area_variance,
        sigma_v2,
        sigma_e2: None,
        beta_se: None,
        shrinkage,
        objective,
        converged: result.converged,
        evaluations: result.evaluations,
        trace: ObjectiveTrace(trace),
    })
}

fn validate_inputs(data: &SurveyData, model: ObpModel) -> Result<()> {
    for (i, s) in data.summaries().iter().enumerate() {
        match model {
            ObpModel::FayHerriot => {
                known_d(s.known_d, i)?;
            }
            _ if s.s2.is_none() => {
                return Err(SaeError::SampleTooSmall {
                    area: i,
                    n: s.n,
                    required: 2,
                })
            }
            _ => {}
        }
    }
    Ok(())
}

fn criterion(data: &SurveyData, model: ObpModel, beta: &[f64], t: f64) -> Result<f64> {
    match model {
        ObpModel::Unit => obp_objective_unit(data, beta, t, true),
        ObpModel::UnitContext => obp_objective_unit(data, beta, t, false),
        ObpModel::FayHerriot => obp_objective_fh(data, beta, t),
    }
}

/// Exact minimiser of the criterion over `beta` at fixed variance parameter.
fn profiled_beta(data: &SurveyData, model: ObpModel, t: f64) -> Result<Vec<f64>> {
    let p = data.dim();
    let m = data.area_count();
    let mut rows = Vec::with_capacity(m * p);
    let mut targets = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for (i, s) in data.summaries().iter().enumerate() {
        match model {
            ObpModel::Unit | ObpModel::UnitContext => {
                // theta_hat - ybar = (Xbar - B xbar)'b - (1 - B) ybar
                let b = ner_shrinkage(s.n, t);
                let xbar = if model == ObpModel::Unit { &s.xbar } else { &s.pop_xbar };
                rows.extend(s.pop_xbar.iter().zip(xbar).map(|(px, sx)| px - b * sx));
                targets.push((1.0 - b) * s.ybar);
                weights.push(1.0);
            }
            ObpModel::FayHerriot => {
                let b = fh_shrinkage(known_d(s.known_d, i)?, t);
                rows.extend_from_slice(&s.pop_xbar);
                targets.push(s.ybar);
                weights.push(b * b);
            }
        }
    }
    solve_wls(&rows, p, &targets, &weights)
}
