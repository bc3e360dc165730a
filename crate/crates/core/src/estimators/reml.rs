//! REML for the nested error regression model, profiled to the variance
//! ratio `gamma = sigma_v^2 / sigma_e^2`.
//!
//! With `V_i = I + gamma J` the inverse is `I - c_i J`, `c_i = gamma / (1 + n_i gamma)`,
//! so every GLS cross-product reduces to per-area sums that are computed once.

use nalgebra::{DMatrix, DVector};

use super::predict::ner_shrinkage;
use super::{Estimator, FitParams, ObjectiveTrace};
use crate::data::SurveyData;
use crate::error::{Result, SaeError};
use crate::numerics::{try_minimize_scalar, SearchConfig};

struct AreaMoments {
    n: f64,
    sx: DVector<f64>,
    sy: f64,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
}

/// Sufficient statistics of the restricted likelihood.
pub struct RemlProfile {
    p: usize,
    total_n: usize,
    areas: Vec<AreaMoments>,
}

/// GLS quantities at one value of gamma.
struct GlsFit {
    beta: DVector<f64>,
    xtvx: DMatrix<f64>,
    rss: f64,
    log_det_xtvx: f64,
}

impl RemlProfile {
    pub fn new(data: &SurveyData) -> Result<Self> {
        let units = data.units().ok_or_else(|| {
            SaeError::InvalidInput("REML needs unit-level sample data".into())
        })?;
        let p = data.dim();
        let total_n = data.total_sample_size();
        if total_n <= p {
            return Err(SaeError::InvalidInput(format!(
                "REML needs more observations than covariates (n={total_n}, p={p})"
            )));
        }
        if data.area_count() < 2 {
            return Err(SaeError::InvalidInput("REML needs at least two areas".into()));
        }
        let areas = units
            .iter()
            .map(|u| {
                let n = u.y.len();
                let x = DMatrix::from_row_slice(n, p, &u.x);
                let y = DVector::from_column_slice(&u.y);
                AreaMoments {
                    n: n as f64,
                    sx: x.row_sum().transpose(),
                    sy: y.sum(),
                    xtx: x.transpose() * &x,
                    xty: x.transpose() * &y,
                    yty: y.dot(&y),
                }
            })
            .collect();
        Ok(Self { p, total_n, areas })
    }

    fn gls(&self, gamma: f64) -> Result<GlsFit> {
        let p = self.p;
        let mut xtvx = DMatrix::<f64>::zeros(p, p);
        let mut xtvy = DVector::<f64>::zeros(p);
        let mut ytvy = 0.0;
        for a in &self.areas {
            let c = gamma / (1.0 + a.n * gamma);
            xtvx += &a.xtx - c * &a.sx * a.sx.transpose();
            xtvy += &a.xty - c * a.sy * &a.sx;
            ytvy += a.yty - c * a.sy * a.sy;
        }
        let chol = xtvx.clone().cholesky().ok_or(SaeError::Singular { ratio: 0.0 })?;
        let diag: Vec<f64> = (0..p).map(|k| chol.l_dirty()[(k, k)].powi(2)).collect();
        let largest = diag.iter().cloned().fold(0.0, f64::max);
        let smallest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if smallest < 1e-12 * largest {
            return Err(SaeError::Singular {
                ratio: smallest / largest,
            });
        }
        let beta = chol.solve(&xtvy);
        let rss = ytvy - beta.dot(&xtvy);
        let log_det_xtvx = diag.iter().map(|d| d.ln()).sum();
        Ok(GlsFit {
            beta,
            xtvx,
            rss,
            log_det_xtvx,
        })
    }

    /// Restricted log-likelihood with `sigma_e^2` profiled out (constants dropped).
    pub fn restricted_loglik(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(SaeError::InvalidInput(format!("gamma must be >= 0, got {gamma}")));
        }
        let fit = self.gls(gamma)?;
        let dof = (self.total_n - self.p) as f64;
        let sigma_e2 = fit.rss / dof;
        let log_det_v: f64 = self.areas.iter().map(|a| (a.n * gamma).ln_1p()).sum();
        Ok(-0.5 * (dof * (1.0 + sigma_e2.ln()) + log_det_v + fit.log_det_xtvx))
    }
}

pub fn fit_eblup_reml(data: &SurveyData) -> Result<FitParams> {
    fit_eblup_reml_with(data, &SearchConfig::default())
}

pub fn fit_eblup_reml_with(data: &SurveyData, search: &SearchConfig) -> Result<FitParams> {
    let profile = RemlProfile::new(data)?;
    let mut trace = Vec::with_capacity(search.grid_points + 128);
    let result = try_minimize_scalar(
        |g| {
            let v = -profile.restricted_loglik(g)?;
            trace.push((g, v));
            Ok(v)
        },
        search,
    )?;
    let gamma = result.argmin;
    let fit = profile.gls(gamma)?;
    let sigma_e2 = fit.rss / (profile.total_n - profile.p) as f64;
    let cov = fit
        .xtvx
        .clone()
        .try_inverse()
        .ok_or(SaeError::Singular { ratio: 0.0 })?;
    let beta_se = (0..profile.p).map(|k| (sigma_e2 * cov[(k, k)]).sqrt()).collect();
    Ok(FitParams {
        estimator: Estimator::Eblup,
        beta: fit.beta.iter().copied().collect(),
        gamma: Some(gamma),
        area_variance: None,
        sigma_v2: Some(gamma * sigma_e2),
        sigma_e2: Some(sigma_e2),
        beta_se: Some(beta_se),
        shrinkage: data.summaries().iter().map(|s| ner_shrinkage(s.n, gamma)).collect(),
        objective: result.value,
        converged: result.converged,
        evaluations: result.evaluations,
        trace: ObjectiveTrace(trace),
    })
}
