use serde::Serialize;

use crate::error::{Result, SaeError};
use crate::estimators::Estimator;

/// Mean structure of the generating superpopulation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrueModel {
    /// `y = b + v + e`
    ConstMean { b: f64 },
    /// `y = b0 + b1 x + v + e`
    Linear { b0: f64, b1: f64 },
    /// `y = 10 + v + e`, used for the covariate-bias sweep.
    Remark,
}

impl TrueModel {
    pub const REMARK_MEAN: f64 = 10.0;

    #[inline]
    pub fn mean(&self, x: f64) -> f64 {
        match *self {
            TrueModel::ConstMean { b } => b,
            TrueModel::Linear { b0, b1 } => b0 + b1 * x,
            TrueModel::Remark => Self::REMARK_MEAN,
        }
    }
}

/// How the second gamma parameter is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaConvention {
    Scale,
    Rate,
}

impl GammaConvention {
    /// Returns the scale implied by `param`.
    pub fn scale(self, param: f64) -> f64 {
        match self {
            GammaConvention::Scale => param,
            GammaConvention::Rate => 1.0 / param,
        }
    }
}

/// How the two lognormal parameters are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LognormalConvention {
    /// Mean and standard deviation of `log x`.
    LogScale,
    /// Mean and standard deviation of `x` itself.
    Moments,
}

impl LognormalConvention {
    /// Returns `(log_mu, log_sigma)`.
    pub fn log_params(self, a: f64, b: f64) -> (f64, f64) {
        match self {
            LognormalConvention::LogScale => (a, b),
            LognormalConvention::Moments => {
                let s2 = (1.0 + (b * b) / (a * a)).ln();
                (a.ln() - 0.5 * s2, s2.sqrt())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub model: TrueModel,
    /// Number of areas `m`.
    pub areas: usize,
    /// Population size `N_i` of every area.
    pub pop_size: usize,
    /// Sample size `n_i` of every area.
    pub sample_size: usize,
    pub sigma_v2: f64,
    pub gamma_shape: f64,
    pub gamma_scale: f64,
    pub x_log_mu: f64,
    pub x_log_sigma: f64,
    pub replicates: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
}

impl ScenarioConfig {
    pub const DEFAULT_SEED: u64 = 20_240_601;

    fn base(model: TrueModel, areas: usize) -> Self {
        let (x_log_mu, x_log_sigma) = LognormalConvention::LogScale.log_params(1.0, 0.5);
        Self {
            model,
            areas,
            pop_size: 1000,
            sample_size: 4,
            sigma_v2: 1.0,
            gamma_shape: 3.0,
            gamma_scale: GammaConvention::Rate.scale(0.5),
            x_log_mu,
            x_log_sigma,
            replicates: 1000,
            seed: Self::DEFAULT_SEED,
            estimators: Estimator::ALL.to_vec(),
        }
    }

    /// Constant-mean heteroscedastic population with `m` areas.
    pub fn const_mean(areas: usize, b: f64) -> Self {
        Self::base(TrueModel::ConstMean { b }, areas)
    }

    /// Linear-mean heteroscedastic population with intercept `b0` and slope `b1`.
    pub fn linear(areas: usize, b0: f64, b1: f64) -> Self {
        Self::base(TrueModel::Linear { b0, b1 }, areas)
    }

    /// Fifty areas with mean 10, as used by the bias sweep.
    pub fn remark() -> Self {
        let mut cfg = Self::base(TrueModel::Remark, 50);
        cfg.estimators = vec![Estimator::ObpUnit];
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SaeError::InvalidInput(msg));
        if self.areas == 0 {
            return bad("number of areas must be positive".into());
        }
        if self.pop_size < 2 {
            return bad(format!("population size must be at least 2, got {}", self.pop_size));
        }
        if self.sample_size == 0 || self.sample_size > self.pop_size {
            return bad(format!(
                "sample size must satisfy 1 <= n <= N, got n={} N={}",
                self.sample_size, self.pop_size
            ));
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        for (name, v) in [
            ("sigma_v2", self.sigma_v2),
            ("gamma_shape", self.gamma_shape),
            ("gamma_scale", self.gamma_scale),
            ("x_log_sigma", self.x_log_sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !self.x_log_mu.is_finite() {
            return bad("x_log_mu must be finite".into());
        }
        let finite = match self.model {
            TrueModel::ConstMean { b } => b.is_finite(),
            TrueModel::Linear { b0, b1 } => b0.is_finite() && b1.is_finite(),
            TrueModel::Remark => true,
        };
        if !finite {
            return bad("model coefficients must be finite".into());
        }
        if self.estimators.is_empty() {
            return bad("no estimators requested".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        assert_eq!(GammaConvention::Rate.scale(0.5), 2.0);
        assert_eq!(GammaConvention::Scale.scale(0.5), 0.5);
        assert_eq!(LognormalConvention::LogScale.log_params(1.0, 0.5), (1.0, 0.5));
        let (mu, sigma) = LognormalConvention::Moments.log_params(1.0, 0.5);
        // Back to the moments of x.
        let mean = (mu + 0.5 * sigma * sigma).exp();
        let var = ((sigma * sigma).exp() - 1.0) * (2.0 * mu + sigma * sigma).exp();
        assert!((mean - 1.0).abs() < 1e-12 && (var - 0.25).abs() < 1e-12);
    }

    #[test]
    fn presets_validate() {
        ScenarioConfig::const_mean(40, 5.0).validate().unwrap();
        ScenarioConfig::linear(400, 10.0, 5.0).validate().unwrap();
        let r = ScenarioConfig::remark();
        r.validate().unwrap();
        assert_eq!(r.areas, 50);
        assert_eq!(r.model.mean(123.0), 10.0);
    }

    #[test]
    fn validation_failures() {
        let mut c = ScenarioConfig::const_mean(40, 5.0);
        c.sample_size = 2000;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::const_mean(40, 5.0);
        c.gamma_scale = 0.0;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::const_mean(40, 5.0);
        c.replicates = 0;
        assert!(c.validate().is_err());
    }
}
