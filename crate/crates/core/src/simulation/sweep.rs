use rayon::prelude::*;
use serde::Serialize;

use super::config::{ScenarioConfig, TrueModel};
use super::monte_carlo::{draw_replicate, standard_error};
use crate::error::{Result, SaeError};
use crate::estimators::{fit_obp_with, ObpModel};
use crate::numerics::SearchConfig;

pub const DEFAULT_DELTAS: [f64; 11] = [-2.0, -1.5, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 1.5, 2.0];

/// Which areas get their sample covariate mean overridden.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    AllAreas,
    TargetOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub mspe: f64,
    pub mc_se: f64,
    pub used_replicates: usize,
}

/// MSPE of the unit-level OBP for `target_area` when the sample covariate
/// means are forced to `Xbar_i + delta`.
///
/// All deltas share each replicate's population and sample, so differences
/// between deltas are free of between-replicate noise.
pub fn bias_sweep(
    cfg: &ScenarioConfig,
    deltas: &[f64],
    target_area: usize,
    mode: SweepMode,
) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    if cfg.model != TrueModel::Remark {
        return Err(SaeError::InvalidInput(
            "bias sweep requires the constant-mean-10 (remark) model".into(),
        ));
    }
    if deltas.is_empty() || !deltas.contains(&0.0) {
        return Err(SaeError::InvalidInput("delta grid must be nonempty and contain 0".into()));
    }
    if target_area >= cfg.areas {
        return Err(SaeError::InvalidInput(format!(
            "target area {target_area} out of range for {} areas",
            cfg.areas
        )));
    }
    let search = SearchConfig::default();
    let only = match mode {
        SweepMode::AllAreas => None,
        SweepMode::TargetOnly => Some(target_area),
    };

    let per_replicate: Vec<Vec<Option<f64>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|k| -> Result<Vec<Option<f64>>> {
            let draw = draw_replicate(cfg, k)?;
            let truth = draw.truth[target_area];
            Ok(deltas
                .iter()
                .map(|&delta| {
                    let data = draw.data.override_sample_xbar(delta, only);
                    fit_obp_with(&data, ObpModel::Unit, &search)
                        .and_then(|fit| fit.predict(&data))
                        .ok()
                        .map(|p| (p.values[target_area] - truth).powi(2))
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    deltas
        .iter()
        .enumerate()
        .map(|(d, &delta)| {
            let errs: Vec<f64> = per_replicate.iter().filter_map(|r| r[d]).collect();
            if errs.is_empty() {
                return Err(SaeError::AllReplicatesFailed {
                    estimator: format!("OBP-UNIT (delta={delta})"),
                    last_error: "fit failed".into(),
                });
            }
            Ok(SweepPoint {
                delta,
                mspe: errs.iter().sum::<f64>() / errs.len() as f64,
                mc_se: standard_error(&errs),
                used_replicates: errs.len(),
            })
        })
        .collect()
}
