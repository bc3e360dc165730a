use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::boxplot::BoxplotSummary;
use super::config::ScenarioConfig;
use super::population::{draw_survey, generate_population};
use super::{PHASE_POPULATION, PHASE_SAMPLING};
use crate::data::{FinitePopulation, SurveyData};
use crate::error::{Result, SaeError};
use crate::estimators::{estimate, Estimator};
use crate::numerics::{derive_stream, SearchConfig};

/// Replicates processed per parallel batch; results are folded in replicate order.
const BATCH: usize = 64;

/// Everything drawn for one Monte Carlo replicate.
pub struct ReplicateDraw {
    pub index: usize,
    pub population: FinitePopulation,
    /// True area means of this replicate's population.
    pub truth: Vec<f64>,
    pub data: SurveyData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub name: String,
    /// Mean over areas of the per-area MSPE.
    pub overall_mspe: f64,
    /// Standard error of `overall_mspe` from the replicate-level area averages.
    pub mc_se: f64,
    pub area_mspe: Vec<f64>,
    pub boxplot: BoxplotSummary,
    pub used_replicates: usize,
    pub excluded_replicates: usize,
    pub last_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MCReport {
    pub scenario: ScenarioConfig,
    pub replicates: usize,
    pub estimators: Vec<EstimatorReport>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl MCReport {
    pub fn get(&self, name: &str) -> Option<&EstimatorReport> {
        self.estimators.iter().find(|e| e.name == name)
    }

    pub fn estimator(&self, estimator: Estimator) -> Option<&EstimatorReport> {
        self.get(estimator.tag())
    }
}

/// Monte Carlo MSPE of the configured estimators.
///
/// Every replicate regenerates the population and redraws the sample, each
/// from its own stream, so results do not depend on the thread count.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MCReport> {
    let search = SearchConfig::default();
    let names: Vec<String> = cfg.estimators.iter().map(|e| e.tag().to_string()).collect();
    run_custom(cfg, &names, |draw| {
        cfg.estimators
            .iter()
            .map(|&e| estimate(e, &draw.data, &search).map(|p| p.values))
            .collect()
    })
}

struct Accumulator {
    sum_sq: Vec<f64>,
    replicate_means: Vec<f64>,
    excluded: usize,
    last_error: Option<String>,
}

/// Run the replicate loop with arbitrary predictors. `predict` returns one
/// result per entry of `names`, in the same order.
pub fn run_custom<F>(cfg: &ScenarioConfig, names: &[String], predict: F) -> Result<MCReport>
where
    F: Fn(&ReplicateDraw) -> Vec<Result<Vec<f64>>> + Sync,
{
    cfg.validate()?;
    let start = Instant::now();
    let m = cfg.areas;
    let mut acc: Vec<Accumulator> = names
        .iter()
        .map(|_| Accumulator {
            sum_sq: vec![0.0; m],
            replicate_means: Vec::with_capacity(cfg.replicates),
            excluded: 0,
            last_error: None,
        })
        .collect();

    let mut first = 0;
    while first < cfg.replicates {
        let last = (first + BATCH).min(cfg.replicates);
        let batch: Vec<Vec<Result<Vec<f64>>>> = (first..last)
            .into_par_iter()
            .map(|k| -> Result<_> {
                let draw = draw_replicate(cfg, k)?;
                let out = predict(&draw);
                if out.len() != names.len() {
                    return Err(SaeError::LengthMismatch {
                        what: "predictor outputs",
                        expected: names.len(),
                        actual: out.len(),
                    });
                }
                Ok(out
                    .into_iter()
                    .map(|r| {
                        r.and_then(|pred| {
                            if pred.len() != m {
                                return Err(SaeError::LengthMismatch {
                                    what: "predictions",
                                    expected: m,
                                    actual: pred.len(),
                                });
                            }
                            Ok(pred.iter().zip(&draw.truth).map(|(p, t)| (p - t) * (p - t)).collect())
                        })
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;

        for replicate in batch {
            for (a, res) in acc.iter_mut().zip(replicate) {
                match res {
                    Ok(sq) if sq.iter().all(|v| v.is_finite()) => {
                        for (s, v) in a.sum_sq.iter_mut().zip(&sq) {
                            *s += v;
                        }
                        a.replicate_means.push(sq.iter().sum::<f64>() / m as f64);
                    }
                    Ok(_) => {
                        a.excluded += 1;
                        a.last_error = Some("non-finite prediction".into());
                    }
                    Err(e) => {
                        a.excluded += 1;
                        a.last_error = Some(e.to_string());
                    }
                }
            }
        }
        first = last;
    }

    let estimators = names
        .iter()
        .zip(acc)
        .map(|(name, a)| {
            let used = a.replicate_means.len();
            if used == 0 {
                return Err(SaeError::AllReplicatesFailed {
                    estimator: name.clone(),
                    last_error: a.last_error.unwrap_or_default(),
                });
            }
            let area_mspe: Vec<f64> = a.sum_sq.iter().map(|s| s / used as f64).collect();
            let overall_mspe = area_mspe.iter().sum::<f64>() / m as f64;
            Ok(EstimatorReport {
                name: name.clone(),
                overall_mspe,
                mc_se: standard_error(&a.replicate_means),
                boxplot: BoxplotSummary::from_values(&area_mspe),
                area_mspe,
                used_replicates: used,
                excluded_replicates: a.excluded,
                last_error: a.last_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MCReport {
        scenario: cfg.clone(),
        replicates: cfg.replicates,
        estimators,
        wall_time: start.elapsed(),
    })
}

pub(crate) fn draw_replicate(cfg: &ScenarioConfig, k: usize) -> Result<ReplicateDraw> {
    let mut pop_stream = derive_stream(cfg.seed, (k as u64, PHASE_POPULATION));
    let population = generate_population(cfg, &mut pop_stream)?;
    let truth = population.population_summaries().iter().map(|s| s.ybar).collect();
    let mut sample_stream = derive_stream(cfg.seed, (k as u64, PHASE_SAMPLING));
    let data = draw_survey(&population, cfg.sample_size, &mut sample_stream, true)?;
    Ok(ReplicateDraw {
        index: k,
        population,
        truth,
        data,
    })
}

/// Standard error of the mean; NaN with fewer than two values.
pub(crate) fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(k: usize) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::const_mean(8, 5.0);
        cfg.pop_size = 60;
        cfg.replicates = k;
        cfg
    }

    #[test]
    fn perfect_predictor_has_zero_mspe() {
        let cfg = small(1);
        let names = vec!["ORACLE".to_string()];
        let r = run_custom(&cfg, &names, |d| vec![Ok(d.truth.clone())]).unwrap();
        assert_eq!(r.get("ORACLE").unwrap().overall_mspe, 0.0);
    }

    #[test]
    fn overall_is_mean_of_area_mspe() {
        let r = run_scenario(&small(5)).unwrap();
        for e in &r.estimators {
            let mean = e.area_mspe.iter().sum::<f64>() / e.area_mspe.len() as f64;
            assert!((e.overall_mspe - mean).abs() <= 1e-10 * mean.max(1.0));
            assert_eq!(e.area_mspe.len(), 8);
            assert_eq!(e.used_replicates + e.excluded_replicates, 5);
        }
    }

    #[test]
    fn failures_are_excluded_per_estimator() {
        let cfg = small(6);
        let names = vec!["A".to_string(), "B".to_string()];
        let r = run_custom(&cfg, &names, |d| {
            let b = if d.index % 2 == 0 {
                Err(SaeError::Singular { ratio: 0.0 })
            } else {
                Ok(d.data.summaries().iter().map(|s| s.ybar).collect())
            };
            vec![Ok(d.truth.clone()), b]
        })
        .unwrap();
        assert_eq!(r.get("A").unwrap().excluded_replicates, 0);
        assert_eq!(r.get("B").unwrap().excluded_replicates, 3);
        assert_eq!(r.get("B").unwrap().used_replicates, 3);
    }

    #[test]
    fn all_failures_is_an_error() {
        let cfg = small(2);
        let names = vec!["X".to_string()];
        let err = run_custom(&cfg, &names, |_| vec![Err(SaeError::Singular { ratio: 0.0 })]).unwrap_err();
        assert!(matches!(err, SaeError::AllReplicatesFailed { .. }));
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = small(70);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_scenario(&cfg).unwrap())
        };
        let (a, b) = (run(1), run(4));
        for (x, y) in a.estimators.iter().zip(&b.estimators) {
            assert_eq!(x.overall_mspe.to_bits(), y.overall_mspe.to_bits());
            assert_eq!(x.area_mspe, y.area_mspe);
        }
    }
}
