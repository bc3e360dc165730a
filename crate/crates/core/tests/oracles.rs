//! Properties of the estimators checked against independent derivations.

use sae_core::data::PopulationArea;
use sae_core::estimators::{
    fh_predict, fit_eblup_reml, fit_obp, ner_predict, obp_objective_fh, obp_objective_unit,
};
use sae_core::numerics::derive_stream;
use sae_core::simulation::{draw_survey, generate_population, ScenarioConfig};
use sae_core::{AreaUnits, FinitePopulation, ObpModel, SurveyData};

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Heteroscedastic constant-mean population whose covariate is made
/// uncorrelated with `y` inside every area, so that the design covariance of
/// the sample means vanishes.
fn orthogonal_population(m: usize, big_n: usize, seed: u64) -> FinitePopulation {
    let mut rng = derive_stream(seed, (u64::MAX, 0));
    let areas = (0..m)
        .map(|_| {
            let sigma_e = rng.gamma(3.0, 2.0).unwrap().sqrt();
            let v = rng.standard_normal();
            let y: Vec<f64> = (0..big_n).map(|_| 10.0 + v + sigma_e * rng.standard_normal()).collect();
            let x: Vec<f64> = (0..big_n).map(|_| rng.lognormal(1.0, 0.5).unwrap()).collect();
            let yb = y.iter().sum::<f64>() / big_n as f64;
            let xb = x.iter().sum::<f64>() / big_n as f64;
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xb) * (b - yb)).sum();
            let syy: f64 = y.iter().map(|b| (b - yb).powi(2)).sum();
            let c = sxy / syy;
            let x = x.iter().zip(&y).map(|(a, b)| a - c * (b - yb)).collect();
            PopulationArea::new(x, y, 1).unwrap()
        })
        .collect();
    FinitePopulation::new(1, areas).unwrap()
}

/// Paired differences `criterion - sum of squared errors` over repeated samples
/// from one fixed population.
fn criterion_gaps(
    pop: &FinitePopulation,
    reps: usize,
    seed: u64,
    criterion: impl Fn(&SurveyData) -> (f64, Vec<f64>),
) -> Vec<f64> {
    let truth: Vec<f64> = pop.population_summaries().iter().map(|s| s.ybar).collect();
    (0..reps)
        .map(|k| {
            let data = draw_survey(pop, 4, &mut derive_stream(seed, (k as u64, 1)), true).unwrap();
            let (q, pred) = criterion(&data);
            let sse: f64 = pred.iter().zip(&truth).map(|(p, t)| (p - t).powi(2)).sum();
            q - sse
        })
        .collect()
}

#[test]
fn unit_criterion_is_unbiased_for_total_mspe() {
    let pop = orthogonal_population(20, 200, 11);
    for use_sample_xbar in [true, false] {
        let (beta, gamma) = ([2.5], 0.5);
        let gaps = criterion_gaps(&pop, 10_000, 12, |d| {
            (
                obp_objective_unit(d, &beta, gamma, use_sample_xbar).unwrap(),
                ner_predict(d, &beta, gamma, use_sample_xbar).unwrap(),
            )
        });
        let (mean, se) = mean_se(&gaps);
        assert!(mean.abs() <= 2.0 * se, "sample xbar {use_sample_xbar}: bias {mean} (se {se})");
    }
}

#[test]
fn area_criterion_exceeds_total_mspe_by_sum_of_d() {
    let pop = orthogonal_population(20, 200, 21);
    let sum_d: f64 = pop
        .population_summaries()
        .iter()
        .map(|s| (1.0 - 4.0 / 200.0) * s.s2 / 4.0)
        .sum();
    let (beta, a) = ([2.5], 1.0);
    let gaps = criterion_gaps(&pop, 10_000, 22, |d| {
        (obp_objective_fh(d, &beta, a).unwrap(), fh_predict(d, &beta, a).unwrap())
    });
    let (mean, se) = mean_se(&gaps);
    assert!((mean - sum_d).abs() <= 2.0 * se, "mean gap {mean}, sum D {sum_d} (se {se})");
}

/// Four-unit samples with a common spread, so every area has the same `s^2`.
fn equal_spread_data(means: &[f64], xbars: &[f64], constant_x: bool) -> SurveyData {
    let areas = means
        .iter()
        .zip(xbars)
        .map(|(&mu, &xb)| {
            let y = vec![mu - 1.0, mu + 1.0, mu - 0.5, mu + 0.5];
            let x = if constant_x {
                vec![xb; 4]
            } else {
                vec![xb * 0.5, xb * 1.5, xb * 0.8, xb * 1.2]
            };
            (AreaUnits { y, x }, vec![xb], 500)
        })
        .collect();
    SurveyData::from_units(1, areas).unwrap()
}

const MEANS: [f64; 8] = [9.1, 10.4, 11.8, 8.7, 10.0, 12.5, 9.6, 10.9];
const XBARS: [f64; 8] = [2.1, 3.0, 3.9, 2.4, 2.8, 4.4, 3.3, 2.6];

#[test]
fn unit_and_unit_context_coincide_for_constant_covariates() {
    let data = equal_spread_data(&MEANS, &XBARS, true);
    let unit = fit_obp(&data, ObpModel::Unit).unwrap();
    let uc = fit_obp(&data, ObpModel::UnitContext).unwrap();
    let pu = unit.predict(&data).unwrap().values;
    let pc = uc.predict(&data).unwrap().values;
    for (a, b) in pu.iter().zip(&pc) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn unit_context_and_fay_herriot_coincide_for_constant_d() {
    let data = equal_spread_data(&MEANS, &XBARS, false);
    let d = data.summaries()[0].estimated_sampling_variance().unwrap();
    let data = data.with_known_d(&vec![d; MEANS.len()]).unwrap();
    let n = 4.0;

    // Same parameters: A = n gamma D gives identical weights.
    for gamma in [0.0, 0.1, 0.7, 5.0] {
        let beta = [3.1];
        let uc = ner_predict(&data, &beta, gamma, false).unwrap();
        let fh = fh_predict(&data, &beta, n * gamma * d).unwrap();
        for (a, b) in uc.iter().zip(&fh) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    // Fitted: the two criteria differ by a constant and a reparameterisation.
    let uc = fit_obp(&data, ObpModel::UnitContext).unwrap();
    let fh = fit_obp(&data, ObpModel::FayHerriot).unwrap();
    let pu = uc.predict(&data).unwrap().values;
    let pf = fh.predict(&data).unwrap().values;
    for (a, b) in pu.iter().zip(&pf) {
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }
}

#[test]
fn reml_recovers_homoscedastic_parameters() {
    // y = 5 x + v + e with sigma_v^2 = sigma_e^2 = 1, m = 400, n = 4.
    let mut rng = derive_stream(31, (0, 0));
    let areas = (0..400)
        .map(|_| {
            let v = rng.standard_normal();
            let x: Vec<f64> = (0..4).map(|_| rng.lognormal(1.0, 0.5).unwrap()).collect();
            let y = x.iter().map(|xj| 5.0 * xj + v + rng.standard_normal()).collect();
            (AreaUnits { y, x }, vec![3.08], 1000)
        })
        .collect();
    let data = SurveyData::from_units(1, areas).unwrap();
    let fit = fit_eblup_reml(&data).unwrap();
    let se = fit.beta_se.as_ref().unwrap()[0];
    assert!((fit.beta[0] - 5.0).abs() <= 3.0 * se, "beta {} se {se}", fit.beta[0]);
    // Large-sample sds at this design are roughly 0.04 (sigma_e^2) and 0.1 (sigma_v^2).
    assert!((fit.sigma_e2.unwrap() - 1.0).abs() < 0.15, "{:?}", fit.sigma_e2);
    assert!((fit.sigma_v2.unwrap() - 1.0).abs() < 0.35, "{:?}", fit.sigma_v2);
}

#[test]
fn estimated_sampling_variance_is_design_unbiased() {
    let pop = orthogonal_population(5, 50, 41);
    let summaries = pop.population_summaries();
    let reps = 20_000;
    let mut d_hat: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(reps)).collect();
    for k in 0..reps {
        let data = draw_survey(&pop, 4, &mut derive_stream(42, (k as u64, 1)), false).unwrap();
        for (acc, s) in d_hat.iter_mut().zip(data.summaries()) {
            acc.push(s.estimated_sampling_variance().unwrap());
        }
    }
    for (draws, s) in d_hat.iter().zip(&summaries) {
        let truth = (1.0 - 4.0 / 50.0) * s.s2 / 4.0;
        let (mean, se) = mean_se(draws);
        assert!((mean - truth).abs() <= 3.0 * se, "{mean} vs {truth} (se {se})");
    }
}

#[test]
fn population_variance_tracks_generating_error_variance() {
    let mut cfg = ScenarioConfig::const_mean(200, 5.0);
    cfg.pop_size = 1000;
    let pop = generate_population(&cfg, &mut derive_stream(51, (0, 0))).unwrap();
    for (area, s) in pop.areas().iter().zip(pop.population_summaries()) {
        let sigma2 = area.error_variance.unwrap();
        // S^2 of 1000 normals has relative sd about sqrt(2 / 999).
        assert!((s.s2 / sigma2 - 1.0).abs() < 6.0 * (2.0f64 / 999.0).sqrt(), "{} vs {sigma2}", s.s2);
    }
}

#[test]
fn linear_population_variance_matches_moments() {
    // E S^2 = b1^2 Var(x) + E sigma_e^2 = 25 (e^0.25 - 1) e^2.25 + 6.
    let expected = 25.0 * (0.25f64.exp() - 1.0) * 2.25f64.exp() + 6.0;
    let mut cfg = ScenarioConfig::linear(400, 10.0, 5.0);
    cfg.pop_size = 1000;
    let pop = generate_population(&cfg, &mut derive_stream(61, (0, 0))).unwrap();
    let s2: Vec<f64> = pop.population_summaries().iter().map(|s| s.s2).collect();
    let (mean, se) = mean_se(&s2);
    assert!((mean - expected).abs() <= 3.0 * se, "{mean} vs {expected} (se {se})");
    assert!((expected - 73.4).abs() < 0.1);
}
