use super::config::ScenarioConfig;
use crate::data::{AreaUnits, FinitePopulation, PopulationArea, SurveyData};
use crate::error::{Result, SaeError};
use crate::numerics::RandomStream;

/// Draw a finite population with a single covariate.
///
/// Per area: `sigma_ei^2 ~ Gamma(shape, scale)`, `v_i ~ N(0, sigma_v^2)`, then
/// for every unit `x ~ lognormal`, `e ~ N(0, sigma_ei^2)` and `y` from the
/// configured mean structure.
pub fn generate_population(cfg: &ScenarioConfig, stream: &mut RandomStream) -> Result<FinitePopulation> {
    cfg.validate()?;
    let sigma_v = cfg.sigma_v2.sqrt();
    let n = cfg.pop_size;
    let mut areas = Vec::with_capacity(cfg.areas);
    for _ in 0..cfg.areas {
        let error_variance = stream.gamma(cfg.gamma_shape, cfg.gamma_scale)?;
        let v = stream.normal(0.0, sigma_v)?;
        let sigma_e = error_variance.sqrt();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let xj = (cfg.x_log_mu + cfg.x_log_sigma * stream.standard_normal()).exp();
            let e = sigma_e * stream.standard_normal();
            x.push(xj);
            y.push(cfg.model.mean(xj) + v + e);
        }
        areas.push(PopulationArea::new(x, y, 1)?.with_latents(v, error_variance));
    }
    FinitePopulation::new(1, areas)
}

/// SRSWOR of `n` units from every area.
///
/// With `attach_known_d`, each area also carries `D_i = (1 - n/N) S_i^2 / n`
/// computed from the full population.
pub fn draw_survey(
    pop: &FinitePopulation,
    n: usize,
    stream: &mut RandomStream,
    attach_known_d: bool,
) -> Result<SurveyData> {
    let p = pop.dim();
    let summaries = pop.population_summaries();
    let mut areas = Vec::with_capacity(pop.area_count());
    for (area, summary) in pop.areas().iter().zip(&summaries) {
        let big_n = area.size();
        if n > big_n {
            return Err(SaeError::InvalidInput(format!(
                "sample size {n} exceeds area population {big_n}"
            )));
        }
        let idx = stream.srswor(big_n, n)?;
        let xs = area.covariates();
        let ys = area.responses();
        let units = AreaUnits {
            y: idx.iter().map(|&j| ys[j]).collect(),
            x: idx.iter().flat_map(|&j| xs[j * p..(j + 1) * p].iter().copied()).collect(),
        };
        areas.push((units, summary.xbar.clone(), big_n));
    }
    let data = SurveyData::from_units(p, areas)?;
    if attach_known_d {
        let d: Vec<f64> = pop
            .areas()
            .iter()
            .zip(&summaries)
            .map(|(a, s)| {
                let big_n = a.size() as f64;
                (1.0 - n as f64 / big_n) * s.s2 / n as f64
            })
            .collect();
        data.with_known_d(&d)
    } else {
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;
    use crate::simulation::TrueModel;

    #[test]
    fn degenerate_noise_gives_constant_population() {
        let mut cfg = ScenarioConfig::const_mean(5, 5.0);
        cfg.sigma_v2 = 1e-12;
        cfg.gamma_scale = 1e-12;
        cfg.pop_size = 50;
        let pop = generate_population(&cfg, &mut derive_stream(1, (0, 0))).unwrap();
        for a in pop.areas() {
            assert!(a.responses().iter().all(|y| (y - 5.0).abs() < 1e-4));
        }
    }

    #[test]
    fn latents_are_retained() {
        let mut cfg = ScenarioConfig::linear(3, 10.0, 5.0);
        cfg.pop_size = 20;
        let pop = generate_population(&cfg, &mut derive_stream(2, (0, 0))).unwrap();
        assert_eq!(pop.area_count(), 3);
        for a in pop.areas() {
            assert_eq!(a.size(), 20);
            assert!(a.area_effect.is_some());
            assert!(a.error_variance.unwrap() > 0.0);
        }
    }

    #[test]
    fn census_recovers_population_means() {
        let mut cfg = ScenarioConfig::const_mean(4, 5.0);
        cfg.pop_size = 30;
        let pop = generate_population(&cfg, &mut derive_stream(3, (0, 0))).unwrap();
        let data = draw_survey(&pop, 30, &mut derive_stream(3, (0, 1)), true).unwrap();
        for (s, ps) in data.summaries().iter().zip(pop.population_summaries()) {
            assert!((s.ybar - ps.ybar).abs() < 1e-12);
            assert_eq!(s.known_d, Some(0.0));
        }
    }

    #[test]
    fn sample_covariate_means_within_population_range() {
        let mut cfg = ScenarioConfig::const_mean(10, 5.0);
        cfg.pop_size = 200;
        let pop = generate_population(&cfg, &mut derive_stream(4, (0, 0))).unwrap();
        let data = draw_survey(&pop, 4, &mut derive_stream(4, (0, 1)), false).unwrap();
        for (s, a) in data.summaries().iter().zip(pop.areas()) {
            let lo = a.covariates().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = a.covariates().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(s.xbar[0] >= lo && s.xbar[0] <= hi);
            assert_eq!(s.known_d, None);
        }
    }

    #[test]
    fn sample_larger_than_area_fails() {
        let mut cfg = ScenarioConfig::const_mean(2, 5.0);
        cfg.pop_size = 5;
        cfg.model = TrueModel::Remark;
        let pop = generate_population(&cfg, &mut derive_stream(5, (0, 0))).unwrap();
        assert!(draw_survey(&pop, 6, &mut derive_stream(5, (0, 1)), false).is_err());
    }
}
