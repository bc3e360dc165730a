//! Populations, samples and the per-area summaries every predictor consumes.
//!
//! Covariates are stored row-major: an area with `n` units and covariate
//! dimension `p` keeps its covariates in a flat slice of length `n * p`.
//! An intercept is just a covariate column equal to one; nothing is added
//! implicitly.

use crate::error::{Result, SaeError};

/// One area of a finite population.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationArea {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Realised area effect, kept for diagnostics when the population is simulated.
    pub area_effect: Option<f64>,
    /// Unit error variance used to generate the area, when known.
    pub error_variance: Option<f64>,
}

impl PopulationArea {
    pub fn new(x: Vec<f64>, y: Vec<f64>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(SaeError::InvalidInput(
                "covariate dimension must be positive".into(),
            ));
        }
        if y.len() < 2 {
            return Err(SaeError::InvalidInput(format!(
                "population areas need at least 2 units, got {}",
                y.len()
            )));
        }
        if x.len() != y.len() * p {
            return Err(SaeError::LengthMismatch {
                what: "population covariates",
                expected: y.len() * p,
                actual: x.len(),
            });
        }
        Ok(Self {
            x,
            y,
            area_effect: None,
            error_variance: None,
        })
    }

    pub fn with_latents(mut self, area_effect: f64, error_variance: f64) -> Self {
        self.area_effect = Some(area_effect);
        self.error_variance = Some(error_variance);
        self
    }

    pub fn size(&self) -> usize {
        self.y.len()
    }

    pub fn covariates(&self) -> &[f64] {
        &self.x
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }
}

/// Exact population quantities for one area.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSummary {
    pub xbar: Vec<f64>,
    pub ybar: f64,
    /// Population variance of y with divisor `N - 1`.
    pub s2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinitePopulation {
    p: usize,
    areas: Vec<PopulationArea>,
}

impl FinitePopulation {
    pub fn new(p: usize, areas: Vec<PopulationArea>) -> Result<Self> {
        if areas.is_empty() {
            return Err(SaeError::InvalidInput("population has no areas".into()));
        }
        for area in &areas {
            if area.x.len() != area.y.len() * p {
                return Err(SaeError::LengthMismatch {
                    what: "population covariates",
                    expected: area.y.len() * p,
                    actual: area.x.len(),
                });
            }
        }
        Ok(Self { p, areas })
    }

    pub fn area_count(&self) -> usize {
        self.areas.len()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn areas(&self) -> &[PopulationArea] {
        &self.areas
    }

    pub fn area(&self, i: usize) -> &PopulationArea {
        &self.areas[i]
    }

    /// Covariate means, response mean and response variance of every area.
    pub fn population_summaries(&self) -> Vec<PopulationSummary> {
        self.areas
            .iter()
            .map(|a| {
                let (ybar, s2) = mean_and_variance(&a.y);
                PopulationSummary {
                    xbar: column_means(&a.x, self.p),
                    ybar,
                    s2,
                }
            })
            .collect()
    }
}

/// Sample-level summary of one area plus the known population quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaSummary {
    pub n: usize,
    pub ybar: f64,
    pub xbar: Vec<f64>,
    /// Sample variance of y (divisor `n - 1`); absent for single-unit samples.
    pub s2: Option<f64>,
    pub pop_xbar: Vec<f64>,
    pub pop_size: usize,
    /// Known sampling variance of `ybar`.
    pub known_d: Option<f64>,
}

impl AreaSummary {
    /// Design-unbiased estimate of Var(ybar) under SRSWOR, `(1 - n/N) s2 / n`.
    pub fn estimated_sampling_variance(&self) -> Option<f64> {
        self.s2
            .map(|s2| (1.0 - self.n as f64 / self.pop_size as f64) * s2 / self.n as f64)
    }

    pub fn dim(&self) -> usize {
        self.xbar.len()
    }
}

/// Summarise an area sample. `x` holds `y.len()` covariate rows of length
/// `pop_xbar.len()`.
pub fn summarize_area(
    y: &[f64],
    x: &[f64],
    pop_xbar: &[f64],
    pop_size: usize,
) -> Result<AreaSummary> {
    if y.len() < 2 {
        return Err(SaeError::SampleTooSmall {
            area: 0,
            n: y.len(),
            required: 2,
        });
    }
    summarize_units(y, x, pop_xbar, pop_size)
}

fn summarize_units(y: &[f64], x: &[f64], pop_xbar: &[f64], pop_size: usize) -> Result<AreaSummary> {
    let p = pop_xbar.len();
    if p == 0 {
        return Err(SaeError::InvalidInput(
            "covariate dimension must be positive".into(),
        ));
    }
    if y.is_empty() {
        return Err(SaeError::SampleTooSmall {
            area: 0,
            n: 0,
            required: 1,
        });
    }
    if x.len() != y.len() * p {
        return Err(SaeError::LengthMismatch {
            what: "sample covariates",
            expected: y.len() * p,
            actual: x.len(),
        });
    }
    if y.len() > pop_size {
        return Err(SaeError::InvalidInput(format!(
            "sample size {} exceeds population size {pop_size}",
            y.len()
        )));
    }
    let (ybar, s2) = mean_and_variance(y);
    Ok(AreaSummary {
        n: y.len(),
        ybar,
        xbar: column_means(x, p),
        s2: (y.len() >= 2).then_some(s2),
        pop_xbar: pop_xbar.to_vec(),
        pop_size,
        known_d: None,
    })
}

/// Sampled unit values of one area.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaUnits {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyData {
    p: usize,
    summaries: Vec<AreaSummary>,
    units: Option<Vec<AreaUnits>>,
    overridden: bool,
}

impl SurveyData {
    /// Build from unit-level samples. Each tuple is `(units, pop_xbar, pop_size)`.
    pub fn from_units(p: usize, areas: Vec<(AreaUnits, Vec<f64>, usize)>) -> Result<Self> {
        if areas.is_empty() {
            return Err(SaeError::InvalidInput("survey has no areas".into()));
        }
        let mut summaries = Vec::with_capacity(areas.len());
        let mut units = Vec::with_capacity(areas.len());
        for (i, (u, pop_xbar, pop_size)) in areas.into_iter().enumerate() {
            if pop_xbar.len() != p {
                return Err(SaeError::LengthMismatch {
                    what: "population covariate mean",
                    expected: p,
                    actual: pop_xbar.len(),
                });
            }
            let s = summarize_units(&u.y, &u.x, &pop_xbar, pop_size).map_err(|e| match e {
                SaeError::SampleTooSmall { n, required, .. } => SaeError::SampleTooSmall {
                    area: i,
                    n,
                    required,
                },
                other => other,
            })?;
            summaries.push(s);
            units.push(u);
        }
        Ok(Self {
            p,
            summaries,
            units: Some(units),
            overridden: false,
        })
    }

    /// Build from area-level summaries only. Unit-level fits (REML) are
    /// unavailable on such data.
    pub fn from_summaries(summaries: Vec<AreaSummary>) -> Result<Self> {
        let p = summaries
            .first()
            .map(AreaSummary::dim)
            .ok_or_else(|| SaeError::InvalidInput("survey has no areas".into()))?;
        for s in &summaries {
            if s.xbar.len() != p || s.pop_xbar.len() != p {
                return Err(SaeError::LengthMismatch {
                    what: "area covariate dimension",
                    expected: p,
                    actual: s.xbar.len().max(s.pop_xbar.len()),
                });
            }
            if s.n == 0 || s.n > s.pop_size {
                return Err(SaeError::InvalidInput(format!(
                    "need 0 < n <= N, got n={} N={}",
                    s.n, s.pop_size
                )));
            }
        }
        Ok(Self {
            p,
            summaries,
            units: None,
            overridden: false,
        })
    }

    pub fn area_count(&self) -> usize {
        self.summaries.len()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn summaries(&self) -> &[AreaSummary] {
        &self.summaries
    }

    pub fn units(&self) -> Option<&[AreaUnits]> {
        self.units.as_deref()
    }

    pub fn total_sample_size(&self) -> usize {
        self.summaries.iter().map(|s| s.n).sum()
    }

    /// True once sample covariate means no longer match the raw units.
    pub fn is_overridden(&self) -> bool {
        self.overridden
    }

    /// Attach known sampling variances, one per area.
    pub fn with_known_d(mut self, d: &[f64]) -> Result<Self> {
        if d.len() != self.summaries.len() {
            return Err(SaeError::LengthMismatch {
                what: "known sampling variances",
                expected: self.summaries.len(),
                actual: d.len(),
            });
        }
        for (s, &di) in self.summaries.iter_mut().zip(d) {
            s.known_d = Some(di);
        }
        Ok(self)
    }

    /// Replace sample covariate means by `pop_xbar + delta` for every area,
    /// or only for `only_area` when given. Raw units are left untouched.
    pub fn override_sample_xbar(&self, delta: f64, only_area: Option<usize>) -> Self {
        let mut out = self.clone();
        for (i, s) in out.summaries.iter_mut().enumerate() {
            if only_area.is_none_or(|a| a == i) {
                s.xbar = s.pop_xbar.iter().map(|v| v + delta).collect();
            }
        }
        out.overridden = true;
        out
    }
}

pub(crate) fn mean_and_variance(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|a| (a - mean) * (a - mean)).sum();
    (mean, ss / (n - 1.0))
}

pub(crate) fn column_means(x: &[f64], p: usize) -> Vec<f64> {
    let rows = x.len() / p;
    let mut out = vec![0.0; p];
    for row in x.chunks_exact(p) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    for o in &mut out {
        *o /= rows as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_sample_has_zero_variance() {
        let s = summarize_area(&[2.0; 4], &[1.0; 4], &[1.0], 1000).unwrap();
        assert_eq!(s.ybar, 2.0);
        assert_eq!(s.xbar, vec![1.0]);
        assert_eq!(s.s2, Some(0.0));
    }

    #[test]
    fn two_point_variance() {
        let s = summarize_area(&[1.0, 3.0], &[0.0, 2.0], &[1.0], 10).unwrap();
        assert_eq!(s.ybar, 2.0);
        assert_eq!(s.xbar, vec![1.0]);
        assert_eq!(s.s2, Some(2.0));
    }

    #[test]
    fn four_point_variance() {
        let s = summarize_area(&[0.5, 1.5, 2.5, 3.5], &[0.0; 4], &[0.0], 100).unwrap();
        assert_relative_eq!(s.s2.unwrap(), 5.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn summarize_rejects_bad_input() {
        assert!(matches!(
            summarize_area(&[1.0], &[1.0], &[1.0], 10),
            Err(SaeError::SampleTooSmall { .. })
        ));
        assert!(matches!(
            summarize_area(&[1.0, 2.0], &[1.0], &[1.0], 10),
            Err(SaeError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn population_summary_examples() {
        let flat = PopulationArea::new(vec![0.0; 5], vec![5.0; 5], 1).unwrap();
        let small = PopulationArea::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], 1).unwrap();
        let pop = FinitePopulation::new(1, vec![flat, small]).unwrap();
        let s = pop.population_summaries();
        assert_eq!((s[0].ybar, s[0].s2), (5.0, 0.0));
        assert_eq!((s[1].ybar, s[1].s2), (2.0, 1.0));
        assert_eq!(s[1].xbar, vec![2.0]);
    }

    #[test]
    fn population_area_needs_two_units() {
        assert!(PopulationArea::new(vec![1.0], vec![1.0], 1).is_err());
    }

    #[test]
    fn single_unit_area_allowed_for_direct_use() {
        let d = SurveyData::from_units(
            1,
            vec![(
                AreaUnits {
                    y: vec![7.0],
                    x: vec![1.0],
                },
                vec![1.0],
                10,
            )],
        )
        .unwrap();
        assert_eq!(d.summaries()[0].ybar, 7.0);
        assert_eq!(d.summaries()[0].s2, None);
    }

    #[test]
    fn override_leaves_units_and_sets_flag() {
        let units = AreaUnits {
            y: vec![1.0, 2.0],
            x: vec![0.0, 4.0],
        };
        let d = SurveyData::from_units(1, vec![(units.clone(), vec![3.0], 10)]).unwrap();
        let o = d.override_sample_xbar(0.5, None);
        assert!(o.is_overridden() && !d.is_overridden());
        assert_eq!(o.summaries()[0].xbar, vec![3.5]);
        assert_eq!(o.units().unwrap()[0], units);
    }

    proptest! {
        #[test]
        fn summaries_round_trip(
            rows in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3), 2..40)
        ) {
            let y: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let x: Vec<f64> = rows.iter().flat_map(|r| [r.1, r.2]).collect();
            let s = summarize_area(&y, &x, &[0.0, 0.0], 1000).unwrap();
            let n = y.len() as f64;
            let ybar = y.iter().sum::<f64>() / n;
            let s2 = y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>() / (n - 1.0);
            let x1 = rows.iter().map(|r| r.1).sum::<f64>() / n;
            let x2 = rows.iter().map(|r| r.2).sum::<f64>() / n;
            prop_assert!((s.ybar - ybar).abs() <= 1e-12 * (1.0 + ybar.abs()));
            prop_assert!((s.s2.unwrap() - s2).abs() <= 1e-12 * (1.0 + s2));
            prop_assert!((s.xbar[0] - x1).abs() <= 1e-12 * (1.0 + x1.abs()));
            prop_assert!((s.xbar[1] - x2).abs() <= 1e-12 * (1.0 + x2.abs()));
        }

        #[test]
        fn population_variance_is_shift_invariant(
            y in prop::collection::vec(-100f64..100.0, 2..50),
            shift in -1e3f64..1e3,
        ) {
            let x = vec![0.0; y.len()];
            let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
            let a = FinitePopulation::new(1, vec![PopulationArea::new(x.clone(), y, 1).unwrap()]).unwrap();
            let b = FinitePopulation::new(1, vec![PopulationArea::new(x, shifted, 1).unwrap()]).unwrap();
            let (sa, sb) = (a.population_summaries()[0].s2, b.population_summaries()[0].s2);
            prop_assert!((sa - sb).abs() <= 1e-9 * (1.0 + sa));
        }
    }
}
