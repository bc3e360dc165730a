//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment. `b` and `m` accept comma-separated
//! lists; the run covers every `(b, m)` pair, `b` varying slowest. Unknown or
//! repeated keys are errors.
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `model` | `const_mean`, `linear` or `remark` | `const_mean` |
//! | `b` | constant mean(s) for `const_mean` | `5` |
//! | `b0`, `b1` | intercept and slope for `linear` | `10`, `5` |
//! | `m` | number(s) of areas | `40` (`50` for `remark`) |
//! | `N`, `n` | population and sample size per area | `1000`, `4` |
//! | `sigma_v2` | area-effect variance | `1` |
//! | `gamma_shape` | shape of the error-variance gamma | `3` |
//! | `gamma_scale` / `gamma_rate` | second gamma parameter (one of) | `gamma_rate = 0.5` |
//! | `x_log_mu`, `x_log_sigma` | lognormal covariate, log-scale parameters | `1`, `0.5` |
//! | `x_mean`, `x_sd` | lognormal covariate by its own mean and sd (instead of the above) | |
//! | `K` | Monte Carlo replicates | `1000` |
//! | `seed` | master seed | built-in |
//! | `estimators` | comma list of `direct, obp-uc, obp-fh, obp-unit, eblup` | all |
//! | `deltas` | bias-sweep grid (must contain 0) | `-2,...,2` |
//! | `target_area` | 1-based area reported by the sweep | `1` |
//! | `sweep_mode` | `all` or `target` | `all` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sae_core::simulation::{
    GammaConvention, LognormalConvention, ScenarioConfig, SweepMode, TrueModel, DEFAULT_DELTAS,
};
use sae_core::Estimator;

use crate::error::CliError;

const KEYS: &[&str] = &[
    "model",
    "b",
    "b0",
    "b1",
    "m",
    "N",
    "n",
    "sigma_v2",
    "gamma_shape",
    "gamma_scale",
    "gamma_rate",
    "x_log_mu",
    "x_log_sigma",
    "x_mean",
    "x_sd",
    "K",
    "seed",
    "estimators",
    "deltas",
    "target_area",
    "sweep_mode",
];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    /// `b` for constant-mean models, `b0;b1` for the linear model.
    pub b_label: String,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenarios: Vec<Scenario>,
    pub deltas: Vec<f64>,
    /// Zero-based.
    pub target_area: usize,
    pub sweep_mode: SweepMode,
}

struct Entry {
    line: usize,
    value: String,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    let err = |line: usize, msg: String| CliError::Config {
        origin: origin.to_string(),
        line,
        msg,
    };
    let mut entries: BTreeMap<&str, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| err(line, format!("unknown key '{key}'")))?;
        if let Some(prev) = entries.get(known) {
            return Err(err(line, format!("key '{key}' already set on line {}", prev.line)));
        }
        entries.insert(
            known,
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }

    let line_of = |k: &str| entries.get(k).map_or(0, |e| e.line);
    let get = |k: &str| entries.get(k).map(|e| e.value.as_str());
    let num = |k: &str, default: f64| -> Result<f64, CliError> {
        match get(k) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(line_of(k), format!("'{k}' must be a finite number, got '{v}'"))),
        }
    };
    let int = |k: &str, default: u64| -> Result<u64, CliError> {
        match get(k) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| err(line_of(k), format!("'{k}' must be a nonnegative integer, got '{v}'"))),
        }
    };
    let list = |k: &str| -> Option<Vec<&str>> {
        get(k).map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
    };
    let num_list = |k: &str, default: &[f64]| -> Result<Vec<f64>, CliError> {
        match list(k) {
            None => Ok(default.to_vec()),
            Some(items) if items.is_empty() => Err(err(line_of(k), format!("'{k}' is empty"))),
            Some(items) => items
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| err(line_of(k), format!("'{k}': '{s}' is not a finite number")))
                })
                .collect(),
        }
    };

    let model_name = get("model").unwrap_or("const_mean");
    let model_kind = match model_name {
        "const_mean" | "linear" | "remark" => model_name,
        other => {
            return Err(err(
                line_of("model"),
                format!("model must be const_mean, linear or remark, got '{other}'"),
            ))
        }
    };
    let exclusive = |a: &str, b: &str| -> Result<(), CliError> {
        if entries.contains_key(a) && entries.contains_key(b) {
            let line = line_of(a).max(line_of(b));
            Err(err(line, format!("'{a}' and '{b}' are mutually exclusive")))
        } else {
            Ok(())
        }
    };
    for (k, allowed) in [("b", "const_mean"), ("b0", "linear"), ("b1", "linear")] {
        if entries.contains_key(k) && model_kind != allowed {
            return Err(err(line_of(k), format!("'{k}' only applies to model = {allowed}")));
        }
    }
    exclusive("gamma_scale", "gamma_rate")?;
    exclusive("x_log_mu", "x_mean")?;
    exclusive("x_log_sigma", "x_sd")?;
    let moments = entries.contains_key("x_mean") || entries.contains_key("x_sd");
    if moments && (entries.contains_key("x_log_mu") || entries.contains_key("x_log_sigma")) {
        return Err(err(
            line_of("x_mean").max(line_of("x_sd")),
            "mix of log-scale and moment covariate parameters".into(),
        ));
    }

    let gamma_scale = if entries.contains_key("gamma_scale") {
        GammaConvention::Scale.scale(num("gamma_scale", 2.0)?)
    } else {
        GammaConvention::Rate.scale(num("gamma_rate", 0.5)?)
    };
    let (x_log_mu, x_log_sigma) = if moments {
        LognormalConvention::Moments.log_params(num("x_mean", 1.0)?, num("x_sd", 0.5)?)
    } else {
        LognormalConvention::LogScale.log_params(num("x_log_mu", 1.0)?, num("x_log_sigma", 0.5)?)
    };

    let estimators = match list("estimators") {
        None if model_kind == "remark" => vec![Estimator::ObpUnit],
        None => Estimator::ALL.to_vec(),
        Some(items) => {
            let mut out = Vec::new();
            for s in items {
                let e: Estimator = s
                    .parse()
                    .map_err(|_| err(line_of("estimators"), format!("unknown estimator '{s}'")))?;
                if out.contains(&e) {
                    return Err(err(line_of("estimators"), format!("estimator '{s}' listed twice")));
                }
                out.push(e);
            }
            if out.is_empty() {
                return Err(err(line_of("estimators"), "no estimators listed".into()));
            }
            out
        }
    };

    let default_m = if model_kind == "remark" { 50.0 } else { 40.0 };
    let ms = num_list("m", &[default_m])?;
    let mut areas = Vec::with_capacity(ms.len());
    for m in ms {
        if m < 1.0 || m.fract() != 0.0 {
            return Err(err(line_of("m"), format!("'m' must be a positive integer, got {m}")));
        }
        areas.push(m as usize);
    }

    let models: Vec<(TrueModel, String)> = match model_kind {
        "const_mean" => num_list("b", &[5.0])?
            .into_iter()
            .map(|b| (TrueModel::ConstMean { b }, format!("{b}")))
            .collect(),
        "linear" => {
            let (b0, b1) = (num("b0", 10.0)?, num("b1", 5.0)?);
            vec![(TrueModel::Linear { b0, b1 }, format!("{b0};{b1}"))]
        }
        _ => vec![(TrueModel::Remark, format!("{}", TrueModel::REMARK_MEAN))],
    };

    let template = ScenarioConfig {
        model: TrueModel::Remark,
        areas: 0,
        pop_size: int("N", 1000)? as usize,
        sample_size: int("n", 4)? as usize,
        sigma_v2: num("sigma_v2", 1.0)?,
        gamma_shape: num("gamma_shape", 3.0)?,
        gamma_scale,
        x_log_mu,
        x_log_sigma,
        replicates: int("K", 1000)? as usize,
        seed: int("seed", ScenarioConfig::DEFAULT_SEED)?,
        estimators,
    };

    let mut scenarios = Vec::new();
    for (model, b_label) in &models {
        for &m in &areas {
            let config = ScenarioConfig {
                model: *model,
                areas: m,
                ..template.clone()
            };
            config
                .validate()
                .map_err(|e| err(0, format!("scenario m={m}, b={b_label}: {e}")))?;
            scenarios.push(Scenario {
                id: format!("m{m}_b{}", b_label.replace(';', "_")),
                b_label: b_label.clone(),
                config,
            });
        }
    }

    let deltas = num_list("deltas", &DEFAULT_DELTAS)?;
    let target = int("target_area", 1)?;
    if target == 0 {
        return Err(err(line_of("target_area"), "'target_area' is 1-based".into()));
    }
    let sweep_mode = match get("sweep_mode").unwrap_or("all") {
        "all" => SweepMode::AllAreas,
        "target" => SweepMode::TargetOnly,
        other => {
            return Err(err(
                line_of("sweep_mode"),
                format!("sweep_mode must be 'all' or 'target', got '{other}'"),
            ))
        }
    };

    Ok(RunConfig {
        scenarios,
        deltas,
        target_area: (target - 1) as usize,
        sweep_mode,
    })
}

impl RunConfig {
    pub fn override_seed(&mut self, seed: u64) {
        for s in &mut self.scenarios {
            s.config.seed = seed;
        }
    }

    pub fn override_replicates(&mut self, k: usize) {
        for s in &mut self.scenarios {
            s.config.replicates = k;
        }
    }

    /// Canonical configuration text that reproduces this run exactly.
    pub fn resolved_text(&self) -> String {
        let first = &self.scenarios[0].config;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match first.model {
            TrueModel::ConstMean { .. } => {
                line("model", "const_mean".into());
                let mut bs: Vec<String> = Vec::new();
                for s in &self.scenarios {
                    if let TrueModel::ConstMean { b } = s.config.model {
                        let b = format!("{b}");
                        if !bs.contains(&b) {
                            bs.push(b);
                        }
                    }
                }
                line("b", bs.join(", "));
            }
            TrueModel::Linear { b0, b1 } => {
                line("model", "linear".into());
                line("b0", format!("{b0}"));
                line("b1", format!("{b1}"));
            }
            TrueModel::Remark => line("model", "remark".into()),
        }
        let mut ms: Vec<String> = Vec::new();
        for s in &self.scenarios {
            let m = s.config.areas.to_string();
            if !ms.contains(&m) {
                ms.push(m);
            }
        }
        line("m", ms.join(", "));
        line("N", first.pop_size.to_string());
        line("n", first.sample_size.to_string());
        line("sigma_v2", format!("{}", first.sigma_v2));
        line("gamma_shape", format!("{}", first.gamma_shape));
        line("gamma_scale", format!("{}", first.gamma_scale));
        line("x_log_mu", format!("{}", first.x_log_mu));
        line("x_log_sigma", format!("{}", first.x_log_sigma));
        line("K", first.replicates.to_string());
        line("seed", first.seed.to_string());
        line(
            "estimators",
            first
                .estimators
                .iter()
                .map(|e| e.tag().to_ascii_lowercase())
                .collect::<Vec<_>>()
                .join(", "),
        );
        line(
            "deltas",
            self.deltas.iter().map(|d| format!("{d}")).collect::<Vec<_>>().join(", "),
        );
        line("target_area", (self.target_area + 1).to_string());
        line(
            "sweep_mode",
            match self.sweep_mode {
                SweepMode::AllAreas => "all".into(),
                SweepMode::TargetOnly => "target".into(),
            },
        );
        out
    }
}
