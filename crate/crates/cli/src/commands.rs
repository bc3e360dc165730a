use std::path::Path;
use std::time::{Instant, SystemTime};

use sae_core::simulation::{bias_sweep, run_scenario, TrueModel};

use crate::config::{self, RunConfig};
use crate::error::CliError;
use crate::output::{self, RunManifest, ScenarioEntry, SweepEntry};

/// Overrides applied on top of a configuration file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
}

fn load(config_path: &Path, overrides: Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = config::load(config_path)?;
    if let Some(seed) = overrides.seed {
        cfg.override_seed(seed);
    }
    if let Some(k) = overrides.replicates {
        if k == 0 {
            return Err(CliError::Usage("--replicates must be at least 1".into()));
        }
        cfg.override_replicates(k);
    }
    Ok(cfg)
}

fn prepare_dir(out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))
}

pub fn simulate(config_path: &Path, out_dir: &Path, overrides: Overrides) -> Result<(), CliError> {
    let started = SystemTime::now();
    let cfg = load(config_path, overrides)?;
    prepare_dir(out_dir)?;
    let mut manifest = RunManifest::new("simulate", config_path, &cfg, started);

    let mut results = Vec::with_capacity(cfg.scenarios.len());
    for scenario in &cfg.scenarios {
        let clock = Instant::now();
        let report = run_scenario(&scenario.config).map_err(CliError::Simulation)?;
        let secs = clock.elapsed().as_secs_f64();
        eprintln!("{}: K={} in {secs:.1}s", scenario.id, scenario.config.replicates);
        manifest.scenarios.push(ScenarioEntry {
            id: scenario.id.clone(),
            b_or_b0b1: scenario.b_label.clone(),
            config: scenario.config.clone(),
            wall_seconds: secs,
        });
        results.push((scenario, report));
    }

    let overall = out_dir.join(output::OVERALL_CSV);
    output::write_overall(&overall, &results)?;
    let area = out_dir.join(output::AREA_CSV);
    output::write_area(&area, &results)?;
    let boxplot = out_dir.join(output::BOXPLOT_CSV);
    output::write_boxplot(&boxplot, &results)?;
    manifest.outputs.extend([overall, area, boxplot]);
    manifest.write(out_dir, &cfg)
}

pub fn sweep(config_path: &Path, out_dir: &Path, overrides: Overrides) -> Result<(), CliError> {
    let started = SystemTime::now();
    let cfg = load(config_path, overrides)?;
    let origin = config_path.display().to_string();
    let [scenario] = cfg.scenarios.as_slice() else {
        return Err(CliError::Config {
            origin,
            line: 0,
            msg: format!("bias sweep runs a single scenario, got {}", cfg.scenarios.len()),
        });
    };
    if scenario.config.model != TrueModel::Remark {
        return Err(CliError::Config {
            origin,
            line: 0,
            msg: "bias sweep requires model = remark".into(),
        });
    }
    if !cfg.deltas.contains(&0.0) {
        return Err(CliError::Config {
            origin,
            line: 0,
            msg: "deltas must include 0".into(),
        });
    }
    if cfg.target_area >= scenario.config.areas {
        return Err(CliError::Config {
            origin,
            line: 0,
            msg: format!(
                "target_area {} exceeds the {} areas",
                cfg.target_area + 1,
                scenario.config.areas
            ),
        });
    }
    prepare_dir(out_dir)?;
    let mut manifest = RunManifest::new("bias-sweep", config_path, &cfg, started);

    let clock = Instant::now();
    let points = bias_sweep(&scenario.config, &cfg.deltas, cfg.target_area, cfg.sweep_mode)
        .map_err(CliError::Simulation)?;
    let secs = clock.elapsed().as_secs_f64();
    eprintln!("{}: {} deltas, K={} in {secs:.1}s", scenario.id, cfg.deltas.len(), scenario.config.replicates);

    let path = out_dir.join(output::SWEEP_CSV);
    output::write_sweep(&path, &points)?;
    manifest.scenarios.push(ScenarioEntry {
        id: scenario.id.clone(),
        b_or_b0b1: scenario.b_label.clone(),
        config: scenario.config.clone(),
        wall_seconds: secs,
    });
    manifest.sweep = Some(SweepEntry {
        deltas: cfg.deltas.clone(),
        target_area: cfg.target_area + 1,
        mode: cfg.sweep_mode,
    });
    manifest.outputs.push(path);
    manifest.write(out_dir, &cfg)
}
