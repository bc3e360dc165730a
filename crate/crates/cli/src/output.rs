//! Report files. Numbers go through [`fmt_sig`] so the bytes depend only on
//! the values.

use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;

use sae_core::simulation::{MCReport, ScenarioConfig, SweepMode, SweepPoint};

use crate::config::{RunConfig, Scenario};
use crate::error::CliError;
use crate::format::fmt_sig;

pub const OVERALL_CSV: &str = "overall_mspe.csv";
pub const AREA_CSV: &str = "area_mspe.csv";
pub const BOXPLOT_CSV: &str = "boxplot.csv";
pub const SWEEP_CSV: &str = "bias_sweep.csv";
pub const MANIFEST_JSON: &str = "run_manifest.json";
pub const RESOLVED_CFG: &str = "resolved.cfg";

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::io(path, source)
}

fn write_rows(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_overall(path: &Path, results: &[(&Scenario, MCReport)]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (scenario, report) in results {
        for e in &report.estimators {
            rows.push(vec![
                scenario.id.clone(),
                scenario.config.areas.to_string(),
                scenario.b_label.clone(),
                e.name.clone(),
                fmt_sig(e.overall_mspe),
                fmt_sig(e.mc_se),
                e.excluded_replicates.to_string(),
            ]);
        }
    }
    write_rows(
        path,
        &["scenario_id", "m", "b_or_b0b1", "estimator", "overall_mspe", "mc_se", "excluded_replicates"],
        rows,
    )
}

pub fn write_area(path: &Path, results: &[(&Scenario, MCReport)]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (scenario, report) in results {
        for e in &report.estimators {
            for (i, v) in e.area_mspe.iter().enumerate() {
                rows.push(vec![scenario.id.clone(), e.name.clone(), (i + 1).to_string(), fmt_sig(*v)]);
            }
        }
    }
    write_rows(path, &["scenario_id", "estimator", "area", "mspe"], rows)
}

pub fn write_boxplot(path: &Path, results: &[(&Scenario, MCReport)]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (scenario, report) in results {
        for e in &report.estimators {
            let b = &e.boxplot;
            let mut row = vec![scenario.id.clone(), e.name.clone()];
            row.extend([b.min, b.q1, b.median, b.q3, b.max, b.mean].map(fmt_sig));
            rows.push(row);
        }
    }
    write_rows(
        path,
        &["scenario_id", "estimator", "min", "q1", "median", "q3", "max", "mean"],
        rows,
    )
}

pub fn write_sweep(path: &Path, points: &[SweepPoint]) -> Result<(), CliError> {
    let rows = points
        .iter()
        .map(|p| vec![fmt_sig(p.delta), fmt_sig(p.delta.abs()), fmt_sig(p.mspe), fmt_sig(p.mc_se)])
        .collect();
    write_rows(path, &["delta", "abs_delta", "mspe_area1", "mc_se"], rows)
}

#[derive(Debug, Serialize)]
pub struct ScenarioEntry {
    pub id: String,
    pub b_or_b0b1: String,
    pub config: ScenarioConfig,
    pub wall_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub deltas: Vec<f64>,
    /// One-based, as in the configuration file.
    pub target_area: usize,
    pub mode: SweepMode,
}

/// Everything needed to rerun a command: the resolved configuration (also
/// written as `resolved.cfg`), the version that produced it and where the
/// outputs went.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config_source: String,
    pub resolved_config: String,
    pub seed: u64,
    pub scenarios: Vec<ScenarioEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepEntry>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, config_source: &Path, cfg: &RunConfig, started: SystemTime) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_source: config_source.display().to_string(),
            resolved_config: RESOLVED_CFG.to_string(),
            seed: cfg.scenarios[0].config.seed,
            scenarios: Vec::new(),
            sweep: None,
            started: timestamp(started),
            finished: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(mut self, out_dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
        let resolved = out_dir.join(RESOLVED_CFG);
        std::fs::write(&resolved, cfg.resolved_text()).map_err(|e| CliError::io(&resolved, e))?;
        self.outputs.push(resolved);
        let path = out_dir.join(MANIFEST_JSON);
        self.outputs.push(path.clone());
        self.finished = timestamp(SystemTime::now());
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))
    }
}

fn timestamp(t: SystemTime) -> String {
    humantime::format_rfc3339_seconds(t).to_string()
}
