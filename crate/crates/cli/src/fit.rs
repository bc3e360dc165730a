//! `sae fit`: apply one estimator to user data.
//!
//! Unit file columns: `area_id, y, x1, ..., xp`. Area file columns:
//! `area_id, N, Xbar1, ..., Xbarp` and optionally `D` (needed by `obp-fh`).
//! Areas are reported in area-file order; every area needs sampled units.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sae_core::estimators::{
    direct_estimate, fit_eblup_reml, fit_obp, FitParams, ObjectiveTrace, ObpModel,
};
use sae_core::{AreaUnits, Estimator, SurveyData};

use crate::error::CliError;
use crate::format::fmt_sig;

pub struct FitInput {
    pub area_ids: Vec<String>,
    pub data: SurveyData,
}

struct Table {
    path: String,
    headers: Vec<String>,
    /// `(line, fields)`
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, CliError> {
        let display = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| schema(&display, e.position().map_or(0, |p| p.line() as usize), "", e.to_string()))?;
        let headers = reader
            .headers()
            .map_err(|e| schema(&display, 1, "", e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                schema(&display, e.position().map_or(0, |p| p.line() as usize), "", e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Table {
            path: display,
            headers,
            rows,
        })
    }

    fn err(&self, line: usize, column: &str, msg: impl Into<String>) -> CliError {
        schema(&self.path, line, column, msg.into())
    }

    fn expect_header(&self, idx: usize, name: &str) -> Result<(), CliError> {
        match self.headers.get(idx) {
            Some(h) if h == name => Ok(()),
            Some(h) => Err(self.err(1, name, format!("expected column '{name}' at position {}, found '{h}'", idx + 1))),
            None => Err(self.err(1, name, "missing column")),
        }
    }

    fn number(&self, line: usize, column: &str, raw: &str) -> Result<f64, CliError> {
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(line, column, format!("'{raw}' is not a finite number")))
    }
}

fn schema(path: &str, line: usize, column: &str, msg: String) -> CliError {
    CliError::Schema {
        path: path.to_string(),
        line,
        column: column.to_string(),
        msg,
    }
}

/// Counts the `prefix1..prefixp` columns starting at `start`.
fn covariate_columns(table: &Table, start: usize, prefix: &str) -> usize {
    let mut p = 0;
    while table.headers.get(start + p).is_some_and(|h| *h == format!("{prefix}{}", p + 1)) {
        p += 1;
    }
    p
}

pub fn read_input(units_path: &Path, areas_path: &Path) -> Result<FitInput, CliError> {
    let units = Table::read(units_path)?;
    units.expect_header(0, "area_id")?;
    units.expect_header(1, "y")?;
    let p = covariate_columns(&units, 2, "x");
    if p == 0 {
        return Err(units.err(1, "x1", "missing column"));
    }
    if let Some(extra) = units.headers.get(2 + p) {
        return Err(units.err(1, extra, format!("unexpected column after x{p}")));
    }

    let areas = Table::read(areas_path)?;
    areas.expect_header(0, "area_id")?;
    areas.expect_header(1, "N")?;
    for k in 1..=p {
        areas.expect_header(1 + k, &format!("Xbar{k}"))?;
    }
    let has_d = match areas.headers.get(2 + p).map(String::as_str) {
        None => false,
        Some("D") => true,
        Some(other) => {
            let expected = if other.starts_with("Xbar") {
                format!("area file has more covariates than the {p} in the unit file ('{other}')")
            } else {
                format!("expected 'D' or end of header, found '{other}'")
            };
            return Err(areas.err(1, other, expected));
        }
    };
    if areas.rows.is_empty() {
        return Err(areas.err(2, "area_id", "no areas"));
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut area_ids = Vec::new();
    let mut pops = Vec::new();
    let mut d = Vec::new();
    for (line, f) in &areas.rows {
        let id = f[0].as_str();
        if id.is_empty() {
            return Err(areas.err(*line, "area_id", "empty area id"));
        }
        if index.insert(id, area_ids.len()).is_some() {
            return Err(areas.err(*line, "area_id", format!("duplicate area '{id}'")));
        }
        let big_n: usize = f[1]
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| areas.err(*line, "N", format!("'{}' is not a positive integer", f[1])))?;
        let mut xbar = Vec::with_capacity(p);
        for k in 1..=p {
            xbar.push(areas.number(*line, &format!("Xbar{k}"), &f[1 + k])?);
        }
        if has_d {
            let v = areas.number(*line, "D", &f[2 + p])?;
            if v <= 0.0 {
                return Err(areas.err(*line, "D", format!("sampling variance must be positive, got {v}")));
            }
            d.push(v);
        }
        area_ids.push(id.to_string());
        pops.push((xbar, big_n, *line));
    }

    let mut samples: Vec<AreaUnits> = vec![AreaUnits { y: Vec::new(), x: Vec::new() }; area_ids.len()];
    for (line, f) in &units.rows {
        let i = *index
            .get(f[0].as_str())
            .ok_or_else(|| units.err(*line, "area_id", format!("area '{}' not in {}", f[0], areas.path)))?;
        samples[i].y.push(units.number(*line, "y", &f[1])?);
        for k in 1..=p {
            samples[i].x.push(units.number(*line, &format!("x{k}"), &f[1 + k])?);
        }
    }

    let mut assembled = Vec::with_capacity(area_ids.len());
    for ((xbar, big_n, line), u) in pops.into_iter().zip(samples) {
        if u.y.is_empty() {
            return Err(areas.err(line, "area_id", "area has no sampled units"));
        }
        if u.y.len() > big_n {
            return Err(areas.err(line, "N", format!("N={big_n} is below the {} sampled units", u.y.len())));
        }
        assembled.push((u, xbar, big_n));
    }
    let mut data = SurveyData::from_units(p, assembled).map_err(CliError::Fit)?;
    if has_d {
        data = data.with_known_d(&d).map_err(CliError::Fit)?;
    }
    Ok(FitInput { area_ids, data })
}

pub fn fit(estimator: Estimator, data: &SurveyData) -> Result<FitParams, CliError> {
    let params = match estimator {
        Estimator::Direct => Ok(FitParams {
            estimator,
            beta: Vec::new(),
            gamma: None,
            area_variance: None,
            sigma_v2: None,
            sigma_e2: None,
            beta_se: None,
            shrinkage: vec![1.0; data.area_count()],
            objective: 0.0,
            converged: true,
            evaluations: 0,
            trace: ObjectiveTrace::default(),
        }),
        Estimator::Eblup => fit_eblup_reml(data),
        Estimator::ObpUnit => fit_obp(data, ObpModel::Unit),
        Estimator::ObpUc => fit_obp(data, ObpModel::UnitContext),
        Estimator::ObpFh => fit_obp(data, ObpModel::FayHerriot),
    };
    params.map_err(CliError::Fit)
}

/// Path of the parameter file written next to the predictions.
pub fn params_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn run(units: &Path, areas: &Path, estimator: Estimator, out: &Path) -> Result<FitParams, CliError> {
    let input = read_input(units, areas)?;
    if estimator == Estimator::ObpFh && input.data.summaries().iter().any(|s| s.known_d.is_none()) {
        return Err(schema(&areas.display().to_string(), 1, "D", "obp-fh needs the D column".into()));
    }
    let params = fit(estimator, &input.data)?;
    let pred = match estimator {
        Estimator::Direct => direct_estimate(&input.data),
        _ => params.predict(&input.data).map_err(CliError::Fit)?,
    };

    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(out).map_err(|e| CliError::io(out, std::io::Error::other(e)))?;
    let io = |e: csv::Error| CliError::io(out, std::io::Error::other(e));
    w.write_record(["area_id", "estimate", "shrinkage"]).map_err(io)?;
    for ((id, v), b) in input.area_ids.iter().zip(&pred.values).zip(&params.shrinkage) {
        w.write_record([id.clone(), fmt_sig(*v), fmt_sig(*b)]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(out, e))?;

    let json_path = params_path(out);
    let json = serde_json::to_string_pretty(&params).expect("parameters serialize");
    std::fs::write(&json_path, json + "\n").map_err(|e| CliError::io(&json_path, e))?;
    Ok(params)
}
