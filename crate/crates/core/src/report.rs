//! Experiment reports: one JSON document plus three plot-ready CSV tables.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub experiment: Experiment,
    pub version: String,
    /// Full configuration after overrides; rerunning it reproduces the report.
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub data: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub series: String,
    pub index: usize,
    pub value: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub series: String,
    pub m_max: u32,
    pub window_lo: f64,
    pub window_hi: f64,
    pub count: usize,
    pub max_gap: f64,
    pub mean_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub table: String,
    pub label: String,
    /// Step `h`, scale `n` or quadrature step, depending on the table.
    pub parameter: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tables {
    pub spectrum: Vec<SpectrumRow>,
    pub gaps: Vec<GapRow>,
    pub residuals: Vec<ResidualRow>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub tables: Tables,
}

impl Outcome {
    pub fn new(
        experiment: Experiment,
        config: &ExperimentConfig,
        checks: Vec<Check>,
        data: serde_json::Value,
        tables: Tables,
    ) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        let mut config = config.clone();
        config.experiment = Some(experiment);
        Outcome {
            report: Report {
                experiment,
                version: env!("CARGO_PKG_VERSION").to_string(),
                config,
                checks,
                passed,
                data,
            },
            tables,
        }
    }

    pub fn passed(&self) -> bool {
        self.report.passed
    }

    /// Writes `report.json`, `spectrum.csv`, `gaps.csv` and `residuals.csv`.
    /// Tables without rows still get their header line.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&self.report)?,
        )?;
        write_csv(
            &dir.join("spectrum.csv"),
            &self.tables.spectrum,
            &["series", "index", "value", "residual"],
        )?;
        write_csv(
            &dir.join("gaps.csv"),
            &self.tables.gaps,
            &[
                "series",
                "m_max",
                "window_lo",
                "window_hi",
                "count",
                "max_gap",
                "mean_gap",
            ],
        )?;
        write_csv(
            &dir.join("residuals.csv"),
            &self.tables.residuals,
            &["table", "label", "parameter", "residual"],
        )?;
        Ok(())
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
