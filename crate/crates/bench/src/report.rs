//! CSV and JSON output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::experiment::RunRecord;
use crate::model::Model;

pub const RECORDS_FILE: &str = "records.csv";
pub const TABLE_FILE: &str = "table.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const DIVERSITY_FILE: &str = "diversity.csv";
pub const MANIFEST_FILE: &str = "run.json";
pub const REFERENCE_FILE: &str = "reference.csv";

/// Writes `rows` with a header derived from the row type.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(BenchError::io(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(BenchError::io(path))?;
    Ok(())
}

/// Mean test accuracy per dataset (rows) and model (columns), over the
/// seeds that completed. Rows keep first-appearance order; columns follow
/// [`Model::ALL`].
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyTable {
    pub datasets: Vec<String>,
    pub models: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl AccuracyTable {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let mut datasets: Vec<String> = Vec::new();
        for r in records {
            if !datasets.contains(&r.dataset) {
                datasets.push(r.dataset.clone());
            }
        }
        let mut models: Vec<Model> = Vec::new();
        for r in records {
            if let Ok(m) = r.model.parse::<Model>() {
                if !models.contains(&m) {
                    models.push(m);
                }
            }
        }
        models.sort_by_key(|m| m.column());
        let cells = datasets
            .iter()
            .map(|d| {
                models
                    .iter()
                    .map(|m| {
                        let accs: Vec<f64> = records
                            .iter()
                            .filter(|r| &r.dataset == d && r.model == m.name())
                            .filter_map(|r| r.accuracy)
                            .collect();
                        (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
                    })
                    .collect()
            })
            .collect();
        Self {
            datasets,
            models: models.iter().map(|m| m.name().to_string()).collect(),
            cells,
        }
    }

    pub fn cell(&self, dataset: &str, model: &str) -> Option<f64> {
        let i = self.datasets.iter().position(|d| d == dataset)?;
        let j = self.models.iter().position(|m| m == model)?;
        self.cells[i][j]
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(BenchError::io(path))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let mut header = vec!["dataset".to_string()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header)?;
        for (d, row) in self.datasets.iter().zip(&self.cells) {
            let mut fields = vec![d.clone()];
            fields.extend(row.iter().map(|c| c.map(|v| format!("{v:.4}")).unwrap_or_default()));
            w.write_record(&fields)?;
        }
        w.flush().map_err(BenchError::io(path))?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct Environment {
    pub package: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
    pub available_parallelism: usize,
    pub unix_time: u64,
}

impl Environment {
    pub fn capture() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            available_parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub environment: Environment,
    pub outputs: Vec<&'a str>,
}

pub fn write_manifest(path: &Path, command: &str, config: &ExperimentConfig, outputs: Vec<&str>) -> Result<()> {
    let manifest = Manifest {
        command,
        config,
        environment: Environment::capture(),
        outputs,
    };
    let file = File::create(path).map_err(BenchError::io(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.write_all(b"\n").map_err(BenchError::io(path))?;
    w.flush().map_err(BenchError::io(path))
}
