//! Run persistence: `runs/<dataset>/<fold>.json` plus a flat `summary.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::experiment::ExperimentRun;

/// Metric column value for OOD AUC rows.
pub const OOD_AUC: &str = "ood_auc";

/// One cell of the summary table; `value` is empty for an undefined PRR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub fold: usize,
    pub measure: String,
    pub kind: String,
    pub metric: String,
    pub value: Option<f64>,
}

pub fn summary_rows(runs: &[ExperimentRun]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for run in runs {
        let row = |measure: String, kind: &str, metric: &str, value| SummaryRow {
            dataset: run.dataset.clone(),
            fold: run.fold,
            measure,
            kind: kind.to_owned(),
            metric: metric.to_owned(),
            value,
        };
        for e in &run.prr {
            rows.push(row(e.measure.to_string(), e.kind.as_str(), e.metric.as_str(), e.prr));
        }
        for e in &run.ood_auc {
            rows.push(row(e.measure.to_string(), e.kind.as_str(), OOD_AUC, Some(e.auc)));
        }
    }
    rows
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|source| PipelineError::Csv { path: "summary.csv".into(), source })?;
    }
    w.into_inner().map_err(|e| PipelineError::io("summary.csv", e.into_error()))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| PipelineError::Csv { path: path.into(), source })?;
    reader.deserialize().map(|r| r.map_err(|source| PipelineError::Csv { path: path.into(), source })).collect()
}

/// Serialized file contents keyed by their path relative to the output root.
pub fn run_files(runs: &[ExperimentRun]) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    let mut files = Vec::with_capacity(runs.len() + 1);
    for run in runs {
        let rel = Path::new("runs").join(&run.dataset).join(format!("{}.json", run.fold));
        let mut bytes =
            serde_json::to_vec_pretty(run).map_err(|source| PipelineError::Json { path: rel.clone(), source })?;
        bytes.push(b'\n');
        files.push((rel, bytes));
    }
    files.push(("summary.csv".into(), summary_csv(&summary_rows(runs))?));
    Ok(files)
}

/// Writes `files` under `root`, creating directories as needed.
pub fn write_files(root: &Path, files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    for (rel, bytes) in files {
        let path = root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
    }
    Ok(())
}

pub fn write_runs(root: &Path, runs: &[ExperimentRun]) -> Result<()> {
    write_files(root, &run_files(runs)?)
}
