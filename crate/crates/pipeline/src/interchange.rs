//! Member-probability interchange files.
//!
//! Both formats hold one row per (instance, member): CSV with the header
//! `instance_id,member_id,true_label,p_1,...,p_K`, or a JSON array of objects
//! with `instance_id`, `member_id`, `true_label` and `probs`. `K` and the
//! member count `M` are fixed per file.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use ordunc_core::eval::PredictionRecord;
use ordunc_core::{EnsemblePrediction, ProbabilityVector, UqError};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

/// Rows whose sum is off by more than this are rejected rather than rescaled.
pub const IMPORT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstancePrediction {
    pub instance_id: String,
    #[serde(flatten)]
    pub record: PredictionRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

struct Row {
    line: u64,
    instance_id: String,
    member_id: String,
    true_label: usize,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    instance_id: serde_json::Value,
    member_id: serde_json::Value,
    true_label: usize,
    probs: Vec<f64>,
}

#[derive(Serialize)]
struct JsonRowOut<'a> {
    instance_id: &'a str,
    member_id: usize,
    true_label: usize,
    probs: &'a [f64],
}

fn id_string(v: serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn csv_rows(path: &Path) -> Result<Vec<Row>> {
    let csv_err = |source| PipelineError::Csv { path: path.into(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let fixed = ["instance_id", "member_id", "true_label"];
    if headers.len() < 5 || headers.iter().take(3).ne(fixed) {
        return Err(PipelineError::schema(
            path,
            1,
            "header must be instance_id,member_id,true_label,p_1..p_K with K >= 2",
        ));
    }
    for (j, h) in headers.iter().skip(3).enumerate() {
        if h != format!("p_{}", j + 1) {
            return Err(PipelineError::schema(path, 1, format!("expected column p_{}, found `{h}`", j + 1)));
        }
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != headers.len() {
            return Err(PipelineError::schema(
                path,
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        let true_label = rec[2]
            .parse()
            .map_err(|_| PipelineError::schema(path, line, format!("true_label `{}` is not an integer", &rec[2])))?;
        let probs = rec
            .iter()
            .skip(3)
            .map(|c| c.parse::<f64>().map_err(|_| PipelineError::schema(path, line, format!("`{c}` is not a number"))))
            .collect::<Result<_>>()?;
        rows.push(Row { line, instance_id: rec[0].to_owned(), member_id: rec[1].to_owned(), true_label, probs });
    }
    Ok(rows)
}

fn json_rows(path: &Path) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let raw: Vec<JsonRow> =
        serde_json::from_str(&text).map_err(|source| PipelineError::Json { path: path.into(), source })?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i as u64 + 1;
            let bad_id = || PipelineError::schema(path, line, "ids must be strings or numbers");
            Ok(Row {
                line,
                instance_id: id_string(r.instance_id).ok_or_else(bad_id)?,
                member_id: id_string(r.member_id).ok_or_else(bad_id)?,
                true_label: r.true_label,
                probs: r.probs,
            })
        })
        .collect()
}

/// Exact rows pass untouched; rows within [`IMPORT_TOLERANCE`] are rescaled.
fn member_vector(path: &Path, row: &Row) -> Result<ProbabilityVector> {
    let fail = |e: UqError| PipelineError::schema(path, row.line, e.to_string());
    match ProbabilityVector::new(row.probs.clone()) {
        Ok(p) => Ok(p),
        Err(UqError::NotNormalized { .. }) => {
            ProbabilityVector::renormalized(row.probs.clone(), IMPORT_TOLERANCE).map_err(fail)
        }
        Err(e) => Err(fail(e)),
    }
}

fn assemble(path: &Path, rows: Vec<Row>) -> Result<Vec<InstancePrediction>> {
    let first = rows.first().ok_or_else(|| PipelineError::load(path, "no prediction rows"))?;
    let k = first.probs.len();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (usize, Vec<ProbabilityVector>, Vec<String>, u64)> = HashMap::new();
    for row in &rows {
        if row.probs.len() != k {
            return Err(PipelineError::schema(
                path,
                row.line,
                format!("{} probabilities, expected K = {k}", row.probs.len()),
            ));
        }
        let p = member_vector(path, row)?;
        let g = groups.entry(row.instance_id.clone()).or_insert_with(|| {
            order.push(row.instance_id.clone());
            (row.true_label, Vec::new(), Vec::new(), row.line)
        });
        if g.0 != row.true_label {
            return Err(PipelineError::schema(
                path,
                row.line,
                format!("instance `{}` has conflicting true labels {} and {}", row.instance_id, g.0, row.true_label),
            ));
        }
        if g.2.contains(&row.member_id) {
            return Err(PipelineError::schema(
                path,
                row.line,
                format!("member `{}` repeated for instance `{}`", row.member_id, row.instance_id),
            ));
        }
        g.1.push(p);
        g.2.push(row.member_id.clone());
    }
    let m = groups[&order[0]].1.len();
    order
        .into_iter()
        .map(|id| {
            let (label, members, _, line) = groups.remove(&id).expect("grouped above");
            if members.len() != m {
                return Err(PipelineError::schema(
                    path,
                    line,
                    format!("instance `{id}` has {} members, expected M = {m}", members.len()),
                ));
            }
            let record = EnsemblePrediction::new(members)
                .and_then(|e| PredictionRecord::new(e, label))
                .map_err(|e| PipelineError::schema(path, line, e.to_string()))?;
            Ok(InstancePrediction { instance_id: id, record })
        })
        .collect()
}

/// Reads predictions from `path` in the format given by its extension.
pub fn import_predictions(path: &Path) -> Result<Vec<InstancePrediction>> {
    let rows = match Format::from_path(path) {
        Format::Csv => csv_rows(path)?,
        Format::Json => json_rows(path)?,
    };
    assemble(path, rows)
}

fn csv_bytes(preds: &[InstancePrediction]) -> Result<Vec<u8>> {
    let k = preds.first().map_or(0, |p| p.record.k());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["instance_id".to_string(), "member_id".into(), "true_label".into()];
    header.extend((1..=k).map(|j| format!("p_{j}")));
    let to_err = |e: csv::Error| PipelineError::Csv { path: "<memory>".into(), source: e };
    w.write_record(&header).map_err(to_err)?;
    for p in preds {
        for (m, member) in p.record.members.members().iter().enumerate() {
            let mut row = vec![p.instance_id.clone(), m.to_string(), p.record.true_label.to_string()];
            row.extend(member.as_slice().iter().map(f64::to_string));
            w.write_record(&row).map_err(to_err)?;
        }
    }
    w.into_inner().map_err(|e| PipelineError::io("<memory>", e.into_error()))
}

fn json_bytes(preds: &[InstancePrediction]) -> Result<Vec<u8>> {
    let rows: Vec<JsonRowOut> = preds
        .iter()
        .flat_map(|p| {
            p.record.members.members().iter().enumerate().map(move |(m, member)| JsonRowOut {
                instance_id: &p.instance_id,
                member_id: m,
                true_label: p.record.true_label,
                probs: member.as_slice(),
            })
        })
        .collect();
    let mut out =
        serde_json::to_vec_pretty(&rows).map_err(|source| PipelineError::Json { path: "<memory>".into(), source })?;
    out.push(b'\n');
    Ok(out)
}

/// Writes `preds` to `path` in the format given by its extension.
pub fn export_predictions(path: &Path, preds: &[InstancePrediction]) -> Result<()> {
    let bytes = match Format::from_path(path) {
        Format::Csv => csv_bytes(preds)?,
        Format::Json => json_bytes(preds)?,
    };
    let mut f = fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    f.write_all(&bytes).map_err(|e| PipelineError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(suffix: &str, contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_csv() {
        let f = file(".csv", "instance_id,member_id,true_label,p_1,p_2,p_3\na,0,2,0.2,0.5,0.3\na,1,2,0.1,0.8,0.1\nb,0,1,1,0,0\nb,1,1,0.5,0.5,0\n");
        let preds = import_predictions(f.path()).unwrap();
        assert_eq!(preds.len(), 2);
        assert_eq!(preds[0].instance_id, "a");
        assert_eq!(preds[0].record.members.m(), 2);
        assert_eq!(preds[1].record.true_label, 1);
    }

    #[test]
    fn sum_off_by_a_tenth_is_rejected_with_line() {
        let f = file(".csv", "instance_id,member_id,true_label,p_1,p_2\na,0,1,0.5,0.5\na,1,1,0.5,0.4\n");
        match import_predictions(f.path()) {
            Err(PipelineError::Schema { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn near_normalized_rows_are_rescaled() {
        let f = file(".csv", "instance_id,member_id,true_label,p_1,p_2\na,0,1,0.5000004,0.5\n");
        let p = &import_predictions(f.path()).unwrap()[0];
        let s: f64 = p.record.members.members()[0].as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn varying_member_count_is_rejected() {
        let f = file(".csv", "instance_id,member_id,true_label,p_1,p_2\na,0,1,0.5,0.5\na,1,1,0.5,0.5\nb,0,2,0.5,0.5\n");
        let err = import_predictions(f.path()).unwrap_err().to_string();
        assert!(err.contains("expected M = 2"), "{err}");
    }

    #[test]
    fn conflicting_labels_and_k() {
        let f = file(".csv", "instance_id,member_id,true_label,p_1,p_2\na,0,1,0.5,0.5\na,1,2,0.5,0.5\n");
        assert!(import_predictions(f.path()).is_err());
        let f = file(
            ".json",
            r#"[{"instance_id":1,"member_id":0,"true_label":1,"probs":[0.5,0.5]},
                                  {"instance_id":2,"member_id":0,"true_label":1,"probs":[0.2,0.3,0.5]}]"#,
        );
        assert!(matches!(import_predictions(f.path()), Err(PipelineError::Schema { line: 2, .. })));
    }

    #[test]
    fn reads_json_numeric_ids() {
        let f = file(".json", r#"[{"instance_id":7,"member_id":0,"true_label":3,"probs":[0.2,0.3,0.5]}]"#);
        let preds = import_predictions(f.path()).unwrap();
        assert_eq!(preds[0].instance_id, "7");
        assert_eq!(preds[0].record.true_label, 3);
    }
}
