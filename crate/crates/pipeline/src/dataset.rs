//! Tabular ordinal datasets loaded from CSV with a JSON schema.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use ordunc_core::ClassScale;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// Describes how to read a dataset CSV.
///
/// Labels are mapped to `1..=K` by `label_order` when given; otherwise the
/// label cells must already be integers `1..=K`, with `K` taken from
/// `num_classes` or from the largest label seen.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    pub label_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_classes: Option<usize>,
    /// Explicit feature kinds; unlisted columns are numeric.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub columns: BTreeMap<String, ColumnKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ignore: Vec<String>,
}

impl DatasetSchema {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| PipelineError::Json { path: path.into(), source })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Feature columns plus labels in `1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<Column>,
    pub labels: Vec<usize>,
    pub scale: ClassScale,
}

impl Dataset {
    /// Validates shapes and that every label lies in `1..=K` with both ends present.
    pub fn new(name: impl Into<String>, columns: Vec<Column>, labels: Vec<usize>, scale: ClassScale) -> Result<Self> {
        let name = name.into();
        let path = PathBuf::from(&name);
        if labels.is_empty() {
            return Err(PipelineError::load(path, "dataset has no rows"));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != labels.len()) {
            return Err(PipelineError::load(
                path,
                format!("column `{}` has {} values for {} labels", c.name, c.len(), labels.len()),
            ));
        }
        check_label_cover(&path, &labels, scale)?;
        Ok(Self { name, columns, labels, scale })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.scale.k()
    }

    pub fn numeric_columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns.iter().filter_map(|c| match &c.data {
            ColumnData::Numeric(v) => Some((c.name.as_str(), v.as_slice())),
            ColumnData::Categorical(_) => None,
        })
    }

    pub fn n_numeric(&self) -> usize {
        self.numeric_columns().count()
    }

    /// Rows `idx` as a new dataset under the same scale.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                data: match &c.data {
                    ColumnData::Numeric(v) => ColumnData::Numeric(idx.iter().map(|&i| v[i]).collect()),
                    ColumnData::Categorical(v) => ColumnData::Categorical(idx.iter().map(|&i| v[i].clone()).collect()),
                },
            })
            .collect();
        Dataset {
            name: self.name.clone(),
            columns,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            scale: self.scale,
        }
    }
}

fn check_label_cover(path: &Path, labels: &[usize], scale: ClassScale) -> Result<()> {
    let k = scale.k();
    if let Some(&y) = labels.iter().find(|&&y| y < 1 || y > k) {
        return Err(PipelineError::load(path, format!("label {y} outside 1..={k}")));
    }
    for end in [1, k] {
        if !labels.contains(&end) {
            return Err(PipelineError::load(path, format!("label {end} never occurs; labels must span 1..={k}")));
        }
    }
    Ok(())
}

/// Loads `path` according to `schema`; the dataset is named after the file stem.
pub fn load_dataset(path: &Path, schema: &DatasetSchema) -> Result<Dataset> {
    let csv_err = |source| PipelineError::Csv { path: path.into(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let headers: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();

    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(PipelineError::schema(path, 1, format!("duplicate column `{h}`")));
        }
    }
    let label_idx = headers
        .iter()
        .position(|h| *h == schema.label_column)
        .ok_or_else(|| PipelineError::schema(path, 1, format!("label column `{}` missing", schema.label_column)))?;
    for name in schema.columns.keys().chain(&schema.ignore) {
        if !seen.contains(name.as_str()) {
            return Err(PipelineError::schema(path, 1, format!("schema names unknown column `{name}`")));
        }
    }

    let label_map: Option<HashMap<&str, usize>> =
        schema.label_order.as_ref().map(|order| order.iter().enumerate().map(|(i, l)| (l.as_str(), i + 1)).collect());

    let features: Vec<(usize, ColumnKind)> = headers
        .iter()
        .enumerate()
        .filter(|(i, h)| *i != label_idx && !schema.ignore.contains(h))
        .map(|(i, h)| (i, schema.columns.get(h).copied().unwrap_or(ColumnKind::Numeric)))
        .collect();
    let mut data: Vec<ColumnData> = features
        .iter()
        .map(|(_, kind)| match kind {
            ColumnKind::Numeric => ColumnData::Numeric(Vec::new()),
            ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
        })
        .collect();
    let mut labels = Vec::new();

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
        let cell = &rec[label_idx];
        let y =
            match &label_map {
                Some(map) => *map
                    .get(cell)
                    .ok_or_else(|| PipelineError::schema(path, line, format!("label `{cell}` not in label_order")))?,
                None => cell.parse::<usize>().ok().filter(|&y| y >= 1).ok_or_else(|| {
                    PipelineError::schema(path, line, format!("label `{cell}` is not an integer >= 1"))
                })?,
            };
        labels.push(y);
        for ((col, _), column) in features.iter().zip(&mut data) {
            let cell = &rec[*col];
            match column {
                ColumnData::Numeric(v) => {
                    let x = cell.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                        PipelineError::schema(
                            path,
                            line,
                            format!("column `{}`: `{cell}` is not a number", headers[*col]),
                        )
                    })?;
                    v.push(x);
                }
                ColumnData::Categorical(v) => v.push(cell.to_owned()),
            }
        }
    }

    if labels.is_empty() {
        return Err(PipelineError::load(path, "no data rows"));
    }
    let k = match (&schema.label_order, schema.num_classes) {
        (Some(order), _) => order.len(),
        (None, Some(k)) => k,
        (None, None) => labels.iter().copied().max().unwrap_or(0),
    };
    let scale = ClassScale::new(k).map_err(|e| PipelineError::load(path, e.to_string()))?;
    check_label_cover(path, &labels, scale)?;

    let columns =
        features.iter().zip(data).map(|((col, _), data)| Column { name: headers[*col].clone(), data }).collect();
    let name = path.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
    Ok(Dataset { name, columns, labels, scale })
}
