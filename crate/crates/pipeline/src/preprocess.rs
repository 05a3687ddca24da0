//! Feature encoding fitted on training rows only.
//!
//! Numeric columns map to one feature each, optionally standardized; each
//! categorical column maps to one indicator per level seen in training.
//! Levels never seen in training encode as all zeros.

use serde::Serialize;

use crate::dataset::{ColumnData, Dataset};

/// Lower bound on the standard deviation used for scaling.
pub const STD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Encoder {
    Numeric { mean: f64, std: f64 },
    OneHot { levels: Vec<String> },
}

impl Encoder {
    pub fn width(&self) -> usize {
        match self {
            Encoder::Numeric { .. } => 1,
            Encoder::OneHot { levels } => levels.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preprocessor {
    pub encoders: Vec<Encoder>,
    pub standardize: bool,
}

impl Preprocessor {
    /// Fits one encoder per column of `ds` on rows `train`.
    pub fn fit(ds: &Dataset, train: &[usize], standardize: bool) -> Self {
        let encoders = ds
            .columns
            .iter()
            .map(|c| match &c.data {
                ColumnData::Numeric(v) => {
                    let n = train.len() as f64;
                    let mean = train.iter().map(|&i| v[i]).sum::<f64>() / n;
                    let var = train.iter().map(|&i| (v[i] - mean).powi(2)).sum::<f64>() / n;
                    Encoder::Numeric { mean, std: var.sqrt() }
                }
                ColumnData::Categorical(v) => {
                    let mut levels: Vec<String> = train.iter().map(|&i| v[i].clone()).collect();
                    levels.sort();
                    levels.dedup();
                    Encoder::OneHot { levels }
                }
            })
            .collect();
        Self { encoders, standardize }
    }

    pub fn n_features(&self) -> usize {
        self.encoders.iter().map(Encoder::width).sum()
    }

    /// Model-space value of raw numeric `x` under encoder `enc`.
    pub fn encode_numeric(&self, enc: &Encoder, x: f64) -> f64 {
        match enc {
            Encoder::Numeric { mean, std } if self.standardize => (x - mean) / std.max(STD_FLOOR),
            _ => x,
        }
    }

    /// Encodes rows `idx` of `ds`, which must share the fitted column layout.
    pub fn transform(&self, ds: &Dataset, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter()
            .map(|&i| {
                let mut row = Vec::with_capacity(self.n_features());
                for (enc, col) in self.encoders.iter().zip(&ds.columns) {
                    match (enc, &col.data) {
                        (Encoder::Numeric { .. }, ColumnData::Numeric(v)) => row.push(self.encode_numeric(enc, v[i])),
                        (Encoder::OneHot { levels }, ColumnData::Categorical(v)) => {
                            row.extend(levels.iter().map(|l| f64::from(u8::from(*l == v[i]))))
                        }
                        _ => panic!("column `{}` changed kind after fitting", col.name),
                    }
                }
                row
            })
            .collect()
    }
}
