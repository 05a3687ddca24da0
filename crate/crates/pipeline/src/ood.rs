//! Out-of-distribution samples built from a donor dataset.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{PipelineError, Result};
use crate::preprocess::{Encoder, Preprocessor};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OodOptions {
    /// Added to every donor numeric value, in units of the ID-training std.
    pub shift_sigma: f64,
}

/// Numeric columns of an OOD donor, all of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct DonorTable {
    pub columns: Vec<Vec<f64>>,
    pub n: usize,
}

impl DonorTable {
    pub fn from_dataset(ds: &Dataset) -> Self {
        Self { columns: ds.numeric_columns().map(|(_, v)| v.to_vec()).collect(), n: ds.n() }
    }

    /// Every column of a headed CSV whose cells all parse as finite numbers;
    /// other columns are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| PipelineError::Csv { path: path.into(), source };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
        let width = reader.headers().map_err(csv_err)?.len();
        let mut columns: Vec<Option<Vec<f64>>> = vec![Some(Vec::new()); width];
        let mut n = 0;
        for rec in reader.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != width {
                let line = rec.position().map_or(0, |p| p.line());
                return Err(PipelineError::schema(path, line, format!("expected {width} fields, found {}", rec.len())));
            }
            for (col, cell) in columns.iter_mut().zip(rec.iter()) {
                let parsed = cell.parse::<f64>().ok().filter(|x| x.is_finite());
                match (col.as_mut(), parsed) {
                    (Some(v), Some(x)) => v.push(x),
                    _ => *col = None,
                }
            }
            n += 1;
        }
        if n == 0 {
            return Err(PipelineError::load(path, "donor has no rows"));
        }
        Ok(Self { columns: columns.into_iter().flatten().collect(), n })
    }
}

/// `n` model-space rows for the model fitted with `pre`.
///
/// Donor rows are drawn without replacement when the donor is large enough.
/// The i-th ID numeric column takes the donor's i-th numeric column, encoded
/// with the ID-training statistics; categorical columns draw uniformly from
/// the ID-training levels.
pub fn synthesize_ood(
    pre: &Preprocessor,
    donor: &DonorTable,
    n: usize,
    opts: OodOptions,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let needed = pre.encoders.iter().filter(|e| matches!(e, Encoder::Numeric { .. })).count();
    let donor_cols = &donor.columns;
    if donor_cols.len() < needed {
        return Err(PipelineError::DonorTooNarrow { required: needed, actual: donor_cols.len() });
    }
    let mut rng = rng_for(seed, "ood");
    let rows: Vec<usize> = if donor.n >= n {
        let mut r = sample(&mut rng, donor.n, n).into_vec();
        r.sort_unstable();
        r
    } else {
        (0..n).map(|_| rng.random_range(0..donor.n)).collect()
    };
    let mut out = Vec::with_capacity(n);
    for &r in &rows {
        let mut row = Vec::with_capacity(pre.n_features());
        let mut numeric = donor_cols.iter();
        for enc in &pre.encoders {
            match enc {
                Encoder::Numeric { std, .. } => {
                    let raw = numeric.next().expect("width checked")[r] + opts.shift_sigma * std;
                    row.push(pre.encode_numeric(enc, raw));
                }
                Encoder::OneHot { levels } => {
                    let pick = (!levels.is_empty()).then(|| rng.random_range(0..levels.len()));
                    row.extend((0..levels.len()).map(|l| f64::from(u8::from(Some(l) == pick))));
                }
            }
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, ColumnData};
    use ordunc_core::ClassScale;

    fn id() -> Dataset {
        Dataset::new(
            "id",
            vec![
                Column { name: "a".into(), data: ColumnData::Numeric(vec![0.0, 2.0, 4.0, 6.0]) },
                Column {
                    name: "c".into(),
                    data: ColumnData::Categorical(vec!["x".into(), "y".into(), "z".into(), "x".into()]),
                },
                Column { name: "flat".into(), data: ColumnData::Numeric(vec![1.0; 4]) },
            ],
            vec![1, 2, 1, 2],
            ClassScale::new(2).unwrap(),
        )
        .unwrap()
    }

    fn donor(cols: usize) -> DonorTable {
        DonorTable { columns: (0..cols).map(|j| (0..20).map(|i| (i * (j + 1)) as f64).collect()).collect(), n: 20 }
    }

    #[test]
    fn too_narrow() {
        let pre = Preprocessor::fit(&id(), &[0, 1, 2, 3], true);
        match synthesize_ood(&pre, &donor(1), 5, OodOptions::default(), 0) {
            Err(PipelineError::DonorTooNarrow { required: 2, actual: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn layout_and_scaling() {
        let pre = Preprocessor::fit(&id(), &[0, 1, 2, 3], true);
        let rows = synthesize_ood(&pre, &donor(3), 8, OodOptions::default(), 4).unwrap();
        assert_eq!(rows.len(), 8);
        let std = 5.0f64.sqrt();
        for row in &rows {
            assert_eq!(row.len(), 5);
            // first donor column holds 0..20, standardized by mean 3
            let raw = row[0] * std + 3.0;
            assert!((raw - raw.round()).abs() < 1e-9 && (0.0..20.0).contains(&raw));
            assert_eq!(row[1..4].iter().sum::<f64>(), 1.0);
            // zero-variance guard keeps the value finite
            assert!(row[4].is_finite());
        }
        assert_eq!(rows, synthesize_ood(&pre, &donor(3), 8, OodOptions::default(), 4).unwrap());
    }

    #[test]
    fn csv_donor_keeps_numeric_columns() {
        use std::io::Write;
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(b"a,name,b\n1,x,2.5\n3,y,-1\n").unwrap();
        let t = DonorTable::from_csv(f.path()).unwrap();
        assert_eq!(t.columns, vec![vec![1.0, 3.0], vec![2.5, -1.0]]);
        assert_eq!(t.n, 2);
        let id = DonorTable::from_dataset(&id());
        assert_eq!(id.columns.len(), 2);
    }

    #[test]
    fn shift_moves_by_sigma() {
        let pre = Preprocessor::fit(&id(), &[0, 1, 2, 3], true);
        let base = synthesize_ood(&pre, &donor(2), 6, OodOptions::default(), 1).unwrap();
        let shifted = synthesize_ood(&pre, &donor(2), 6, OodOptions { shift_sigma: 10.0 }, 1).unwrap();
        for (b, s) in base.iter().zip(&shifted) {
            assert!((s[0] - b[0] - 10.0).abs() < 1e-9);
        }
    }
}
