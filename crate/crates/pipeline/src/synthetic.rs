//! Seeded synthetic ordinal datasets.
//!
//! Each latent factor is observed through `views` noisy numeric features whose
//! signs alternate, so in-distribution the views carry the same information
//! and a shift that moves all features the same way puts them in conflict. The
//! latent score mixes the factors plus an optional categorical effect and
//! Gaussian noise; classes are its equal-frequency quantile bins, so every
//! class occurs and neighbouring classes overlap.

use ordunc_core::ClassScale;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Column, ColumnData, Dataset};
use crate::error::{PipelineError, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    pub k: usize,
    pub factors: usize,
    /// Numeric features per factor.
    pub views: usize,
    /// Standard deviation of each view around its factor.
    pub view_noise: f64,
    /// Levels of the single categorical column; `0` omits it.
    pub categorical_levels: usize,
    /// Standard deviation of the latent label noise.
    pub noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { n: 500, k: 5, factors: 2, views: 2, view_noise: 0.3, categorical_levels: 3, noise: 0.5 }
    }
}

impl SyntheticConfig {
    pub fn numeric_features(&self) -> usize {
        self.factors * self.views
    }
}

pub fn synthetic_ordinal(name: &str, cfg: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    let finite_nonneg = |v: f64| v >= 0.0 && v.is_finite();
    if cfg.n < cfg.k
        || cfg.factors == 0
        || cfg.views == 0
        || !finite_nonneg(cfg.noise)
        || !finite_nonneg(cfg.view_noise)
    {
        return Err(PipelineError::Config(format!("invalid synthetic dataset settings {cfg:?}")));
    }
    let scale = ClassScale::new(cfg.k)?;
    let mut rng = rng_for(seed, &format!("synthetic/{name}"));
    let weights: Vec<f64> = (0..cfg.factors).map(|f| 1.0 / (1.0 + 0.5 * f as f64)).collect();
    let effects: Vec<f64> =
        (0..cfg.categorical_levels).map(|l| 0.5 * l as f64 - 0.25 * (cfg.categorical_levels - 1) as f64).collect();

    let mut numeric = vec![Vec::with_capacity(cfg.n); cfg.numeric_features()];
    let mut categorical = Vec::with_capacity(cfg.n);
    let mut latent = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let mut z = 0.0;
        for (f, w) in weights.iter().enumerate() {
            let u: f64 = rng.sample(StandardNormal);
            z += w * u;
            for v in 0..cfg.views {
                let sign = if v % 2 == 0 { 1.0 } else { -1.0 };
                let eps: f64 = rng.sample(StandardNormal);
                numeric[f * cfg.views + v].push(sign * u + cfg.view_noise * eps);
            }
        }
        if cfg.categorical_levels > 0 {
            let level = rng.random_range(0..cfg.categorical_levels);
            categorical.push(format!("c{level}"));
            z += effects[level];
        }
        let eps: f64 = rng.sample(StandardNormal);
        latent.push(z + cfg.noise * eps);
    }

    let mut order: Vec<usize> = (0..cfg.n).collect();
    order.sort_by(|&a, &b| latent[a].total_cmp(&latent[b]));
    let mut labels = vec![0; cfg.n];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = 1 + rank * cfg.k / cfg.n;
    }

    let mut columns: Vec<Column> = numeric
        .into_iter()
        .enumerate()
        .map(|(j, v)| Column { name: format!("x{}", j + 1), data: ColumnData::Numeric(v) })
        .collect();
    if cfg.categorical_levels > 0 {
        columns.push(Column { name: "group".into(), data: ColumnData::Categorical(categorical) });
    }
    Dataset::new(name, columns, labels, scale)
}
