//! Cross-validated experiment runs.
//!
//! Every (dataset, fold) pair is an independent unit with its own seed
//! derived from the master seed, so units run in parallel and the output does
//! not depend on scheduling.

use std::path::{Path, PathBuf};

use ordunc_core::eval::{
    auc_roc, point_metrics, prob_metrics, prr, ErrorMetric, OneOffMode, PointMetrics, PredictionRecord, ProbMetrics,
    ScoreSource,
};
use ordunc_core::{LogBase, MeasureKind, UncertaintyKind, UqError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{load_dataset, Dataset, DatasetSchema};
use crate::error::{PipelineError, Result};
use crate::folds::{kfold_split, stratified_kfold_split, Fold};
use crate::interchange::{import_predictions, InstancePrediction};
use crate::learner::{train_bootstrap_ensemble, LearnerConfig};
use crate::ood::{synthesize_ood, DonorTable, OodOptions};
use crate::preprocess::Preprocessor;
use crate::seed::derive_seed;
use crate::synthetic::{synthetic_ordinal, SyntheticConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Tabular data for the built-in learner.
    Csv {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        path: PathBuf,
        schema: PathBuf,
    },
    Synthetic {
        name: String,
        #[serde(default)]
        settings: SyntheticConfig,
    },
    /// Externally produced member probabilities, evaluated as a single fold.
    Predictions {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        path: PathBuf,
    },
}

impl DatasetSource {
    pub fn name(&self) -> String {
        let stem = |p: &Path| p.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
        match self {
            DatasetSource::Csv { name, path, .. } | DatasetSource::Predictions { name, path } => {
                name.clone().unwrap_or_else(|| stem(path))
            }
            DatasetSource::Synthetic { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DonorSource {
    /// The fold's own ID training rows.
    IdTrain,
    /// Numeric columns of a CSV; with a schema, its numeric features only.
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OodConfig {
    pub donor: DonorSource,
    #[serde(default)]
    pub shift_sigma: f64,
}

fn default_measures() -> Vec<MeasureKind> {
    MeasureKind::ALL.to_vec()
}

fn default_metrics() -> Vec<ErrorMetric> {
    vec![ErrorMetric::Mcr, ErrorMetric::Mae]
}

fn default_folds() -> usize {
    10
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    #[serde(default = "default_measures")]
    pub measures: Vec<MeasureKind>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<ErrorMetric>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub stratified: bool,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub log_base: LogBase,
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default)]
    pub one_off: OneOffMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ood: Option<OodConfig>,
}

impl ExperimentConfig {
    /// Config with defaults for everything but the datasets.
    pub fn new(datasets: Vec<DatasetSource>) -> Self {
        Self {
            datasets,
            measures: default_measures(),
            metrics: default_metrics(),
            seed: 0,
            folds: default_folds(),
            stratified: false,
            learner: LearnerConfig::default(),
            log_base: LogBase::default(),
            standardize: true,
            one_off: OneOffMode::default(),
            ood: None,
        }
    }

    /// Parses a config file; relative paths inside resolve against its directory.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|source| PipelineError::Json { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for d in &mut cfg.datasets {
            match d {
                DatasetSource::Csv { path, schema, .. } => {
                    fix(path);
                    fix(schema);
                }
                DatasetSource::Predictions { path, .. } => fix(path),
                DatasetSource::Synthetic { .. } => {}
            }
        }
        if let Some(OodConfig { donor: DonorSource::Csv { path, schema }, .. }) = &mut cfg.ood {
            fix(path);
            if let Some(schema) = schema {
                fix(schema);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.datasets.is_empty() {
            return bad("no datasets configured".into());
        }
        if self.measures.is_empty() {
            return bad("no uncertainty measures selected".into());
        }
        if self.metrics.is_empty() {
            return bad("no error metrics selected".into());
        }
        if self.folds < 2 {
            return bad(format!("need at least 2 folds, got {}", self.folds));
        }
        let mut names: Vec<String> = self.datasets.iter().map(DatasetSource::name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("dataset name `{}` used twice", w[0]));
        }
        if let Some(n) = names.iter().find(|n| n.is_empty() || n.contains(['/', '\\']) || n.starts_with('.')) {
            return bad(format!("dataset name `{n}` is not a valid directory name"));
        }
        if let Some(ood) = &self.ood {
            if !ood.shift_sigma.is_finite() {
                return bad("shift_sigma must be finite".into());
            }
        }
        self.learner.validate()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrrEntry {
    pub measure: MeasureKind,
    pub kind: UncertaintyKind,
    pub metric: ErrorMetric,
    /// `None` when the oracle area vanishes.
    pub prr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AucEntry {
    pub measure: MeasureKind,
    pub kind: UncertaintyKind,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRun {
    pub dataset: String,
    pub fold: usize,
    pub seed: u64,
    pub config_hash: String,
    pub n_train: usize,
    pub n_test: usize,
    pub k: usize,
    pub m: usize,
    pub point_metrics: PointMetrics,
    pub prob_metrics: ProbMetrics,
    pub prr: Vec<PrrEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ood_auc: Vec<AucEntry>,
    pub records: Vec<InstancePrediction>,
}

impl ExperimentRun {
    pub fn prr_of(&self, measure: MeasureKind, kind: UncertaintyKind, metric: ErrorMetric) -> Option<f64> {
        self.prr.iter().find(|e| e.measure == measure && e.kind == kind && e.metric == metric).and_then(|e| e.prr)
    }

    pub fn auc_of(&self, measure: MeasureKind, kind: UncertaintyKind) -> Option<f64> {
        self.ood_auc.iter().find(|e| e.measure == measure && e.kind == kind).map(|e| e.auc)
    }

    pub fn prediction_records(&self) -> Vec<PredictionRecord> {
        self.records.iter().map(|r| r.record.clone()).collect()
    }
}

enum Loaded {
    Table(Dataset),
    Predictions(String, Vec<InstancePrediction>),
}

fn load(source: &DatasetSource, cfg: &ExperimentConfig) -> Result<Loaded> {
    let name = source.name();
    Ok(match source {
        DatasetSource::Csv { path, schema, .. } => {
            let schema = DatasetSchema::from_json_file(schema)?;
            let mut ds = load_dataset(path, &schema)?;
            ds.name = name;
            Loaded::Table(ds)
        }
        DatasetSource::Synthetic { settings, .. } => Loaded::Table(synthetic_ordinal(&name, settings, cfg.seed)?),
        DatasetSource::Predictions { path, .. } => Loaded::Predictions(name, import_predictions(path)?),
    })
}

struct Unit<'a> {
    ds: &'a Dataset,
    fold_idx: usize,
    fold: Fold,
    donor: Option<&'a DonorTable>,
}

fn prr_entries(records: &[PredictionRecord], cfg: &ExperimentConfig) -> Result<Vec<PrrEntry>> {
    let mut out = Vec::new();
    for &metric in &cfg.metrics {
        for &measure in &cfg.measures {
            for kind in UncertaintyKind::ALL {
                let prr = match prr(records, metric, ScoreSource { measure, kind }) {
                    Ok(r) => Some(r.prr),
                    Err(UqError::UndefinedPrr { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                out.push(PrrEntry { measure, kind, metric, prr });
            }
        }
    }
    Ok(out)
}

fn evaluate(
    dataset: &str,
    fold: usize,
    seed: u64,
    n_train: usize,
    records: Vec<InstancePrediction>,
    ood_auc: Vec<AucEntry>,
    cfg: &ExperimentConfig,
) -> Result<ExperimentRun> {
    let plain: Vec<PredictionRecord> = records.iter().map(|r| r.record.clone()).collect();
    Ok(ExperimentRun {
        dataset: dataset.to_owned(),
        fold,
        seed,
        config_hash: cfg.hash(),
        n_train,
        n_test: records.len(),
        k: plain[0].k(),
        m: plain[0].members.m(),
        point_metrics: point_metrics(&plain, cfg.one_off)?,
        prob_metrics: prob_metrics(&plain)?,
        prr: prr_entries(&plain, cfg)?,
        ood_auc,
        records,
    })
}

fn run_unit(unit: &Unit, cfg: &ExperimentConfig, master: u64) -> Result<ExperimentRun> {
    let ds = unit.ds;
    let seed = derive_seed(master, &format!("{}/{}", ds.name, unit.fold_idx));
    let pre = Preprocessor::fit(ds, &unit.fold.train, cfg.standardize);
    let x_train = pre.transform(ds, &unit.fold.train);
    let y_train: Vec<usize> = unit.fold.train.iter().map(|&i| ds.labels[i]).collect();
    let model = train_bootstrap_ensemble(&x_train, &y_train, ds.scale, seed, &cfg.learner)?;

    let x_test = pre.transform(ds, &unit.fold.test);
    let records = unit
        .fold
        .test
        .iter()
        .zip(&x_test)
        .map(|(&i, x)| {
            let record =
                PredictionRecord::new(model.predict(x), ds.labels[i])?.with_measures(&cfg.measures, cfg.log_base);
            Ok(InstancePrediction { instance_id: i.to_string(), record })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ood_auc = Vec::new();
    if let Some(ood) = &cfg.ood {
        let train_rows;
        let donor = match unit.donor {
            Some(d) => d,
            None => {
                train_rows = DonorTable::from_dataset(&ds.subset(&unit.fold.train));
                &train_rows
            }
        };
        let opts = OodOptions { shift_sigma: ood.shift_sigma };
        let x_ood = synthesize_ood(&pre, donor, x_test.len(), opts, seed)?;
        let ood_triples: Vec<_> = x_ood
            .iter()
            .map(|x| {
                let ens = model.predict(x);
                cfg.measures
                    .iter()
                    .map(|&m| ordunc_core::compute_uncertainty(&ens, m, cfg.log_base))
                    .collect::<Vec<_>>()
            })
            .collect();
        let labels: Vec<bool> =
            std::iter::repeat_n(false, records.len()).chain(std::iter::repeat_n(true, x_ood.len())).collect();
        for (j, &measure) in cfg.measures.iter().enumerate() {
            for kind in UncertaintyKind::ALL {
                let scores: Vec<f64> = records
                    .iter()
                    .map(|r| r.record.uncertainty[&measure].get(kind))
                    .chain(ood_triples.iter().map(|t| t[j].get(kind)))
                    .collect();
                ood_auc.push(AucEntry { measure, kind, auc: auc_roc(&scores, &labels)? });
            }
        }
    }
    evaluate(&ds.name, unit.fold_idx, seed, unit.fold.train.len(), records, ood_auc, cfg)
}

fn in_fold(dataset: &str, fold: usize) -> impl FnOnce(PipelineError) -> PipelineError + '_ {
    move |e| PipelineError::InFold { dataset: dataset.to_owned(), fold, source: Box::new(e) }
}

/// Runs every configured dataset and fold; output order is dataset then fold.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRun>> {
    cfg.validate()?;
    let loaded = cfg.datasets.iter().map(|s| load(s, cfg)).collect::<Result<Vec<_>>>()?;
    let donor = match &cfg.ood {
        Some(OodConfig { donor: DonorSource::Csv { path, schema: Some(schema) }, .. }) => {
            Some(DonorTable::from_dataset(&load_dataset(path, &DatasetSchema::from_json_file(schema)?)?))
        }
        Some(OodConfig { donor: DonorSource::Csv { path, schema: None }, .. }) => Some(DonorTable::from_csv(path)?),
        _ => None,
    };

    let mut runs = Vec::new();
    for item in &loaded {
        match item {
            Loaded::Predictions(name, preds) => {
                if cfg.ood.is_some() {
                    log::warn!("dataset `{name}`: OOD evaluation needs the built-in learner; skipped");
                }
                let mut preds = preds.clone();
                for p in &mut preds {
                    p.record = p.record.clone().with_measures(&cfg.measures, cfg.log_base);
                }
                let seed = derive_seed(cfg.seed, &format!("{name}/0"));
                runs.push(evaluate(name, 0, seed, 0, preds, Vec::new(), cfg).map_err(in_fold(name, 0))?);
            }
            Loaded::Table(ds) => {
                let split_seed = derive_seed(cfg.seed, &ds.name);
                let folds = if cfg.stratified {
                    stratified_kfold_split(&ds.labels, cfg.folds, split_seed)?
                } else {
                    kfold_split(ds.n(), cfg.folds, split_seed)?
                };
                let units: Vec<Unit> = folds
                    .into_iter()
                    .enumerate()
                    .map(|(fold_idx, fold)| Unit { ds, fold_idx, fold, donor: donor.as_ref() })
                    .collect();
                let done = units
                    .par_iter()
                    .map(|u| run_unit(u, cfg, cfg.seed).map_err(in_fold(&ds.name, u.fold_idx)))
                    .collect::<Result<Vec<_>>>()?;
                runs.extend(done);
            }
        }
    }
    Ok(runs)
}
