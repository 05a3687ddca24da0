use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordunc_core::eval::{Accounting, ErrorMetric};
use ordunc_core::{LogBase, MeasureKind, UncertaintyKind};
use ordunc_pipeline::experiment::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "ordunc", version, about = "Uncertainty quantification for probabilistic ordinal classification")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output directory.
    #[arg(long, global = true, env = "ORDUNC_OUT", default_value = "ordunc-out")]
    pub out: PathBuf,
    /// Logarithm base for entropies: a number > 1, or `e`.
    #[arg(long, global = true, value_parser = parse_log_base)]
    pub log_base: Option<LogBase>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-instance TU/AU/EU for an ensemble prediction file.
    Measure(MeasureArgs),
    /// Cross-validated run: PRR table and rejection curves.
    Evaluate(EvaluateArgs),
    /// Cross-validated run with synthesized OOD rows: AUC table.
    Ood(OodArgs),
    /// Friedman, pairwise Wilcoxon and Holm over a summary table.
    Stats(StatsArgs),
    /// Total uncertainty over the 3-class simplex.
    Heatmap(HeatmapArgs),
}

/// Comma-separated measures, or `all`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureList(pub Vec<MeasureKind>);

/// Comma-separated error metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricList(pub Vec<ErrorMetric>);

fn parse_log_base(s: &str) -> Result<LogBase, String> {
    if s == "e" {
        return Ok(LogBase::NATS);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    LogBase::new(v).map_err(|e| e.to_string())
}

fn parse_list<T: std::str::FromStr + PartialEq>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v = tok.parse::<T>().map_err(|e| e.to_string())?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("empty selection".into());
    }
    Ok(out)
}

fn parse_measures(s: &str) -> Result<MeasureList, String> {
    if s.trim() == "all" {
        return Ok(MeasureList(MeasureKind::ALL.to_vec()));
    }
    parse_list(s).map(MeasureList)
}

fn parse_metrics(s: &str) -> Result<MetricList, String> {
    parse_list(s).map(MetricList)
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Prediction file (`.csv`, or `.json`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "all", value_parser = parse_measures)]
    pub measures: MeasureList,
}

/// Flags that override fields of an experiment config file.
#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long, value_parser = parse_measures)]
    pub measures: Option<MeasureList>,
    #[arg(long, value_parser = parse_metrics)]
    pub metrics: Option<MetricList>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub folds: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig, global: &Global) {
        if let Some(m) = &self.measures {
            cfg.measures = m.0.clone();
        }
        if let Some(m) = &self.metrics {
            cfg.metrics = m.0.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.folds {
            cfg.folds = f;
        }
        if let Some(b) = global.log_base {
            cfg.log_base = b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AccountingArg {
    OracleZero,
    RetainedOnly,
}

impl From<AccountingArg> for Accounting {
    fn from(a: AccountingArg) -> Self {
        match a {
            AccountingArg::OracleZero => Accounting::OracleZero,
            AccountingArg::RetainedOnly => Accounting::RetainedOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Emit only the oracle curve for each metric.
    #[arg(long)]
    pub oracle_only: bool,
    /// How rejected instances count in the plotted curves.
    #[arg(long, value_enum, default_value = "oracle-zero")]
    pub accounting: AccountingArg,
    /// Points per plotted curve on an even rejection grid; 0 keeps every instance step.
    #[arg(long, default_value_t = 101)]
    pub curve_points: usize,
}

#[derive(Debug, Args)]
pub struct OodArgs {
    /// Experiment config (JSON) for the in-distribution data.
    #[arg(long)]
    pub config: PathBuf,
    /// Donor CSV, or `id-train` for the fold's own training rows.
    #[arg(long)]
    pub donor: String,
    /// Schema restricting the donor to its numeric feature columns.
    #[arg(long)]
    pub donor_schema: Option<PathBuf>,
    /// Shift in units of the training standard deviation.
    #[arg(long, allow_negative_numbers = true)]
    pub shift_sigma: Option<f64>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pooling {
    Mcr,
    Mae,
    /// MCR and MAE cells stacked as separate rows.
    Both,
    /// OOD AUC cells.
    Auc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowUnit {
    /// One row per dataset, averaged over folds.
    Dataset,
    /// One row per (dataset, fold).
    Fold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Tu,
    Au,
    Eu,
    All,
}

impl KindArg {
    pub fn kinds(self) -> Vec<UncertaintyKind> {
        match self {
            KindArg::Tu => vec![UncertaintyKind::Tu],
            KindArg::Au => vec![UncertaintyKind::Au],
            KindArg::Eu => vec![UncertaintyKind::Eu],
            KindArg::All => UncertaintyKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// `summary.csv` written by `evaluate` or `ood`.
    #[arg(long)]
    pub summary: PathBuf,
    #[arg(long, value_enum, default_value = "mcr")]
    pub pooling: Pooling,
    #[arg(long, default_value_t = ordunc_core::stats::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "all")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "dataset")]
    pub rows: RowUnit,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long, default_value = "all", value_parser = parse_measures)]
    pub measures: MeasureList,
    /// Lattice spacing; must divide 1.
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
}
