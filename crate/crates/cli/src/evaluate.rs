use anyhow::{Context, Result};
use ordunc_core::eval::{
    rejection_curve, Accounting, ErrorMetric, PredictionRecord, RejectionCurve, RejectionOrder, ScoreSource,
};
use ordunc_core::{MeasureKind, UncertaintyKind};
use ordunc_pipeline::experiment::{run_experiment, ExperimentConfig, ExperimentRun};
use ordunc_pipeline::persist::run_files;
use serde::Serialize;
use serde_json::json;

use crate::args::{EvaluateArgs, Global, Overrides};
use crate::output::Staged;
use crate::svg::{self, Series};
use crate::Outcome;

pub fn load_config(path: &std::path::Path, overrides: &Overrides, global: &Global) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_json_file(path)?;
    overrides.apply(&mut cfg, global);
    cfg.validate()?;
    Ok(cfg)
}

/// Mean and sample standard deviation of the defined values.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (n > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    (Some(mean), std)
}

/// Runs grouped by dataset, in run order.
pub fn by_dataset(runs: &[ExperimentRun]) -> Vec<(&str, Vec<&ExperimentRun>)> {
    let mut out: Vec<(&str, Vec<&ExperimentRun>)> = Vec::new();
    for r in runs {
        match out.last_mut() {
            Some((name, group)) if *name == r.dataset => group.push(r),
            _ => out.push((&r.dataset, vec![r])),
        }
    }
    out
}

#[derive(Serialize)]
struct PrrRow<'a> {
    dataset: &'a str,
    measure: MeasureKind,
    kind: UncertaintyKind,
    metric: ErrorMetric,
    mean: Option<f64>,
    std: Option<f64>,
    defined_folds: usize,
    folds: usize,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    dataset: &'a str,
    metric: ErrorMetric,
    trace: &'static str,
    measure: Option<MeasureKind>,
    kind: Option<UncertaintyKind>,
    fraction: f64,
    value: f64,
}

/// Linear interpolation of a curve on `i/N` onto `points` evenly spaced
/// fractions; `points == 0` keeps the original grid.
fn resample(curve: &RejectionCurve, points: usize) -> Vec<(f64, f64)> {
    if points < 2 {
        return curve.fractions.iter().copied().zip(curve.values.iter().copied()).collect();
    }
    let n = curve.values.len() - 1;
    (0..points)
        .map(|j| {
            let r = j as f64 / (points - 1) as f64;
            let t = r * n as f64;
            let i = (t.floor() as usize).min(n - 1);
            let f = t - i as f64;
            (r, curve.values[i] + f * (curve.values[i + 1] - curve.values[i]))
        })
        .collect()
}

fn trace_name(o: RejectionOrder) -> &'static str {
    match o {
        RejectionOrder::Uncertainty => "uncertainty",
        RejectionOrder::Oracle => "oracle",
        RejectionOrder::RandomAnalytic => "random",
    }
}

struct Curves<'a> {
    rows: Vec<CurveRow<'a>>,
    count: usize,
}

fn dataset_curves<'a>(
    dataset: &'a str,
    records: &[PredictionRecord],
    cfg: &ExperimentConfig,
    args: &EvaluateArgs,
    staged: &mut Staged,
    out: &mut Curves<'a>,
) -> Result<()> {
    let accounting: Accounting = args.accounting.into();
    let any = ScoreSource { measure: cfg.measures[0], kind: UncertaintyKind::Tu };
    for &metric in &cfg.metrics {
        let emit =
            |order: RejectionOrder, source: Option<ScoreSource>, out: &mut Curves<'a>| -> Result<Vec<(f64, f64)>> {
                let curve = rejection_curve(records, metric, order, source.unwrap_or(any), accounting)?;
                let pts = resample(&curve, args.curve_points);
                out.rows.extend(pts.iter().map(|&(fraction, value)| CurveRow {
                    dataset,
                    metric,
                    trace: trace_name(order),
                    measure: source.map(|s| s.measure),
                    kind: source.map(|s| s.kind),
                    fraction,
                    value,
                }));
                out.count += 1;
                Ok(pts)
            };
        let label = metric.as_str().to_uppercase();
        let oracle = emit(RejectionOrder::Oracle, None, out)?;
        let oracle_series = |points| Series { label: "oracle".into(), points, dashed: true, color: Some("#000000") };
        if args.oracle_only {
            let chart = svg::line_chart(
                &format!("{dataset}: oracle {label}"),
                "rejection fraction",
                &label,
                &[oracle_series(oracle)],
            );
            staged.add(format!("curves/{dataset}_{metric}.svg"), chart.into_bytes());
            continue;
        }
        let random = emit(RejectionOrder::RandomAnalytic, None, out)?;
        for kind in UncertaintyKind::ALL {
            let mut series = Vec::new();
            for &measure in &cfg.measures {
                let points = emit(RejectionOrder::Uncertainty, Some(ScoreSource { measure, kind }), out)?;
                series.push(Series { label: measure.to_string(), points, dashed: false, color: None });
            }
            series.push(oracle_series(oracle.clone()));
            series.push(Series {
                label: "random".into(),
                points: random.clone(),
                dashed: true,
                color: Some("#888888"),
            });
            let title = format!("{dataset}: {label} vs rejection ({})", kind.as_str().to_uppercase());
            let chart = svg::line_chart(&title, "rejection fraction", &label, &series);
            staged.add(format!("curves/{dataset}_{metric}_{kind}.svg"), chart.into_bytes());
        }
    }
    Ok(())
}

pub fn run(global: &Global, args: &EvaluateArgs) -> Result<Outcome> {
    let cfg = load_config(&args.config, &args.overrides, global)?;
    let runs = run_experiment(&cfg)?;

    let mut staged = Staged::default();
    staged.extend(run_files(&runs)?);

    let mut prr_rows = Vec::new();
    let mut curves = Curves { rows: Vec::new(), count: 0 };
    let mut undefined_cells = 0;
    let groups = by_dataset(&runs);
    for (dataset, group) in &groups {
        for &metric in &cfg.metrics {
            for &measure in &cfg.measures {
                for kind in UncertaintyKind::ALL {
                    let defined: Vec<f64> = group.iter().filter_map(|r| r.prr_of(measure, kind, metric)).collect();
                    let (mean, std) = mean_std(&defined);
                    undefined_cells += usize::from(mean.is_none());
                    prr_rows.push(PrrRow {
                        dataset,
                        measure,
                        kind,
                        metric,
                        mean,
                        std,
                        defined_folds: defined.len(),
                        folds: group.len(),
                    });
                }
            }
        }
        let pooled: Vec<PredictionRecord> = group.iter().flat_map(|r| r.prediction_records()).collect();
        dataset_curves(dataset, &pooled, &cfg, args, &mut staged, &mut curves)
            .with_context(|| format!("rejection curves for `{dataset}`"))?;
    }
    staged.add_csv("prr.csv", &prr_rows)?;
    staged.add_csv("curves.csv", &curves.rows)?;
    let files = staged.len();
    staged.commit(&global.out)?;

    if undefined_cells > 0 {
        log::warn!("{undefined_cells} PRR cells are undefined in every fold (no errors to reject)");
    }
    Ok(Outcome {
        summary: json!({
            "command": "evaluate",
            "datasets": groups.len(),
            "runs": runs.len(),
            "config_hash": cfg.hash(),
            "prr_cells": prr_rows.len(),
            "undefined_prr_cells": undefined_cells,
            "curves": curves.count,
            "out": global.out,
            "files": files,
        }),
        degenerate: undefined_cells > 0,
    })
}
