use std::collections::BTreeMap;

use anyhow::{bail, Result};
use ordunc_core::stats::{compare_treatments, ScoreMatrix, TestReport};
use ordunc_core::{MeasureKind, UncertaintyKind};
use ordunc_pipeline::persist::{read_summary, SummaryRow, OOD_AUC};
use serde::Serialize;
use serde_json::json;

use crate::args::{Global, Pooling, RowUnit, StatsArgs};
use crate::output::Staged;
use crate::{svg, Degenerate, Outcome};

fn metrics(p: Pooling) -> &'static [&'static str] {
    match p {
        Pooling::Mcr => &["mcr"],
        Pooling::Mae => &["mae"],
        Pooling::Both => &["mcr", "mae"],
        Pooling::Auc => &[OOD_AUC],
    }
}

/// Known measures first in their canonical order, then anything else by name.
fn treatment_order(name: &str) -> (usize, &str) {
    let pos = name.parse::<MeasureKind>().ok().and_then(|m| MeasureKind::ALL.iter().position(|&k| k == m));
    (pos.unwrap_or(MeasureKind::ALL.len()), name)
}

/// (dataset, metric, fold) of one score-matrix row.
type RowKey<'a> = (&'a str, &'a str, Option<usize>);

struct Table {
    matrix: ScoreMatrix,
    dropped: usize,
}

fn build_matrix(rows: &[&SummaryRow], unit: RowUnit) -> Result<Table> {
    let mut names: Vec<&str> = rows.iter().map(|r| r.measure.as_str()).collect();
    names.sort_by_key(|n| treatment_order(n));
    names.dedup();
    if names.len() < 2 {
        bail!("need at least 2 measures to compare, found {}", names.len());
    }
    let mut cells: BTreeMap<RowKey, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        let fold = (unit == RowUnit::Fold).then_some(r.fold);
        let entry = cells.entry((&r.dataset, &r.metric, fold)).or_default().entry(&r.measure).or_default();
        entry.extend(r.value);
    }
    let mut matrix_rows = Vec::new();
    let mut dropped = 0;
    for ((dataset, metric, fold), by_measure) in &cells {
        let row: Option<Vec<f64>> = names
            .iter()
            .map(|n| by_measure.get(n).filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64))
            .collect();
        match row {
            Some(row) => matrix_rows.push(row),
            None => {
                dropped += 1;
                log::warn!("dropping row {dataset}/{metric}/{fold:?}: some measure has no defined value");
            }
        }
    }
    if matrix_rows.len() < 2 {
        let msg = format!("only {} complete rows after dropping {dropped} with undefined values", matrix_rows.len());
        if dropped > 0 {
            return Err(Degenerate(msg).into());
        }
        bail!("{msg}; a single dataset needs `--rows fold`");
    }
    let matrix = ScoreMatrix::new(names.iter().map(|s| s.to_string()).collect(), matrix_rows)?;
    Ok(Table { matrix, dropped })
}

#[derive(Serialize)]
struct KindReport {
    kind: UncertaintyKind,
    dropped_rows: usize,
    report: TestReport,
}

#[derive(Serialize)]
struct RankRow<'a> {
    kind: UncertaintyKind,
    measure: &'a str,
    avg_rank: f64,
    position: usize,
}

pub fn run(global: &Global, args: &StatsArgs) -> Result<Outcome> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        bail!("--alpha must lie in (0, 1), got {}", args.alpha);
    }
    let summary = read_summary(&args.summary)?;
    let wanted = metrics(args.pooling);
    let selected: Vec<&SummaryRow> = summary.iter().filter(|r| wanted.contains(&r.metric.as_str())).collect();
    if selected.is_empty() {
        bail!("{} has no rows for metric(s) {}", args.summary.display(), wanted.join(", "));
    }

    let mut reports = Vec::new();
    for kind in args.kind.kinds() {
        let rows: Vec<&SummaryRow> = selected.iter().copied().filter(|r| r.kind == kind.as_str()).collect();
        if rows.is_empty() {
            bail!("{} has no `{kind}` rows", args.summary.display());
        }
        let table = build_matrix(&rows, args.rows)?;
        let report = compare_treatments(&table.matrix, args.alpha)?;
        reports.push(KindReport { kind, dropped_rows: table.dropped, report });
    }

    let mut staged = Staged::default();
    let mut ranks = Vec::new();
    for r in &reports {
        let rep = &r.report;
        let mut order: Vec<usize> = (0..rep.treatments.len()).collect();
        order.sort_by(|&a, &b| rep.avg_ranks[a].total_cmp(&rep.avg_ranks[b]));
        for (pos, &i) in order.iter().enumerate() {
            ranks.push(RankRow {
                kind: r.kind,
                measure: &rep.treatments[i],
                avg_rank: rep.avg_ranks[i],
                position: pos + 1,
            });
        }
        let title = format!(
            "{} average ranks ({} rows, Friedman p = {:.3e})",
            r.kind.as_str().to_uppercase(),
            rep.n_rows,
            rep.friedman_p
        );
        let picture = svg::cd_diagram(&title, &rep.treatments, &rep.avg_ranks, &rep.groups);
        staged.add(format!("cd_{}.svg", r.kind), picture.into_bytes());
    }
    let pooling = format!("{:?}", args.pooling).to_lowercase();
    let rows_unit = format!("{:?}", args.rows).to_lowercase();
    staged.add_json(
        "report.json",
        &json!({ "pooling": pooling, "rows": rows_unit, "alpha": args.alpha, "reports": reports }),
    )?;
    staged.add_csv("ranks.csv", &ranks)?;
    let files = staged.commit(&global.out)?;

    let kinds: Vec<_> = reports
        .iter()
        .map(|r| {
            json!({
                "kind": r.kind,
                "rows": r.report.n_rows,
                "friedman_p": r.report.friedman_p,
                "significant_pairs": r.report.pairwise.iter().filter(|p| p.significant).count(),
            })
        })
        .collect();
    Ok(Outcome {
        summary: json!({ "command": "stats", "pooling": pooling, "kinds": kinds, "out": global.out, "files": files }),
        degenerate: false,
    })
}
