use std::path::PathBuf;

use anyhow::{bail, Result};
use ordunc_core::{MeasureKind, UncertaintyKind};
use ordunc_pipeline::experiment::{run_experiment, DonorSource, OodConfig};
use ordunc_pipeline::persist::run_files;
use serde::Serialize;
use serde_json::json;

use crate::args::{Global, OodArgs};
use crate::evaluate::{by_dataset, load_config, mean_std};
use crate::output::Staged;
use crate::Outcome;

#[derive(Serialize)]
struct AucRow<'a> {
    dataset: &'a str,
    measure: MeasureKind,
    kind: UncertaintyKind,
    mean: Option<f64>,
    std: Option<f64>,
    folds: usize,
}

fn donor_source(args: &OodArgs) -> Result<DonorSource> {
    if args.donor == "id-train" {
        if args.donor_schema.is_some() {
            bail!("--donor-schema needs a donor file");
        }
        return Ok(DonorSource::IdTrain);
    }
    let path = PathBuf::from(&args.donor);
    if !path.is_file() {
        bail!("donor file {} not found", path.display());
    }
    if let Some(schema) = args.donor_schema.as_ref().filter(|s| !s.is_file()) {
        bail!("donor schema {} not found", schema.display());
    }
    Ok(DonorSource::Csv { path, schema: args.donor_schema.clone() })
}

pub fn run(global: &Global, args: &OodArgs) -> Result<Outcome> {
    let donor = donor_source(args)?;
    let mut cfg = load_config(&args.config, &args.overrides, global)?;
    let shift_sigma = args.shift_sigma.or(cfg.ood.as_ref().map(|o| o.shift_sigma)).unwrap_or(0.0);
    cfg.ood = Some(OodConfig { donor, shift_sigma });
    cfg.validate()?;
    let runs = run_experiment(&cfg)?;

    let mut rows = Vec::new();
    let groups = by_dataset(&runs);
    for (dataset, group) in &groups {
        if group.iter().all(|r| r.ood_auc.is_empty()) {
            continue;
        }
        for &measure in &cfg.measures {
            for kind in UncertaintyKind::ALL {
                let aucs: Vec<f64> = group.iter().filter_map(|r| r.auc_of(measure, kind)).collect();
                let (mean, std) = mean_std(&aucs);
                rows.push(AucRow { dataset, measure, kind, mean, std, folds: aucs.len() });
            }
        }
    }
    if rows.is_empty() {
        bail!("no configured dataset supports OOD evaluation (imported predictions have no model to query)");
    }

    let mut staged = Staged::default();
    staged.extend(run_files(&runs)?);
    staged.add_csv("ood_auc.csv", &rows)?;
    let files = staged.len();
    staged.commit(&global.out)?;
    Ok(Outcome {
        summary: json!({
            "command": "ood",
            "datasets": groups.len(),
            "runs": runs.len(),
            "shift_sigma": shift_sigma,
            "config_hash": cfg.hash(),
            "auc_cells": rows.len(),
            "out": global.out,
            "files": files,
        }),
        degenerate: false,
    })
}
