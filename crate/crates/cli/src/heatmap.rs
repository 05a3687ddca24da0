use std::collections::HashMap;

use anyhow::Result;
use ordunc_core::simplex::{barycentric_to_cartesian, divisions, simplex_heatmap};
use serde::Serialize;
use serde_json::{json, Map};

use crate::args::{Global, HeatmapArgs};
use crate::output::Staged;
use crate::{svg, Outcome};

#[derive(Serialize)]
struct Row {
    measure: &'static str,
    p1: f64,
    p2: f64,
    p3: f64,
    x: f64,
    y: f64,
    tu: f64,
}

pub fn run(global: &Global, args: &HeatmapArgs) -> Result<Outcome> {
    let base = global.log_base.unwrap_or_default();
    let n = divisions(args.grid_step)?;
    let mut rows = Vec::new();
    let mut maxima = Map::new();
    let mut staged = Staged::default();
    for &measure in &args.measures.0 {
        let cells = simplex_heatmap(measure, 3, args.grid_step, base)?;
        let mut by_counts = HashMap::with_capacity(cells.len());
        // first maximum in lattice order
        let mut best = &cells[0];
        for cell in &cells {
            let p = cell.probs.as_slice();
            let (x, y) = barycentric_to_cartesian(&cell.probs)?;
            rows.push(Row { measure: measure.as_str(), p1: p[0], p2: p[1], p3: p[2], x, y, tu: cell.tu });
            let counts = ((p[1] * n as f64).round() as usize, (p[2] * n as f64).round() as usize);
            by_counts.insert(counts, cell.tu);
            if cell.tu > best.tu {
                best = cell;
            }
        }
        maxima.insert(measure.as_str().into(), json!({ "probs": best.probs.as_slice(), "tu": best.tu }));
        let title = format!("{measure}: total uncertainty");
        let picture = svg::simplex_heatmap(&title, n, |b, c| by_counts[&(b, c)]);
        staged.add(format!("heatmap_{measure}.svg"), picture.into_bytes());
    }
    staged.add_csv("heatmap.csv", &rows)?;
    let files = staged.commit(&global.out)?;
    Ok(Outcome {
        summary: json!({
            "command": "heatmap",
            "grid_step": args.grid_step,
            "cells_per_measure": rows.len() / args.measures.0.len(),
            "max": maxima,
            "out": global.out,
            "files": files,
        }),
        degenerate: false,
    })
}
