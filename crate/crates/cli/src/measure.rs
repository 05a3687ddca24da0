use anyhow::Result;
use ordunc_core::compute_uncertainty;
use ordunc_pipeline::interchange::import_predictions;
use serde::Serialize;
use serde_json::json;

use crate::args::{Global, MeasureArgs};
use crate::output::Staged;
use crate::Outcome;

#[derive(Serialize)]
struct Row<'a> {
    instance_id: &'a str,
    measure: &'static str,
    tu: f64,
    au: f64,
    eu: f64,
}

pub fn run(global: &Global, args: &MeasureArgs) -> Result<Outcome> {
    let preds = import_predictions(&args.input)?;
    let base = global.log_base.unwrap_or_default();
    let mut rows = Vec::with_capacity(preds.len() * args.measures.0.len());
    for p in &preds {
        for &m in &args.measures.0 {
            let t = compute_uncertainty(&p.record.members, m, base);
            rows.push(Row { instance_id: &p.instance_id, measure: m.as_str(), tu: t.tu, au: t.au, eu: t.eu });
        }
    }
    let mut staged = Staged::default();
    staged.add_csv("uncertainty.csv", &rows)?;
    let files = staged.commit(&global.out)?;
    Ok(Outcome {
        summary: json!({
            "command": "measure",
            "instances": preds.len(),
            "rows": rows.len(),
            "log_base": base.value(),
            "out": global.out,
            "files": files,
        }),
        degenerate: false,
    })
}
