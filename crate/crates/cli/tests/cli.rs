use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const MEASURES: [&str; 6] = ["ent", "var", "bin-ent", "bin-var", "ord-ent", "ord-var"];

fn ordunc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordunc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ORDUNC_OUT")
        .output()
        .expect("binary runs")
}

fn ok(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "exit {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8(output.stdout.clone()).unwrap();
    assert_eq!(stdout.lines().count(), 1, "summary must be one line: {stdout}");
    serde_json::from_str(&stdout).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn col(path: &Path, name: &str) -> usize {
    csv::Reader::from_path(path).unwrap().headers().unwrap().iter().position(|h| h == name).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn demo_config(dir: &Path) -> PathBuf {
    write(
        dir,
        "demo.json",
        r#"{"datasets": [{"source": "synthetic", "name": "demo", "settings": {"n": 200, "k": 4}}], "seed": 7, "folds": 4}"#,
    )
}

// --- measure ---

#[test]
fn measure_single_record_single_measure() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "p.csv",
        "instance_id,member_id,true_label,p_1,p_2,p_3\na,0,1,0.5,0.25,0.25\na,1,1,0.25,0.5,0.25\n",
    );
    let out = dir.path().join("out");
    let summary = ok(&ordunc(&["measure", "--input", input.to_str().unwrap(), "--measures", "ent"], &out));
    assert_eq!(summary["rows"], 1);
    let rows = csv_rows(&out.join("uncertainty.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!((&rows[0][0], &rows[0][1]), ("a", "ent"));
    let (tu, au, eu): (f64, f64, f64) =
        (rows[0][2].parse().unwrap(), rows[0][3].parse().unwrap(), rows[0][4].parse().unwrap());
    assert!((tu - (au + eu)).abs() < 1e-12);
    assert!(eu > 0.0);
}

#[test]
fn measure_all_gives_six_rows_per_instance() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("instance_id,member_id,true_label,p_1,p_2,p_3,p_4\n");
    for i in 0..3 {
        for m in 0..2 {
            text += &format!("x{i},{m},{},0.1,0.2,0.3,0.4\n", 1 + i);
        }
    }
    let input = write(dir.path(), "p.csv", &text);
    let out = dir.path().join("out");
    ok(&ordunc(&["measure", "--input", input.to_str().unwrap(), "--measures", "all"], &out));
    let rows = csv_rows(&out.join("uncertainty.csv"));
    assert_eq!(rows.len(), 18);
    for chunk in rows.chunks(6) {
        let names: Vec<&str> = chunk.iter().map(|r| &r[1]).collect();
        assert_eq!(names, MEASURES);
        assert!(chunk.iter().all(|r| r[0] == chunk[0][0]));
    }
}

#[test]
fn malformed_row_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "p.csv", "instance_id,member_id,true_label,p_1,p_2\na,0,1,0.5,0.5\nb,0,1,0.9,0.3\n");
    let out = dir.path().join("out");
    let output = ordunc(&["measure", "--input", input.to_str().unwrap()], &out);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 3"));
    assert!(output.stdout.is_empty());
    assert!(!out.exists());
}

// --- evaluate ---

#[test]
fn evaluate_emits_every_curve_and_prr_cell() {
    let dir = TempDir::new().unwrap();
    let cfg = demo_config(dir.path());
    let out = dir.path().join("out");
    let summary = ok(&ordunc(&["evaluate", "--config", cfg.to_str().unwrap()], &out));
    assert_eq!(summary["runs"], 4);

    let curves = out.join("curves.csv");
    let (t, m, k, metric) =
        (col(&curves, "trace"), col(&curves, "measure"), col(&curves, "kind"), col(&curves, "metric"));
    let rows = csv_rows(&curves);
    let unc: BTreeSet<(String, String, String)> = rows
        .iter()
        .filter(|r| &r[t] == "uncertainty")
        .map(|r| (r[m].to_owned(), r[k].to_owned(), r[metric].to_owned()))
        .collect();
    assert_eq!(unc.len(), 6 * 3 * 2);
    for trace in ["oracle", "random"] {
        let metrics: BTreeSet<&str> = rows.iter().filter(|r| &r[t] == trace).map(|r| &r[metric]).collect();
        assert_eq!(metrics, BTreeSet::from(["mae", "mcr"]));
    }
    assert_eq!(csv_rows(&out.join("prr.csv")).len(), 36);
    assert_eq!(fs::read_dir(out.join("curves")).unwrap().count(), 6);
    for fold in 0..4 {
        assert!(out.join(format!("runs/demo/{fold}.json")).is_file());
    }
    let svg = fs::read_to_string(out.join("curves/demo_mcr_eu.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(">oracle<") && svg.contains(">random<"));
    assert_eq!(svg.matches("<polyline").count(), 8);
}

#[test]
fn oracle_only_gives_one_trace_per_metric() {
    let dir = TempDir::new().unwrap();
    let cfg = demo_config(dir.path());
    let out = dir.path().join("out");
    ok(&ordunc(&["evaluate", "--config", cfg.to_str().unwrap(), "--oracle-only", "--metrics", "mcr,mae"], &out));
    let curves = out.join("curves.csv");
    let (t, metric) = (col(&curves, "trace"), col(&curves, "metric"));
    let traces: BTreeSet<(String, String)> =
        csv_rows(&curves).iter().map(|r| (r[t].to_owned(), r[metric].to_owned())).collect();
    assert_eq!(traces, BTreeSet::from([("oracle".into(), "mae".into()), ("oracle".into(), "mcr".into())]));
}

#[test]
fn rerun_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = demo_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&ordunc(&["evaluate", "--config", cfg.to_str().unwrap()], &a));
    ok(&ordunc(&["evaluate", "--config", cfg.to_str().unwrap()], &b));
    for f in ["curves.csv", "prr.csv", "summary.csv", "runs/demo/2.json", "curves/demo_mae_tu.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    ok(&ordunc(&["evaluate", "--config", cfg.to_str().unwrap(), "--seed", "8"], &c));
    assert_ne!(fs::read(a.join("curves.csv")).unwrap(), fs::read(c.join("curves.csv")).unwrap());
}

#[test]
fn all_correct_predictions_are_degenerate() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("instance_id,member_id,true_label,p_1,p_2\n");
    for i in 0..6 {
        let y = 1 + i % 2;
        let (p1, p2) = if y == 1 { (0.9, 0.1) } else { (0.2, 0.8) };
        text += &format!("{i},0,{y},{p1},{p2}\n{i},1,{y},{p1},{p2}\n");
    }
    write(dir.path(), "perfect.csv", &text);
    let cfg = write(dir.path(), "cfg.json", r#"{"datasets": [{"source": "predictions", "path": "perfect.csv"}]}"#);
    let out = dir.path().join("out");
    let output = ordunc(&["evaluate", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(output.status.code(), Some(1));
    let summary: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(summary["undefined_prr_cells"], 36);
    let prr = out.join("prr.csv");
    let mean = col(&prr, "mean");
    assert!(csv_rows(&prr).iter().all(|r| r[mean].is_empty()));
}

// --- ood ---

fn auc_means(out: &Path) -> Vec<(String, String, f64)> {
    let path = out.join("ood_auc.csv");
    let (m, k, mean) = (col(&path, "measure"), col(&path, "kind"), col(&path, "mean"));
    csv_rows(&path).iter().map(|r| (r[m].to_owned(), r[k].to_owned(), r[mean].parse().unwrap())).collect()
}

#[test]
fn id_donor_auc_is_near_half() {
    let dir = TempDir::new().unwrap();
    let cfg = demo_config(dir.path());
    let out = dir.path().join("out");
    ok(&ordunc(&["ood", "--config", cfg.to_str().unwrap(), "--donor", "id-train"], &out));
    let aucs = auc_means(&out);
    assert_eq!(aucs.len(), 18);
    for (m, k, auc) in aucs {
        assert!(auc > 0.4 && auc < 0.6, "{m}/{k}: {auc}");
    }
}

#[test]
fn shifted_csv_donor_emits_table() {
    let dir = TempDir::new().unwrap();
    let cfg = demo_config(dir.path());
    let mut donor = String::from("a,b,c,d,name\n");
    for i in 0..50 {
        donor += &format!("{},{},{},{},row{i}\n", i as f64 * 0.1, -(i as f64), (i % 7) as f64, 1.0 / (1.0 + i as f64));
    }
    let donor = write(dir.path(), "donor.csv", &donor);
    let out = dir.path().join("out");
    let summary = ok(&ordunc(
        &["ood", "--config", cfg.to_str().unwrap(), "--donor", donor.to_str().unwrap(), "--shift-sigma", "5"],
        &out,
    ));
    assert_eq!(summary["shift_sigma"], 5.0);
    let aucs = auc_means(&out);
    assert_eq!(aucs.len(), 18);
    assert!(aucs.iter().all(|a| (0.0..=1.0).contains(&a.2)));
}

#[test]
fn missing_donor_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = demo_config(dir.path());
    let out = dir.path().join("out");
    let output = ordunc(&["ood", "--config", cfg.to_str().unwrap(), "--donor", "no-such-donor.csv"], &out);
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.exists());
}

// --- stats ---

fn summary_csv(dir: &Path, rows: &[Vec<f64>]) -> PathBuf {
    let mut text = String::from("dataset,fold,measure,kind,metric,value\n");
    for (d, row) in rows.iter().enumerate() {
        for (m, v) in MEASURES.iter().zip(row) {
            for kind in ["tu", "au", "eu"] {
                text += &format!("d{d:02},0,{m},{kind},mcr,{v}\n");
            }
        }
    }
    write(dir, "summary.csv", &text)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn constant_columns_skip_pairwise_tests() {
    let dir = TempDir::new().unwrap();
    let summary = summary_csv(dir.path(), &vec![vec![0.4; 6]; 8]);
    let out = dir.path().join("out");
    ok(&ordunc(&["stats", "--summary", summary.to_str().unwrap(), "--kind", "eu"], &out));
    let rep = &report(&out)["reports"][0]["report"];
    assert_eq!(rep["friedman_p"], 1.0);
    assert_eq!(rep["pairwise"].as_array().unwrap().len(), 0);
}

#[test]
fn dominator_ranks_first() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<Vec<f64>> =
        (0..10).map(|d| (0..6).map(|j| if j == 4 { 0.9 } else { 0.1 * ((d + j) % 5) as f64 }).collect()).collect();
    let summary = summary_csv(dir.path(), &rows);
    let out = dir.path().join("out");
    ok(&ordunc(&["stats", "--summary", summary.to_str().unwrap()], &out));
    let ranks = csv_rows(&out.join("ranks.csv"));
    assert_eq!(ranks.len(), 18);
    for kind in ["tu", "au", "eu"] {
        let first = ranks.iter().find(|r| &r[0] == kind && &r[3] == "1").unwrap();
        assert_eq!((&first[1], &first[2]), ("ord-ent", "1.0"));
        assert!(out.join(format!("cd_{kind}.svg")).is_file());
    }
}

#[test]
fn random_matrix_report_has_ordered_p_values() {
    let dir = TempDir::new().unwrap();
    // fixed LCG so the test needs no RNG crate
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let rows: Vec<Vec<f64>> = (0..23).map(|_| (0..6).map(|j| next() + 0.08 * j as f64).collect()).collect();
    let summary = summary_csv(dir.path(), &rows);
    let out = dir.path().join("out");
    ok(&ordunc(&["stats", "--summary", summary.to_str().unwrap(), "--alpha", "0.2"], &out));
    let rep = report(&out);
    let mut compared = 0;
    for r in rep["reports"].as_array().unwrap() {
        assert_eq!(r["report"]["n_rows"], 23);
        for p in r["report"]["pairwise"].as_array().unwrap() {
            assert!(p["adjusted_p"].as_f64().unwrap() >= p["raw_p"].as_f64().unwrap());
            assert!(p["adjusted_p"].as_f64().unwrap() <= 1.0);
            compared += 1;
        }
    }
    assert!(compared > 0, "the planted trend should trigger pairwise tests");
}

#[test]
fn stats_on_real_summary_with_fold_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = demo_config(dir.path());
    let ev = dir.path().join("ev");
    ok(&ordunc(&["evaluate", "--config", cfg.to_str().unwrap()], &ev));
    let summary = ev.join("summary.csv");
    let out = dir.path().join("out");
    let output = ordunc(&["stats", "--summary", summary.to_str().unwrap()], &out);
    assert_eq!(output.status.code(), Some(2), "one dataset is one row");
    let s =
        ok(&ordunc(&["stats", "--summary", summary.to_str().unwrap(), "--rows", "fold", "--pooling", "both"], &out));
    assert_eq!(s["kinds"][0]["rows"], 8);
}

// --- heatmap ---

#[test]
fn heatmap_maxima_and_cell_count() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let s = ok(&ordunc(&["heatmap", "--measures", "ent,ord-var", "--grid-step", "0.01"], &out));
    assert_eq!(s["cells_per_measure"], 5151);
    assert_eq!(csv_rows(&out.join("heatmap.csv")).len(), 2 * 5151);
    // 1/3 is off the lattice; the maximum is a nearest lattice point
    let ent: Vec<f64> = s["max"]["ent"]["probs"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(ent.iter().all(|p| (p - 1.0 / 3.0).abs() <= 0.01), "{ent:?}");
    let ov: Vec<f64> = s["max"]["ord-var"]["probs"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(ov, vec![0.5, 0.0, 0.5]);
    let svg = fs::read_to_string(out.join("heatmap_ent.svg")).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 100 * 100);
}

#[test]
fn heatmap_barycenter_on_lattice() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let s = ok(&ordunc(&["heatmap", "--measures", "ent", "--grid-step", "0.05", "--log-base", "e"], &out));
    assert_eq!(s["cells_per_measure"], 231);
    let tu = s["max"]["ent"]["tu"].as_f64().unwrap();
    // lattice points nearest the barycenter: (7, 7, 6)/20
    let expect = -(2.0 * 0.35 * 0.35f64.ln() + 0.3 * 0.3f64.ln());
    assert!((tu - expect).abs() < 1e-12);
}

// --- surface ---

#[test]
fn unknown_flags_and_bad_values_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    for args in [
        &["heatmap", "--bogus"][..],
        &["heatmap", "--measures", "entropy"],
        &["heatmap", "--grid-step", "0.3"],
        &["heatmap", "--log-base", "1"],
        &["stats", "--summary", "x.csv", "--pooling", "mse"],
    ] {
        let output = ordunc(args, &out);
        assert_eq!(output.status.code(), Some(2), "{args:?}");
    }
    assert!(!out.exists());
}

#[test]
fn output_root_from_environment() {
    let dir = TempDir::new().unwrap();
    let root = dir.path().join("env-out");
    let status = Command::new(env!("CARGO_BIN_EXE_ordunc"))
        .args(["heatmap", "--measures", "var", "--grid-step", "0.1"])
        .env("ORDUNC_OUT", &root)
        .output()
        .unwrap();
    ok(&status);
    assert!(root.join("heatmap.csv").is_file());
}
