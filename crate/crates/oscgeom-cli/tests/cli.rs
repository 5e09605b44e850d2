use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use oscgeom::exactgeom::{is_convex_independent, is_general_position};
use oscgeom::oscillator::{is_oscillator, stretch};
use oscgeom::PointSet;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oscgeom"));
    c.env_remove("OSC_THREADS");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, Value, String) {
    let out: Output = bin().current_dir(dir).args(args).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let v = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, String::from_utf8_lossy(&out.stderr).to_string())
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn points(v: &Value) -> PointSet {
    serde_json::from_value(v.clone()).unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(dir.join(name)).unwrap();
    r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect()
}

fn metric(rows: &[Vec<String>], run: &str, m: &str) -> String {
    rows.iter().find(|r| r[0] == run && r[6] == m).unwrap_or_else(|| panic!("no {m} for {run}"))[7].clone()
}

#[test]
fn generate_oscillator_is_certified_and_embeds_config() {
    let t = tempfile::tempdir().unwrap();
    let args = ["generate", "oscillator", "--d", "2", "--len", "16", "--eps", "1/8", "--seed", "7", "--out", "osc.json", "--report", "r.csv"];
    let (code, out, _) = run_in(t.path(), &args);
    assert_eq!(code, 0);
    let doc = read(t.path(), "osc.json");
    let p = points(&doc);
    assert_eq!(p.len(), 16);
    assert!(is_oscillator(&p).pass());
    assert_eq!(doc["config"]["seed"], 7);
    assert_eq!(doc["config"]["eps"], "1/8");
    assert_eq!(doc["run_id"], out["run_id"]);
    let cert = read(t.path(), "osc.cert.json");
    assert_eq!(cert["pass"], true);
    assert_eq!(cert["run_id"], out["run_id"]);
    let rows = csv_rows(t.path(), "r.csv");
    let id = out["run_id"].as_str().unwrap();
    assert_eq!(metric(&rows, id, "status"), "pass");
    assert_eq!(metric(&rows, id, "points"), "16");
    assert_eq!(&rows[0][2..6], &["2", "16", "1/8", "7"]);
}

#[test]
fn generate_grid_is_in_general_position() {
    let t = tempfile::tempdir().unwrap();
    let (code, _, _) = run_in(t.path(), &["generate", "grid", "--d", "2", "--n", "16", "--eps", "1/8", "--seed", "7", "--out", "g.json"]);
    assert_eq!(code, 0);
    let doc = read(t.path(), "g.json");
    let p = points(&doc);
    assert_eq!(p.len(), 256);
    assert_eq!(doc["grid_n"], 16);
    assert!(is_general_position(&p));
    assert_eq!(read(t.path(), "g.cert.json")["general_position"]["exact"], true);
}

#[test]
fn bad_eps_is_a_usage_error() {
    let t = tempfile::tempdir().unwrap();
    for eps in ["1/2", "3/4", "0", "0.1", "-1/8"] {
        let flag = format!("--eps={eps}");
        let (code, _, err) = run_in(t.path(), &["generate", "grid", "--n", "4", &flag, "--out", "g.json"]);
        assert_eq!(code, 2, "eps {eps}");
        assert!(err.contains("eps"), "{err}");
    }
    assert!(!t.path().join("g.json").exists());
    let (code, _, _) = run_in(t.path(), &["measure", "extract", "--input", "missing.json"]);
    assert_eq!(code, 2);
}

fn pipeline(dir: &Path) {
    for args in [
        &["generate", "grid", "--d", "2", "--n", "8", "--eps", "1/4", "--seed", "3", "--out", "g.json", "--report", "r.csv"][..],
        &["measure", "extract", "--input", "g.json", "--trials", "16", "--seed", "5", "--out", "q.json", "--report", "r.csv"],
        &["measure", "max-convex", "--input", "g.json", "--witness", "w.json", "--report", "r.jsonl"],
        &["measure", "facets", "--input", "w.json", "--out", "f.json", "--report", "r.jsonl"],
    ] {
        assert_eq!(run_in(dir, args).0, 0, "{args:?}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    let first: Vec<Vec<u8>> =
        ["r.csv", "r.jsonl", "g.json", "q.json", "w.json", "f.json"].iter().map(|f| fs::read(a.path().join(f)).unwrap()).collect();
    pipeline(a.path());
    pipeline(b.path());
    for (i, f) in ["r.csv", "r.jsonl", "g.json", "q.json", "w.json", "f.json"].iter().enumerate() {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), first[i], "{f} changed on rerun");
        assert_eq!(fs::read(b.path().join(f)).unwrap(), first[i], "{f} differs across directories");
    }
    // A new seed is a new run and gets appended.
    let before = csv_rows(a.path(), "r.csv").len();
    let (code, out, _) =
        run_in(a.path(), &["measure", "extract", "--input", "g.json", "--trials", "16", "--seed", "6", "--report", "r.csv"]);
    assert_eq!(code, 0);
    assert_eq!(out["report_appended"], true);
    assert!(csv_rows(a.path(), "r.csv").len() > before);
}

#[test]
fn extract_reports_beta_hat() {
    let t = tempfile::tempdir().unwrap();
    pipeline(t.path());
    let g = points(&read(t.path(), "g.json"));
    let q = read(t.path(), "q.json");
    let qs = points(&q);
    assert!(is_convex_independent(&qs));
    let idx: Vec<usize> = q["indices"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    assert_eq!(q["kind"], "grid-witness");
    assert_eq!(idx.len(), qs.len());
    assert!(is_convex_independent(&g.select(&idx)));
    let rows = csv_rows(t.path(), "r.csv");
    let run = rows.iter().find(|r| r[1] == "measure extract").unwrap()[0].clone();
    let size: f64 = metric(&rows, &run, "size").parse().unwrap();
    let beta: f64 = metric(&rows, &run, "beta_hat").parse().unwrap();
    assert_eq!(size as usize, qs.len());
    assert!((beta - size / 64f64.cbrt()).abs() < 1e-12);
    let row = rows.iter().find(|r| r[0] == run).unwrap();
    assert_eq!(&row[2..6], &["2", "64", "2.0", "5"]);
}

#[test]
fn facets_of_a_witness() {
    let t = tempfile::tempdir().unwrap();
    pipeline(t.path());
    let f = read(t.path(), "f.json");
    let recs = f["facets"].as_array().unwrap();
    assert!(recs.len() >= 3);
    for r in recs {
        assert!(r["n_f_sq"].is_u64());
        assert!(r["a_f"].is_string());
    }
    assert_eq!(f["surface_area"]["holds"], true);
    assert_eq!(f["surface_area"]["rhs"], 2 * 2 * 7);
    // The lattice preimage may put several points on one edge, but every
    // point stays on the boundary: on one edge, or on two if it is a corner.
    let w = points(&read(t.path(), "w.json"));
    let total: u64 = recs.iter().map(|r| r["count"].as_u64().unwrap()).sum();
    assert!(recs.iter().all(|r| r["count"].as_u64().unwrap() >= 2));
    assert_eq!(total as usize, w.len() + recs.len());
}

#[test]
fn stretch_row_matches_its_witness_and_budget_is_flagged() {
    let t = tempfile::tempdir().unwrap();
    run_in(t.path(), &["generate", "oscillator", "--d", "2", "--len", "16", "--eps", "1/8", "--seed", "7", "--out", "o.json"]);
    let (code, out, _) = run_in(t.path(), &["measure", "stretch", "--input", "o.json", "--k", "6", "--mode", "cupcap", "--report", "r.csv"]);
    assert_eq!(code, 0);
    let p = points(&read(t.path(), "o.json")).sorted();
    let s = &out["result"]["stretch"];
    let w: Vec<usize> = s["witness"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect();
    assert_eq!(w.len(), 6);
    assert_eq!(stretch(&p, &p.select(&w)).unwrap() as u64, s["stretch"].as_u64().unwrap());
    let (code, out, _) = run_in(t.path(), &["measure", "stretch", "--input", "o.json", "--k", "8", "--budget", "10", "--report", "r.csv"]);
    assert_eq!(code, 3);
    assert_eq!(out["status"], "partial");
    let rows = csv_rows(t.path(), "r.csv");
    let id = out["run_id"].as_str().unwrap();
    assert_eq!(metric(&rows, id, "partial"), "1");
    assert_eq!(metric(&rows, id, "status"), "partial");
}

#[test]
fn certify_reports_failing_clauses() {
    let t = tempfile::tempdir().unwrap();
    let square = r#"{"d":2,"points":[["0","0"],["1","0"],["1","1"],["0","1"],["1/2","1/3"]]}"#;
    fs::write(t.path().join("s.json"), square).unwrap();
    let (code, out, _) = run_in(t.path(), &["certify", "--input", "s.json", "--property", "convex-independent"]);
    assert_eq!(code, 1);
    assert_eq!(out["result"]["failure"]["point"], 4);
    // Equal heights break regularity.
    let (code, out, _) = run_in(t.path(), &["certify", "--input", "s.json", "--property", "regular"]);
    assert_eq!(code, 1);
    assert_eq!(out["result"]["failure"]["clause"], "R1");
    let (code, out, _) = run_in(t.path(), &["certify", "--input", "s.json", "--property", "oscillator", "--cert", "c.json"]);
    assert_eq!(code, 1);
    assert!(out["result"]["failure"]["clause"].is_string());
    assert_eq!(read(t.path(), "c.json")["pass"], false);
    fs::write(t.path().join("h.json"), r#"{"d":2,"points":[["1","0"],["2","100"],["3","1"],["4","102"]]}"#).unwrap();
    assert_eq!(run_in(t.path(), &["certify", "--input", "h.json"]).0, 0);
}

#[test]
fn sweeps_fit_slopes() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("two.json"), r#"{"metric":"u-seq","d":3,"sizes":[10,100]}"#).unwrap();
    let (code, out, _) = run_in(t.path(), &["sweep", "--spec", "two.json"]);
    assert_eq!(code, 2);
    assert_eq!(out["status"], "usage-error");
    fs::write(t.path().join("u.json"), r#"{"metric":"u-seq","d":3,"sizes":[100,1000,10000]}"#).unwrap();
    let (code, out, _) = run_in(t.path(), &["sweep", "--spec", "u.json", "--report", "s.csv"]);
    assert_eq!(code, 0);
    let fit = &out["result"]["fit"];
    assert!((fit["slope"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.1);
    assert!(out["result"]["min_u_ratio"].as_f64().unwrap() >= 1.0 / 3.0);
    assert_eq!(fit["residuals"].as_array().unwrap().len(), 3);
    fs::write(t.path().join("e.json"), r#"{"metric":"max-convex","d":2,"sizes":[6,8,10],"eps":"1/4"}"#).unwrap();
    let (code, out, _) = run_in(t.path(), &["sweep", "--spec", "e.json", "--report", "s.csv"]);
    assert_eq!(code, 0);
    assert_eq!(out["result"]["x"], serde_json::json!([36.0, 64.0, 100.0]));
    assert!(out["result"]["fit"]["slope"].as_f64().unwrap() > 0.0);
    let rows = csv_rows(t.path(), "s.csv");
    let id = out["run_id"].as_str().unwrap();
    let sizes: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == id && r[6] == "size").collect();
    assert_eq!(sizes.iter().map(|r| r[3].as_str()).collect::<Vec<_>>(), ["36", "64", "100"]);
    fs::write(t.path().join("x.json"), r#"{"metric":"extract","d":2,"sizes":[4,6,8],"bogus":1}"#).unwrap();
    assert_eq!(run_in(t.path(), &["sweep", "--spec", "x.json"]).0, 2);
}

#[test]
fn thread_settings_do_not_change_results() {
    let t = tempfile::tempdir().unwrap();
    run_in(t.path(), &["generate", "grid", "--n", "8", "--eps", "1/4", "--out", "g.json"]);
    let args = ["measure", "extract", "--input", "g.json", "--trials", "8"];
    let base = bin().current_dir(t.path()).args(args).output().unwrap();
    let one = bin().current_dir(t.path()).env("OSC_THREADS", "1").args(["--threads", "4"]).args(args).output().unwrap();
    let two = bin().current_dir(t.path()).args(["--threads", "2"]).args(args).output().unwrap();
    assert_eq!(base.stdout, one.stdout);
    assert_eq!(base.stdout, two.stdout);
    let bad = bin().current_dir(t.path()).env("OSC_THREADS", "many").args(args).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn report_summarizes_and_exports() {
    let t = tempfile::tempdir().unwrap();
    pipeline(t.path());
    let (code, out, _) = run_in(t.path(), &["report", "--input", "r.jsonl", "--csv", "x.csv"]);
    assert_eq!(code, 0);
    let runs = out["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0]["command"], "measure max-convex");
    assert_eq!(out["csv_runs_written"], 2);
    let before = fs::read(t.path().join("x.csv")).unwrap();
    let (_, again, _) = run_in(t.path(), &["report", "--input", "r.jsonl", "--csv", "x.csv"]);
    assert_eq!(again["csv_runs_written"], 0);
    assert_eq!(fs::read(t.path().join("x.csv")).unwrap(), before);
    let (code, csv_view, _) = run_in(t.path(), &["report", "--input", "x.csv"]);
    assert_eq!(code, 0);
    assert_eq!(csv_view["runs"], out["runs"]);
    let id = runs[1]["run_id"].as_str().unwrap();
    let (_, one, _) = run_in(t.path(), &["report", "--input", "r.jsonl", "--run", id]);
    assert_eq!(one["runs"].as_array().unwrap().len(), 1);
    assert_eq!(run_in(t.path(), &["report", "--input", "r.jsonl", "--run", "nope"]).0, 2);
}
