use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::cli::ReportArgs;
use crate::run::{append, is_csv, read_records, Failure, Record, Res, Row};

fn from_csv(path: &std::path::Path) -> Res<Vec<Record>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut by_run: Vec<Record> = Vec::new();
    for r in rdr.records() {
        let r = r.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let get = |i: usize| r.get(i).unwrap_or("").to_string();
        let id = get(0);
        if by_run.last().is_none_or(|l| l.run_id != id) {
            let config: Value = serde_json::from_str(&get(8)).unwrap_or(Value::Null);
            by_run.push(Record { run_id: id.clone(), status: String::new(), config, rows: Vec::new(), result: Value::Null });
        }
        let rec = by_run.last_mut().unwrap();
        if get(6) == "status" {
            rec.status = get(7);
        } else {
            let base_n = rec.config.get("n").map(|v| v.to_string());
            let n = Some(get(3)).filter(|n| Some(n) != base_n.as_ref() && !n.is_empty());
            rec.rows.push(Row { n, metric: get(6), value: get(7) });
        }
    }
    Ok(by_run)
}

/// Prints one summary object per run and optionally re-emits the rows as CSV.
pub fn report(a: &ReportArgs) -> Res<Value> {
    let mut recs = if is_csv(&a.input) { from_csv(&a.input)? } else { read_records(&a.input)? };
    if let Some(id) = &a.run {
        recs.retain(|r| &r.run_id == id);
        if recs.is_empty() {
            return Err(Failure::Usage(format!("no run {id} in {}", a.input.display())));
        }
    }
    let mut written = 0usize;
    if let Some(out) = &a.csv {
        for r in &recs {
            written += append(out, r)? as usize;
        }
    }
    let runs: Vec<Value> = recs
        .iter()
        .map(|r| {
            let mut metrics: BTreeMap<String, Vec<String>> = BTreeMap::new();
            for row in &r.rows {
                metrics.entry(row.metric.clone()).or_default().push(row.value.clone());
            }
            json!({
                "run_id": r.run_id,
                "command": r.config.get("command"),
                "status": r.status,
                "metrics": metrics,
            })
        })
        .collect();
    Ok(json!({"runs": runs, "csv_runs_written": written}))
}
