use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use oscgeom::PointSet;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use uuid::Uuid;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(Value),
    Budget(Value),
    Io(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Verification(_) => EXIT_FAIL,
            Failure::Budget(_) => EXIT_BUDGET,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Failure::Usage(m) => json!({"status": "usage-error", "error": m}),
            Failure::Io(e) => json!({"status": "usage-error", "error": format!("{e:#}")}),
            Failure::Verification(v) => json!({"status": "fail", "failure": v}),
            Failure::Budget(v) => json!({"status": "budget-exhausted", "failure": v}),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<oscgeom::Error> for Failure {
    fn from(e: oscgeom::Error) -> Self {
        use oscgeom::Error as E;
        match e {
            E::Precondition(_) | E::Degenerate(_) => Failure::Verification(json!({"error": e.to_string()})),
            E::Budget { ref what, partial } => {
                Failure::Budget(json!({"error": e.to_string(), "what": what, "partial": partial}))
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

pub type Res<T> = Result<T, Failure>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Partial,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Partial => "partial",
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Status::Pass => EXIT_PASS,
            Status::Fail => EXIT_FAIL,
            Status::Partial => EXIT_BUDGET,
        }
    }
}

/// One metric of one run. `n` overrides the config's n for sweep points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Row {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<String>,
    pub metric: String,
    pub value: String,
}

pub fn row(metric: &str, value: impl ToString) -> Row {
    Row { n: None, metric: metric.to_string(), value: value.to_string() }
}

pub struct Outcome {
    pub config: Value,
    pub rows: Vec<Row>,
    pub result: Value,
    pub status: Status,
}

/// Key-sorted compact JSON, independent of map insertion order.
pub fn canonical(v: &Value) -> String {
    match v {
        Value::Object(m) => {
            let mut kv: Vec<(&String, &Value)> = m.iter().collect();
            kv.sort_by(|a, b| a.0.cmp(b.0));
            let body: Vec<String> =
                kv.into_iter().map(|(k, v)| format!("{}:{}", Value::String(k.clone()), canonical(v))).collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(a) => format!("[{}]", a.iter().map(canonical).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

fn namespace() -> Uuid {
    Uuid::new_v5(&Uuid::NAMESPACE_URL, b"urn:oscgeom:run")
}

pub fn run_id(config: &Value) -> String {
    Uuid::new_v5(&namespace(), canonical(config).as_bytes()).to_string()
}

pub fn digest(bytes: &[u8]) -> String {
    Uuid::new_v5(&namespace(), bytes).to_string()
}

pub fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Writes `body` with the run id and config merged in.
pub fn write_artifact(path: &Path, config: &Value, body: Value) -> Res<()> {
    let mut m = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("data".into(), other);
            m
        }
    };
    m.insert("run_id".into(), Value::String(run_id(config)));
    m.insert("config".into(), config.clone());
    let text = serde_json::to_string_pretty(&Value::Object(m)).context("serializing artifact")?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn cert_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "points".into());
    out.with_file_name(format!("{stem}.cert.json"))
}

pub struct Input {
    pub set: PointSet,
    pub grid_n: Option<usize>,
    pub digest: String,
}

pub fn load_input(path: &Path) -> Res<Input> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    let grid_n = v.get("grid_n").and_then(Value::as_u64).map(|x| x as usize);
    let set: PointSet = serde_json::from_value(v)
        .map_err(|e| Failure::Usage(format!("{} is not a point set: {e}", path.display())))?;
    Ok(Input { set, grid_n, digest: digest(&bytes) })
}

pub fn read_json(path: &Path) -> Res<Value> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?)
}

/// JSON-lines record of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Record {
    pub run_id: String,
    pub status: String,
    pub config: Value,
    pub rows: Vec<Row>,
    pub result: Value,
}

pub const CSV_HEADER: [&str; 9] = ["run_id", "command", "d", "n", "alpha_or_eps", "seed", "metric", "value", "config"];

fn scalar(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

pub fn csv_lines(rec: &Record) -> Vec<[String; 9]> {
    let c = &rec.config;
    let param = c.get("alpha").or_else(|| c.get("eps"));
    let base_n = scalar(c.get("n"));
    let cfg = canonical(c);
    let status = row("status", &rec.status);
    std::iter::once(&status)
        .chain(&rec.rows)
        .map(|r| {
            [
                rec.run_id.clone(),
                scalar(c.get("command")),
                scalar(c.get("d")),
                r.n.clone().unwrap_or_else(|| base_n.clone()),
                scalar(param),
                scalar(c.get("seed")),
                r.metric.clone(),
                r.value.clone(),
                cfg.clone(),
            ]
        })
        .collect()
}

pub fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Run ids already present in a report.
pub fn known_runs(path: &Path) -> Res<Vec<String>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    if is_csv(path) {
        let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        let mut ids = Vec::new();
        for r in rdr.records() {
            let r = r.with_context(|| format!("reading {}", path.display()))?;
            if let Some(id) = r.get(0) {
                ids.push(id.to_string());
            }
        }
        Ok(ids)
    } else {
        Ok(read_records(path)?.into_iter().map(|r| r.run_id).collect())
    }
}

pub fn read_records(path: &Path) -> Res<Vec<Record>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Failure::Usage(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Appends a run unless its id is already there, so reruns leave the file
/// untouched. Returns whether anything was written.
pub fn append(path: &Path, rec: &Record) -> Res<bool> {
    if known_runs(path)?.contains(&rec.run_id) {
        return Ok(false);
    }
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if is_csv(path) {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            w.write_record(CSV_HEADER).context("writing csv")?;
        }
        for line in csv_lines(rec) {
            w.write_record(&line).context("writing csv")?;
        }
        w.flush().context("writing csv")?;
    } else {
        use std::io::Write;
        let mut file = file;
        let line = serde_json::to_string(rec).context("serializing record")?;
        writeln!(file, "{line}").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(true)
}
