mod cli;
mod generate;
mod measure;
mod run;
mod summary;
mod sweep;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use cli::{Cli, Command};
use run::{append, run_id, Failure, Outcome, Record, Res, EXIT_PASS};

fn threads(flag: Option<usize>) -> Res<Option<usize>> {
    match std::env::var("OSC_THREADS") {
        Ok(s) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!("OSC_THREADS must be a positive integer, got {s:?}"))),
        },
        _ => match flag {
            Some(0) => Err(Failure::Usage("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn finish(out: Outcome, report: Option<&std::path::Path>) -> Res<i32> {
    let rec = Record {
        run_id: run_id(&out.config),
        status: out.status.label().to_string(),
        config: out.config,
        rows: out.rows,
        result: out.result,
    };
    let appended = match report {
        Some(p) => Some(append(p, &rec)?),
        None => None,
    };
    let mut body = serde_json::to_value(&rec).expect("serializable");
    body.as_object_mut().unwrap().remove("rows");
    if let Some(a) = appended {
        body["report_appended"] = json!(a);
    }
    println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
    Ok(out.status.code())
}

fn dispatch(cli: &Cli) -> Res<i32> {
    if let Some(n) = threads(cli.threads)? {
        oscgeom::par::set_threads(n);
    }
    match &cli.command {
        Command::Generate(a) => finish(generate::generate(a)?, a.report.as_deref()),
        Command::Certify(a) => finish(generate::certify(a)?, a.report.as_deref()),
        Command::Measure(m) => {
            let report = match m {
                cli::Measure::MaxConvex { common, .. }
                | cli::Measure::Stretch { common, .. }
                | cli::Measure::Lines { common, .. }
                | cli::Measure::Facets { common, .. }
                | cli::Measure::Hitprob { common, .. }
                | cli::Measure::Extract { common, .. } => common.report.clone(),
            };
            finish(measure::measure(m)?, report.as_deref())
        }
        Command::Sweep(a) => finish(sweep::sweep(a)?, a.report.as_deref()),
        Command::Report(a) => {
            let v = summary::report(a)?;
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = dispatch(&cli).unwrap_or_else(|f| {
        println!("{}", serde_json::to_string_pretty(&f.to_json()).expect("serializable"));
        eprintln!("oscgeom: {}", f.to_json()["status"].as_str().unwrap_or("error"));
        f.code()
    });
    ExitCode::from(code as u8)
}
