use oscgeom::cupcap::{is_regular, RegularVerdict};
use oscgeom::denseset::build_perturbed_grid;
use oscgeom::exactgeom::{format_rational, in_open_hull, is_convex_independent, is_general_position, parse_rational};
use oscgeom::oscillator::{build_oscillator_with, is_oscillator, BuildConfig, Certificate, OscillatorCert};
use oscgeom::PointSet;
use serde_json::{json, Value};

use crate::cli::{CertifyArgs, GenerateArgs, Kind, Property};
use crate::run::{cert_path, load_input, path_str, row, write_artifact, Outcome, Res, Status};

/// First failing node in depth-first order, children before the node itself.
fn first_failure(c: &OscillatorCert) -> Option<&OscillatorCert> {
    if c.pass {
        return None;
    }
    [&c.odd, &c.even, &c.projection]
        .into_iter()
        .flatten()
        .find_map(|ch| first_failure(ch))
        .or(if c.failed.is_some() { Some(c) } else { None })
}

pub fn failure_clause(cert: &Certificate) -> Option<Value> {
    first_failure(&cert.root).map(|n| {
        json!({
            "clause": n.failed,
            "dim": n.dim,
            "start": n.start,
            "step": n.step,
            "len": n.len,
        })
    })
}

fn with_points(set: &PointSet, extra: Value) -> Value {
    let mut v = serde_json::to_value(set).expect("point sets serialize");
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

pub fn generate(a: &GenerateArgs) -> Res<Outcome> {
    let eps = parse_rational(&a.eps)?;
    let cert_out = a.cert.clone().unwrap_or_else(|| cert_path(&a.out));
    let kind = match a.kind {
        Kind::Oscillator => "oscillator",
        Kind::Grid => "grid",
    };
    let config = json!({
        "command": "generate",
        "kind": kind,
        "d": a.d,
        "n": a.len,
        "eps": a.eps,
        "seed": a.seed,
        "out": path_str(&a.out),
        "cert": path_str(&cert_out),
    });
    match a.kind {
        Kind::Oscillator => {
            let built = build_oscillator_with(a.d, a.len, &BuildConfig::new(eps, a.seed))?;
            let cert = is_oscillator(&built.points);
            let failure = failure_clause(&cert);
            let nodes = cert.root.node_count();
            write_artifact(
                &a.out,
                &config,
                with_points(&built.points, json!({"kind": "oscillator", "levels": built.levels})),
            )?;
            write_artifact(
                &cert_out,
                &config,
                json!({
                    "property": "oscillator",
                    "pass": cert.pass(),
                    "failure": failure,
                    "nodes": nodes,
                    "certificate": cert.root,
                }),
            )?;
            let status = if cert.pass() { Status::Pass } else { Status::Fail };
            Ok(Outcome {
                rows: vec![row("points", built.points.len()), row("certified", cert.pass() as u8), row("certificate_nodes", nodes)],
                result: json!({"points": built.points.len(), "pass": cert.pass(), "failure": failure, "levels": built.levels}),
                config,
                status,
            })
        }
        Kind::Grid => {
            let grid = build_perturbed_grid(a.d, a.len, &eps, a.seed)?;
            write_artifact(&a.out, &config, with_points(&grid.points, json!({"kind": "grid", "grid_n": a.len})))?;
            let mut cert = serde_json::to_value(&grid).expect("grids serialize");
            if let Value::Object(m) = &mut cert {
                m.remove("points");
                m.insert("property".into(), json!("general-position"));
                m.insert("pass".into(), json!(true));
            }
            write_artifact(&cert_out, &config, cert)?;
            Ok(Outcome {
                rows: vec![
                    row("points", grid.points.len()),
                    row("certified", 1),
                    row("gp_exact", grid.general_position.exact as u8),
                    row("gp_subsets_checked", grid.general_position.subsets_checked),
                    row("lines_certified", grid.lines_certified),
                    row("margin_exp", grid.margin_exp),
                ],
                result: json!({
                    "points": grid.points.len(),
                    "pass": true,
                    "general_position": grid.general_position,
                    "lines_certified": grid.lines_certified,
                    "margin_exp": grid.margin_exp,
                    "rounds": grid.rounds,
                }),
                config,
                status: Status::Pass,
            })
        }
    }
}

pub fn certify(a: &CertifyArgs) -> Res<Outcome> {
    let input = load_input(&a.input)?;
    let p = &input.set;
    let prop = match a.property {
        Property::Oscillator => "oscillator",
        Property::GeneralPosition => "general-position",
        Property::ConvexIndependent => "convex-independent",
        Property::Regular => "regular",
    };
    let mut config = json!({
        "command": "certify",
        "property": prop,
        "input": input.digest,
        "d": p.d(),
        "n": p.len(),
    });
    if let Some(c) = &a.cert {
        config["cert"] = json!(path_str(c));
    }
    let (pass, failure, body) = match a.property {
        Property::Oscillator => {
            let cert = is_oscillator(p);
            let f = failure_clause(&cert);
            (cert.pass(), f, json!({"nodes": cert.root.node_count(), "certificate": cert.root}))
        }
        Property::GeneralPosition => (is_general_position(p), None, json!({})),
        Property::ConvexIndependent => {
            let bad = (0..p.len()).find_map(|i| {
                let rest: Vec<usize> = (0..p.len()).filter(|&j| j != i).collect();
                in_open_hull(p.point(i), &p.select(&rest)).map(|w| {
                    let idx: Vec<usize> = w.indices.iter().map(|&k| rest[k]).collect();
                    let coeffs: Vec<String> = w.coeffs.iter().map(format_rational).collect();
                    (i, idx, coeffs)
                })
            });
            match bad {
                Some((i, idx, coeffs)) => {
                    let f = json!({"point": i, "hull_indices": idx, "coefficients": coeffs});
                    (false, Some(f), json!({}))
                }
                None => (is_convex_independent(p), None, json!({})),
            }
        }
        Property::Regular => {
            let v = is_regular(p);
            let f = match v {
                RegularVerdict::Pass => None,
                other => Some(json!({"clause": format!("{other:?}")})),
            };
            (v.is_pass(), f, json!({}))
        }
    };
    let mut cert_body = json!({"property": prop, "pass": pass, "failure": failure});
    if let (Value::Object(m), Value::Object(b)) = (&mut cert_body, body) {
        m.extend(b);
    }
    if let Some(c) = &a.cert {
        write_artifact(c, &config, cert_body)?;
    }
    Ok(Outcome {
        rows: vec![row("pass", pass as u8)],
        result: json!({"property": prop, "pass": pass, "failure": failure}),
        config,
        status: if pass { Status::Pass } else { Status::Fail },
    })
}
