use std::path::Path;

use num_traits::ToPrimitive;
use oscgeom::convexsearch::{
    max_convex_exact, max_convex_heuristic, max_convex_planar, ConvexSubsetReport, DEFAULT_EXACT_CAP,
};
use oscgeom::denseset::{
    estimate_hit_probability, extract_convex_slice_report, facet_analysis, grid_point, line_trace, surface_area_check,
};
use oscgeom::oscillator::{min_stretch_with_budget, stretch_lower_bound, StretchMode, StretchQuery};
use oscgeom::{Error, PointSet};
use serde_json::{json, Value};

use crate::cli::{Measure, Method, Mode};
use crate::run::{load_input, path_str, row, write_artifact, Failure, Input, Outcome, Res, Row, Status};

/// |Q| / n^((d-1)/(d+1)).
pub fn beta_hat(size: usize, n: usize, d: usize) -> f64 {
    size as f64 / (n as f64).powf((d as f64 - 1.0) / (d as f64 + 1.0))
}

fn base_config(metric: &str, input: &Input) -> Value {
    json!({
        "command": format!("measure {metric}"),
        "input": input.digest,
        "d": input.set.d(),
        "n": input.set.len(),
    })
}

fn lattice_coords(p: &PointSet) -> Res<Vec<Vec<i64>>> {
    p.iter()
        .map(|q| {
            q.coords
                .iter()
                .map(|c| {
                    if c.is_integer() {
                        c.to_integer().to_i64()
                    } else {
                        None
                    }
                })
                .collect::<Option<Vec<i64>>>()
                .ok_or_else(|| Failure::Usage(format!("point {q} does not have integer coordinates")))
        })
        .collect()
}

fn grid_side(flag: Option<i64>, input: &Input, pts: &[Vec<i64>]) -> i64 {
    flag.or(input.grid_n.map(|n| n as i64))
        .unwrap_or_else(|| pts.iter().flatten().copied().max().unwrap_or(1).max(1))
}

fn put(config: &mut Value, key: &str, v: Value) {
    config[key] = v;
}

fn convex_rows(r: &ConvexSubsetReport) -> Vec<Row> {
    vec![
        row("size", r.size),
        row("exact", r.exact as u8),
        row("beta_hat", beta_hat(r.size, r.n, r.d)),
    ]
}

pub fn measure(m: &Measure) -> Res<Outcome> {
    match m {
        Measure::MaxConvex { common, method, seeds, witness } => {
            let input = load_input(&common.input)?;
            let p = &input.set;
            let mut config = base_config("max-convex", &input);
            let chosen = match method {
                Method::Auto if p.d() == 2 => Method::PlanarDp,
                Method::Auto if p.len() <= DEFAULT_EXACT_CAP => Method::Exact,
                Method::Auto => Method::Heuristic,
                other => *other,
            };
            let label = match chosen {
                Method::Exact => "exact",
                Method::PlanarDp => "planar-dp",
                _ => "heuristic",
            };
            put(&mut config, "method", json!(label));
            if chosen == Method::Heuristic {
                put(&mut config, "seeds", json!(seeds));
            }
            if let Some(w) = witness {
                put(&mut config, "witness", json!(path_str(w)));
            }
            let r = match chosen {
                Method::Exact => max_convex_exact(p)?,
                Method::PlanarDp => max_convex_planar(p)?,
                _ => max_convex_heuristic(p, *seeds)?,
            };
            if let Some(w) = witness {
                write_witness(w, &config, &input, &r.indices)?;
            }
            Ok(Outcome {
                rows: convex_rows(&r),
                result: json!({"method": r.method, "size": r.size, "exact": r.exact, "indices": r.indices}),
                config,
                status: Status::Pass,
            })
        }
        Measure::Stretch { common, k, mode, budget } => {
            let input = load_input(&common.input)?;
            let p = input.set.sorted();
            let mut config = base_config("stretch", &input);
            let smode = match mode {
                Mode::Cupcap => StretchMode::CupOrCap,
                Mode::Ci => StretchMode::ConvexIndependent,
            };
            put(&mut config, "k", json!(k));
            put(&mut config, "mode", json!(smode));
            if let Some(b) = budget {
                put(&mut config, "budget", json!(b));
            }
            let bound = (p.d() >= 2).then(|| stretch_lower_bound(p.d(), *k, smode));
            let q = StretchQuery { points: p, k: *k, mode: smode };
            match min_stretch_with_budget(&q, budget.unwrap_or(u64::MAX)) {
                Ok(r) => {
                    let mut rows = vec![row("stretch", r.stretch), row("nodes", r.nodes)];
                    if let Some(b) = bound {
                        rows.push(row("lower_bound", b));
                    }
                    Ok(Outcome { rows, result: json!({"stretch": r, "lower_bound": bound}), config, status: Status::Pass })
                }
                Err(Error::Budget { what, partial }) => {
                    let mut rows = vec![row("partial", 1)];
                    if let Some(v) = partial {
                        rows.push(row("stretch_partial_bound", v));
                    }
                    Ok(Outcome {
                        rows,
                        result: json!({"partial": true, "what": what, "partial_bound": partial}),
                        config,
                        status: Status::Partial,
                    })
                }
                Err(e) => Err(e.into()),
            }
        }
        Measure::Lines { common, n, cutoff } => {
            let input = load_input(&common.input)?;
            let pts = lattice_coords(&input.set)?;
            let side = grid_side(*n, &input, &pts);
            let mut config = base_config("lines", &input);
            put(&mut config, "grid_n", json!(side));
            put(&mut config, "cutoff", json!(cutoff));
            let t = line_trace(&pts, input.set.d(), side, *cutoff)?;
            let rows = vec![
                row("lines_total", t.lines_total),
                row("lines_with_two_or_more", t.lines.len()),
                row("max_ratio", t.max_ratio),
            ];
            Ok(Outcome {
                rows,
                result: json!({
                    "lines_total": t.lines_total,
                    "lines_with_two_or_more": t.lines.len(),
                    "max_ratio": t.max_ratio,
                    "argmax": t.argmax,
                }),
                config,
                status: Status::Pass,
            })
        }
        Measure::Facets { common, n, out } => {
            let input = load_input(&common.input)?;
            let pts = lattice_coords(&input.set)?;
            let side = grid_side(*n, &input, &pts);
            let mut config = base_config("facets", &input);
            put(&mut config, "grid_n", json!(side));
            if let Some(o) = out {
                put(&mut config, "out", json!(path_str(o)));
            }
            let recs = facet_analysis(&input.set)?;
            let chk = surface_area_check(&recs, input.set.d(), side as u64);
            if let Some(o) = out {
                write_artifact(o, &config, json!({"facets": recs, "surface_area": chk}))?;
            }
            let rows = vec![
                row("facets", recs.len()),
                row("surface_lhs_lower", chk.lhs_lower),
                row("surface_lhs_upper", chk.lhs_upper),
                row("surface_rhs", chk.rhs),
                row("surface_holds", chk.holds as u8),
            ];
            let status = if chk.holds { Status::Pass } else { Status::Fail };
            Ok(Outcome { rows, result: json!({"facets": recs.len(), "surface_area": chk}), config, status })
        }
        Measure::Hitprob { common, alpha, samples, seed } => {
            let input = load_input(&common.input)?;
            let mut config = base_config("hitprob", &input);
            put(&mut config, "alpha", json!(alpha));
            put(&mut config, "samples", json!(samples));
            put(&mut config, "seed", json!(seed));
            let h = estimate_hit_probability(&input.set, *alpha, *samples, *seed)?;
            let rows = vec![
                row("estimate", h.estimate),
                row("lower", h.lower),
                row("upper", h.upper),
                row("hits", h.hits),
            ];
            Ok(Outcome { rows, result: serde_json::to_value(&h).expect("serializable"), config, status: Status::Pass })
        }
        Measure::Extract { common, alpha, trials, seed, out } => {
            let input = load_input(&common.input)?;
            let p = &input.set;
            let mut config = base_config("extract", &input);
            put(&mut config, "alpha", json!(alpha));
            put(&mut config, "trials", json!(trials));
            put(&mut config, "seed", json!(seed));
            if let Some(o) = out {
                put(&mut config, "out", json!(path_str(o)));
            }
            let r = extract_convex_slice_report(p, *alpha, *trials, *seed)?;
            if let Some(o) = out {
                write_witness(o, &config, &input, &r.indices)?;
            }
            let beta = beta_hat(r.size, p.len(), p.d());
            let rows = vec![
                row("size", r.size),
                row("beta_hat", beta),
                row("raw_size", r.raw_size),
                row("apex_count", r.apex_count),
                row("r", r.r),
                row("h", r.h),
                row("delta", r.delta),
                row("separated", r.separated as u8),
            ];
            let mut result = serde_json::to_value(&r).expect("serializable");
            result["beta_hat"] = json!(beta);
            Ok(Outcome { rows, result, config, status: Status::Pass })
        }
    }
}

/// Selected subset, in grid coordinates when the input is a grid.
fn write_witness(path: &Path, config: &Value, input: &Input, idx: &[usize]) -> Res<()> {
    let d = input.set.d();
    let (set, extra) = match input.grid_n {
        Some(n) => {
            let pts: Vec<Vec<i64>> = idx.iter().map(|&i| grid_point(i, d, n)).collect();
            (PointSet::from_ints(d, &pts)?, json!({"kind": "grid-witness", "grid_n": n}))
        }
        None => (input.set.select(idx), json!({"kind": "witness"})),
    };
    let mut body = serde_json::to_value(&set).expect("serializable");
    if let (Value::Object(m), Value::Object(e)) = (&mut body, extra) {
        m.extend(e);
        m.insert("indices".into(), json!(idx));
    }
    write_artifact(path, config, body)
}
