use oscgeom::convexsearch::{max_convex_heuristic, max_convex_planar};
use oscgeom::denseset::{build_perturbed_grid, extract_convex_slice_report, loglog_fit, u_sequence};
use oscgeom::exactgeom::parse_rational;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cli::{parse_eps, SweepArgs};
use crate::run::{read_json, row, Failure, Outcome, Res, Row, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMetric {
    /// Mean extracted size on perturbed grids of each side length.
    Extract,
    /// Largest convex subset of perturbed grids (planar DP in 2D, heuristic above).
    MaxConvex,
    /// k-th norm of the primitive-vector sequence, k from `sizes`.
    USeq,
}

fn default_eps() -> String {
    "1/4".into()
}
fn default_alpha() -> f64 {
    2.0
}
fn default_trials() -> usize {
    64
}
fn default_seeds() -> Vec<u64> {
    vec![1]
}
fn default_grid_seed() -> u64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub metric: SweepMetric,
    pub d: usize,
    /// Grid sides, or K values for u-seq.
    pub sizes: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Extraction seeds to average over, or heuristic restarts (by count).
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_grid_seed")]
    pub grid_seed: u64,
}

pub fn sweep(a: &SweepArgs) -> Res<Outcome> {
    let raw = read_json(&a.spec)?;
    let spec: SweepSpec =
        serde_json::from_value(raw).map_err(|e| Failure::Usage(format!("bad sweep spec {}: {e}", a.spec.display())))?;
    if spec.sizes.len() < 3 {
        return Err(Failure::Usage(format!("a slope needs at least 3 sweep points, got {}", spec.sizes.len())));
    }
    if spec.seeds.is_empty() {
        return Err(Failure::Usage("seeds must not be empty".into()));
    }
    let eps = parse_rational(&parse_eps(&spec.eps).map_err(Failure::Usage)?)?;
    let d = spec.d;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut point_row = |n: usize, metric: &str, v: String| rows.push(Row { n: Some(n.to_string()), metric: metric.into(), value: v });
    let (expected, y_name) = match spec.metric {
        SweepMetric::USeq => (1.0 / d as f64, "u_k"),
        SweepMetric::Extract => ((d as f64 - 1.0) / (d as f64 + 1.0), "mean_size"),
        SweepMetric::MaxConvex => ((d as f64 - 1.0) / (d as f64 + 1.0), "size"),
    };
    let mut min_ratio = None;
    match spec.metric {
        SweepMetric::USeq => {
            let kmax = *spec.sizes.iter().max().unwrap();
            if kmax == 0 || spec.sizes.contains(&0) {
                return Err(Failure::Usage("K values must be positive".into()));
            }
            let u = u_sequence(d, kmax);
            for &k in &spec.sizes {
                xs.push(k as f64);
                ys.push(u[k - 1]);
                point_row(k, y_name, u[k - 1].to_string());
            }
            let m = (0..kmax).map(|i| u[i] / ((i + 1) as f64).powf(1.0 / d as f64)).fold(f64::INFINITY, f64::min);
            min_ratio = Some(m);
        }
        SweepMetric::Extract | SweepMetric::MaxConvex => {
            for &n in &spec.sizes {
                let g = build_perturbed_grid(d, n, &eps, spec.grid_seed)?;
                let y = if spec.metric == SweepMetric::Extract {
                    let mut total = 0usize;
                    for &s in &spec.seeds {
                        total += extract_convex_slice_report(&g.points, spec.alpha, spec.trials, s)?.size;
                    }
                    total as f64 / spec.seeds.len() as f64
                } else if d == 2 {
                    max_convex_planar(&g.points)?.size as f64
                } else {
                    max_convex_heuristic(&g.points, spec.seeds.len())?.size as f64
                };
                xs.push(g.points.len() as f64);
                ys.push(y);
                point_row(g.points.len(), y_name, y.to_string());
            }
        }
    }
    let fit = loglog_fit(&xs, &ys)?;
    for (x, r) in xs.iter().zip(&fit.residuals) {
        rows.push(Row { n: Some(x.to_string()), metric: "residual".into(), value: r.to_string() });
    }
    rows.push(row("slope", fit.slope));
    rows.push(row("intercept", fit.intercept));
    rows.push(row("expected_slope", expected));
    if let Some(m) = min_ratio {
        rows.push(row("min_u_ratio", m));
    }
    let spec_value = serde_json::to_value(&spec).expect("serializable");
    let config = json!({"command": "sweep", "d": d, "spec": spec_value});
    Ok(Outcome {
        rows,
        result: json!({"x": xs, "y": ys, "fit": fit, "expected_slope": expected, "min_u_ratio": min_ratio}),
        config,
        status: Status::Pass,
    })
}
