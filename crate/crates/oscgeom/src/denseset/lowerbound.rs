//! Randomized ball-slice extraction of convex independent subsets.
//!
//! Poses and slice membership are computed in floating point on a
//! normalized copy of the input; the returned subset is re-verified with
//! exact predicates on the original coordinates.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::combin::for_each_subset;
use crate::error::{Error, Result};
use crate::exactgeom::{f64_to_dyadic, is_convex_independent, OrientationTable, PointSet, RatPoint, Rational};
use crate::oscillator::rng_for;
use crate::par;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pose {
    pub z: Vec<f64>,
    /// Rows of the rotation; column i is the image of e_i.
    pub rho: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceFrame {
    pub d: usize,
    pub r: f64,
    pub h: f64,
    pub delta: f64,
    pub apexes: Vec<Vec<f64>>,
    pub pose: Option<Pose>,
}

impl SliceFrame {
    pub fn min_apex_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.apexes.len() {
            for j in i + 1..self.apexes.len() {
                best = best.min(dist(&self.apexes[i], &self.apexes[j]));
            }
        }
        best
    }

    /// Slice index containing the frame-local point u, if any.
    pub fn slice_of(&self, u: &[f64]) -> Option<usize> {
        if norm(u) >= self.r {
            return None;
        }
        let t = self.r - self.h;
        self.apexes.iter().position(|v| dot(u, v) > t)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let l = norm(&v);
    v.iter_mut().for_each(|x| *x /= l);
    v
}

/// Uniform point in the ball of radius `radius`.
fn uniform_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    let dir = unit(gaussian_vec(rng, d));
    let s: f64 = rng.random::<f64>().powf(1.0 / d as f64) * radius;
    dir.into_iter().map(|x| x * s).collect()
}

/// Haar-random rotation: Gram-Schmidt on a Gaussian frame, with the first
/// column negated if the determinant comes out negative.
fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = gaussian_vec(rng, d);
        for c in &cols {
            let t = dot(&v, c);
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= t * y);
        }
        let l = norm(&v);
        if l > 1e-9 {
            cols.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    let mut m: Vec<Vec<f64>> = (0..d).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    if det(&m) < 0.0 {
        m.iter_mut().for_each(|row| row[0] = -row[0]);
    }
    m
}

fn det(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    let mut a = m.to_vec();
    let mut acc = 1.0;
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            acc = -acc;
        }
        acc *= a[c][c];
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for cc in c..k {
                a[r][cc] -= f * a[c][cc];
            }
        }
    }
    acc
}

/// Ball radius, slice height and apex separation for n points.
fn frame_sizes(d: usize, n: usize, alpha: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let df = d as f64;
    let r = alpha * nf.powf(1.0 / df);
    let h = alpha * nf.powf((1.0 - df) / (df * (df + 1.0)));
    let delta = nf.powf(-1.0 / (df + 1.0));
    (r, h, delta)
}

/// Greedy packing of unit apex directions at pairwise distance >= 2 delta.
pub fn pack_slices(d: usize, n: usize, alpha: f64) -> Result<SliceFrame> {
    if d < 2 || n < 2 || alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument("pack_slices needs d >= 2, n >= 2, alpha > 0".into()));
    }
    let (r, h, delta) = frame_sizes(d, n, alpha);
    // Caps of height h have angular radius theta with cos theta = 1 - h/r;
    // apexes 2 sin theta apart keep them disjoint. That is a little wider
    // than 2 delta.
    let cos_t = 1.0 - h / r;
    let sep = if cos_t <= 0.0 { 2.0 } else { (2.0 * delta).max(2.0 * (1.0 - cos_t * cos_t).sqrt()) };
    let apexes = if sep >= 2.0 {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        let mut f = e.clone();
        f[0] = -1.0;
        vec![e, f]
    } else if d == 2 {
        let step = 2.0 * (sep / 2.0).asin();
        let count = (2.0 * std::f64::consts::PI / step).floor() as usize;
        let step = 2.0 * std::f64::consts::PI / count as f64;
        (0..count).map(|i| vec![(i as f64 * step).cos(), (i as f64 * step).sin()]).collect()
    } else {
        greedy_sphere(d, sep)
    };
    Ok(SliceFrame { d, r, h, delta, apexes, pose: None })
}

/// Greedy selection from a dense quasi-uniform candidate cloud.
fn greedy_sphere(d: usize, sep: f64) -> Vec<Vec<f64>> {
    // Candidates per unit cap area of radius sep/4, capped for speed.
    let cap_est = (4.0 / sep).powi(d as i32 - 1) * 8.0;
    let count = (cap_est as usize).clamp(64, 200_000);
    let cands: Vec<Vec<f64>> = if d == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..count)
            .map(|i| {
                let y = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let rr = (1.0 - y * y).sqrt();
                let th = golden * i as f64;
                vec![rr * th.cos(), y, rr * th.sin()]
            })
            .collect()
    } else {
        let mut rng = rng_for(0, 0x6170_6578);
        (0..count).map(|_| unit(gaussian_vec(&mut rng, d))).collect()
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in cands {
        if out.iter().all(|a| dist(a, &c) >= sep) {
            out.push(c);
        }
    }
    out
}

/// Exact affine normalization: translate the point nearest the centroid to
/// the origin and scale so the minimum squared distance is at least 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Normalization {
    pub origin: usize,
    #[serde(with = "crate::exactgeom::rational_serde")]
    pub scale: Rational,
    #[serde(with = "crate::exactgeom::rational_serde")]
    pub min_dist_sq: Rational,
}

pub fn normalize(p: &PointSet) -> Result<(PointSet, Normalization)> {
    let n = p.len();
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    let fl = p.to_f64();
    let d = p.d();
    let centroid: Vec<f64> = (0..d).map(|k| fl.iter().map(|q| q[k]).sum::<f64>() / n as f64).collect();
    let origin = (0..n).min_by(|&a, &b| dist(&fl[a], &centroid).total_cmp(&dist(&fl[b], &centroid))).unwrap();
    let pairs = close_pairs(&fl);
    let min_dist_sq = pairs
        .iter()
        .map(|&(i, j)| p.point(i).dist_sq(p.point(j)))
        .min()
        .ok_or_else(|| Error::Precondition("no distinct pairs".into()))?;
    if min_dist_sq.is_zero() {
        return Err(Error::Precondition("repeated point".into()));
    }
    // Dyadic scale s with s^2 * min >= 1.
    let approx = 1.0 / crate::exactgeom::rational_to_f64(&min_dist_sq).sqrt();
    let mut scale = f64_to_dyadic(approx * (1.0 + 1e-9), 40);
    while &scale * &scale * &min_dist_sq < Rational::one() {
        scale *= Rational::new(BigInt::from(1025), BigInt::from(1024));
    }
    let o = p.point(origin).clone();
    let pts = p.iter().map(|q| RatPoint::new(q.sub(&o).into_iter().map(|x| x * &scale).collect())).collect();
    Ok((PointSet::new_unchecked(d, pts), Normalization { origin, scale, min_dist_sq }))
}

/// Pairs whose float distance is within a whisker of the float minimum.
/// Sweep along the first axis keeps it near linear for spread-out sets.
fn close_pairs(fl: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..fl.len()).collect();
    order.sort_by(|&a, &b| fl[a][0].total_cmp(&fl[b][0]));
    let mut best = f64::INFINITY;
    let mut cand: Vec<(usize, usize, f64)> = Vec::new();
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            if fl[j][0] - fl[i][0] > best * (1.0 + 1e-6) + 1e-300 {
                break;
            }
            let dd = dist(&fl[i], &fl[j]);
            if dd <= best * (1.0 + 1e-6) {
                cand.push((i.min(j), i.max(j), dd));
                best = best.min(dd);
            }
        }
    }
    cand.into_iter().filter(|t| t.2 <= best * (1.0 + 1e-6)).map(|t| (t.0, t.1)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtractReport {
    /// Indices into the input, increasing.
    pub indices: Vec<usize>,
    pub size: usize,
    pub trials: usize,
    pub best_trial: usize,
    /// Points picked by the best pose before exact repair.
    pub raw_size: usize,
    pub removed: Vec<usize>,
    /// The raw pick was convex independent without repair.
    pub raw_pass: bool,
    /// Every picked point lies on its own side of every slice hyperplane.
    pub separated: bool,
    pub r: f64,
    pub h: f64,
    pub delta: f64,
    pub apex_count: usize,
    pub seed: u64,
    pub pose: Option<Pose>,
}

pub fn extract_convex_slice(p: &PointSet, alpha: f64, trials: usize, seed: u64) -> Result<PointSet> {
    let rep = extract_convex_slice_report(p, alpha, trials, seed)?;
    Ok(p.select(&rep.indices))
}

pub fn extract_convex_slice_report(p: &PointSet, alpha: f64, trials: usize, seed: u64) -> Result<ExtractReport> {
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let d = p.d();
    let n = p.len();
    if n < 2 {
        return Ok(ExtractReport {
            indices: (0..n).collect(),
            size: n,
            trials,
            best_trial: 0,
            raw_size: n,
            removed: vec![],
            raw_pass: true,
            separated: true,
            r: 0.0,
            h: 0.0,
            delta: 0.0,
            apex_count: 0,
            seed,
            pose: None,
        });
    }
    let (norm_p, _) = normalize(p)?;
    let fl = norm_p.to_f64();
    let frame = pack_slices(d, n, alpha)?;
    let picks = par::map_range(trials, |t| {
        let mut rng = rng_for(seed, t as u64);
        let z = uniform_ball(&mut rng, d, 2.0 * frame.r);
        let rho = random_rotation(&mut rng, d);
        let chosen = pick(&frame, &fl, &z, &rho);
        (chosen, Pose { z, rho })
    });
    // Largest pick wins; ties go to the earliest trial.
    let (best_trial, (chosen, pose)) = picks
        .into_iter()
        .enumerate()
        .fold(None::<(usize, (Vec<(usize, usize)>, Pose))>, |acc, (t, c)| match acc {
            Some(a) if a.1 .0.len() >= c.0.len() => Some(a),
            _ => Some((t, c)),
        })
        .unwrap();
    let separated = check_separation(&frame, &fl, &pose, &chosen);
    let mut idx: Vec<usize> = chosen.iter().map(|c| c.1).collect();
    idx.sort_unstable();
    let raw_size = idx.len();
    let (kept, removed) = repair(p, idx);
    let (kept, removed) = if kept.is_empty() { (vec![0], removed) } else { (kept, removed) };
    Ok(ExtractReport {
        size: kept.len(),
        indices: kept,
        trials,
        best_trial,
        raw_size,
        raw_pass: removed.is_empty(),
        removed,
        separated,
        r: frame.r,
        h: frame.h,
        delta: frame.delta,
        apex_count: frame.apexes.len(),
        seed,
        pose: Some(pose),
    })
}

fn to_frame(x: &[f64], z: &[f64], rho: &[Vec<f64>]) -> Vec<f64> {
    // u = rho^T (x - z)
    let d = x.len();
    (0..d).map(|c| (0..d).map(|r| rho[r][c] * (x[r] - z[r])).sum()).collect()
}

/// Deepest point of each nonempty slice, as (slice, point).
fn pick(frame: &SliceFrame, fl: &[Vec<f64>], z: &[f64], rho: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut best: Vec<Option<(f64, usize)>> = vec![None; frame.apexes.len()];
    let r2 = frame.r * frame.r;
    for (i, x) in fl.iter().enumerate() {
        let u = to_frame(x, z, rho);
        if dot(&u, &u) >= r2 {
            continue;
        }
        if let Some(s) = frame.slice_of(&u) {
            let depth = dot(&u, &frame.apexes[s]);
            if best[s].is_none_or(|b| depth > b.0) {
                best[s] = Some((depth, i));
            }
        }
    }
    best.into_iter().enumerate().filter_map(|(s, b)| b.map(|b| (s, b.1))).collect()
}

fn check_separation(frame: &SliceFrame, fl: &[Vec<f64>], pose: &Pose, chosen: &[(usize, usize)]) -> bool {
    let t = frame.r - frame.h;
    let us: Vec<Vec<f64>> = chosen.iter().map(|c| to_frame(&fl[c.1], &pose.z, &pose.rho)).collect();
    chosen.iter().enumerate().all(|(a, &(s, _))| {
        us.iter().enumerate().all(|(b, u)| (dot(u, &frame.apexes[s]) > t) == (a == b))
    })
}

/// Greedy exact repair: while some (d+2)-subset is not in convex position,
/// drop the point the others enclose. Returns (kept, removed).
pub(crate) fn repair(p: &PointSet, mut idx: Vec<usize>) -> (Vec<usize>, Vec<usize>) {
    let d = p.d();
    let mut removed = Vec::new();
    loop {
        if idx.len() <= d || is_convex_independent(&p.select(&idx)) {
            if idx.len() <= d && !crate::exactgeom::is_affinely_general_position(&p.select(&idx)) {
                removed.push(idx.pop().unwrap());
                continue;
            }
            return (idx, removed);
        }
        let sub = p.select(&idx);
        let table = OrientationTable::new(&sub);
        let local: Vec<usize> = (0..idx.len()).collect();
        let mut victim = None;
        for_each_subset(&local, d + 1, |s| {
            if table.sign(s) == 0 {
                victim = Some(*s.last().unwrap());
                return false;
            }
            true
        });
        if victim.is_none() {
            for_each_subset(&local, d + 2, |s| {
                if !table.convex_position(s) {
                    victim = Some(enclosed(&table, s));
                    return false;
                }
                true
            });
        }
        let v = victim.expect("a failing subset exists");
        removed.push(idx.remove(v));
    }
}

/// In a (d+2)-subset with nonzero orientations that is not in convex
/// position, the point whose sign class is a singleton.
fn enclosed(table: &OrientationTable, q: &[usize]) -> usize {
    let k = q.len();
    let signs: Vec<i8> = (0..k)
        .map(|skip| {
            let sub: Vec<usize> = q.iter().enumerate().filter(|t| t.0 != skip).map(|t| *t.1).collect();
            table.sign(&sub) * if skip % 2 == 0 { 1 } else { -1 }
        })
        .collect();
    let pos = signs.iter().filter(|&&s| s > 0).count();
    let want = if pos == 1 { 1 } else { -1 };
    q[signs.iter().position(|&s| s == want).unwrap()]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HitEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub hits: usize,
    pub samples: usize,
    pub r: f64,
    pub h: f64,
}

/// Monte Carlo probability that a random pose of the apex-shifted slice
/// meets P, with a Wilson 95% interval.
pub fn estimate_hit_probability(p: &PointSet, alpha: f64, samples: usize, seed: u64) -> Result<HitEstimate> {
    if samples < 100 {
        return Err(Error::InvalidArgument("samples must be at least 100".into()));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let d = p.d();
    let n = p.len();
    let fl = if n >= 2 { normalize(p)?.0.to_f64() } else { vec![vec![0.0; d]; n] };
    let (r, h, _) = frame_sizes(d, n.max(1), alpha);
    let hits = par::map_range(samples, |t| {
        let mut rng = rng_for(seed, 0x4869_0000 + t as u64);
        let z = uniform_ball(&mut rng, d, 3.0 * r);
        let rho = random_rotation(&mut rng, d);
        fl.iter().any(|x| {
            let mut u = to_frame(x, &z, &rho);
            // shifted slice: |u + r e1| < r and u1 > -h
            if u[0] <= -h || u[0] >= 0.0 {
                return false;
            }
            u[0] += r;
            dot(&u, &u) < r * r
        })
    })
    .into_iter()
    .filter(|&b| b)
    .count();
    let (lower, upper) = wilson(hits, samples);
    Ok(HitEstimate { estimate: hits as f64 / samples as f64, lower, upper, hits, samples, r, h })
}

fn wilson(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let ph = k as f64 / nf;
    let den = 1.0 + z * z / nf;
    let c = (ph + z * z / (2.0 * nf)) / den;
    let w = z * (ph * (1.0 - ph) / nf + z * z / (4.0 * nf * nf)).sqrt() / den;
    ((c - w).max(0.0), (c + w).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_special_orthogonal() {
        let mut rng = rng_for(3, 0);
        for d in 2..5 {
            let m = random_rotation(&mut rng, d);
            assert!((det(&m) - 1.0).abs() < 1e-9);
            for i in 0..d {
                for j in 0..d {
                    let v: f64 = (0..d).map(|k| m[k][i] * m[k][j]).sum();
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn tiny_n_gives_antipodes() {
        let f = pack_slices(2, 2, 1.0).unwrap();
        assert!(f.apexes.len() >= 2);
        assert!(f.min_apex_distance() >= 2.0 * f.delta - 1e-12);
    }
}
