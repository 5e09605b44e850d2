//! Largest convex independent subsets: exhaustive search for tiny inputs,
//! an exact planar dynamic program, and a seeded heuristic for d >= 3.

use std::cmp::Ordering;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::combin::for_each_subset;
use crate::denseset::lowerbound::{extract_convex_slice_report, repair};
use crate::error::{Error, Result};
use crate::exactgeom::{integer_coords, is_convex_independent, OrientationTable, PointSet, RatPoint};
use crate::oscillator::rng_for;
use crate::par;

pub const DEFAULT_EXACT_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    PlanarDp,
    Heuristic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexSubsetReport {
    pub n: usize,
    pub d: usize,
    pub method: Method,
    /// Increasing indices into the input.
    pub indices: Vec<usize>,
    pub size: usize,
    /// True when `size` is the maximum, false for a lower bound.
    pub exact: bool,
    pub elapsed_ms: f64,
}

fn report(p: &PointSet, method: Method, mut indices: Vec<usize>, start: Instant) -> ConvexSubsetReport {
    indices.sort_unstable();
    ConvexSubsetReport {
        n: p.len(),
        d: p.d(),
        method,
        size: indices.len(),
        indices,
        exact: method != Method::Heuristic,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

pub fn max_convex_exact(p: &PointSet) -> Result<ConvexSubsetReport> {
    max_convex_exact_capped(p, DEFAULT_EXACT_CAP)
}

/// Branch and bound over include/exclude decisions with hereditary checks.
pub fn max_convex_exact_capped(p: &PointSet, cap: usize) -> Result<ConvexSubsetReport> {
    let start = Instant::now();
    let n = p.len();
    if n > cap {
        return Err(Error::InvalidArgument(format!("{n} points exceed the exhaustive cap of {cap}")));
    }
    let d = p.d();
    if n <= d + 1 {
        let (kept, _) = repair(p, (0..n).collect());
        return Ok(report(p, Method::Exact, kept, start));
    }
    let t = OrientationTable::new(p);
    if !t.all_nonzero() {
        return Err(Error::Degenerate("input is not in general position".into()));
    }
    let mut best: Vec<usize> = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    exact_dfs(&t, d, n, 0, &mut cur, &mut best);
    Ok(report(p, Method::Exact, best, start))
}

fn exact_dfs(t: &OrientationTable, d: usize, n: usize, next: usize, cur: &mut Vec<usize>, best: &mut Vec<usize>) {
    if cur.len() > best.len() {
        *best = cur.clone();
    }
    for x in next..n {
        if cur.len() + (n - x) <= best.len() {
            return;
        }
        // Only (d+2)-subsets through the new point need checking.
        let ok = cur.len() < d + 1
            || for_each_subset(cur, d + 1, |s| {
                let mut q = [0usize; 8];
                q[..d + 1].copy_from_slice(s);
                q[d + 1] = x;
                t.convex_position(&q[..d + 2])
            });
        if ok {
            cur.push(x);
            exact_dfs(t, d, n, x + 1, cur, best);
            cur.pop();
        }
    }
}

/// Direction of the edge from one point to another, with exact tie
/// resolution.
struct Edges {
    ic: Vec<Vec<BigInt>>,
    fl: Vec<[f64; 2]>,
}

impl Edges {
    fn delta(&self, e: u32) -> (BigInt, BigInt) {
        let (u, v) = unpack(e);
        (&self.ic[v][0] - &self.ic[u][0], &self.ic[v][1] - &self.ic[u][1])
    }

    /// 0 for directions in [0, pi), 1 for [pi, 2 pi).
    fn half_exact(dx: &BigInt, dy: &BigInt) -> u8 {
        if dy.is_positive() || (dy.is_zero() && dx.is_positive()) {
            0
        } else {
            1
        }
    }

    fn key(&self, e: u32) -> f64 {
        let (u, v) = unpack(e);
        let dx = self.fl[v][0] - self.fl[u][0];
        let dy = self.fl[v][1] - self.fl[u][1];
        let scale = self.fl[u][1].abs().max(self.fl[v][1].abs()).max(1.0);
        let half = if dy.abs() > 1e-9 * scale {
            u8::from(dy < 0.0)
        } else {
            let (ex, ey) = self.delta(e);
            Self::half_exact(&ex, &ey)
        };
        let a = dy.atan2(dx);
        if half == 0 {
            a.clamp(0.0, std::f64::consts::PI)
        } else {
            (if a < 0.0 { a + 2.0 * std::f64::consts::PI } else { a }).max(std::f64::consts::PI)
        }
    }
}

#[inline]
fn pack(u: usize, v: usize) -> u32 {
    ((u as u32) << 16) | v as u32
}

#[inline]
fn unpack(e: u32) -> (usize, usize) {
    ((e >> 16) as usize, (e & 0xffff) as usize)
}

const LANES: usize = 64;
const TIE_GAP: f64 = 1e-10;

/// Exact maximum convex subset in the plane by the angular-edge dynamic
/// program, 64 lowest vertices at a time.
pub fn max_convex_planar(p: &PointSet) -> Result<ConvexSubsetReport> {
    let start = Instant::now();
    if p.d() != 2 {
        return Err(Error::InvalidArgument(format!("planar search needs d = 2, got {}", p.d())));
    }
    let n = p.len();
    if n > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!("{n} points exceed the planar limit")));
    }
    if n <= 2 {
        return Ok(report(p, Method::PlanarDp, (0..n).collect(), start));
    }
    // Rank vertices by (y, x).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (p.point(a), p.point(b));
        pa.coords[1].cmp(&pb.coords[1]).then_with(|| pa.coords[0].cmp(&pb.coords[0]))
    });
    let ranked: Vec<&RatPoint> = order.iter().map(|&i| p.point(i)).collect();
    let edges = Edges {
        ic: integer_coords(&ranked, false),
        fl: ranked.iter().map(|q| {
            let f = q.to_f64();
            [f[0], f[1]]
        }).collect(),
    };
    let sorted = sort_edges(&edges, n)?;
    let chunks = n.div_ceil(LANES);
    let per_chunk = par::map_range(chunks, |c| chunk_best(&sorted, n, c * LANES));
    let mut best = (0u8, 0usize);
    for (raw, anchor) in per_chunk {
        if raw > best.0 {
            best = (raw, anchor);
        }
    }
    if best.0 == u8::MAX {
        return Err(Error::Budget { what: "convex chain longer than 253 points".into(), partial: Some(254) });
    }
    let witness = trace_anchor(&sorted, n, best.1);
    let idx = witness.into_iter().map(|r| order[r]).collect();
    Ok(report(p, Method::PlanarDp, idx, start))
}

fn sort_edges(edges: &Edges, n: usize) -> Result<Vec<u32>> {
    let mut keyed: Vec<(f64, u32)> = Vec::with_capacity(n * (n - 1));
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let e = pack(u, v);
                keyed.push((edges.key(e), e));
            }
        }
    }
    par::sort_unstable_by(&mut keyed, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    // Runs of near-equal float keys are reordered exactly.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < keyed.len() {
        let mut j = i + 1;
        while j < keyed.len() && keyed[j].0 - keyed[j - 1].0 < TIE_GAP {
            j += 1;
        }
        if j - i > 1 {
            runs.push((i, j));
        }
        i = j;
    }
    let fixed = par::map_slice(&runs, |&(i, j)| sort_run(edges, &keyed[i..j]));
    for (&(i, _), run) in runs.iter().zip(fixed) {
        for (slot, e) in keyed[i..].iter_mut().zip(run?) {
            slot.1 = e;
        }
    }
    Ok(keyed.into_iter().map(|t| t.1).collect())
}

fn sort_run(edges: &Edges, run: &[(f64, u32)]) -> Result<Vec<u32>> {
    let mut items: Vec<(u8, BigInt, BigInt, u32)> = run
        .iter()
        .map(|t| {
            let (dx, dy) = edges.delta(t.1);
            (Edges::half_exact(&dx, &dy), dx, dy, t.1)
        })
        .collect();
    let cmp = |a: &(u8, BigInt, BigInt, u32), b: &(u8, BigInt, BigInt, u32)| {
        a.0.cmp(&b.0).then_with(|| (&a.2 * &b.1).cmp(&(&a.1 * &b.2)))
    };
    items.sort_by(cmp);
    let mut s = 0;
    while s < items.len() {
        let mut t = s + 1;
        while t < items.len() && cmp(&items[s], &items[t]) == Ordering::Equal {
            t += 1;
        }
        check_parallel(items[s..t].iter().map(|x| x.3))?;
        s = t;
    }
    Ok(items.into_iter().map(|x| x.3).collect())
}

/// Parallel edges with a shared endpoint mean three collinear points.
fn check_parallel(group: impl Iterator<Item = u32>) -> Result<()> {
    let mut ends: Vec<usize> = group
        .flat_map(|e| {
            let (u, v) = unpack(e);
            [u, v]
        })
        .collect();
    ends.sort_unstable();
    if ends.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Degenerate("collinear triple among the input points".into()));
    }
    Ok(())
}

/// Best closed chain for anchors c..c+64, as (size + 1, anchor); the
/// anchor is counted at both ends of the cycle.
fn chunk_best(sorted: &[u32], n: usize, c: usize) -> (u8, usize) {
    let lanes = LANES.min(n - c);
    let mut dp = vec![[0u8; LANES]; n];
    for i in 0..lanes {
        dp[c + i][i] = 1;
    }
    for &e in sorted {
        let (u, v) = unpack(e);
        if u < c || v < c {
            continue;
        }
        let src = dp[u];
        let dst = &mut dp[v];
        // Lane i is live at v when v >= c + i.
        if v - c + 1 >= LANES {
            for i in 0..LANES {
                dst[i] = dst[i].max(src[i].saturating_add(u8::from(src[i] != 0)));
            }
        } else {
            for i in 0..=v - c {
                dst[i] = dst[i].max(src[i].saturating_add(u8::from(src[i] != 0)));
            }
        }
    }
    let mut best = (0u8, c);
    for i in 0..lanes {
        let v = dp[c + i][i];
        if v > best.0 {
            best = (v, c + i);
        }
    }
    best
}

/// Reruns one anchor with an event log and returns the cycle's vertices.
fn trace_anchor(sorted: &[u32], n: usize, a: usize) -> Vec<usize> {
    // events: (vertex, previous event)
    let mut events: Vec<(usize, usize)> = vec![(a, usize::MAX)];
    let mut len = vec![0u32; n];
    let mut at = vec![usize::MAX; n];
    len[a] = 1;
    at[a] = 0;
    for &e in sorted {
        let (u, v) = unpack(e);
        if u < a || v < a || len[u] == 0 {
            continue;
        }
        if len[u] + 1 > len[v] {
            len[v] = len[u] + 1;
            events.push((v, at[u]));
            at[v] = events.len() - 1;
        }
    }
    if len[a] <= 1 {
        return vec![a];
    }
    let mut out = Vec::new();
    let mut cur = events[at[a]].1;
    while cur != usize::MAX {
        out.push(events[cur].0);
        cur = events[cur].1;
    }
    out
}

/// Best of extractor seeds followed by greedy insertion and swaps; every
/// candidate is repaired exactly, so the result is a certified lower bound.
pub fn max_convex_heuristic(p: &PointSet, seeds: usize) -> Result<ConvexSubsetReport> {
    let start = Instant::now();
    let n = p.len();
    let d = p.d();
    if d < 2 {
        return Err(Error::InvalidArgument("heuristic search needs d >= 2".into()));
    }
    if n < 2 {
        return Ok(report(p, Method::Heuristic, (0..n).collect(), start));
    }
    let fl = p.to_f64();
    let runs = par::map_range(seeds.max(1), |s| -> Result<Vec<usize>> {
        let seed_set = extract_convex_slice_report(p, 1.0, 16, s as u64)?.indices;
        let grown = local_search(&fl, d, seed_set, s as u64);
        let (kept, _) = repair(p, grown);
        Ok(kept)
    });
    let mut best: Vec<usize> = Vec::new();
    for r in runs {
        let mut r = r?;
        r.sort_unstable();
        if r.len() > best.len() || (r.len() == best.len() && r < best) {
            best = r;
        }
    }
    debug_assert!(is_convex_independent(&p.select(&best)));
    Ok(report(p, Method::Heuristic, best, start))
}

/// Float orientation with a relative zero band: (det, |det| is clearly
/// nonzero).
fn orient_f64(fl: &[Vec<f64>], s: &[usize]) -> (f64, bool) {
    let base = &fl[s[0]];
    let mut m: Vec<Vec<f64>> = s[1..].iter().map(|&i| fl[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let scale: f64 = m.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
    let k = m.len();
    let mut det = 1.0;
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[piv][c] == 0.0 {
            return (0.0, false);
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            for cc in c..k {
                m[r][cc] -= f * m[c][cc];
            }
        }
    }
    (det, det.abs() > 1e-9 * scale)
}

/// Float test that q plus x stays in convex position, given q already is.
/// Near-degenerate subsets count as failures.
fn admits_f64(fl: &[Vec<f64>], d: usize, q: &[usize], x: usize) -> bool {
    if q.len() < d {
        return true;
    }
    let mut all: Vec<usize> = Vec::with_capacity(d + 2);
    let mut sub: Vec<usize> = Vec::with_capacity(d + 1);
    let flat = for_each_subset(q, d, |s| {
        all.clear();
        all.extend_from_slice(s);
        all.push(x);
        orient_f64(fl, &all).1
    });
    flat && (q.len() < d + 1
        || for_each_subset(q, d + 1, |s| {
            all.clear();
            all.extend_from_slice(s);
            all.push(x);
            let k = all.len();
            let mut pos = 0;
            for skip in 0..k {
                sub.clear();
                sub.extend(all.iter().enumerate().filter(|t| t.0 != skip).map(|t| *t.1));
                let (o, _) = orient_f64(fl, &sub);
                if (o > 0.0) == (skip % 2 == 0) {
                    pos += 1;
                }
            }
            pos != 1 && pos != k - 1
        }))
}

const SWAP_SAMPLE: usize = 48;

fn local_search(fl: &[Vec<f64>], d: usize, mut q: Vec<usize>, seed: u64) -> Vec<usize> {
    let n = fl.len();
    let mut rng = rng_for(seed, 0x6865_7572);
    // Far points first: they are the likeliest hull vertices.
    let centroid: Vec<f64> = (0..d).map(|k| fl.iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
    let far = |i: usize| -> f64 { fl[i].iter().zip(&centroid).map(|(a, b)| (a - b) * (a - b)).sum() };
    let mut cand: Vec<usize> = (0..n).collect();
    cand.shuffle(&mut rng);
    cand.sort_by(|&a, &b| far(b).total_cmp(&far(a)));
    let mut inside = vec![false; n];
    q.iter().for_each(|&i| inside[i] = true);
    for &x in &cand {
        if !inside[x] && admits_f64(fl, d, &q, x) {
            q.push(x);
            inside[x] = true;
        }
    }
    // One pass of one-out, two-in swaps over a sample of outside points.
    let mut i = 0;
    while i < q.len() {
        let pool: Vec<usize> = cand.iter().copied().filter(|&x| !inside[x]).collect();
        let sample: Vec<usize> = pool.choose_multiple(&mut rng, SWAP_SAMPLE).copied().collect();
        let mut trial = q.clone();
        let out = trial.remove(i);
        let mut added = Vec::new();
        for &x in &sample {
            if admits_f64(fl, d, &trial, x) {
                trial.push(x);
                added.push(x);
                if added.len() == 2 {
                    break;
                }
            }
        }
        if added.len() == 2 {
            inside[out] = false;
            added.iter().for_each(|&x| inside[x] = true);
            q = trial;
        }
        i += 1;
    }
    q
}
