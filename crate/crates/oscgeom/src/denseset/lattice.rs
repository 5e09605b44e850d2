//! Lattice facets of integer polytopes, the primitive-norm sequence and
//! lattice line traces.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combin::for_each_subset;
use crate::error::{Error, Result};
use crate::exactgeom::{det_bigint, PointSet, RatPoint, Rational};

/// Gram determinant det(B B^T) of d-1 integer vectors: the squared covolume
/// of the lattice they generate. Zero for a dependent family.
pub fn covolume_sq(basis: &[Vec<i64>]) -> BigInt {
    let k = basis.len();
    if k == 0 {
        return BigInt::from(1);
    }
    let gram: Vec<Vec<BigInt>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| basis[i].iter().zip(&basis[j]).map(|(a, b)| BigInt::from(*a) * b).sum())
                .collect()
        })
        .collect();
    det_bigint(gram)
}

fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Divides out the content and makes the first nonzero entry positive.
pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = gcd_all(v);
    if g == 0 {
        return v.to_vec();
    }
    let mut out: Vec<i64> = v.iter().map(|x| x / g).collect();
    if out.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        out.iter_mut().for_each(|x| *x = -*x);
    }
    out
}

/// Unimodular U with n U = (0, ..., 0, 1) for a primitive n, together with
/// its inverse. The first d-1 columns of U span the integer kernel of n.
fn unimodular_completion(n: &[i64]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let d = n.len();
    let mut a: Vec<i64> = n.to_vec();
    let mut u: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
    let mut ui = u.clone();
    loop {
        let nz: Vec<usize> = (0..d).filter(|&i| a[i] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let p = *nz.iter().min_by_key(|&&i| a[i].abs()).unwrap();
        for &i in &nz {
            if i == p {
                continue;
            }
            let q = a[i].div_euclid(a[p]);
            if q == 0 {
                continue;
            }
            a[i] -= q * a[p];
            for row in u.iter_mut() {
                row[i] -= q * row[p];
            }
            let ri = ui[i].clone();
            for (x, y) in ui[p].iter_mut().zip(&ri) {
                *x += q * y;
            }
        }
    }
    let p = (0..d).find(|&i| a[i] != 0).expect("nonzero normal");
    let last = d - 1;
    if p != last {
        a.swap(p, last);
        for row in u.iter_mut() {
            row.swap(p, last);
        }
        ui.swap(p, last);
    }
    if a[last] < 0 {
        for row in u.iter_mut() {
            row[last] = -row[last];
        }
        ui[last].iter_mut().for_each(|x| *x = -*x);
    }
    (u, ui)
}

/// Basis of the integer vectors orthogonal to a primitive normal.
pub fn kernel_basis(n: &[i64]) -> Vec<Vec<i64>> {
    let d = n.len();
    let (u, _) = unimodular_completion(n);
    (0..d - 1).map(|c| (0..d).map(|r| u[r][c]).collect()).collect()
}

/// Hull facet of a lattice point set together with its lattice data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetRecord {
    /// Every lattice point of the facet.
    pub facet_points: PointSet,
    /// Outward primitive normal (for a degenerate hull: first nonzero entry positive).
    pub primitive_normal: Vec<i64>,
    /// The facet lies on <normal, x> = offset.
    pub offset: i64,
    /// Basis of the facet lattice.
    pub basis: Vec<Vec<i64>>,
    /// Squared covolume of the facet lattice.
    pub n_f_sq: u64,
    pub n_f: f64,
    /// Area of the facet divided by its covolume.
    #[serde(with = "crate::exactgeom::rational_serde")]
    pub a_f: Rational,
    /// Number of input points on the facet.
    pub count: usize,
}

fn integer_points(c: &PointSet) -> Result<Vec<Vec<i64>>> {
    c.iter()
        .map(|p| {
            p.coords
                .iter()
                .map(|x| {
                    if !x.is_integer() {
                        return Err(Error::InvalidArgument(format!("non-integer coordinate {x}")));
                    }
                    x.to_integer()
                        .to_i64()
                        .ok_or_else(|| Error::InvalidArgument("coordinate out of range".into()))
                })
                .collect()
        })
        .collect()
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Normal of the hyperplane spanned by d-1 difference vectors in Z^d
/// (generalized cross product); zero when they are dependent.
fn cross(vs: &[Vec<i64>], d: usize) -> Vec<i64> {
    (0..d)
        .map(|j| {
            let minor: Vec<Vec<BigInt>> =
                vs.iter().map(|v| (0..d).filter(|&c| c != j).map(|c| BigInt::from(v[c])).collect()).collect();
            let m = det_bigint(minor);
            let m = if j % 2 == 0 { m } else { -m };
            m.to_i64().expect("small lattice coordinates")
        })
        .collect()
}

/// Convex hull of integer points in the plane, counterclockwise, no
/// collinear vertices.
fn hull2(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let turn = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Lattice data of the points of `pts` lying on <n, x> = c.
fn facet_record(all: &[Vec<i64>], on: &[usize], n: Vec<i64>, c: i64) -> Result<FacetRecord> {
    let d = n.len();
    let (u, ui) = unimodular_completion(&n);
    let basis: Vec<Vec<i64>> = (0..d - 1).map(|col| (0..d).map(|r| u[r][col]).collect()).collect();
    let origin = all[on[0]].clone();
    let coords = |x: &[i64]| -> Vec<i64> {
        let diff = sub(x, &origin);
        (0..d - 1).map(|r| dot(&ui[r], &diff)).collect()
    };
    let lat: Vec<Vec<i64>> = on.iter().map(|&i| coords(&all[i])).collect();
    let back = |l: &[i64]| -> Vec<i64> {
        let mut x = origin.clone();
        for (b, &t) in basis.iter().zip(l) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += t * bi;
            }
        }
        x
    };
    let (a_f, lattice_pts): (Rational, Vec<Vec<i64>>) = match d {
        2 => {
            let lo = lat.iter().map(|v| v[0]).min().unwrap();
            let hi = lat.iter().map(|v| v[0]).max().unwrap();
            (Rational::from_integer(BigInt::from(hi - lo)), (lo..=hi).map(|t| back(&[t])).collect())
        }
        3 => {
            let h = hull2(lat.iter().map(|v| (v[0], v[1])).collect());
            let twice: i64 = if h.len() < 3 {
                0
            } else {
                (0..h.len()).map(|i| {
                    let (a, b) = (h[i], h[(i + 1) % h.len()]);
                    a.0 * b.1 - a.1 * b.0
                }).sum()
            };
            let (x0, x1) = (lat.iter().map(|v| v[0]).min().unwrap(), lat.iter().map(|v| v[0]).max().unwrap());
            let (y0, y1) = (lat.iter().map(|v| v[1]).min().unwrap(), lat.iter().map(|v| v[1]).max().unwrap());
            let inside = |p: (i64, i64)| -> bool {
                match h.len() {
                    1 => p == h[0],
                    2 => {
                        let (a, b) = (h[0], h[1]);
                        (b.0 - a.0) * (p.1 - a.1) == (b.1 - a.1) * (p.0 - a.0)
                            && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0)
                            && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
                    }
                    _ => (0..h.len()).all(|i| {
                        let (a, b) = (h[i], h[(i + 1) % h.len()]);
                        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0
                    }),
                }
            };
            let mut pts = Vec::new();
            for x in x0..=x1 {
                for y in y0..=y1 {
                    if inside((x, y)) {
                        pts.push(back(&[x, y]));
                    }
                }
            }
            (Rational::new(BigInt::from(twice), BigInt::from(2)), pts)
        }
        _ => return Err(Error::InvalidArgument("facet analysis supports d = 2 and d = 3".into())),
    };
    let n_f_sq = covolume_sq(&basis).to_u64().expect("small covolume");
    let facet_points = PointSet::new(
        d,
        lattice_pts.iter().map(|v| RatPoint::from_ints(v)).collect(),
    )?;
    Ok(FacetRecord {
        facet_points,
        primitive_normal: n,
        offset: c,
        basis,
        n_f_sq,
        n_f: (n_f_sq as f64).sqrt(),
        a_f,
        count: on.len(),
    })
}

/// Facets of conv(C) for a lattice point set C in dimension 2 or 3, by
/// brute force over hyperplanes through d input points.
pub fn facet_analysis(c: &PointSet) -> Result<Vec<FacetRecord>> {
    let d = c.d();
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidArgument("facet analysis supports d = 2 and d = 3".into()));
    }
    if c.len() <= d {
        return Err(Error::TooFewPoints { need: d + 1, got: c.len() });
    }
    let pts = integer_points(c)?;
    let diffs: Vec<Vec<i64>> = pts[1..].iter().map(|p| sub(p, &pts[0])).collect();
    let rank = {
        let m: Vec<Vec<Rational>> = diffs
            .iter()
            .map(|v| v.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
            .collect();
        crate::exactgeom::rank_rational(m)
    };
    if rank < d {
        // Lower-dimensional hull: one record on a containing hyperplane.
        let n = degenerate_normal(&diffs, d, rank);
        let cst = dot(&n, &pts[0]);
        let on: Vec<usize> = (0..pts.len()).collect();
        return Ok(vec![facet_record(&pts, &on, n, cst)?]);
    }
    let idx: Vec<usize> = (0..pts.len()).collect();
    let mut seen: HashSet<(Vec<i64>, i64)> = HashSet::new();
    let mut found: BTreeMap<(Vec<i64>, i64), Vec<usize>> = BTreeMap::new();
    for_each_subset(&idx, d, |s| {
        let vs: Vec<Vec<i64>> = s[1..].iter().map(|&i| sub(&pts[i], &pts[s[0]])).collect();
        let n = cross(&vs, d);
        if n.iter().all(|&x| x == 0) {
            return true;
        }
        let mut n = primitive(&n);
        let cst = dot(&n, &pts[s[0]]);
        if seen.contains(&(n.clone(), cst)) || seen.contains(&(n.iter().map(|x| -x).collect(), -cst)) {
            return true;
        }
        let (mut above, mut below) = (false, false);
        for p in &pts {
            let v = dot(&n, p) - cst;
            above |= v > 0;
            below |= v < 0;
        }
        if above && below {
            seen.insert((n, cst));
            return true;
        }
        let mut cst = cst;
        if above {
            n.iter_mut().for_each(|x| *x = -*x);
            cst = -cst;
        }
        seen.insert((n.clone(), cst));
        let on: Vec<usize> = (0..pts.len()).filter(|&i| dot(&n, &pts[i]) == cst).collect();
        found.insert((n, cst), on);
        true
    });
    found.into_iter().map(|((n, cst), on)| facet_record(&pts, &on, n, cst)).collect()
}

/// Advances `v` through the box [lo, hi]^d in lexicographic order; false
/// once it wraps around.
fn odometer(v: &mut [i64], lo: i64, hi: i64) -> bool {
    let mut i = v.len();
    while i > 0 {
        i -= 1;
        if v[i] < hi {
            v[i] += 1;
            for x in v.iter_mut().skip(i + 1) {
                *x = lo;
            }
            return true;
        }
    }
    false
}

fn degenerate_normal(diffs: &[Vec<i64>], d: usize, rank: usize) -> Vec<i64> {
    if rank == d - 1 {
        // Any d-1 independent differences determine the normal.
        let mut chosen: Vec<Vec<i64>> = Vec::new();
        for v in diffs {
            let mut trial = chosen.clone();
            trial.push(v.clone());
            let m: Vec<Vec<Rational>> = trial
                .iter()
                .map(|w| w.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
                .collect();
            if crate::exactgeom::rank_rational(m) == trial.len() {
                chosen = trial;
            }
            if chosen.len() == d - 1 {
                break;
            }
        }
        return primitive(&cross(&chosen, d));
    }
    // Smallest primitive vector (by max-norm, then lexicographic) orthogonal
    // to every difference.
    for r in 1i64.. {
        let mut best: Option<Vec<i64>> = None;
        let mut v = vec![-r; d];
        loop {
            if v.iter().any(|x| x.abs() == r) && diffs.iter().all(|w| dot(w, &v) == 0) {
                let p = primitive(&v);
                if p == v && best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v.clone());
                }
            }
            if !odometer(&mut v, -r, r) {
                break;
            }
        }
        if let Some(b) = best {
            return b;
        }
    }
    unreachable!()
}

/// Result of comparing the facet area sum with the bound 2d(n-1)^(d-1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceAreaCheck {
    pub lhs_lower: f64,
    pub lhs_upper: f64,
    pub rhs: u64,
    pub holds: bool,
}

/// Sum of A_F n_F against 2d(n-1)^(d-1), decided with certified
/// square-root brackets.
pub fn surface_area_check(records: &[FacetRecord], d: usize, n: u64) -> SurfaceAreaCheck {
    let rhs = 2 * d as u64 * (n - 1).pow(d as u32 - 1);
    let rhs_r = Rational::from_integer(BigInt::from(rhs));
    let mut bits = 16usize;
    loop {
        let scale = BigInt::from(1) << bits;
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for r in records {
            // floor(sqrt(n_F^2 * 4^bits)) / 2^bits brackets n_F.
            let s = (BigInt::from(r.n_f_sq) << (2 * bits)).sqrt();
            let s_lo = Rational::new(s.clone(), scale.clone());
            let s_hi = Rational::new(s + 1, scale.clone());
            lo += &r.a_f * s_lo;
            hi += &r.a_f * s_hi;
        }
        if hi <= rhs_r || lo > rhs_r || bits > 512 {
            return SurfaceAreaCheck {
                lhs_lower: crate::exactgeom::rational_to_f64(&lo),
                lhs_upper: crate::exactgeom::rational_to_f64(&hi),
                rhs,
                holds: lo <= rhs_r,
            };
        }
        bits *= 2;
    }
}

/// First K entries of the sorted multiset of Euclidean norms of primitive
/// integer vectors, as exact squares.
pub fn u_sequence_sq(d: usize, k: usize) -> Vec<u64> {
    assert!(d >= 1);
    let mut r: i64 = 1;
    loop {
        let mut sq: Vec<u64> = Vec::new();
        let mut v = vec![-r; d];
        loop {
            let nsq: i64 = v.iter().map(|x| x * x).sum();
            if nsq > 0 && nsq <= r * r && gcd_all(&v) == 1 {
                sq.push(nsq as u64);
            }
            if !odometer(&mut v, -r, r) {
                break;
            }
        }
        // Every vector of norm <= r is inside the box, so the prefix up to
        // r^2 is complete.
        if sq.len() >= k {
            sq.sort_unstable();
            sq.truncate(k);
            return sq;
        }
        r *= 2;
    }
}

pub fn u_sequence(d: usize, k: usize) -> Vec<f64> {
    u_sequence_sq(d, k).into_iter().map(|s| (s as f64).sqrt()).collect()
}

/// Occupancy of one maximal lattice segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineCount {
    pub start: Vec<i64>,
    pub direction: Vec<i64>,
    pub len: usize,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineTrace {
    pub lines_total: u64,
    /// Segments holding at least two points of C.
    pub lines: Vec<LineCount>,
    pub max_ratio: f64,
    pub argmax: Option<LineCount>,
}

/// Primitive directions with entries in [-cutoff, cutoff], first nonzero
/// entry positive.
pub fn primitive_directions(d: usize, cutoff: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![-cutoff; d];
    loop {
        if v.iter().any(|&x| x != 0) && gcd_all(&v) == 1 && primitive(&v) == v {
            out.push(v.clone());
        }
        if !odometer(&mut v, -cutoff, cutoff) {
            return out;
        }
    }
}

/// Counts of C on every maximal lattice segment of [n]^d (length >= 2) in
/// the primitive directions up to `cutoff`. C is given by grid coordinates
/// in 1..=n.
pub fn line_trace(c: &[Vec<i64>], d: usize, n: i64, cutoff: i64) -> Result<LineTrace> {
    let mut members: HashSet<Vec<i64>> = HashSet::with_capacity(c.len());
    for p in c {
        if p.len() != d || p.iter().any(|&x| x < 1 || x > n) {
            return Err(Error::InvalidArgument(format!("{p:?} is not a point of the grid")));
        }
        if !members.insert(p.clone()) {
            return Err(Error::Precondition(format!("grid point {p:?} appears twice")));
        }
    }
    let dirs = primitive_directions(d, cutoff);
    let in_grid = |p: &[i64]| p.iter().all(|&x| (1..=n).contains(&x));
    let per_dir: Vec<(u64, Vec<LineCount>)> = crate::par::map_slice(&dirs, |v| {
        let mut total = 0u64;
        let mut hits = Vec::new();
        // Maximal segments start at grid points whose predecessor is outside.
        let mut g = vec![1i64; d];
        loop {
            let prev: Vec<i64> = g.iter().zip(v).map(|(a, b)| a - b).collect();
            if !in_grid(&prev) {
                let mut len = 0usize;
                let mut count = 0usize;
                let mut p = g.clone();
                while in_grid(&p) {
                    len += 1;
                    if members.contains(&p) {
                        count += 1;
                    }
                    p.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                }
                if len >= 2 {
                    total += 1;
                    if count >= 2 {
                        hits.push(LineCount { start: g.clone(), direction: v.clone(), len, count });
                    }
                }
            }
            if !odometer(&mut g, 1, n) {
                break;
            }
        }
        (total, hits)
    });
    let mut lines_total = 0;
    let mut lines = Vec::new();
    for (t, h) in per_dir {
        lines_total += t;
        lines.extend(h);
    }
    let ratio = |l: &LineCount| l.count as f64 / ((l.len + 1) as f64).log2();
    let argmax = lines.iter().max_by(|a, b| ratio(a).total_cmp(&ratio(b))).cloned();
    // Segments with at most one point still count toward the maximum.
    let floor = if c.is_empty() { 0.0 } else { 1.0 / ((n + 1) as f64).log2() };
    let max_ratio = argmax.as_ref().map_or(floor, |l| ratio(l).max(floor));
    Ok(LineTrace { lines_total, lines, max_ratio, argmax })
}
