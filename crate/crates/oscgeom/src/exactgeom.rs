//! Exact rational points, point sets and the basic predicates.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combin::{for_each_subset, Binomial};
use crate::error::{Error, Result};
use crate::par;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`. Decimal points are rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::ParseRational(s.to_string());
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter writing a rational as its `"p/q"` string.
pub mod rational_serde {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Large numerator or denominator: shift both down first.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 900).max(0);
    let shift_d = (db - 900).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

/// Dyadic rational closest below `x` with `bits` fractional bits.
pub fn f64_to_dyadic(x: f64, bits: u32) -> Rational {
    let scaled = (x * 2f64.powi(bits as i32)).floor();
    Rational::new(
        BigInt::from(scaled as i128),
        BigInt::one() << bits as usize,
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatPoint {
    pub coords: Vec<Rational>,
}

impl RatPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        RatPoint { coords }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        RatPoint::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(rational_to_f64).collect()
    }

    pub fn sub(&self, o: &RatPoint) -> Vec<Rational> {
        self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect()
    }

    pub fn dist_sq(&self, o: &RatPoint) -> Rational {
        self.coords
            .iter()
            .zip(&o.coords)
            .map(|(a, b)| {
                let t = a - b;
                &t * &t
            })
            .fold(Rational::zero(), |a, b| a + b)
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Finite ordered set of distinct points of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PointSetJson", into = "PointSetJson")]
pub struct PointSet {
    d: usize,
    points: Vec<RatPoint>,
}

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    d: usize,
    points: Vec<Vec<String>>,
}

impl TryFrom<PointSetJson> for PointSet {
    type Error = Error;
    fn try_from(j: PointSetJson) -> Result<Self> {
        let mut pts = Vec::with_capacity(j.points.len());
        for row in &j.points {
            let c: Result<Vec<Rational>> = row.iter().map(|s| parse_rational(s)).collect();
            pts.push(RatPoint::new(c?));
        }
        PointSet::new(j.d, pts)
    }
}

impl From<PointSet> for PointSetJson {
    fn from(p: PointSet) -> Self {
        PointSetJson {
            d: p.d,
            points: p
                .points
                .iter()
                .map(|q| q.coords.iter().map(format_rational).collect())
                .collect(),
        }
    }
}

impl PointSet {
    pub fn new(d: usize, points: Vec<RatPoint>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        for p in &points {
            if p.d() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.d() });
            }
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !seen.insert(p) {
                return Err(Error::DuplicatePoint(i));
            }
        }
        Ok(PointSet { d, points })
    }

    /// Skips the duplicate check; callers guarantee distinctness.
    pub(crate) fn new_unchecked(d: usize, points: Vec<RatPoint>) -> Self {
        PointSet { d, points }
    }

    pub fn from_ints(d: usize, pts: &[Vec<i64>]) -> Result<Self> {
        PointSet::new(d, pts.iter().map(|c| RatPoint::from_ints(c)).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[RatPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &RatPoint {
        &self.points[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RatPoint> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<RatPoint> {
        self.points
    }

    /// Points at the given positions, in the given order.
    pub fn select(&self, idx: &[usize]) -> PointSet {
        PointSet::new_unchecked(self.d, idx.iter().map(|&i| self.points[i].clone()).collect())
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        PointSet::new(self.d, pts)
    }

    /// Stable sort by first coordinate, then lexicographically.
    pub fn sorted(&self) -> PointSet {
        let mut pts = self.points.clone();
        pts.sort();
        PointSet::new_unchecked(self.d, pts)
    }

    pub fn is_sorted_by_first(&self) -> bool {
        self.points.windows(2).all(|w| w[0].coords[0] < w[1].coords[0])
    }

    pub fn position(&self, p: &RatPoint) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.to_f64()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json_like(self)
    }
}

// Compact writer so the core crate does not need serde_json at runtime.
fn serde_json_like(p: &PointSet) -> String {
    let rows: Vec<String> = p
        .points
        .iter()
        .map(|q| {
            let c: Vec<String> = q.coords.iter().map(|r| format!("\"{}\"", format_rational(r))).collect();
            format!("[{}]", c.join(","))
        })
        .collect();
    format!("{{\"d\":{},\"points\":[{}]}}", p.d, rows.join(","))
}

/// Integer coordinates obtained by clearing denominators.
///
/// With `uniform` every axis is scaled by the same factor (distances keep
/// their ratios); otherwise each axis gets its own least common multiple,
/// which still preserves every orientation sign and every vertical relation.
pub fn integer_coords(points: &[&RatPoint], uniform: bool) -> Vec<Vec<BigInt>> {
    if points.is_empty() {
        return Vec::new();
    }
    let d = points[0].d();
    let mut lcm = vec![BigInt::one(); d];
    for p in points {
        for (j, c) in p.coords.iter().enumerate() {
            if !c.denom().is_one() {
                lcm[j] = lcm[j].lcm(c.denom());
            }
        }
    }
    if uniform {
        let all = lcm.iter().fold(BigInt::one(), |a, b| a.lcm(b));
        lcm = vec![all; d];
    }
    points
        .iter()
        .map(|p| {
            p.coords
                .iter()
                .enumerate()
                .map(|(j, c)| c.numer() * (&lcm[j] / c.denom()))
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free elimination.
pub fn det_bigint(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    match n {
        0 => return BigInt::one(),
        1 => return m[0][0].clone(),
        2 => return &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        3 => {
            return &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
                - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
                + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
        }
        _ => {}
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let r = m[n - 1][n - 1].clone();
    if sign < 0 {
        -r
    } else {
        r
    }
}

/// Determinant of the edge vectors `p_i - p_0`.
pub fn orient_int(pts: &[&[BigInt]]) -> BigInt {
    let base = pts[0];
    let m: Vec<Vec<BigInt>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    det_bigint(m)
}

fn sign_of(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn check_dims(pts: &[&RatPoint], d: usize) -> Result<()> {
    for p in pts {
        if p.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.d() });
        }
    }
    Ok(())
}

/// Sign of the determinant of the edge vectors from the first point.
pub fn orientation(simplex: &[RatPoint]) -> Result<i8> {
    if simplex.is_empty() {
        return Err(Error::TooFewPoints { need: 1, got: 0 });
    }
    let d = simplex[0].d();
    let refs: Vec<&RatPoint> = simplex.iter().collect();
    check_dims(&refs, d)?;
    if simplex.len() != d + 1 {
        return Err(Error::InvalidArgument(format!(
            "orientation needs {} points in dimension {d}, got {}",
            d + 1,
            simplex.len()
        )));
    }
    let ic = integer_coords(&refs, false);
    let rows: Vec<&[BigInt]> = ic.iter().map(|r| r.as_slice()).collect();
    Ok(sign_of(&orient_int(&rows)))
}

/// Orientation signs of all (d+1)-subsets of a point set, by colex rank.
pub struct OrientationTable {
    n: usize,
    d: usize,
    binom: Binomial,
    signs: Vec<i8>,
}

impl OrientationTable {
    pub fn new(p: &PointSet) -> Self {
        let n = p.len();
        let d = p.d();
        let refs: Vec<&RatPoint> = p.iter().collect();
        let ic = integer_coords(&refs, false);
        let binom = Binomial::new(n.max(1), d + 2);
        let k = d + 1;
        // Subsets with maximum element j occupy a contiguous colex block.
        let blocks = par::map_range(n, |j| {
            let mut out = Vec::with_capacity(binom.get(j, k - 1) as usize);
            let items: Vec<usize> = (0..j).collect();
            let mut buf = vec![0usize; k];
            let mut tmp: Vec<(usize, i8)> = Vec::new();
            for_each_subset(&items, k - 1, |s| {
                buf[..k - 1].copy_from_slice(s);
                buf[k - 1] = j;
                let rows: Vec<&[BigInt]> = buf.iter().map(|&i| ic[i].as_slice()).collect();
                tmp.push((binom.rank(&buf), sign_of(&orient_int(&rows))));
                true
            });
            tmp.sort_unstable_by_key(|t| t.0);
            out.extend(tmp.into_iter().map(|t| t.1));
            out
        });
        let signs: Vec<i8> = blocks.into_iter().flatten().collect();
        OrientationTable { n, d, binom, signs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sign for an increasing (d+1)-index list.
    #[inline]
    pub fn sign(&self, subset: &[usize]) -> i8 {
        self.signs[self.binom.rank(subset)]
    }

    pub fn all_nonzero(&self) -> bool {
        self.signs.iter().all(|&s| s != 0)
    }

    /// For an increasing (d+2)-index list in general position: true iff none
    /// of the points lies inside the simplex of the others.
    pub fn convex_position(&self, q: &[usize]) -> bool {
        let k = self.d + 2;
        debug_assert_eq!(q.len(), k);
        let mut sub = [0usize; 8];
        let mut pos = 0usize;
        let mut neg = 0usize;
        let mut signs = [0i8; 8];
        for skip in 0..k {
            let mut t = 0;
            for (i, &x) in q.iter().enumerate() {
                if i != skip {
                    sub[t] = x;
                    t += 1;
                }
            }
            let s = self.sign(&sub[..k - 1]) * if skip % 2 == 0 { 1 } else { -1 };
            signs[skip] = s;
            if s > 0 {
                pos += 1;
            } else if s < 0 {
                neg += 1;
            }
        }
        pos + neg == k && pos != 1 && neg != 1
    }

    /// Convex independence of the points at `idx` (increasing).
    pub fn is_convex_independent_subset(&self, idx: &[usize]) -> bool {
        let ok = for_each_subset(idx, self.d + 1, |s| self.sign(s) != 0);
        if !ok {
            return false;
        }
        for_each_subset(idx, self.d + 2, |s| self.convex_position(s))
    }
}

pub fn is_general_position(p: &PointSet) -> bool {
    let d = p.d();
    if p.len() <= d {
        return true;
    }
    if d + 2 > 8 {
        return generic_rank_scan(p);
    }
    OrientationTable::new(p).all_nonzero()
}

fn generic_rank_scan(p: &PointSet) -> bool {
    let refs: Vec<&RatPoint> = p.iter().collect();
    let ic = integer_coords(&refs, false);
    let idx: Vec<usize> = (0..p.len()).collect();
    for_each_subset(&idx, p.d() + 1, |s| {
        let rows: Vec<&[BigInt]> = s.iter().map(|&i| ic[i].as_slice()).collect();
        !orient_int(&rows).is_zero()
    })
}

/// Rank of a rational matrix by Gaussian elimination.
pub fn rank_rational(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, piv);
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                for j in c..cols {
                    let v = &f * &m[r][j];
                    m[i][j] -= v;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Solves the square system `a x = b`; `None` when singular.
pub fn solve_rational(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = a.len();
    for c in 0..n {
        let piv = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, piv);
        b.swap(c, piv);
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let v = &f * &a[c][j];
                    a[i][j] -= v;
                }
                let v = &f * &b[c];
                b[i] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Every d+1 points affinely independent, tested by rank of edge vectors.
pub fn is_affinely_general_position(p: &PointSet) -> bool {
    let d = p.d();
    let idx: Vec<usize> = (0..p.len()).collect();
    let k = (d + 1).min(p.len());
    if k == 0 {
        return true;
    }
    for_each_subset(&idx, k, |s| {
        let base = p.point(s[0]);
        let m: Vec<Vec<Rational>> = s[1..].iter().map(|&i| p.point(i).sub(base)).collect();
        m.is_empty() || rank_rational(m) == k - 1
    })
}

/// max |a-b|^2 / min |a-b|^2 over pairs.
pub fn normalized_diameter_sq(p: &PointSet) -> Result<Rational> {
    let n = p.len();
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    let refs: Vec<&RatPoint> = p.iter().collect();
    let ic = integer_coords(&refs, true);
    let dsq = |i: usize, j: usize| -> BigInt {
        ic[i].iter().zip(&ic[j]).map(|(a, b)| {
            let t = a - b;
            &t * &t
        }).sum()
    };
    let (max, min) = if n <= 64 {
        let mut max = BigInt::zero();
        let mut min: Option<BigInt> = None;
        for i in 0..n {
            for j in i + 1..n {
                let v = dsq(i, j);
                if v > max {
                    max = v.clone();
                }
                if min.as_ref().is_none_or(|m| v < *m) {
                    min = Some(v);
                }
            }
        }
        (max, min.unwrap())
    } else {
        // Float screen, then exact on the candidates near either extreme.
        let f = p.to_f64();
        let fd = |i: usize, j: usize| -> f64 {
            f[i].iter().zip(&f[j]).map(|(a, b)| (a - b) * (a - b)).sum()
        };
        let per_row = par::map_range(n, |i| {
            let mut mx: f64 = 0.0;
            let mut mn = f64::INFINITY;
            for j in i + 1..n {
                let v = fd(i, j);
                mx = mx.max(v);
                mn = mn.min(v);
            }
            (mx, mn)
        });
        let fmax = per_row.iter().map(|t| t.0).fold(0.0, f64::max);
        let fmin = per_row.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        let hi = fmax * (1.0 - 1e-9);
        let lo = fmin * (1.0 + 1e-9) + 1e-300;
        let cands = par::map_range(n, |i| {
            let mut mx: Option<BigInt> = None;
            let mut mn: Option<BigInt> = None;
            for j in i + 1..n {
                let v = fd(i, j);
                if v >= hi {
                    let e = dsq(i, j);
                    if mx.as_ref().is_none_or(|m| e > *m) {
                        mx = Some(e);
                    }
                }
                if v <= lo {
                    let e = dsq(i, j);
                    if mn.as_ref().is_none_or(|m| e < *m) {
                        mn = Some(e);
                    }
                }
            }
            (mx, mn)
        });
        let max = cands.iter().filter_map(|c| c.0.clone()).max().unwrap();
        let min = cands.iter().filter_map(|c| c.1.clone()).min().unwrap();
        (max, min)
    };
    Ok(Rational::new(max, min))
}

/// Witness that a point lies in an open convex hull: positive weights over
/// a subset of the hull points that reproduce the point exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullWitness {
    pub indices: Vec<usize>,
    pub coeffs: Vec<Rational>,
}

impl HullWitness {
    pub fn reconstruct(&self, s: &PointSet) -> RatPoint {
        let d = s.d();
        let mut acc = vec![Rational::zero(); d];
        for (&i, c) in self.indices.iter().zip(&self.coeffs) {
            for (a, x) in acc.iter_mut().zip(&s.point(i).coords) {
                *a += c * x;
            }
        }
        RatPoint::new(acc)
    }
}

/// Barycentric coordinates of `p` in every nondegenerate simplex of `s`
/// that contains it (closed).
fn containing_simplices(p: &RatPoint, s: &PointSet) -> Vec<(Vec<usize>, Vec<Rational>)> {
    let d = s.d();
    let mut refs: Vec<&RatPoint> = s.iter().collect();
    refs.push(p);
    let ic = integer_coords(&refs, false);
    let pi = s.len();
    let lifted = |i: usize| -> Vec<BigInt> {
        let mut r = ic[i].clone();
        r.push(BigInt::one());
        r
    };
    let idx: Vec<usize> = (0..s.len()).collect();
    let mut out = Vec::new();
    for_each_subset(&idx, d + 1, |sub| {
        let m: Vec<Vec<BigInt>> = sub.iter().map(|&i| lifted(i)).collect();
        let det = det_bigint(m.clone());
        if det.is_zero() {
            return true;
        }
        let mut lam = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let mut mk = m.clone();
            mk[k] = lifted(pi);
            let v = Rational::new(det_bigint(mk), det.clone());
            if v.is_negative() {
                return true;
            }
            lam.push(v);
        }
        out.push((sub.to_vec(), lam));
        true
    });
    out
}

/// Interior membership in conv(S).
///
/// When `p` is interior, the average of the barycentric coordinates over
/// every simplex of `S` containing it has a positive support that spans the
/// space; a boundary point never does. The witness is that positive support.
pub fn in_open_hull(p: &RatPoint, s: &PointSet) -> Option<HullWitness> {
    let d = s.d();
    if p.d() != d || s.len() < d + 1 {
        return None;
    }
    let reps = containing_simplices(p, s);
    if reps.is_empty() {
        return None;
    }
    let mut acc = vec![Rational::zero(); s.len()];
    for (sub, lam) in &reps {
        for (&i, l) in sub.iter().zip(lam) {
            acc[i] += l;
        }
    }
    let count = Rational::from_integer(BigInt::from(reps.len()));
    let indices: Vec<usize> = (0..s.len()).filter(|&i| acc[i].is_positive()).collect();
    if indices.len() < d + 1 {
        return None;
    }
    let base = s.point(indices[0]);
    let m: Vec<Vec<Rational>> = indices[1..].iter().map(|&i| s.point(i).sub(base)).collect();
    if rank_rational(m) < d {
        return None;
    }
    let coeffs = indices.iter().map(|&i| &acc[i] / &count).collect();
    Some(HullWitness { indices, coeffs })
}

/// Closed membership in conv(S) (full-dimensional simplices only).
pub fn in_closed_hull(p: &RatPoint, s: &PointSet) -> bool {
    !containing_simplices(p, s).is_empty()
}

/// General position and every point a vertex of the hull.
pub fn is_convex_independent(p: &PointSet) -> bool {
    let d = p.d();
    if p.len() <= 1 {
        return true;
    }
    if d + 2 > 8 {
        if !generic_rank_scan(p) {
            return false;
        }
        return (0..p.len()).all(|i| {
            let rest: Vec<usize> = (0..p.len()).filter(|&j| j != i).collect();
            !in_closed_hull(p.point(i), &p.select(&rest))
        });
    }
    if p.len() <= d {
        // Fewer than d+1 points: only affine independence matters.
        return is_affinely_general_position(p);
    }
    let t = OrientationTable::new(p);
    let all: Vec<usize> = (0..p.len()).collect();
    t.is_convex_independent_subset(&all)
}

pub fn project_point(p: &RatPoint) -> Result<RatPoint> {
    if p.d() < 2 {
        return Err(Error::InvalidArgument("cannot project a 1-dimensional point".into()));
    }
    Ok(RatPoint::new(p.coords[..p.d() - 1].to_vec()))
}

/// Drops the last coordinate of every point.
pub fn project(p: &PointSet) -> Result<PointSet> {
    if p.d() < 2 {
        return Err(Error::InvalidArgument("cannot project a 1-dimensional set".into()));
    }
    let pts = p.iter().map(|q| RatPoint::new(q.coords[..p.d() - 1].to_vec())).collect();
    // Projections may collide; keep the order but do not dedup.
    Ok(PointSet::new_unchecked(p.d() - 1, pts))
}

pub fn height(p: &RatPoint) -> &Rational {
    &p.coords[p.d() - 1]
}
