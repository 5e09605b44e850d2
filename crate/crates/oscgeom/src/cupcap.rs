//! Regular sets, generic pairs, the high-above relation and convex cups/caps.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combin::for_each_subset;
use crate::error::{Error, Result};
use crate::exactgeom::{
    det_bigint, height, in_open_hull, integer_coords, is_convex_independent, project, PointSet,
    RatPoint, Rational,
};
use crate::lift::Lifted;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegularVerdict {
    Pass,
    R1,
    R2,
    R3,
}

impl RegularVerdict {
    pub fn is_pass(self) -> bool {
        self == RegularVerdict::Pass
    }
}

/// Disjoint nonempty parts whose sizes add up to d+1.
#[derive(Clone, Debug)]
pub struct GenericPair {
    pub s: PointSet,
    pub t: PointSet,
}

impl GenericPair {
    pub fn new(s: PointSet, t: PointSet) -> Result<Self> {
        let d = s.d();
        if t.d() != d {
            return Err(Error::DimensionMismatch { expected: d, got: t.d() });
        }
        if s.is_empty() || t.is_empty() || s.len() + t.len() != d + 1 {
            return Err(Error::InvalidArgument(format!(
                "generic pair needs nonempty parts of total size {}, got {} + {}",
                d + 1,
                s.len(),
                t.len()
            )));
        }
        if s.iter().any(|p| t.position(p).is_some()) {
            return Err(Error::Precondition("parts of a generic pair overlap".into()));
        }
        Ok(GenericPair { s, t })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CupCapDecomposition {
    #[serde(rename = "C_A")]
    pub c_a: PointSet,
    #[serde(rename = "C_B")]
    pub c_b: PointSet,
    pub boundary: PointSet,
}

/// Precomputed split signs of every (d+1)-subset of a point set, for
/// repeated regularity, high-above and cup/cap queries on its subsets.
pub struct SplitTable {
    lifted: Lifted,
}

impl SplitTable {
    pub fn new(p: &PointSet) -> Self {
        SplitTable { lifted: Lifted::new(p, false) }
    }

    pub fn len(&self) -> usize {
        self.lifted.n
    }

    pub fn is_empty(&self) -> bool {
        self.lifted.n == 0
    }

    pub fn d(&self) -> usize {
        self.lifted.d
    }

    pub fn regular(&self, idx: &[usize]) -> RegularVerdict {
        let d = self.d();
        if !self.lifted.axis_injective(d, idx) {
            RegularVerdict::R1
        } else if !self.lifted.projection_general(d, idx) {
            RegularVerdict::R2
        } else if !self.lifted.transverse(d, idx) {
            RegularVerdict::R3
        } else {
            RegularVerdict::Pass
        }
    }

    /// Split of a (d+1)-subset: `None` when the projected spans are not
    /// transverse, else whether `s` lies above `t`.
    pub fn lies_above(&self, s: &[usize], t: &[usize]) -> Option<bool> {
        let d = self.d();
        debug_assert_eq!(s.len() + t.len(), d + 1);
        let mut q: Vec<usize> = s.iter().chain(t).copied().collect();
        q.sort_unstable();
        let mut mask = 0u64;
        for (pos, x) in q.iter().enumerate() {
            if s.contains(x) {
                mask |= 1 << pos;
            }
        }
        let r = self.lifted.rank(&q);
        let bit = 1u64 << mask;
        if self.lifted.degenerate_at(d, r) & bit != 0 {
            None
        } else {
            Some(self.lifted.above_at(d, r) & bit != 0)
        }
    }

    /// `a` high above `b` (index lists into the table's point set).
    pub fn high_above(&self, a: &[usize], b: &[usize]) -> bool {
        let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
        u.sort_unstable();
        if !self.regular(&u).is_pass() {
            return false;
        }
        let d = self.d();
        let mut in_a = vec![false; self.len()];
        for &i in a {
            in_a[i] = true;
        }
        for_each_subset(&u, d + 1, |q| {
            let mut mask = 0u64;
            for (pos, &x) in q.iter().enumerate() {
                if in_a[x] {
                    mask |= 1 << pos;
                }
            }
            if mask == 0 || mask == (1 << (d + 1)) - 1 {
                return true;
            }
            self.lifted.above_at(d, self.lifted.rank(q)) & (1u64 << mask) != 0
        })
    }

    /// For a (d+1)-subset: `(cup_ok, cap_ok)`, i.e. whether it violates the
    /// convex cup or the convex cap condition. Subsets where no point
    /// projects into the interior of the others are fine for both.
    pub fn cup_cap_flags(&self, q: &[usize]) -> (bool, bool) {
        let d = self.d();
        let w = self.lifted.weight_signs(d, q);
        let k = d + 1;
        let mut iso = None;
        for p in 0..k {
            if w[p] == 0 {
                return (false, false);
            }
            if (0..k).all(|j| j == p || w[j] == -w[p]) {
                iso = Some(p);
                break;
            }
        }
        let Some(p) = iso else { return (true, true) };
        let v = self.lifted.sign(d, q);
        // h(p) minus the interpolated height has the sign of V / w_p.
        let diff = v * w[p];
        (diff < 0, diff > 0)
    }

    pub fn is_cup(&self, idx: &[usize]) -> bool {
        for_each_subset(idx, self.d() + 1, |q| self.cup_cap_flags(q).0)
    }

    pub fn is_cap(&self, idx: &[usize]) -> bool {
        for_each_subset(idx, self.d() + 1, |q| self.cup_cap_flags(q).1)
    }
}

fn require_regular(p: &PointSet) -> Result<SplitTable> {
    let t = SplitTable::new(p);
    let all: Vec<usize> = (0..p.len()).collect();
    match t.regular(&all) {
        RegularVerdict::Pass => Ok(t),
        v => Err(Error::Precondition(format!("input is not regular (fails {v:?})"))),
    }
}

pub fn is_regular(p: &PointSet) -> RegularVerdict {
    if p.len() <= 1 {
        return RegularVerdict::Pass;
    }
    let all: Vec<usize> = (0..p.len()).collect();
    SplitTable::new(p).regular(&all)
}

/// Indices of the points whose projection is not interior to conv(pi(P)).
pub fn pi_boundary_indices(p: &PointSet) -> Result<Vec<usize>> {
    if p.d() < 2 {
        return Err(Error::InvalidArgument("projection needs d >= 2".into()));
    }
    let proj = project(p)?;
    let mut sorted = proj.points().to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("duplicate projections".into()));
    }
    if p.d() == 2 {
        // The projection is one-dimensional: only the two extremes.
        let (mut lo, mut hi) = (0, 0);
        for i in 0..p.len() {
            if proj.point(i) < proj.point(lo) {
                lo = i;
            }
            if proj.point(i) > proj.point(hi) {
                hi = i;
            }
        }
        let mut v = vec![lo];
        if hi != lo {
            v.push(hi);
        }
        v.sort_unstable();
        return Ok(v);
    }
    Ok((0..p.len()).filter(|&i| in_open_hull(proj.point(i), &proj).is_none()).collect())
}

pub fn pi_boundary(p: &PointSet) -> Result<PointSet> {
    Ok(p.select(&pi_boundary_indices(p)?))
}

/// Whether span(S) passes above span(T) at their vertically aligned points.
pub fn lies_above(s: &PointSet, t: &PointSet) -> Result<bool> {
    let pair = GenericPair::new(s.clone(), t.clone())?;
    let u = pair.s.union(&pair.t)?;
    let table = SplitTable::new(&u);
    let si: Vec<usize> = (0..s.len()).collect();
    let ti: Vec<usize> = (s.len()..u.len()).collect();
    table
        .lies_above(&si, &ti)
        .ok_or_else(|| Error::Degenerate("projected spans are not transverse".into()))
}

pub fn high_above(a: &PointSet, b: &PointSet) -> Result<bool> {
    if a.iter().any(|p| b.position(p).is_some()) {
        return Err(Error::Precondition("high_above needs disjoint sets".into()));
    }
    let u = a.union(b)?;
    let table = SplitTable::new(&u);
    let ai: Vec<usize> = (0..a.len()).collect();
    let bi: Vec<usize> = (a.len()..u.len()).collect();
    Ok(table.high_above(&ai, &bi))
}

pub fn is_convex_cup(p: &PointSet) -> Result<bool> {
    let t = require_regular(p)?;
    let all: Vec<usize> = (0..p.len()).collect();
    Ok(t.is_cup(&all))
}

pub fn is_convex_cap(p: &PointSet) -> Result<bool> {
    let t = require_regular(p)?;
    let all: Vec<usize> = (0..p.len()).collect();
    Ok(t.is_cap(&all))
}

/// Range of heights of conv(B) over the vertical line through `x`
/// (`x` in the projection of conv(B)).
fn vertical_range(b: &PointSet, x: &RatPoint) -> Option<(Rational, Rational)> {
    let d = b.d();
    let mut refs: Vec<RatPoint> = b.iter().map(|q| RatPoint::new(q.coords[..d - 1].to_vec())).collect();
    refs.push(x.clone());
    let rr: Vec<&RatPoint> = refs.iter().collect();
    let ic = integer_coords(&rr, false);
    let xi = refs.len() - 1;
    let lifted = |i: usize| -> Vec<BigInt> {
        let mut r = ic[i].clone();
        r.push(BigInt::one());
        r
    };
    let idx: Vec<usize> = (0..b.len()).collect();
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for_each_subset(&idx, d, |sub| {
        let m: Vec<Vec<BigInt>> = sub.iter().map(|&i| lifted(i)).collect();
        let det = det_bigint(m.clone());
        if det.is_zero() {
            return true;
        }
        let mut h = Rational::zero();
        for k in 0..d {
            let mut mk = m.clone();
            mk[k] = lifted(xi);
            let lam = Rational::new(det_bigint(mk), det.clone());
            if lam.is_negative() {
                return true;
            }
            h += lam * height(b.point(sub[k]));
        }
        if lo.as_ref().is_none_or(|v| h < *v) {
            lo = Some(h.clone());
        }
        if hi.as_ref().is_none_or(|v| h > *v) {
            hi = Some(h);
        }
        true
    });
    Some((lo?, hi?))
}

/// Splits a regular convex independent set into a convex cap and a convex
/// cup that share exactly the projection boundary.
pub fn cupcap_decompose(c: &PointSet) -> Result<CupCapDecomposition> {
    if c.d() < 2 {
        return Err(Error::InvalidArgument("decomposition needs d >= 2".into()));
    }
    if !is_regular(c).is_pass() {
        return Err(Error::Precondition("input is not regular".into()));
    }
    if !is_convex_independent(c) {
        return Err(Error::Precondition("input is not convex independent".into()));
    }
    let bidx = pi_boundary_indices(c)?;
    let boundary = c.select(&bidx);
    let mut a_idx = Vec::new();
    let mut b_idx = Vec::new();
    for i in 0..c.len() {
        if bidx.binary_search(&i).is_ok() {
            a_idx.push(i);
            b_idx.push(i);
            continue;
        }
        let p = c.point(i);
        let x = RatPoint::new(p.coords[..c.d() - 1].to_vec());
        let (lo, hi) = vertical_range(&boundary, &x)
            .ok_or_else(|| Error::Degenerate("vertical line misses the boundary hull".into()))?;
        let h = height(p);
        if *h > hi {
            a_idx.push(i);
        } else if *h < lo {
            b_idx.push(i);
        } else {
            return Err(Error::Degenerate(format!(
                "point {i} is not strictly above or below the boundary hull"
            )));
        }
    }
    Ok(CupCapDecomposition { c_a: c.select(&a_idx), c_b: c.select(&b_idx), boundary })
}
