use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combin::for_each_subset;
use crate::cupcap::SplitTable;
use crate::error::{Error, Result};
use crate::exactgeom::{OrientationTable, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StretchMode {
    ConvexIndependent,
    CupOrCap,
}

#[derive(Clone, Debug)]
pub struct StretchQuery {
    pub points: PointSet,
    pub k: usize,
    pub mode: StretchMode,
}

/// Minimum stretch; `Infinite` when no subset of the requested kind exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stretch {
    Finite(usize),
    Infinite,
}

impl Stretch {
    pub fn finite(self) -> Option<usize> {
        match self {
            Stretch::Finite(v) => Some(v),
            Stretch::Infinite => None,
        }
    }
}

impl fmt::Display for Stretch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stretch::Finite(v) => write!(f, "{v}"),
            Stretch::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Stretch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Stretch::Finite(v) => s.serialize_u64(*v as u64),
            Stretch::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Stretch {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) => Ok(Stretch::Finite(v as usize)),
            Raw::S(s) if s == "inf" => Ok(Stretch::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad stretch value {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StretchResult {
    pub k: usize,
    pub mode: StretchMode,
    pub stretch: Stretch,
    /// 0-based positions of a minimizing subset.
    pub witness: Option<Vec<usize>>,
    /// Whether the witness is a cup (true) or cap (false), cup-or-cap mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cup: Option<bool>,
    pub nodes: u64,
}

/// Lower bound on the stretch of a size-k subset of a d-oscillator:
/// 1/2 exp(k^(1/(d-1)) / (4d-4)) for cups and caps, with 4d in place of
/// 4d-4 for convex independent sets.
pub fn stretch_lower_bound(d: usize, k: usize, mode: StretchMode) -> f64 {
    assert!(d >= 2);
    let denom = match mode {
        StretchMode::CupOrCap => 4.0 * (d as f64 - 1.0),
        StretchMode::ConvexIndependent => 4.0 * d as f64,
    };
    0.5 * ((k as f64).powf(1.0 / (d as f64 - 1.0)) / denom).exp()
}

enum Tables {
    Orient(OrientationTable),
    Split(SplitTable),
}

/// Reusable search state for one ordered point set and one mode.
pub struct StretchSearcher {
    n: usize,
    d: usize,
    mode: StretchMode,
    tables: Tables,
}

impl StretchSearcher {
    /// `p` must be sorted by first coordinate.
    pub fn new(p: &PointSet, mode: StretchMode) -> Self {
        let tables = match mode {
            StretchMode::ConvexIndependent => Tables::Orient(OrientationTable::new(p)),
            StretchMode::CupOrCap => Tables::Split(SplitTable::new(p)),
        };
        StretchSearcher { n: p.len(), d: p.d(), mode, tables }
    }

    /// Windows of increasing width; the first width with a hit is optimal.
    pub fn run(&self, k: usize, budget: u64) -> Result<StretchResult> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let mut out = StretchResult { k, mode: self.mode, stretch: Stretch::Infinite, witness: None, cup: None, nodes: 0 };
        if k > self.n {
            return Ok(out);
        }
        if k == 1 {
            out.stretch = Stretch::Finite(0);
            out.witness = Some(vec![0]);
            out.cup = (self.mode == StretchMode::CupOrCap).then_some(true);
            return Ok(out);
        }
        let mut nodes = 0u64;
        for w in k - 1..self.n {
            for i in 0..self.n - w {
                let j = i + w;
                let mut cur = vec![i];
                let found = self.extend(&mut cur, j, k, (true, true), &mut nodes, budget);
                if nodes > budget {
                    return Err(Error::Budget {
                        what: format!("stretch search for k={k} exceeded {budget} nodes"),
                        partial: Some(w as u64),
                    });
                }
                if let Some(flags) = found {
                    cur.push(j);
                    out.stretch = Stretch::Finite(w);
                    out.witness = Some(cur);
                    if self.mode == StretchMode::CupOrCap {
                        out.cup = Some(flags.0);
                    }
                    out.nodes = nodes;
                    return Ok(out);
                }
            }
        }
        out.nodes = nodes;
        Ok(out)
    }

    /// Extends `cur` (which starts at the window's left end) with interior
    /// points below `j` until the chain plus `j` has `k` points.
    fn extend(
        &self,
        cur: &mut Vec<usize>,
        j: usize,
        k: usize,
        flags: (bool, bool),
        nodes: &mut u64,
        budget: u64,
    ) -> Option<(bool, bool)> {
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        if cur.len() + 1 == k {
            return Some(flags);
        }
        let need = k - 1 - cur.len();
        let last = *cur.last().unwrap();
        // Leave room for the remaining interior points.
        let hi = j - need + 1;
        for x in last + 1..hi {
            if let Some(f) = self.admits(cur, x, j, flags) {
                cur.push(x);
                if let Some(r) = self.extend(cur, j, k, f, nodes, budget) {
                    return Some(r);
                }
                cur.pop();
                if *nodes > budget {
                    return None;
                }
            }
        }
        None
    }

    /// Hereditary check of every constraint subset of cur + {x, j} that
    /// contains x.
    fn admits(&self, cur: &[usize], x: usize, j: usize, flags: (bool, bool)) -> Option<(bool, bool)> {
        let mut others = cur.to_vec();
        others.push(j);
        let mut q = [0usize; 16];
        let merge = |sub: &[usize], q: &mut [usize; 16]| -> usize {
            // sub is increasing; x sits right before j if j is present.
            let mut t = 0;
            for &y in sub {
                if y == j {
                    q[t] = x;
                    t += 1;
                }
                q[t] = y;
                t += 1;
            }
            if sub.last() != Some(&j) {
                q[t] = x;
                t += 1;
            }
            t
        };
        match &self.tables {
            Tables::Orient(o) => {
                let d = self.d;
                let ok = for_each_subset(&others, d, |s| {
                    let t = merge(s, &mut q);
                    o.sign(&q[..t]) != 0
                }) && for_each_subset(&others, d + 1, |s| {
                    let t = merge(s, &mut q);
                    o.convex_position(&q[..t])
                });
                ok.then_some(flags)
            }
            Tables::Split(sp) => {
                let mut f = flags;
                for_each_subset(&others, self.d, |s| {
                    let t = merge(s, &mut q);
                    let (cu, ca) = sp.cup_cap_flags(&q[..t]);
                    f.0 &= cu;
                    f.1 &= ca;
                    f.0 || f.1
                });
                (f.0 || f.1).then_some(f)
            }
        }
    }
}

pub fn min_stretch(q: &StretchQuery) -> Result<StretchResult> {
    min_stretch_with_budget(q, u64::MAX)
}

pub fn min_stretch_with_budget(q: &StretchQuery, budget: u64) -> Result<StretchResult> {
    if !q.points.is_sorted_by_first() {
        return Err(Error::Precondition("points must be sorted by first coordinate".into()));
    }
    StretchSearcher::new(&q.points, q.mode).run(q.k, budget)
}
