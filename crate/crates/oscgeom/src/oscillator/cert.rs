use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exactgeom::PointSet;
use crate::lift::{Lifted, MAX_LEVEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    R1,
    R2,
    R3,
    OddHalf,
    EvenHalf,
    NotHighAbove,
    Projection,
}

/// Which half is high above the other. "Odd" is P_{1,2} (1-based odd
/// positions), "even" is P_{2,2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AboveDirection {
    #[serde(rename = "P12_above_P22")]
    OddAboveEven,
    #[serde(rename = "P22_above_P12")]
    EvenAboveOdd,
    /// Both hold, which only happens when no generic pair straddles the halves.
    #[serde(rename = "both")]
    Both,
}

/// One node of a certificate. The node covers the arithmetic progression
/// `start, start + step, ...` (1-based positions in the certified set) of
/// length `len`, projected to the first `dim` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OscillatorCert {
    pub dim: usize,
    pub start: usize,
    pub step: usize,
    pub len: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed: Option<Clause>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub above: Option<AboveDirection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd: Option<Arc<OscillatorCert>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub even: Option<Arc<OscillatorCert>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<Arc<OscillatorCert>>,
}

impl OscillatorCert {
    /// Number of distinct nodes reachable from this one.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        fn walk(c: &OscillatorCert, seen: &mut std::collections::HashSet<(usize, usize, usize, usize)>) {
            if !seen.insert((c.dim, c.start, c.step, c.len)) {
                return;
            }
            for ch in [&c.odd, &c.even, &c.projection].into_iter().flatten() {
                walk(ch, seen);
            }
        }
        walk(self, &mut seen);
        seen.len()
    }
}

/// A certified (or refuted) set together with its certificate tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub set: PointSet,
    pub root: Arc<OscillatorCert>,
}

impl Certificate {
    pub fn pass(&self) -> bool {
        self.root.pass
    }
}

type Key = (usize, usize, usize, usize);

/// Certifies an ordered set and any of its arithmetic-progression subsets
/// (sections, modular subsamples, halves) against shared subset tables.
pub struct Certifier {
    set: PointSet,
    lifted: Option<Lifted>,
    r1_all: Vec<bool>,
    r2_all: Vec<bool>,
    r3_all: Vec<bool>,
    memo: RefCell<HashMap<Key, Arc<OscillatorCert>>>,
}

impl Certifier {
    /// The set is sorted by first coordinate before anything else.
    pub fn new(p: &PointSet) -> Self {
        let set = p.sorted();
        let d = set.d();
        let n = set.len();
        let lifted = if d <= MAX_LEVEL && n > 1 { Some(Lifted::new(&set, false)) } else { None };
        let mut r1_all = vec![true; d + 1];
        let mut r2_all = vec![true; d + 1];
        let mut r3_all = vec![true; d + 1];
        if let Some(l) = &lifted {
            let all: Vec<usize> = (0..n).collect();
            for m in 1..=d {
                r1_all[m] = l.axis_injective(m, &all);
                r2_all[m] = l.projection_general(m, &all);
                r3_all[m] = l.transverse(m, &all);
            }
        }
        Certifier { set, lifted, r1_all, r2_all, r3_all, memo: RefCell::new(HashMap::new()) }
    }

    pub fn set(&self) -> &PointSet {
        &self.set
    }

    pub fn certificate(&self) -> Certificate {
        Certificate { set: self.set.clone(), root: self.certify() }
    }

    pub fn certify(&self) -> Arc<OscillatorCert> {
        self.ap(self.set.d(), 0, 1, self.set.len())
    }

    /// Section from a to b, 1-based inclusive.
    pub fn certify_section(&self, a: usize, b: usize) -> Arc<OscillatorCert> {
        assert!(1 <= a && a <= b && b <= self.set.len(), "section out of range");
        self.ap(self.set.d(), a - 1, 1, b - a + 1)
    }

    /// Positions congruent to r modulo m (1-based).
    pub fn certify_subsample(&self, r: usize, m: usize) -> Arc<OscillatorCert> {
        assert!(m >= 2 && 1 <= r && r <= m, "subsample out of range");
        let n = self.set.len();
        let len = if r > n { 0 } else { (n - r) / m + 1 };
        self.ap(self.set.d(), r - 1, m, len)
    }

    pub fn memo_size(&self) -> usize {
        self.memo.borrow().len()
    }

    fn leaf(dim: usize, start: usize, step: usize, len: usize) -> OscillatorCert {
        OscillatorCert {
            dim,
            start: start + 1,
            step,
            len,
            pass: true,
            failed: None,
            above: None,
            odd: None,
            even: None,
            projection: None,
        }
    }

    /// Certificate for positions start, start+step, ... (0-based), using
    /// the first `m` coordinates.
    pub(crate) fn ap(&self, m: usize, start: usize, step: usize, len: usize) -> Arc<OscillatorCert> {
        let key = (m, start, step, len);
        if let Some(c) = self.memo.borrow().get(&key) {
            return c.clone();
        }
        let c = Arc::new(self.compute(m, start, step, len));
        self.memo.borrow_mut().insert(key, c.clone());
        c
    }

    fn compute(&self, m: usize, start: usize, step: usize, len: usize) -> OscillatorCert {
        if len <= 1 || m == 1 {
            return Self::leaf(m, start, step, len);
        }
        let lifted = self.lifted.as_ref().expect("tables exist for sets of size > 1");
        let idx: Vec<usize> = (0..len).map(|t| start + t * step).collect();
        let mut node = Self::leaf(m, start, step, len);
        let failed_rule = if !self.r1_all[m] && !lifted.axis_injective(m, &idx) {
            Some(Clause::R1)
        } else if !self.r2_all[m] && !lifted.projection_general(m, &idx) {
            Some(Clause::R2)
        } else if !self.r3_all[m] && !lifted.transverse(m, &idx) {
            Some(Clause::R3)
        } else {
            None
        };
        if let Some(cl) = failed_rule {
            node.pass = false;
            node.failed = Some(cl);
            return node;
        }
        let projection = self.ap(m - 1, start, step, len);
        let odd = self.ap(m, start, 2 * step, len.div_ceil(2));
        let even = self.ap(m, start + step, 2 * step, len / 2);
        let (odd_over, even_over) = self.halves_above(lifted, m, &idx);
        node.above = match (odd_over, even_over) {
            (true, true) => Some(AboveDirection::Both),
            (true, false) => Some(AboveDirection::OddAboveEven),
            (false, true) => Some(AboveDirection::EvenAboveOdd),
            (false, false) => None,
        };
        node.failed = if !projection.pass {
            Some(Clause::Projection)
        } else if !odd.pass {
            Some(Clause::OddHalf)
        } else if !even.pass {
            Some(Clause::EvenHalf)
        } else if node.above.is_none() {
            Some(Clause::NotHighAbove)
        } else {
            None
        };
        node.pass = node.failed.is_none();
        node.projection = Some(projection);
        node.odd = Some(odd);
        node.even = Some(even);
        node
    }

    /// Whether the odd half is high above the even half, and vice versa.
    /// Regularity of the union has already been established.
    fn halves_above(&self, lifted: &Lifted, m: usize, idx: &[usize]) -> (bool, bool) {
        let k = m + 1;
        if idx.len() < k {
            return (true, true);
        }
        let full = (1u64 << k) - 1;
        let mut state = (true, true);
        let mut chosen = [0usize; MAX_LEVEL + 2];
        walk(lifted, m, idx, k, 0, 0, 0, 0, &mut chosen, full, &mut state);
        state
    }
}

/// Depth-first walk over k-subsets of positions with incremental colex
/// rank and half mask; stops once both directions have failed.
#[allow(clippy::too_many_arguments)]
fn walk(
    lifted: &Lifted,
    m: usize,
    idx: &[usize],
    k: usize,
    depth: usize,
    from: usize,
    rank: usize,
    mask: u64,
    chosen: &mut [usize],
    full: u64,
    state: &mut (bool, bool),
) -> bool {
    if depth == k {
        if mask == 0 || mask == full {
            return true;
        }
        let bits = lifted.above_at(m, rank);
        // Bit `mask` set: the odd-position part lies above the rest.
        if bits >> mask & 1 == 0 {
            state.0 = false;
        }
        if bits >> (full ^ mask) & 1 == 0 {
            state.1 = false;
        }
        return state.0 || state.1;
    }
    let remaining = k - depth;
    for t in from..=idx.len() - remaining {
        let i = idx[t];
        chosen[depth] = i;
        let r = rank + lifted.binom.get(i, depth + 1) as usize;
        let mk = if t % 2 == 0 { mask | 1 << depth } else { mask };
        if !walk(lifted, m, idx, k, depth + 1, t + 1, r, mk, chosen, full, state) {
            return false;
        }
    }
    true
}

/// Full recursive certificate for `p` (sorted by first coordinate first).
pub fn is_oscillator(p: &PointSet) -> Certificate {
    Certifier::new(p).certificate()
}
