//! Per-subset determinant tables shared by the regularity, high-above and
//! cup/cap predicates.
//!
//! For an (m+1)-subset Q = (q_0 < ... < q_m) and level m (first m
//! coordinates) let V_m(Q) = sum_k (-1)^k V_{m-1}(Q - q_k) c_m(q_k), with
//! V_0 = 1. The weights w_k = (-1)^k V_{m-1}(Q - q_k) are the affine
//! dependency of the projected points, so for a split Q = S + T the
//! vertically aligned points of span(S) and span(T) satisfy
//! h(s) - h(t) = V_m(Q) / W_S with W_S = sum of w_k over S.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::combin::{for_each_subset, Binomial};
use crate::exactgeom::{integer_coords, PointSet, RatPoint};
use crate::par;

pub(crate) const MAX_LEVEL: usize = 5;

pub(crate) struct Lifted {
    pub n: usize,
    pub d: usize,
    pub binom: Binomial,
    coords: Vec<Vec<BigInt>>,
    /// vals[m]: V_m by colex rank, kept for m < d (and m = d on request).
    vals: Vec<Vec<BigInt>>,
    signs: Vec<Vec<i8>>,
    above: Vec<Vec<u64>>,
    degenerate: Vec<Vec<u64>>,
}

#[inline]
fn sgn(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

struct LevelBlock {
    vals: Vec<BigInt>,
    signs: Vec<i8>,
    above: Vec<u64>,
    degenerate: Vec<u64>,
}

impl Lifted {
    pub fn new(p: &PointSet, keep_top: bool) -> Self {
        let n = p.len();
        let d = p.d();
        assert!(d <= MAX_LEVEL, "dimension {d} exceeds table limit {MAX_LEVEL}");
        let refs: Vec<&RatPoint> = p.iter().collect();
        let coords = integer_coords(&refs, false);
        let binom = Binomial::new(n.max(1), d + 2);
        let mut lifted = Lifted {
            n,
            d,
            binom,
            coords,
            vals: vec![Vec::new(); d + 1],
            signs: vec![Vec::new(); d + 1],
            above: vec![Vec::new(); d + 1],
            degenerate: vec![Vec::new(); d + 1],
        };
        for m in 1..=d {
            let keep = m < d || keep_top;
            lifted.build_level(m, keep);
        }
        lifted
    }

    fn build_level(&mut self, m: usize, keep: bool) {
        let k = m + 1;
        let n = self.n;
        let this = &*self;
        let blocks: Vec<LevelBlock> = par::map_range(n, |j| this.level_block(m, j, keep));
        let total = self.binom.get(n, k) as usize;
        let mut vals = Vec::with_capacity(if keep { total } else { 0 });
        let mut signs = Vec::with_capacity(total);
        let mut above = Vec::with_capacity(if m >= 2 { total } else { 0 });
        let mut degenerate = Vec::with_capacity(if m >= 2 { total } else { 0 });
        for b in blocks {
            vals.extend(b.vals);
            signs.extend(b.signs);
            above.extend(b.above);
            degenerate.extend(b.degenerate);
        }
        self.vals[m] = vals;
        self.signs[m] = signs;
        self.above[m] = above;
        self.degenerate[m] = degenerate;
    }

    /// All (m+1)-subsets whose largest element is `j`, in colex order.
    fn level_block(&self, m: usize, j: usize, keep: bool) -> LevelBlock {
        let k = m + 1;
        let base = self.binom.get(j, k) as usize;
        let len = self.binom.get(j, k - 1) as usize;
        let mut vals = vec![BigInt::zero(); if keep { len } else { 0 }];
        let mut signs = vec![0i8; len];
        let mut above = vec![0u64; if m >= 2 { len } else { 0 }];
        let mut degenerate = vec![0u64; if m >= 2 { len } else { 0 }];
        let items: Vec<usize> = (0..j).collect();
        let mut q = vec![0usize; k];
        let mut sub = vec![0usize; m];
        let mut w: Vec<BigInt> = vec![BigInt::zero(); k];
        let nmask = 1usize << k;
        let mut wsum: Vec<BigInt> = vec![BigInt::zero(); nmask];
        for_each_subset(&items, k - 1, |prefix| {
            q[..k - 1].copy_from_slice(prefix);
            q[k - 1] = j;
            let slot = self.binom.rank(&q) - base;
            let mut v = BigInt::zero();
            for skip in 0..k {
                let mut t = 0;
                for (i, &x) in q.iter().enumerate() {
                    if i != skip {
                        sub[t] = x;
                        t += 1;
                    }
                }
                let minor = if m == 1 {
                    BigInt::from(1)
                } else {
                    self.vals[m - 1][self.binom.rank(&sub)].clone()
                };
                let wk = if skip % 2 == 0 { minor } else { -minor };
                v += &wk * &self.coords[q[skip]][m - 1];
                w[skip] = wk;
            }
            let vs = sgn(&v);
            signs[slot] = vs;
            if m >= 2 {
                let mut ab = 0u64;
                let mut dg = 0u64;
                for mask in 1..nmask - 1 {
                    let low = mask.trailing_zeros() as usize;
                    let prev = mask & (mask - 1);
                    let val = if prev == 0 { w[low].clone() } else { &wsum[prev] + &w[low] };
                    let s = sgn(&val);
                    if s == 0 {
                        dg |= 1 << mask;
                    } else if s * vs > 0 {
                        ab |= 1 << mask;
                    }
                    wsum[mask] = val;
                }
                above[slot] = ab;
                degenerate[slot] = dg;
            }
            if keep {
                vals[slot] = v;
            }
            true
        });
        LevelBlock { vals, signs, above, degenerate }
    }

    #[inline]
    pub fn rank(&self, subset: &[usize]) -> usize {
        self.binom.rank(subset)
    }

    /// Sign of V_m on an increasing (m+1)-subset.
    #[inline]
    pub fn sign(&self, m: usize, subset: &[usize]) -> i8 {
        self.signs[m][self.rank(subset)]
    }

    #[inline]
    pub fn above_at(&self, m: usize, rank: usize) -> u64 {
        self.above[m][rank]
    }

    #[inline]
    pub fn degenerate_at(&self, m: usize, rank: usize) -> u64 {
        self.degenerate[m][rank]
    }

    /// Signs of the dependency weights w_k on an (m+1)-subset.
    pub fn weight_signs(&self, m: usize, q: &[usize]) -> [i8; MAX_LEVEL + 2] {
        let k = m + 1;
        let mut out = [0i8; MAX_LEVEL + 2];
        let mut sub = [0usize; MAX_LEVEL + 2];
        for skip in 0..k {
            let s = if m == 1 {
                1
            } else {
                let mut t = 0;
                for (i, &x) in q.iter().enumerate() {
                    if i != skip {
                        sub[t] = x;
                        t += 1;
                    }
                }
                self.sign(m - 1, &sub[..m])
            };
            out[skip] = if skip % 2 == 0 { s } else { -s };
        }
        out
    }

    /// Projections to the first m axes injective on the given points (rule R1).
    pub fn axis_injective(&self, m: usize, idx: &[usize]) -> bool {
        for axis in 0..m {
            let mut v: Vec<&BigInt> = idx.iter().map(|&i| &self.coords[i][axis]).collect();
            v.sort();
            if v.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
        }
        true
    }

    /// Every m-subset of the projection to the first m-1 coordinates is
    /// affinely independent (rule R2 at level m).
    pub fn projection_general(&self, m: usize, idx: &[usize]) -> bool {
        if m < 2 {
            return true;
        }
        for_each_subset(idx, m, |s| self.sign(m - 1, s) != 0)
    }

    /// No split of an (m+1)-subset has parallel projected spans (rule R3).
    pub fn transverse(&self, m: usize, idx: &[usize]) -> bool {
        if m < 2 {
            return true;
        }
        for_each_subset(idx, m + 1, |s| self.degenerate_at(m, self.rank(s)) == 0)
    }
}
