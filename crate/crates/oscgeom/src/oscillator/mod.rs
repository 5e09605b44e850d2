//! d-oscillators: construction, certification and stretch statistics.

mod build;
mod cert;
mod stretch;

pub use build::{build_oscillator, build_oscillator_with, generic, BuildConfig, BuiltOscillator, LevelParams};
pub use cert::{is_oscillator, AboveDirection, Certificate, Certifier, Clause, OscillatorCert};
pub use stretch::{
    min_stretch, min_stretch_with_budget, stretch_lower_bound, Stretch, StretchMode, StretchQuery,
    StretchResult, StretchSearcher,
};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::exactgeom::{PointSet, RatPoint, Rational};

/// Seeded generator for an independent stream under a master seed.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform dyadic rational in (-1, 1) with 31 fractional bits.
pub(crate) fn unit_dyadic(rng: &mut ChaCha8Rng) -> Rational {
    let v: i64 = rng.random_range(-(1i64 << 31) + 1..(1i64 << 31));
    Rational::new(BigInt::from(v), BigInt::one() << 31usize)
}

/// Sum of eps^(k+1) over the set bits k of n.
pub fn binary_eps(n: u64, eps: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut pw = eps.clone();
    let mut m = n;
    while m > 0 {
        if m & 1 == 1 {
            acc += &pw;
        }
        pw = &pw * eps;
        m >>= 1;
    }
    acc
}

/// 0-based positions t with t+1 congruent to a modulo b.
pub fn subsample_indices(len: usize, a: usize, b: usize) -> Result<Vec<usize>> {
    if b < 2 || a < 1 || a > b {
        return Err(Error::IndexOutOfRange(format!("subsample needs b >= 2 and 1 <= a <= b (a={a}, b={b})")));
    }
    Ok((a - 1..len).step_by(b).collect())
}

/// 0-based positions of the section from a to b (1-based, inclusive).
pub fn section_indices(len: usize, a: usize, b: usize) -> Result<Vec<usize>> {
    if a < 1 || a > b || b > len {
        return Err(Error::IndexOutOfRange(format!("section [{a}, {b}] of a set of size {len}")));
    }
    Ok((a - 1..b).collect())
}

pub fn subsample(p: &PointSet, a: usize, b: usize) -> Result<PointSet> {
    Ok(p.select(&subsample_indices(p.len(), a, b)?))
}

pub fn section(p: &PointSet, a: usize, b: usize) -> Result<PointSet> {
    Ok(p.select(&section_indices(p.len(), a, b)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbMode {
    Full,
    HeightOnly,
}

/// Seeded displacement of every point by at most `delta` in norm.
pub fn perturb(p: &PointSet, delta: &Rational, seed: u64, mode: PerturbMode) -> Result<PointSet> {
    if *delta < Rational::zero() {
        return Err(Error::InvalidArgument("perturbation size must be nonnegative".into()));
    }
    if delta.is_zero() {
        return Ok(p.clone());
    }
    let d = p.d();
    let mut rng = rng_for(seed, 0x5045_5254);
    // Per-coordinate bound delta / ceil(sqrt(d)) keeps the norm within delta.
    let root = (1..).find(|r: &usize| r * r >= d).unwrap();
    let scale = delta / Rational::from_integer(BigInt::from(root));
    let pts = p
        .iter()
        .map(|q| {
            let mut c = q.coords.clone();
            match mode {
                PerturbMode::Full => {
                    for x in c.iter_mut() {
                        *x += &scale * unit_dyadic(&mut rng);
                    }
                }
                PerturbMode::HeightOnly => {
                    c[d - 1] += delta * unit_dyadic(&mut rng);
                }
            }
            RatPoint::new(c)
        })
        .collect();
    PointSet::new(d, pts)
}

/// Difference between the extreme positions of `c` inside the ordered set `p`.
pub fn stretch(p: &PointSet, c: &PointSet) -> Result<usize> {
    if c.is_empty() {
        return Err(Error::InvalidArgument("stretch of an empty set".into()));
    }
    let mut lo = usize::MAX;
    let mut hi = 0;
    for q in c.iter() {
        let i = p
            .position(q)
            .ok_or_else(|| Error::Precondition(format!("point {q} is not in the ambient set")))?;
        lo = lo.min(i);
        hi = hi.max(i);
    }
    Ok(hi - lo)
}

/// Largest dyadic delta = 2^-e (searched over e) for which the seeded full
/// perturbation of `p` still certifies as an oscillator.
pub fn stability_margin(p: &PointSet, seed: u64, max_exp: u32) -> Option<Rational> {
    stability_margin_from(p, seed, 1, max_exp).map(|e| Rational::new(BigInt::one(), BigInt::one() << e as usize))
}

/// Exponent search for [`stability_margin`] starting from a guess.
pub fn stability_margin_from(p: &PointSet, seed: u64, start: u32, max_exp: u32) -> Option<u32> {
    let ok = |e: u32| -> bool {
        let delta = Rational::new(BigInt::one(), BigInt::one() << e as usize);
        match perturb(p, &delta, seed, PerturbMode::Full) {
            Ok(q) => is_oscillator(&q).pass(),
            Err(_) => false,
        }
    };
    let start = start.clamp(1, max_exp.max(1));
    let (mut lo, mut hi);
    if ok(start) {
        hi = start;
        lo = 0;
        let mut e = start;
        while e > 1 {
            let next = e / 2;
            if !ok(next) {
                lo = next;
                break;
            }
            hi = next;
            e = next;
        }
        if lo == 0 {
            return Some(hi);
        }
    } else {
        lo = start;
        hi = start;
        loop {
            if hi >= max_exp {
                return None;
            }
            hi = (hi * 2).min(max_exp);
            if ok(hi) {
                break;
            }
            lo = hi;
        }
    }
    // ok(hi) holds and ok(lo) does not.
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::rat;

    #[test]
    fn binary_eps_values() {
        let e = rat(1, 10);
        assert_eq!(binary_eps(0, &e), Rational::zero());
        assert_eq!(binary_eps(5, &e), rat(101, 1000));
        assert_eq!(binary_eps(8, &e), rat(1, 10_000));
    }

    #[test]
    fn index_helpers() {
        assert_eq!(subsample_indices(5, 1, 2).unwrap(), vec![0, 2, 4]);
        assert_eq!(subsample_indices(7, 2, 3).unwrap(), vec![1, 4]);
        assert_eq!(section_indices(6, 2, 4).unwrap(), vec![1, 2, 3]);
        assert!(section_indices(3, 2, 4).is_err());
        assert!(subsample_indices(3, 3, 2).is_err());
    }
}
