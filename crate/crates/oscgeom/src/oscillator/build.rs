use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::cert::Certifier;
use super::{binary_eps, rng_for, unit_dyadic};
use crate::error::{Error, Result};
use crate::exactgeom::{PointSet, RatPoint, Rational};
use crate::lift::{Lifted, MAX_LEVEL};

#[derive(Clone, Debug)]
pub struct BuildConfig {
    pub eps: Rational,
    pub seed: u64,
    /// Attempts per level before giving up.
    pub max_retries: usize,
    /// Extra halvings of eps_m per failed attempt.
    pub shrink_bits: usize,
}

impl BuildConfig {
    pub fn new(eps: Rational, seed: u64) -> Self {
        BuildConfig { eps, seed, max_retries: 12, shrink_bits: 4 }
    }
}

/// Per-level parameters actually used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelParams {
    pub level: usize,
    #[serde(with = "crate::exactgeom::rational_serde")]
    pub eps: Rational,
    #[serde(with = "crate::exactgeom::rational_serde")]
    pub delta: Rational,
    pub attempts: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuiltOscillator {
    pub points: PointSet,
    pub levels: Vec<LevelParams>,
}

fn pow2(e: usize) -> Rational {
    Rational::from_integer(BigInt::one() << e)
}

fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Number of bits b with eps <= 2^-b, i.e. floor(log2(1/eps)), at least 1.
fn neg_log2_floor(eps: &Rational) -> usize {
    let mut b = 0usize;
    while pow2(b + 1).recip() >= *eps {
        b += 1;
    }
    b.max(1)
}

/// d-oscillator of size `len` within `eps` of the progression 1, 2, ..., len
/// on the first axis.
pub fn build_oscillator(d: usize, len: usize, eps: &Rational, seed: u64) -> Result<PointSet> {
    Ok(build_oscillator_with(d, len, &BuildConfig::new(eps.clone(), seed))?.points)
}

pub fn build_oscillator_with(d: usize, len: usize, cfg: &BuildConfig) -> Result<BuiltOscillator> {
    if d == 0 || len == 0 {
        return Err(Error::InvalidArgument("dimension and length must be positive".into()));
    }
    if cfg.eps <= Rational::zero() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if d > MAX_LEVEL {
        return Err(Error::InvalidArgument(format!("dimension above {MAX_LEVEL} is not supported")));
    }
    let mut coords: Vec<Vec<Rational>> =
        (1..=len).map(|k| vec![Rational::from_integer(BigInt::from(k))]).collect();
    let mut levels = Vec::new();
    let depth = ceil_log2(len) + 1;
    // Features of the previous level live at scale delta_{m-1}; the next
    // lift has to be small against them.
    let mut scale = cfg.eps.clone();
    for m in 2..=d {
        let base = &scale / pow2(2 * m);
        let mut done = None;
        for attempt in 0..cfg.max_retries {
            let eps_m = &base / pow2(cfg.shrink_bits * attempt);
            let t = depth * neg_log2_floor(&eps_m) + 8 + 4 * attempt;
            let delta_m = &eps_m * &eps_m / pow2(t);
            let mut rng = rng_for(cfg.seed, ((m as u64) << 32) | attempt as u64);
            let trial: Vec<Vec<Rational>> = coords
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let mut c = c.clone();
                    c.push(binary_eps(k as u64, &eps_m) + &delta_m * unit_dyadic(&mut rng));
                    c
                })
                .collect();
            let set = PointSet::new(m, trial.iter().cloned().map(RatPoint::new).collect())?;
            if Certifier::new(&set).certify().pass && (m == d || generic(&set)) {
                done = Some((trial, eps_m, delta_m, attempt + 1));
                break;
            }
        }
        let (trial, eps_m, delta_m, attempts) = done.ok_or_else(|| Error::Budget {
            what: format!("no certified lift at level {m} after {} attempts", cfg.max_retries),
            partial: None,
        })?;
        coords = trial;
        scale = delta_m.clone();
        levels.push(LevelParams { level: m, eps: eps_m, delta: delta_m, attempts });
    }
    let points = PointSet::new(d, coords.into_iter().map(RatPoint::new).collect())?;
    let eps_sq = &cfg.eps * &cfg.eps;
    for (k, p) in points.iter().enumerate() {
        let mut e = p.coords.clone();
        e[0] -= Rational::from_integer(BigInt::from(k + 1));
        let n2: Rational = e.iter().map(|x| x * x).sum();
        if n2 > eps_sq {
            return Err(Error::Precondition(format!("point {} drifted beyond eps", k + 1)));
        }
    }
    Ok(BuiltOscillator { points, levels })
}

/// Any two disjoint S, T with |S| + |T| = d + 2 have spans meeting in one point.
pub fn generic(p: &PointSet) -> bool {
    let d = p.d();
    if d >= MAX_LEVEL || p.len() < d + 2 {
        return d < MAX_LEVEL;
    }
    // Appending a zero height turns the condition into transversality of
    // every split one level up.
    let pts = p
        .iter()
        .map(|q| {
            let mut c = q.coords.clone();
            c.push(Rational::zero());
            RatPoint::new(c)
        })
        .collect();
    let lifted = Lifted::new(&PointSet::new_unchecked(d + 1, pts), false);
    let all: Vec<usize> = (0..p.len()).collect();
    lifted.projection_general(d + 1, &all) && lifted.transverse(d + 1, &all)
}
