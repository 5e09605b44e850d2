//! The perturbed grid: a Minkowski sum of scaled, axis-rotated copies of
//! one oscillator, plus a tiny generic perturbation.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combin::for_each_subset;
use crate::error::{Error, Result};
use crate::exactgeom::{integer_coords, orient_int, PointSet, RatPoint, Rational};
use crate::oscillator::{
    build_oscillator_with, rng_for, stability_margin_from, unit_dyadic, BuildConfig, Certifier,
};
use crate::par;

use super::lattice::primitive_directions;

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub eps: Rational,
    pub seed: u64,
    /// Exact general-position check on all (d+1)-subsets when there are at
    /// most this many of them; sampled above.
    pub exact_gp_subsets: u128,
    /// Random (d+1)-subsets checked above the exact limit.
    pub gp_samples: usize,
    /// Axis-parallel grid lines whose transformed image is certified as an
    /// oscillator.
    pub line_samples: usize,
    /// Rebuilds with a smaller cascade ratio before giving up.
    pub max_rounds: usize,
}

impl GridConfig {
    pub fn new(eps: Rational, seed: u64) -> Self {
        GridConfig {
            eps,
            seed,
            exact_gp_subsets: 50_000_000,
            gp_samples: 20_000,
            line_samples: 12,
            max_rounds: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralPositionCheck {
    pub exact: bool,
    pub subsets_checked: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbedGrid {
    pub d: usize,
    pub n: usize,
    /// Points in lexicographic order of their grid preimage (first axis slowest).
    pub points: PointSet,
    pub oscillator: PointSet,
    /// Stability margin of the oscillator, as the exponent e of 2^-e.
    pub margin_exp: u32,
    #[serde(with = "rational_vec")]
    pub etas: Vec<Rational>,
    #[serde(with = "crate::exactgeom::rational_serde")]
    pub tau: Rational,
    pub rounds: usize,
    pub lines_certified: usize,
    pub general_position: GeneralPositionCheck,
    #[serde(with = "crate::exactgeom::rational_serde")]
    pub normalized_diameter_sq: Rational,
}

mod rational_vec {
    use crate::exactgeom::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

impl PerturbedGrid {
    /// Position of grid point g (entries in 1..=n).
    pub fn index_of(&self, g: &[i64]) -> usize {
        grid_index(g, self.n)
    }

    /// Grid preimage of the point at `i`.
    pub fn grid_point(&self, i: usize) -> Vec<i64> {
        grid_point(i, self.d, self.n)
    }

    /// Grid preimages of a subset given by indices; errors on repeats.
    pub fn preimage(&self, idx: &[usize]) -> Result<Vec<Vec<i64>>> {
        let mut seen = vec![false; self.points.len()];
        idx.iter()
            .map(|&i| {
                if i >= seen.len() {
                    return Err(Error::IndexOutOfRange(format!("point {i} of {}", seen.len())));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Precondition(format!("point {i} listed twice")));
                }
                Ok(self.grid_point(i))
            })
            .collect()
    }
}

pub fn grid_index(g: &[i64], n: usize) -> usize {
    g.iter().fold(0usize, |acc, &x| acc * n + (x as usize - 1))
}

pub fn grid_point(mut i: usize, d: usize, n: usize) -> Vec<i64> {
    let mut g = vec![0i64; d];
    for slot in g.iter_mut().rev() {
        *slot = (i % n) as i64 + 1;
        i /= n;
    }
    g
}

fn pow2_inv(e: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e)
}

/// Largest power of two not above x > 0, as an exponent e with 2^-e <= x.
fn floor_pow2_exp(x: &Rational) -> usize {
    let mut e = 0usize;
    while pow2_inv(e) > *x {
        e += 1;
    }
    e
}

/// sigma^(i) T_eta (p): scale all but the first coordinate by eta, then
/// rotate coordinates so the first lands on axis i (0-based).
fn s_map(p: &RatPoint, i: usize, eta: &Rational) -> Vec<Rational> {
    let d = p.d();
    let mut t: Vec<Rational> = p.coords.clone();
    for x in t.iter_mut().skip(1) {
        *x *= eta;
    }
    let mut out = vec![Rational::zero(); d];
    for (j, x) in t.into_iter().enumerate() {
        out[(j + i) % d] = x;
    }
    out
}

/// Builds the perturbed grid of side n in dimension d.
pub fn build_perturbed_grid(d: usize, n: usize, eps: &Rational, seed: u64) -> Result<PerturbedGrid> {
    build_perturbed_grid_with(d, n, &GridConfig::new(eps.clone(), seed))
}

pub fn build_perturbed_grid_with(d: usize, n: usize, cfg: &GridConfig) -> Result<PerturbedGrid> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    if d < 2 || n < 2 {
        return Err(Error::InvalidArgument("perturbed grid needs d >= 2 and n >= 2".into()));
    }
    if !cfg.eps.is_positive() || cfg.eps >= half {
        return Err(Error::InvalidArgument("eps must lie in (0, 1/2)".into()));
    }
    let built = build_oscillator_with(d, n, &BuildConfig::new(cfg.eps.clone(), cfg.seed))?;
    let osc = built.points;
    let hint = built.levels.last().map_or(8, |l| l.delta.denom().bits() as u32);
    let margin_exp = stability_margin_from(&osc, cfg.seed ^ 0x9e37, hint.max(2), 8 * hint.max(64))
        .ok_or_else(|| Error::Budget { what: "no stability margin found".into(), partial: None })?;
    let margin = pow2_inv(margin_exp as usize);
    // rho <= margin / (4 d n max|coord|), a power of two.
    let bound = &margin / Rational::from_integer(BigInt::from(4 * d * n * n));
    let mut rho_exp = floor_pow2_exp(&bound);
    let eps_sq = &cfg.eps * &cfg.eps;
    for round in 0..cfg.max_rounds {
        let rho = pow2_inv(rho_exp);
        let mut etas = vec![&cfg.eps / Rational::from_integer(BigInt::from(4))];
        for _ in 1..d {
            let next = etas.last().unwrap() * &rho;
            etas.push(next);
        }
        let tau = etas.last().unwrap() * &rho;
        let pts = skeleton_plus_tau(&osc, d, n, &etas, &tau, cfg.seed.wrapping_add(round as u64));
        let set = PointSet::new(d, pts.into_iter().map(RatPoint::new).collect())?;
        for (i, p) in set.iter().enumerate() {
            let g = grid_point(i, d, n);
            let dist: Rational = p
                .coords
                .iter()
                .zip(&g)
                .map(|(x, &gi)| {
                    let t = x - Rational::from_integer(BigInt::from(gi));
                    &t * &t
                })
                .sum();
            if dist > eps_sq {
                return Err(Error::Precondition(format!("grid point {g:?} moved more than eps")));
            }
        }
        let lines = sample_axis_lines(d, n, cfg.line_samples, cfg.seed);
        let lines_ok = lines
            .iter()
            .all(|(m, start)| Certifier::new(&line_image(&set, &osc, &etas, n, *m, start)).certify().pass);
        if !lines_ok {
            rho_exp += 8;
            continue;
        }
        let gp = general_position(&set, cfg, n)?;
        let diam = crate::exactgeom::normalized_diameter_sq(&set)?;
        // diam <= (sqrt(d)(n-1) + 2 eps)^2 / (1 - 2 eps)^2, with sqrt(d) <= d.
        let nm1 = Rational::from_integer(BigInt::from(n as i64 - 1));
        let dr = Rational::from_integer(BigInt::from(d as i64));
        let two_eps = &cfg.eps * Rational::from_integer(BigInt::from(2));
        let upper = &dr * &nm1 * &nm1 + &two_eps * Rational::from_integer(BigInt::from(2)) * &dr * &nm1 + &two_eps * &two_eps;
        let shrink = (Rational::one() - &two_eps) * (Rational::one() - &two_eps);
        if &diam * &shrink > upper {
            return Err(Error::Precondition("normalized diameter above the grid bound".into()));
        }
        return Ok(PerturbedGrid {
            d,
            n,
            points: set,
            oscillator: osc,
            margin_exp,
            etas,
            tau,
            rounds: round + 1,
            lines_certified: lines.len(),
            general_position: gp,
            normalized_diameter_sq: diam,
        });
    }
    Err(Error::Budget { what: format!("traced lines still fail after {} rounds", cfg.max_rounds), partial: None })
}

fn skeleton_plus_tau(
    osc: &PointSet,
    d: usize,
    n: usize,
    etas: &[Rational],
    tau: &Rational,
    seed: u64,
) -> Vec<Vec<Rational>> {
    // table[i][k] = S_i(p_k)
    let table: Vec<Vec<Vec<Rational>>> =
        (0..d).map(|i| osc.iter().map(|p| s_map(p, i, &etas[i])).collect()).collect();
    let total = n.pow(d as u32);
    let root = (1..).find(|r: &usize| r * r >= d).unwrap();
    let scale = tau / Rational::from_integer(BigInt::from(root));
    let mut rng = rng_for(seed, 0x7461_7500);
    let jitter: Vec<Vec<Rational>> =
        (0..total).map(|_| (0..d).map(|_| &scale * unit_dyadic(&mut rng)).collect()).collect();
    par::map_range(total, |idx| {
        let g = grid_point(idx, d, n);
        let mut acc = jitter[idx].clone();
        for (i, &gi) in g.iter().enumerate() {
            for (a, x) in acc.iter_mut().zip(&table[i][gi as usize - 1]) {
                *a += x;
            }
        }
        acc
    })
}

/// Random maximal lattice segments with at least d+2 points, as
/// (start, direction, length).
fn sample_lines(d: usize, n: usize, count: usize, cutoff: i64, seed: u64) -> Vec<(Vec<i64>, Vec<i64>, usize)> {
    let dirs = primitive_directions(d, cutoff);
    let mut rng = rng_for(seed, 0x6c69_6e65);
    let mut out = Vec::new();
    let n_i = n as i64;
    let in_grid = |p: &[i64]| p.iter().all(|&x| (1..=n_i).contains(&x));
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count.max(1) {
        attempts += 1;
        let v = dirs[rng.random_range(0..dirs.len())].clone();
        let mut p: Vec<i64> = (0..d).map(|_| rng.random_range(1..=n_i)).collect();
        loop {
            let prev: Vec<i64> = p.iter().zip(&v).map(|(a, b)| a - b).collect();
            if !in_grid(&prev) {
                break;
            }
            p = prev;
        }
        let mut len = 0;
        let mut q = p.clone();
        while in_grid(&q) {
            len += 1;
            q.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
        }
        if len >= d + 2 {
            out.push((p, v, len));
        }
    }
    out
}

/// Random axis-parallel grid lines as (axis, start with 1 on that axis).
/// Every axis is traced at least once.
fn sample_axis_lines(d: usize, n: usize, count: usize, seed: u64) -> Vec<(usize, Vec<i64>)> {
    let mut rng = rng_for(seed, 0x6178_6973);
    (0..count.max(d))
        .map(|c| {
            let m = if c < d { c } else { rng.random_range(0..d) };
            let mut g: Vec<i64> = (0..d).map(|_| rng.random_range(1..=n as i64)).collect();
            g[m] = 1;
            (m, g)
        })
        .collect()
}

/// Image of the grid line along axis m through `start`: subtract the other
/// axes' summands, then rotate axis m to the front. What remains is the
/// oscillator with all but its first coordinate scaled by eta_m, plus tau.
fn line_image(set: &PointSet, osc: &PointSet, etas: &[Rational], n: usize, m: usize, start: &[i64]) -> PointSet {
    let d = start.len();
    let mut offset = vec![Rational::zero(); d];
    for (i, &si) in start.iter().enumerate() {
        if i != m {
            for (o, x) in offset.iter_mut().zip(s_map(osc.point(si as usize - 1), i, &etas[i])) {
                *o += x;
            }
        }
    }
    let mut g = start.to_vec();
    let pts = (1..=n as i64)
        .map(|k| {
            g[m] = k;
            let p = set.point(grid_index(&g, n));
            let x: Vec<Rational> = p.coords.iter().zip(&offset).map(|(a, b)| a - b).collect();
            RatPoint::new((0..d).map(|j| x[(j + m) % d].clone()).collect())
        })
        .collect();
    PointSet::new_unchecked(d, pts)
}

fn general_position(set: &PointSet, cfg: &GridConfig, n: usize) -> Result<GeneralPositionCheck> {
    let d = set.d();
    let refs: Vec<&RatPoint> = set.iter().collect();
    let ic = integer_coords(&refs, false);
    let fl = set.to_f64();
    let orient_nonzero = |s: &[usize]| -> bool {
        // Float screen first; near-degenerate subsets go to exact arithmetic.
        let base = &fl[s[0]];
        let m: Vec<Vec<f64>> = s[1..].iter().map(|&i| fl[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        let (det, mag) = det_f64(&m);
        if det.abs() > 1e-9 * mag.max(1.0) {
            return true;
        }
        let rows: Vec<&[BigInt]> = s.iter().map(|&i| ic[i].as_slice()).collect();
        !orient_int(&rows).is_zero()
    };
    let total = set.len();
    if crate::combin::binom(total as u64, d as u64 + 1) <= cfg.exact_gp_subsets {
        // Subsets grouped by their largest element.
        let ok = par::all_range(total, |j| {
            let items: Vec<usize> = (0..j).collect();
            let mut buf = vec![0usize; d + 1];
            for_each_subset(&items, d, |s| {
                buf[..d].copy_from_slice(s);
                buf[d] = j;
                orient_nonzero(&buf)
            })
        });
        if !ok {
            return Err(Error::Degenerate("perturbed grid is not in general position".into()));
        }
        let checked = crate::combin::binom(total as u64, d as u64 + 1) as u64;
        return Ok(GeneralPositionCheck { exact: true, subsets_checked: checked });
    }
    let mut rng = rng_for(cfg.seed, 0x6770_0000);
    let mut checked = 0u64;
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    while subsets.len() < cfg.gp_samples {
        let mut s: Vec<usize> = (0..=d).map(|_| rng.random_range(0..total)).collect();
        s.sort_unstable();
        s.dedup();
        if s.len() == d + 1 {
            subsets.push(s);
        }
    }
    // Grid-collinear subsets are the ones at risk: add every (d+1)-subset of
    // a few sampled lattice lines.
    for (start, v, len) in sample_lines(d, n, 8, 2, cfg.seed ^ 0x55) {
        let idx: Vec<usize> = (0..len as i64)
            .map(|k| {
                let g: Vec<i64> = start.iter().zip(&v).map(|(a, b)| a + k * b).collect();
                grid_index(&g, n)
            })
            .collect();
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        for_each_subset(&sorted, d + 1, |s| {
            subsets.push(s.to_vec());
            subsets.len() < cfg.gp_samples * 4
        });
    }
    let bad = par::any_range(subsets.len(), |i| !orient_nonzero(&subsets[i]));
    checked += subsets.len() as u64;
    if bad {
        return Err(Error::Degenerate("perturbed grid is not in general position".into()));
    }
    Ok(GeneralPositionCheck { exact: false, subsets_checked: checked })
}

/// Determinant by Gaussian elimination with partial pivoting, with the
/// product of row norms as a scale.
fn det_f64(m: &[Vec<f64>]) -> (f64, f64) {
    let k = m.len();
    let mag: f64 = m.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return (0.0, mag);
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for cc in c..k {
                a[r][cc] -= f * a[c][cc];
            }
        }
    }
    (det, mag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for i in 0..27 {
            assert_eq!(grid_index(&grid_point(i, 3, 3), 3), i);
        }
        assert_eq!(grid_point(0, 2, 4), vec![1, 1]);
        assert_eq!(grid_point(5, 2, 4), vec![2, 2]);
    }
}
