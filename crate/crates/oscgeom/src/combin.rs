//! Subset enumeration and colexicographic ranking.

/// Table of binomial coefficients C(n, k) for n <= n_max, k <= k_max.
#[derive(Clone, Debug)]
pub struct Binomial {
    k_max: usize,
    table: Vec<u64>,
}

impl Binomial {
    pub fn new(n_max: usize, k_max: usize) -> Self {
        let w = k_max + 1;
        let mut table = vec![0u64; (n_max + 1) * w];
        for n in 0..=n_max {
            table[n * w] = 1;
            for k in 1..=k_max.min(n) {
                let a = table[(n - 1) * w + k - 1];
                let b = if k < n { table[(n - 1) * w + k] } else { 0 };
                table[n * w + k] = a.saturating_add(b);
            }
        }
        Binomial { k_max, table }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            return 0;
        }
        self.table[n * (self.k_max + 1) + k]
    }

    /// Colex rank of a strictly increasing index list.
    #[inline]
    pub fn rank(&self, subset: &[usize]) -> usize {
        let mut r = 0u64;
        for (i, &s) in subset.iter().enumerate() {
            r += self.get(s, i + 1);
        }
        r as usize
    }
}

pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Calls `f` on every k-subset of `items`, in lexicographic order of positions.
/// Returning `false` from `f` stops the walk; the function reports whether
/// the walk ran to completion.
pub fn for_each_subset<T: Copy, F: FnMut(&[T]) -> bool>(items: &[T], k: usize, mut f: F) -> bool {
    let n = items.len();
    if k > n {
        return true;
    }
    if k == 0 {
        return f(&[]);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<T> = idx.iter().map(|&i| items[i]).collect();
    loop {
        if !f(&buf) {
            return false;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
            if i == 0 {
                return true;
            }
        }
        idx[i] += 1;
        buf[i] = items[idx[i]];
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
            buf[j] = items[idx[j]];
        }
    }
}

/// All k-subsets of 0..n as index vectors.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for_each_subset(&items, k, |s| {
        out.push(s.to_vec());
        true
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_rank_is_dense() {
        let b = Binomial::new(10, 4);
        let mut ranks: Vec<usize> = subsets(10, 4).iter().map(|s| b.rank(s)).collect();
        ranks.sort();
        assert_eq!(ranks, (0..210).collect::<Vec<_>>());
    }

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(7, 3).len(), 35);
        assert_eq!(subsets(3, 0).len(), 1);
        assert_eq!(subsets(2, 3).len(), 0);
        assert_eq!(binom(64, 4), 635_376);
    }

    #[test]
    fn early_stop() {
        let items = [1, 2, 3, 4];
        let mut seen = 0;
        let done = for_each_subset(&items, 2, |_| {
            seen += 1;
            seen < 3
        });
        assert!(!done);
        assert_eq!(seen, 3);
    }
}
