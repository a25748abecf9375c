//! Smallest-prime-factor tables, factorization and segmented prime sieving.

use crate::error::{invalid, Result};

/// Largest `limit` accepted by [`build_spf`]; beyond it use windowed evaluation.
pub const SPF_HARD_CAP: u64 = 1 << 31;

/// `(prime, exponent)` pairs, primes strictly increasing, product `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub fn new(parts: Vec<(u64, u32)>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(parts.iter().all(|&(_, e)| e >= 1));
        Self(parts)
    }

    pub fn parts(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn value(&self) -> u64 {
        self.0.iter().map(|&(q, e)| q.pow(e)).product()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            None
        } else {
            Some(self.spf[n as usize] as u64)
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.spf(n) == Some(n)
    }
}

/// Linear sieve; `spf[n]` for `2 <= n <= limit`.
pub fn build_spf(limit: u64) -> Result<SpfTable> {
    if limit < 2 {
        return Err(invalid(format!("spf limit must be >= 2, got {limit}")));
    }
    if limit > SPF_HARD_CAP {
        return Err(invalid(format!(
            "spf limit {limit} exceeds the hard cap {SPF_HARD_CAP}; use windowed evaluation"
        )));
    }
    let len = limit as usize + 1;
    let mut spf = vec![0u32; len];
    let mut primes: Vec<u32> = Vec::new();
    for n in 2..len {
        if spf[n] == 0 {
            spf[n] = n as u32;
            primes.push(n as u32);
        }
        let sn = spf[n];
        for &q in &primes {
            let m = q as usize * n;
            if q > sn || m >= len {
                break;
            }
            spf[m] = q;
        }
    }
    Ok(SpfTable { limit, spf })
}

pub fn factorize(n: u64, table: &SpfTable) -> Result<Factorization> {
    if n == 0 || n > table.limit {
        return Err(invalid(format!("cannot factor {n} with a table up to {}", table.limit)));
    }
    let mut parts = Vec::new();
    let mut m = n;
    while m > 1 {
        let q = table.spf[m as usize] as u64;
        let mut e = 0;
        while m % q == 0 {
            m /= q;
            e += 1;
        }
        parts.push((q, e));
    }
    Ok(Factorization::new(parts))
}

/// Primes `<= limit` by a plain sieve of Eratosthenes.
pub fn base_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let len = limit as usize + 1;
    let mut composite = vec![false; len];
    let mut out = Vec::new();
    for n in 2..len {
        if composite[n] {
            continue;
        }
        out.push(n as u64);
        let mut m = n * n;
        while m < len {
            composite[m] = true;
            m += n;
        }
    }
    out
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Every prime in the closed interval `[lo, hi]`, ascending.
///
/// Memory is `O(hi - lo + sqrt(hi))`.
pub fn primes_in_interval(lo: u64, hi: u64) -> Vec<u64> {
    let lo = lo.max(2);
    if hi < lo {
        return Vec::new();
    }
    let width = (hi - lo + 1) as usize;
    let mut composite = vec![false; width];
    for q in base_primes(isqrt(hi)) {
        let first = (q * q).max(lo.div_ceil(q) * q);
        let mut m = first;
        while m <= hi {
            composite[(m - lo) as usize] = true;
            m += q;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| lo + i as u64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_spf(n: u64) -> u64 {
        (2..=n).find(|d| n % d == 0).unwrap()
    }

    #[test]
    fn spf_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(t.spf(12), Some(2));
        assert_eq!(t.spf(17), Some(17));
        assert_eq!(t.spf(91), Some(trial_spf(91)));
        assert_eq!(t.spf(91), Some(7));
        assert_eq!(t.spf(1), None);
    }

    #[test]
    fn spf_invariants_against_trial_division() {
        let t = build_spf(20_000).unwrap();
        for n in 2..=20_000 {
            let s = t.spf(n).unwrap();
            assert_eq!(s, trial_spf(n));
            assert_eq!(n % s, 0);
        }
    }

    #[test]
    fn spf_rejects_bad_limits() {
        assert!(build_spf(1).is_err());
        assert!(build_spf(SPF_HARD_CAP + 1).is_err());
    }

    #[test]
    fn factorize_examples() {
        let t = build_spf(1000).unwrap();
        assert!(factorize(1, &t).unwrap().is_one());
        assert_eq!(factorize(12, &t).unwrap().parts(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(360, &t).unwrap().parts(), &[(2, 3), (3, 2), (5, 1)]);
        assert!(factorize(0, &t).is_err());
        assert!(factorize(1001, &t).is_err());
        for n in 1..=1000 {
            assert_eq!(factorize(n, &t).unwrap().value(), n);
        }
    }

    #[test]
    fn interval_examples() {
        assert_eq!(primes_in_interval(90, 100), vec![97]);
        assert_eq!(primes_in_interval(2, 11), vec![2, 3, 5, 7, 11]);
        assert_eq!(primes_in_interval(11, 11), vec![11]);
        assert!(primes_in_interval(24, 28).is_empty());
    }

    #[test]
    fn short_interval_below_thousand_has_two_primes() {
        let x = 1000f64;
        let lo = (x - x.powf(0.8)).ceil() as u64;
        let found = primes_in_interval(lo, 1000);
        assert!(found.len() >= 2, "{found:?}");
    }

    #[test]
    fn interval_matches_eratosthenes_up_to_a_million() {
        let all = base_primes(1_000_000);
        for &(lo, hi) in &[(2u64, 1_000_000u64), (999_000, 1_000_000), (500_000, 500_500), (3, 3)] {
            let expect: Vec<u64> = all.iter().copied().filter(|&q| q >= lo && q <= hi).collect();
            assert_eq!(primes_in_interval(lo, hi), expect);
        }
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 3, 4, 15, 16, 17, u32::MAX as u64, u64::MAX] {
            let r = isqrt(n);
            assert!(r as u128 * r as u128 <= n as u128);
            assert!((r as u128 + 1) * (r as u128 + 1) > n as u128);
        }
    }
}
