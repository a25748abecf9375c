//! Slow, direct reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use nwres::AdditiveRule;

/// `w(n)` by trial division.
pub fn trial_w(rule: &AdditiveRule, n: u64) -> u64 {
    let mut m = n;
    let mut w = 0;
    let mut d = 2;
    while d * d <= m {
        let mut e = 0;
        while m % d == 0 {
            m /= d;
            e += 1;
        }
        w += rule.prime_power_value(e);
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        w += rule.prime_power_value(1);
    }
    w
}

/// Everything the counting layer computes, by direct enumeration.
pub struct Naive {
    pub n: u64,
    /// `w[m]` for `m` in `1..=n` (index 0 unused)
    pub w: Vec<u64>,
    /// `g[v] = #{m <= n : m + w(m) = v}` for every reachable `v`
    pub g: Vec<u64>,
}

impl Naive {
    pub fn new(rule: &AdditiveRule, n: u64) -> Self {
        let mut w = vec![0u64; n as usize + 1];
        for m in 1..=n {
            w[m as usize] = trial_w(rule, m);
        }
        let top = (1..=n).map(|m| m + w[m as usize]).max().unwrap_or(0);
        let mut g = vec![0u64; top as usize + 1];
        for m in 1..=n {
            g[(m + w[m as usize]) as usize] += 1;
        }
        Self { n, w, g }
    }

    pub fn g_at(&self, v: u64) -> u64 {
        self.g.get(v as usize).copied().unwrap_or(0)
    }

    pub fn xi(&self) -> u64 {
        (1..=self.n).filter(|&v| self.g_at(v) == 0).count() as u64
    }

    /// Ordered pairs `m != m'` with equal images.
    pub fn collisions(&self) -> u64 {
        self.g.iter().map(|&c| c * c.saturating_sub(1)).sum()
    }

    pub fn residues(&self, p: u64) -> Vec<u64> {
        let mut a = vec![0u64; p as usize];
        for m in 1..=self.n {
            a[((m + self.w[m as usize]) % p) as usize] += 1;
        }
        a
    }

    pub fn overflow(&self) -> u64 {
        (1..=self.n).filter(|&m| m + self.w[m as usize] > self.n).count() as u64
    }
}

pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

/// `(1 + sum_{j=1}^{terms} e(w(q^j) t/p) q^{-js}) (1 - q^{-s})^{e(t/p)}`.
pub fn series_local_factor(rule: &AdditiveRule, q: u64, t: u64, p: u64, s: f64, terms: u32) -> Complex64 {
    let x = (q as f64).powf(-s);
    let mut sum = Complex64::new(1.0, 0.0);
    for j in 1..=terms {
        let f = rule.prime_power_value(j);
        sum += e(((f * t) % p) as f64 / p as f64) * x.powi(j as i32);
    }
    let z = e(t as f64 / p as f64);
    sum * (z * (1.0 - x).ln()).exp()
}

/// `(1 + sum_{j=1}^{terms} e(w(p^j) t/p) p^{-js})^{-1}`.
pub fn series_d(rule: &AdditiveRule, t: u64, p: u64, s: f64, terms: u32) -> Complex64 {
    let x = (p as f64).powf(-s);
    let mut sum = Complex64::new(1.0, 0.0);
    for j in 1..=terms {
        let f = rule.prime_power_value(j);
        sum += e(((f * t) % p) as f64 / p as f64) * x.powi(j as i32);
    }
    1.0 / sum
}

/// `f = 1, 2, 2, 3, 3, ...`
pub fn custom_rule() -> AdditiveRule {
    AdditiveRule::custom(vec![1, 2, 2], nwres::AffineTail { slope: 0, intercept: 3 }).unwrap()
}

/// A rule whose tail grows, `f = 1, 3, 0, 3, 5, 7, ...`
pub fn custom_rule_affine() -> AdditiveRule {
    AdditiveRule::custom(vec![1, 3, 0], nwres::AffineTail { slope: 2, intercept: -5 }).unwrap()
}

pub fn odd_primes_upto(n: u64) -> Vec<u64> {
    (3..=n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
}
