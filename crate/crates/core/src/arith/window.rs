//! Segmented evaluation of `w(n)` over half-open windows `[lo, hi)`.

use rayon::prelude::*;

use super::cache::WindowCache;
use super::rule::AdditiveRule;
use super::sieve::{base_primes, isqrt, Factorization};
use crate::error::{invalid, Result};

pub const DEFAULT_WINDOW_LEN: u64 = 1 << 18;

/// `w(n) = sum over (q, e) of f(e)`; `w(1) = 0`.
pub fn w_value(rule: &AdditiveRule, f: &Factorization) -> u64 {
    f.parts().iter().map(|&(_, e)| rule.prime_power_value(e)).sum()
}

/// `w(n)` for every `n` in `[lo, hi)`, one byte per value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WWindow {
    pub lo: u64,
    pub hi: u64,
    pub rule_fingerprint: u64,
    pub values: Vec<u8>,
}

impl WWindow {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: u64) -> Option<u8> {
        if n < self.lo || n >= self.hi {
            None
        } else {
            Some(self.values[(n - self.lo) as usize])
        }
    }

    /// `(n, w(n))` in ascending `n`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u8)> + '_ {
        self.values.iter().enumerate().map(move |(i, &w)| (self.lo + i as u64, w))
    }

    /// Appends `next`, which must start where `self` ends.
    pub fn concat(mut self, next: &WWindow) -> Result<WWindow> {
        if next.lo != self.hi || next.rule_fingerprint != self.rule_fingerprint {
            return Err(invalid("windows are not adjacent or use different rules"));
        }
        self.values.extend_from_slice(&next.values);
        self.hi = next.hi;
        Ok(self)
    }
}

/// Sieve kernel. `primes` must contain every prime `<= isqrt(hi - 1)`.
///
/// Each prime power `q^k` adds `f(k) - f(k-1)` to its multiples; the running
/// value per `n` after prime `q` is `sum of f(e)` over primes seen so far, which
/// is non-negative, so wrapping 8-bit arithmetic never loses information once
/// the rule is validated to stay below 256. The product of the sieved prime
/// powers reveals the single leftover prime above `sqrt(hi)`.
fn sieve_values(rule: &AdditiveRule, primes: &[u64], lo: u64, hi: u64) -> Vec<u8> {
    let len = (hi - lo) as usize;
    let mut values = vec![0u8; len];
    let mut smooth = vec![1u64; len];
    let top = hi - 1;
    let root = isqrt(top);
    for &q in primes.iter().take_while(|&&q| q <= root) {
        let mut pk = q;
        let mut k = 1u32;
        loop {
            let delta = (rule.prime_power_value(k) as i64 - rule.prime_power_value(k - 1) as i64) as u8;
            let first = lo.div_ceil(pk) * pk;
            let mut idx = (first - lo) as usize;
            let step = pk as usize;
            if delta == 0 {
                while idx < len {
                    smooth[idx] *= q;
                    idx += step;
                }
            } else {
                while idx < len {
                    values[idx] = values[idx].wrapping_add(delta);
                    smooth[idx] *= q;
                    idx += step;
                }
            }
            match pk.checked_mul(q) {
                Some(next) if next <= top => {
                    pk = next;
                    k += 1;
                }
                _ => break,
            }
        }
    }
    for (i, (v, &s)) in values.iter_mut().zip(&smooth).enumerate() {
        if s != lo + i as u64 {
            // one prime above sqrt(hi) with exponent 1, and f(1) = 1
            *v += 1;
        }
    }
    values
}

fn check_window(lo: u64, hi: u64) -> Result<()> {
    if lo < 1 {
        return Err(invalid("window must start at n >= 1"));
    }
    if hi <= lo {
        return Err(invalid(format!("empty window [{lo}, {hi})")));
    }
    if hi > 1 << 48 {
        return Err(invalid("window exceeds the 48-bit range"));
    }
    Ok(())
}

/// `w(n)` for `n` in `[lo, hi)`; memory `O((hi - lo) + sqrt(hi))`.
pub fn w_window(rule: &AdditiveRule, lo: u64, hi: u64) -> Result<WWindow> {
    check_window(lo, hi)?;
    rule.validate_upto(hi - 1)?;
    let primes = base_primes(isqrt(hi - 1));
    Ok(WWindow {
        lo,
        hi,
        rule_fingerprint: rule.fingerprint(),
        values: sieve_values(rule, &primes, lo, hi),
    })
}

/// Source of `w`-windows covering `[1, limit]`, shared by every counting pass.
///
/// Windows are aligned to multiples of `window_len` (starting at 1), so two
/// runs with the same window length hit the same cache entries.
#[derive(Clone, Debug)]
pub struct WSource {
    rule: AdditiveRule,
    limit: u64,
    window_len: u64,
    primes: Vec<u64>,
    max_w: u64,
    cache: Option<WindowCache>,
}

impl WSource {
    pub fn new(rule: &AdditiveRule, limit: u64) -> Result<Self> {
        if limit < 1 {
            return Err(invalid("limit must be >= 1"));
        }
        check_window(1, limit + 1)?;
        let max_w = rule.validate_upto(limit)?;
        Ok(Self {
            rule: rule.clone(),
            limit,
            window_len: DEFAULT_WINDOW_LEN,
            primes: base_primes(isqrt(limit)),
            max_w,
            cache: None,
        })
    }

    pub fn with_window_len(mut self, len: u64) -> Self {
        self.window_len = len.max(1);
        self
    }

    pub fn with_cache(mut self, cache: Option<WindowCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn rule(&self) -> &AdditiveRule {
        &self.rule
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `max_{n <= limit} w(n)`.
    pub fn max_w(&self) -> u64 {
        self.max_w
    }

    /// Aligned partition of `[1, n + 1)`.
    pub fn windows(&self, n: u64) -> Vec<(u64, u64)> {
        let end = n.min(self.limit) + 1;
        let mut out = Vec::new();
        let mut lo = 1;
        while lo < end {
            let hi = (lo + self.window_len).min(end);
            out.push((lo, hi));
            lo = hi;
        }
        out
    }

    pub fn window(&self, lo: u64, hi: u64) -> Result<WWindow> {
        check_window(lo, hi)?;
        if hi - 1 > self.limit {
            return Err(invalid(format!("window [{lo}, {hi}) exceeds source limit {}", self.limit)));
        }
        let fingerprint = self.rule.fingerprint();
        if let Some(cache) = &self.cache {
            if let Some(values) = cache.load(fingerprint, lo, hi)? {
                return Ok(WWindow { lo, hi, rule_fingerprint: fingerprint, values });
            }
        }
        let window = WWindow {
            lo,
            hi,
            rule_fingerprint: fingerprint,
            values: sieve_values(&self.rule, &self.primes, lo, hi),
        };
        if let Some(cache) = &self.cache {
            cache.store(&window)?;
        }
        Ok(window)
    }

    /// Parallel map over the windows of `[1, n]`, merged in window order.
    ///
    /// The result is independent of the thread count because partial results
    /// are combined sequentially in ascending window order.
    pub fn map_reduce<A, M, R>(&self, n: u64, map: M, mut reduce: R, init: A) -> Result<A>
    where
        A: Send,
        M: Fn(&WWindow) -> A + Sync + Send,
        R: FnMut(A, A) -> A,
    {
        let parts: Vec<Result<A>> = self
            .windows(n)
            .into_par_iter()
            .map(|(lo, hi)| self.window(lo, hi).map(|w| map(&w)))
            .collect();
        let mut acc = init;
        for part in parts {
            acc = reduce(acc, part?);
        }
        Ok(acc)
    }

    /// Visits the windows of `[1, n]` in ascending order; windows are
    /// computed in parallel batches ahead of the visitor.
    pub fn for_each_ordered<F>(&self, n: u64, mut visit: F) -> Result<()>
    where
        F: FnMut(&WWindow) -> Result<()>,
    {
        let all = self.windows(n);
        let batch = rayon::current_num_threads().max(1) * 2;
        for chunk in all.chunks(batch) {
            let computed: Vec<Result<WWindow>> =
                chunk.par_iter().map(|&(lo, hi)| self.window(lo, hi)).collect();
            for w in computed {
                visit(&w?)?;
            }
        }
        Ok(())
    }
}
