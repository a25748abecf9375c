//! Local factors and truncated Euler products of
//! `F_{t,p}(s) = prod_q (sum_j e(w(q^j) t/p) q^{-js}) (1 - q^{-s})^{e(t/p)}`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{base_primes, AdditiveRule, RuleKind};
use crate::error::{invalid, Error, Result};
use crate::expsum::unit_root_frac;
use crate::scalar::{complex_ln_1p, Real};
use crate::summation::CompensatedComplex;

/// `|log local_factor(q)| <= TAIL_MAJORANT / q^2` for `q >= 5`, `s >= 1`.
pub const TAIL_MAJORANT: f64 = 3.0;

const PRIME_BLOCK: usize = 4096;

/// `sum_{j >= 1} e(f(j) t / p) x^j` for `x = q^{-s}` (the local series minus 1).
fn series_tail<T: Real>(rule: &AdditiveRule, x: T, t: u64, p: u64) -> Complex<T> {
    let z = unit_root_frac::<T>(t as i64, p);
    let one = Complex::new(T::one(), T::zero());
    match rule.kind() {
        // z x / (1 - x)
        RuleKind::Omega => z * (x / (T::one() - x)),
        // z x / (1 - z x)
        RuleKind::BigOmega => {
            let zx = z * x;
            zx / (one - zx)
        }
        RuleKind::Custom => {
            let table = rule.table();
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut xj = T::one();
            for &f in table {
                xj *= x;
                acc += unit_root_frac::<T>((f as u64 % p * t % p) as i64, p) * xj;
            }
            // j > J: e((slope j + b) t / p) x^j = e(b t/p) rho^j, rho = e(slope t/p) x
            let tail = rule.tail();
            let slope = tail.slope.rem_euclid(p as i64) as u64;
            let intercept = tail.intercept.rem_euclid(p as i64) as u64;
            let rho = unit_root_frac::<T>((slope * t % p) as i64, p) * x;
            let shift = unit_root_frac::<T>((intercept * t % p) as i64, p);
            let mut rho_pow = one;
            for _ in 0..=table.len() {
                rho_pow *= rho;
            }
            acc + shift * rho_pow / (one - rho)
        }
    }
}

fn check_s<T: Real>(s: T) -> Result<()> {
    if !(s > T::lit(0.5)) {
        return Err(Error::OutOfDomain(format!("s must exceed 1/2, got {s}")));
    }
    Ok(())
}

/// `log` of the local factor at the prime `q`, principal branch term by term.
pub fn local_log_factor<T: Real>(rule: &AdditiveRule, q: u64, t: u64, p: u64, s: T) -> Result<Complex<T>> {
    check_s(s)?;
    let x = T::count(q).powf(-s);
    let z = unit_root_frac::<T>(t as i64, p);
    Ok(complex_ln_1p(series_tail(rule, x, t, p)) + z * (-x).ln_1p())
}

/// `(1 + e(t/p) q^{-s} + e(w(q^2) t/p) q^{-2s} + ...)(1 - q^{-s})^{e(t/p)}`.
pub fn local_factor<T: Real>(rule: &AdditiveRule, q: u64, t: u64, p: u64, s: T) -> Result<Complex<T>> {
    Ok(local_log_factor(rule, q, t, p, s)?.exp())
}

/// `(1 + e(t/p) p^{-s} + e(w(p^2) t/p) p^{-2s} + ...)^{-1}`.
pub fn d_tp<T: Real>(rule: &AdditiveRule, t: u64, p: u64, s: T) -> Result<Complex<T>> {
    if !(s >= T::one()) {
        return Err(Error::OutOfDomain(format!("d_(t,p)(s) needs s >= 1, got {s}")));
    }
    let x = T::count(p).powf(-s);
    let one = Complex::new(T::one(), T::zero());
    if rule.kind() == RuleKind::BigOmega {
        return Ok(one - unit_root_frac::<T>(t as i64, p) * x);
    }
    let denom = one + series_tail(rule, x, t, p);
    if denom.norm() < T::min_positive_value().sqrt() {
        return Err(Error::NumericDegenerate(format!("local series at p = {p} vanishes")));
    }
    Ok(one / denom)
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerProductResult<T> {
    #[serde(skip)]
    pub value: Complex<T>,
    pub prime_cutoff: u64,
    pub primes_used: usize,
    /// Bound on `|log|` of the product of all omitted factors.
    pub tail_bound: f64,
    pub t: u64,
    pub p: u64,
    pub s: f64,
    pub rule: String,
}

impl<T: Real> EulerProductResult<T> {
    /// `|value|` inside `[b1 e^{-tail}, b2 e^{tail}]`.
    pub fn within_bounds(&self, b1: f64, b2: f64) -> bool {
        let m = self.value.norm().to_f64_lossy();
        m >= b1 * (-self.tail_bound).exp() && m <= b2 * self.tail_bound.exp()
    }
}

/// Product of local factors over `primes`; logs are summed per fixed-size
/// block in parallel and blocks are merged in order.
pub(crate) fn log_product<T: Real>(rule: &AdditiveRule, primes: &[u64], t: u64, p: u64, s: T) -> Result<Complex<T>> {
    check_s(s)?;
    let blocks: Vec<Result<CompensatedComplex<T>>> = primes
        .par_chunks(PRIME_BLOCK)
        .map(|block| {
            let mut acc = CompensatedComplex::new();
            for &q in block {
                acc.add(local_log_factor(rule, q, t, p, s)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = CompensatedComplex::new();
    for b in blocks {
        total.merge(&b?);
    }
    Ok(total.value())
}

pub(crate) fn check_cutoff(cutoff: u64) -> Result<()> {
    if cutoff < 100 {
        return Err(invalid(format!("prime cutoff must be >= 100, got {cutoff}")));
    }
    Ok(())
}

pub(crate) fn euler_product_with<T: Real>(
    rule: &AdditiveRule,
    primes: &[u64],
    cutoff: u64,
    t: u64,
    p: u64,
    s: T,
) -> Result<EulerProductResult<T>> {
    check_cutoff(cutoff)?;
    if !(s >= T::one()) {
        return Err(invalid(format!("Euler products are evaluated for s >= 1, got {s}")));
    }
    let log = log_product(rule, primes, t, p, s)?;
    Ok(EulerProductResult {
        value: log.exp(),
        prime_cutoff: cutoff,
        primes_used: primes.len(),
        tail_bound: TAIL_MAJORANT / (cutoff as f64 - 1.0),
        t,
        p,
        s: s.to_f64_lossy(),
        rule: rule.label(),
    })
}

/// `F_{t,p}(s)` truncated to primes `q <= cutoff`.
pub fn euler_product_f<T: Real>(rule: &AdditiveRule, t: u64, p: u64, s: T, cutoff: u64) -> Result<EulerProductResult<T>> {
    check_cutoff(cutoff)?;
    let primes = base_primes(cutoff);
    euler_product_with(rule, &primes, cutoff, t, p, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::AffineTail;

    /// Direct series, 60 terms, with the plain complex power.
    fn local_factor_series(rule: &AdditiveRule, q: u64, t: u64, p: u64, s: f64) -> Complex<f64> {
        let x = (q as f64).powf(-s);
        let e = |k: u64| Complex::from_polar(1.0, std::f64::consts::TAU * (k % p) as f64 / p as f64);
        let mut series = Complex::new(0.0, 0.0);
        for j in 0..60u32 {
            series += e(rule.prime_power_value(j) * t) * x.powi(j as i32);
        }
        let z = e(t);
        series * (z * (1.0 - x).ln()).exp()
    }

    fn d_series(rule: &AdditiveRule, t: u64, p: u64, s: f64) -> Complex<f64> {
        let x = (p as f64).powf(-s);
        let mut series = Complex::new(0.0, 0.0);
        for j in 0..60u32 {
            let k = rule.prime_power_value(j) * t % p;
            series += Complex::from_polar(x.powi(j as i32), std::f64::consts::TAU * k as f64 / p as f64);
        }
        Complex::new(1.0, 0.0) / series
    }

    fn custom() -> AdditiveRule {
        AdditiveRule::custom(vec![1, 2, 2, 3], AffineTail { slope: 0, intercept: 3 }).unwrap()
    }

    #[test]
    fn trivial_frequency_factor_is_one() {
        for rule in [AdditiveRule::omega(), AdditiveRule::big_omega(), custom()] {
            for q in [2u64, 3, 7, 101] {
                let f = local_factor(&rule, q, 0, 5, 1.0f64).unwrap();
                assert!((f - Complex::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_omega_q2_matches_series() {
        let closed = local_factor(&AdditiveRule::omega(), 2, 1, 5, 1.0f64).unwrap();
        let series = local_factor_series(&AdditiveRule::omega(), 2, 1, 5, 1.0);
        assert!((closed - series).norm() < 1e-14);
    }

    #[test]
    fn closed_forms_match_series_on_grid() {
        for rule in [AdditiveRule::omega(), AdditiveRule::big_omega(), custom()] {
            for q in [2u64, 3, 5, 7] {
                for t in [1u64, 2] {
                    for p in [5u64, 7] {
                        for s in [1.0f64, 1.5] {
                            let a = local_factor(&rule, q, t, p, s).unwrap();
                            let b = local_factor_series(&rule, q, t, p, s);
                            assert!((a - b).norm() < 1e-12, "{} q={q} t={t} p={p} s={s}", rule.label());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn custom_equivalents_of_canonical_rules_agree() {
        let omega_c = AdditiveRule::omega().to_custom();
        let big_c = AdditiveRule::big_omega().to_custom();
        for q in [2u64, 3, 11] {
            let a = local_factor(&AdditiveRule::omega(), q, 2, 7, 1.0f64).unwrap();
            let b = local_factor(&omega_c, q, 2, 7, 1.0f64).unwrap();
            assert!((a - b).norm() < 1e-15);
            let a = local_factor(&AdditiveRule::big_omega(), q, 3, 7, 1.0f64).unwrap();
            let b = local_factor(&big_c, q, 3, 7, 1.0f64).unwrap();
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn local_factor_domain() {
        assert!(matches!(local_factor(&AdditiveRule::omega(), 2, 1, 5, 0.5f64), Err(Error::OutOfDomain(_))));
        assert!(local_factor(&AdditiveRule::omega(), 2, 1, 5, 0.6f64).is_ok());
    }

    #[test]
    fn conjugate_symmetry_of_local_factor() {
        for rule in [AdditiveRule::omega(), AdditiveRule::big_omega(), custom()] {
            for t in 1..7u64 {
                let a = local_factor(&rule, 3, t, 7, 1.0f64).unwrap();
                let b = local_factor(&rule, 3, 7 - t, 7, 1.0f64).unwrap();
                assert!((a - b.conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn d_factor_examples() {
        let one = Complex::new(1.0, 0.0);
        for p in [3u64, 5, 7, 11] {
            let pf = p as f64;
            let d = d_tp(&AdditiveRule::omega(), 0, p, 1.0f64).unwrap();
            assert!((d - one * ((pf - 1.0) / pf)).norm() < 1e-15);
            let d = d_tp(&AdditiveRule::big_omega(), 0, p, 1.0f64).unwrap();
            assert!((d - one * (1.0 - 1.0 / pf)).norm() < 1e-15);
            for rule in [AdditiveRule::omega(), AdditiveRule::big_omega()] {
                let d0 = d_tp(&rule, 0, p, 1.0f64).unwrap();
                let correction = one - d0 * (pf / (pf - 1.0));
                assert!(correction.norm() <= 1e-12);
            }
        }
        assert!(d_tp(&AdditiveRule::omega(), 1, 5, 0.9f64).is_err());
    }

    #[test]
    fn d_closed_forms_match_series_on_grid() {
        for rule in [AdditiveRule::omega(), AdditiveRule::big_omega(), custom()] {
            for t in [1u64, 2] {
                for p in [5u64, 7] {
                    for s in [1.0f64, 1.5] {
                        let a = d_tp(&rule, t, p, s).unwrap();
                        let b = d_series(&rule, t, p, s);
                        assert!((a - b).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn log_majorant_holds_for_q_at_least_five() {
        let rules = [
            AdditiveRule::omega(),
            AdditiveRule::big_omega(),
            custom(),
            AdditiveRule::custom(vec![1, 0, 5, 0], AffineTail { slope: 3, intercept: 1 }).unwrap(),
        ];
        for rule in &rules {
            for q in crate::arith::primes_in_interval(5, 3000) {
                for p in [3u64, 5, 7, 11, 13] {
                    for t in 0..p {
                        let l = local_log_factor(rule, q, t, p, 1.0f64).unwrap();
                        assert!(l.norm() <= TAIL_MAJORANT / (q * q) as f64, "{} q={q} t={t} p={p}", rule.label());
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_frequency_product_is_one() {
        for rule in [AdditiveRule::omega(), AdditiveRule::big_omega()] {
            for p in [3u64, 5, 7] {
                let f = euler_product_f(&rule, 0, p, 1.0f64, 1000).unwrap();
                assert!((f.value - Complex::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cutoff_validation() {
        assert!(euler_product_f(&AdditiveRule::omega(), 1, 5, 1.0f64, 99).is_err());
        assert!(euler_product_f(&AdditiveRule::omega(), 1, 5, 0.9f64, 1000).is_err());
    }

    #[test]
    fn tail_bound_is_sound() {
        for t in 1..5u64 {
            let lo = euler_product_f(&AdditiveRule::omega(), t, 5, 1.0f64, 1_000).unwrap();
            let hi = euler_product_f(&AdditiveRule::omega(), t, 5, 1.0f64, 20_000).unwrap();
            let gap = (hi.value - lo.value).norm();
            assert!(gap <= lo.value.norm() * (lo.tail_bound.exp() - 1.0));
        }
    }
}
