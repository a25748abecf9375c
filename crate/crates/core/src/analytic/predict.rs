//! Second-order prediction of `a(r)` from `A_t`, the error-term magnitudes,
//! and the choice of `(X, p)` and of the residue set `R`.

use num_complex::Complex;
use serde::Serialize;

use super::constants::ConstantsConfig;
use super::euler::{check_cutoff, d_tp, euler_product_with, EulerProductResult};
use super::gamma::reciprocal_gamma;
use crate::arith::{base_primes, primes_in_interval, AdditiveRule};
use crate::counting::histogram::check_odd_prime;
use crate::counting::{ResidueSelection, SelectionStrategy};
use crate::error::{invalid, Error, Result};
use crate::export::{pairs, reals, Fixed17, SCHEMA_VERSION};
use crate::expsum::unit_root_frac;
use crate::scalar::{real_pow_complex, Real};

pub const DEFAULT_PRIME_CUTOFF: u64 = 1_000_000;

pub const FLAG_UNEXCEPTIONAL: &str = "unexceptional-assumed";
pub const FLAG_FALLBACK_P: &str = "fallback-p";
pub const FLAG_OVERRIDE_P: &str = "override-p";

fn check_n(n: u64) -> Result<()> {
    if n < 16 {
        return Err(Error::OutOfDomain(format!("N must be >= 16 so that log log N > 0, got {n}")));
    }
    Ok(())
}

fn log_log<T: Real>(n: u64) -> T {
    T::count(n).ln().ln()
}

/// Every ingredient of one coefficient `A_t`.
#[derive(Clone, Debug)]
pub struct ACoefficient<T> {
    pub t: u64,
    pub euler: EulerProductResult<T>,
    pub d: Complex<T>,
    /// `1 - p/(p-1) d_{t,p}(1)`
    pub correction: Complex<T>,
    pub rgamma: Complex<T>,
    /// `log^{e(t/p) - 1} N`
    pub log_power: Complex<T>,
    pub value: Complex<T>,
}

fn coefficient_with<T: Real>(
    n: u64,
    p: u64,
    rule: &AdditiveRule,
    t: u64,
    primes: &[u64],
    cutoff: u64,
) -> Result<ACoefficient<T>> {
    let s = T::one();
    let euler = euler_product_with(rule, primes, cutoff, t, p, s)?;
    let d = d_tp(rule, t, p, s)?;
    let pf = T::count(p);
    let correction = Complex::new(T::one(), T::zero()) - d * (pf / (pf - T::one()));
    let z = unit_root_frac::<T>(t as i64, p);
    let rgamma = reciprocal_gamma(z);
    let log_power = real_pow_complex(log_log::<T>(n), z - T::one());
    let value = euler.value * correction * rgamma * log_power;
    Ok(ACoefficient { t, euler, d, correction, rgamma, log_power, value })
}

pub fn coefficient_a_detail<T: Real>(
    n: u64,
    p: u64,
    rule: &AdditiveRule,
    t: u64,
    cutoff: u64,
) -> Result<ACoefficient<T>> {
    check_n(n)?;
    check_odd_prime(p)?;
    check_cutoff(cutoff)?;
    if t == 0 || t >= p {
        return Err(invalid(format!("t must lie in 1..p-1, got {t}")));
    }
    coefficient_with(n, p, rule, t, &base_primes(cutoff), cutoff)
}

/// `A_t = F_{t,p}(1) (1 - p/(p-1) d_{t,p}(1)) / Γ(e(t/p)) · log^{e(t/p)-1} N`.
pub fn coefficient_a<T: Real>(n: u64, p: u64, rule: &AdditiveRule, t: u64, cutoff: u64) -> Result<Complex<T>> {
    Ok(coefficient_a_detail::<T>(n, p, rule, t, cutoff)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorMagnitudes {
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    #[serde(rename = "B3")]
    pub b3: f64,
    /// `(N/p) sum_{t ≠ 0} log^{cos(2πt/p) - 2} N`, the frequency-wise form of `B2`.
    #[serde(rename = "B2_twise")]
    pub b2_twise: f64,
}

/// `B1 = pN exp(-c6 log N / (sqrt(log N) + log p))`,
/// `B2 = N log^{cos(2π/p) - 2} N`,
/// `B3 = N p^{-3} sum_{t=2}^{(p-1)/2} t log^{cos(2πt/p) - 1} N`,
/// each scaled by its configured constant.
pub fn error_magnitudes(n: u64, p: u64, constants: &ConstantsConfig) -> Result<ErrorMagnitudes> {
    check_n(n)?;
    constants.validate()?;
    let nf = n as f64;
    let pf = p as f64;
    let log_n = nf.ln();
    let cos = |t: u64| (std::f64::consts::TAU * t as f64 / pf).cos();
    let b1 = pf * nf * (-constants.c6 * log_n / (log_n.sqrt() + pf.ln())).exp();
    let b2 = constants.c_b2 * nf * log_n.powf(cos(1) - 2.0);
    let b3_sum: f64 = (2..=(p - 1) / 2).map(|t| t as f64 * log_n.powf(cos(t) - 1.0)).sum();
    let b3 = constants.c_b3 * nf / pf.powi(3) * b3_sum;
    let b2_twise = constants.c_b2 * nf / pf * (1..p).map(|t| log_n.powf(cos(t) - 2.0)).sum::<f64>();
    Ok(ErrorMagnitudes { b1, b2, b3, b2_twise })
}

#[derive(Clone, Debug)]
pub struct PredictionReport<T> {
    pub n: u64,
    pub p: u64,
    pub rule: String,
    pub t_max: u64,
    pub prime_cutoff: u64,
    /// `A_t` for `t = 1..p-1` (index `t - 1`).
    pub a: Vec<Complex<T>>,
    pub detail: Vec<ACoefficient<T>>,
    pub predicted: Vec<T>,
    pub errors: ErrorMagnitudes,
    /// `|A_1| p^2 log^{1 - cos(2π/p)} N`
    pub a1_ratio: f64,
    /// `p B3 <= 0.1 N |A_1|`
    pub dominance_holds: bool,
    /// `|F_{t,p}(1)|` within `[b1, b2]` (with tail slack) for every `t`.
    pub euler_within_bounds: bool,
    /// `|1/Γ(e(1/p))| > C_Γ`
    pub rgamma_above_floor: bool,
    pub flags: Vec<String>,
    pub constants: ConstantsConfig,
}

impl<T: Real> PredictionReport<T> {
    pub fn a_t(&self, t: u64) -> Complex<T> {
        self.a[(t % self.p) as usize - 1]
    }

    /// `predicted(r) - N/p`.
    pub fn corrections(&self) -> Vec<f64> {
        let base = self.n as f64 / self.p as f64;
        self.predicted.iter().map(|x| x.to_f64_lossy() - base).collect()
    }

    pub fn predicted_at(&self, r: i64) -> T {
        self.predicted[r.rem_euclid(self.p as i64) as usize]
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            schema: u32,
            #[serde(rename = "N")]
            n: u64,
            p: u64,
            rule: &'a str,
            t_max: u64,
            prime_cutoff: u64,
            #[serde(rename = "A")]
            a: Vec<[Fixed17; 2]>,
            predicted: Vec<Fixed17>,
            #[serde(rename = "B1")]
            b1: Fixed17,
            #[serde(rename = "B2")]
            b2: Fixed17,
            #[serde(rename = "B3")]
            b3: Fixed17,
            #[serde(rename = "B2_twise")]
            b2_twise: Fixed17,
            a1_ratio: Fixed17,
            dominance_holds: bool,
            euler_within_bounds: bool,
            rgamma_above_floor: bool,
            flags: &'a [String],
            constants: &'a ConstantsConfig,
        }
        crate::export::to_json(&Out {
            schema: SCHEMA_VERSION,
            n: self.n,
            p: self.p,
            rule: &self.rule,
            t_max: self.t_max,
            prime_cutoff: self.prime_cutoff,
            a: pairs(&self.a),
            predicted: reals(&self.predicted),
            b1: Fixed17(self.errors.b1),
            b2: Fixed17(self.errors.b2),
            b3: Fixed17(self.errors.b3),
            b2_twise: Fixed17(self.errors.b2_twise),
            a1_ratio: Fixed17(self.a1_ratio),
            dominance_holds: self.dominance_holds,
            euler_within_bounds: self.euler_within_bounds,
            rgamma_above_floor: self.rgamma_above_floor,
            flags: &self.flags,
            constants: &self.constants,
        })
    }

    /// `r,predicted` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,predicted\n");
        for (r, x) in self.predicted.iter().enumerate() {
            out.push_str(&format!("{r},{}\n", crate::export::format_f64(x.to_f64_lossy())));
        }
        out
    }
}

/// `predicted(r) = N/p + (N/p) Re sum_{t in T} e(-rt/p) A_t` where `T` holds
/// `1..=m` and their negatives, `m = min(t_max, (p-1)/2)`. `t_max = p - 1`
/// is the full range; `t_max = 1` is the single-pair main term
/// `N/p + 2(N/p) Re(e(-r/p) A_1)`.
pub fn predict_histogram<T: Real>(
    n: u64,
    p: u64,
    rule: &AdditiveRule,
    t_max: u64,
    constants: &ConstantsConfig,
    cutoff: u64,
) -> Result<PredictionReport<T>> {
    check_n(n)?;
    check_odd_prime(p)?;
    check_cutoff(cutoff)?;
    constants.validate()?;
    if t_max < 1 || t_max > p - 1 {
        return Err(invalid(format!("t_max must lie in 1..={}, got {t_max}", p - 1)));
    }
    let primes = base_primes(cutoff);
    let detail: Vec<ACoefficient<T>> = (1..p)
        .map(|t| coefficient_with(n, p, rule, t, &primes, cutoff))
        .collect::<Result<_>>()?;
    let a: Vec<Complex<T>> = detail.iter().map(|c| c.value).collect();

    let m = t_max.min((p - 1) / 2);
    let ts: Vec<u64> = (1..=m).chain((p - m..p).filter(|&t| t > m)).collect();
    let base = T::count(n) / T::count(p);
    let predicted: Vec<T> = (0..p)
        .map(|r| {
            let mut acc = crate::summation::CompensatedSum::<T>::new();
            for &t in &ts {
                let phase = -((r * t % p) as i64);
                acc.add((unit_root_frac::<T>(phase, p) * a[t as usize - 1]).re);
            }
            base + base * acc.value()
        })
        .collect();

    let errors = error_magnitudes(n, p, constants)?;
    let a1 = a[0].norm().to_f64_lossy();
    let log_n = (n as f64).ln();
    let cos1 = (std::f64::consts::TAU / p as f64).cos();
    let a1_ratio = a1 * (p * p) as f64 * log_n.powf(1.0 - cos1);
    let dominance_holds = p as f64 * errors.b3 <= 0.1 * n as f64 * a1;
    let euler_within_bounds = detail.iter().all(|c| c.euler.within_bounds(constants.b1, constants.b2));
    let rgamma_above_floor = detail[0].rgamma.norm().to_f64_lossy() > constants.c_gamma;

    Ok(PredictionReport {
        n,
        p,
        rule: rule.label(),
        t_max,
        prime_cutoff: cutoff,
        a,
        detail,
        predicted,
        errors,
        a1_ratio,
        dominance_holds,
        euler_within_bounds,
        rgamma_above_floor,
        flags: vec![FLAG_UNEXCEPTIONAL.to_string()],
        constants: *constants,
    })
}

/// `R = {r : Re(e(-r/p) A_1) < 0}`.
pub fn choose_r_predicted<T: Real>(report: &PredictionReport<T>) -> ResidueSelection {
    let p = report.p;
    let a1 = report.a_t(1);
    let residues = (0..p).filter(|&r| (unit_root_frac::<T>(-(r as i64), p) * a1).re < T::zero());
    ResidueSelection::new(p, residues, SelectionStrategy::Predicted).expect("residues in range")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimeChoice {
    /// `X = sqrt(log log N) / α`
    #[serde(rename = "X")]
    pub x: f64,
    /// `[max(3, X - X^{4/5}), X]`
    pub interval: (f64, f64),
    pub p: u64,
    pub flags: Vec<String>,
}

impl PrimeChoice {
    pub fn is_fallback(&self) -> bool {
        self.flags.iter().any(|f| f == FLAG_FALLBACK_P)
    }
}

/// Largest prime in `[max(3, X - X^{4/5}), X]`, falling back to 5 when that
/// interval holds no prime. Exceptional moduli are not detected.
pub fn choose_x_and_p(n: u64, constants: &ConstantsConfig, override_p: Option<u64>) -> Result<PrimeChoice> {
    check_n(n)?;
    constants.validate()?;
    let x = (n as f64).ln().ln().sqrt() / constants.alpha;
    let lo = (x - x.powf(0.8)).max(3.0);
    let mut flags = vec![FLAG_UNEXCEPTIONAL.to_string()];
    let p = if let Some(p) = override_p {
        check_odd_prime(p)?;
        flags.push(FLAG_OVERRIDE_P.to_string());
        p
    } else {
        let found = if x >= lo { primes_in_interval(lo.ceil() as u64, x.floor() as u64).last().copied() } else { None };
        match found {
            Some(p) => p,
            None => {
                flags.push(FLAG_FALLBACK_P.to_string());
                5
            }
        }
    };
    Ok(PrimeChoice { x, interval: (lo, x), p, flags })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUTOFF: u64 = 100_000;

    #[test]
    fn conjugate_pairs() {
        for rule in [AdditiveRule::omega(), AdditiveRule::big_omega()] {
            for p in [5u64, 7] {
                for t in 1..p {
                    let a = coefficient_a::<f64>(100_000_000, p, &rule, t, CUTOFF).unwrap();
                    let b = coefficient_a::<f64>(100_000_000, p, &rule, p - t, CUTOFF).unwrap();
                    assert!((a - b.conj()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn first_coefficient_nonzero() {
        for p in [5u64, 7] {
            let a = coefficient_a::<f64>(100_000_000, p, &AdditiveRule::omega(), 1, CUTOFF).unwrap();
            assert!(a.norm().is_finite() && a.norm() > 0.0);
        }
    }

    #[test]
    fn domain_checks() {
        assert!(matches!(coefficient_a::<f64>(15, 5, &AdditiveRule::omega(), 1, CUTOFF), Err(Error::OutOfDomain(_))));
        assert!(coefficient_a::<f64>(100, 5, &AdditiveRule::omega(), 0, CUTOFF).is_err());
        assert!(coefficient_a::<f64>(100, 5, &AdditiveRule::omega(), 5, CUTOFF).is_err());
        assert!(predict_histogram::<f64>(100, 5, &AdditiveRule::omega(), 0, &ConstantsConfig::default(), CUTOFF).is_err());
    }

    #[test]
    fn full_range_sums_to_n() {
        let c = ConstantsConfig::default();
        for p in [3u64, 5, 7, 11, 13] {
            let rep = predict_histogram::<f64>(1_000_000, p, &AdditiveRule::omega(), p - 1, &c, CUTOFF).unwrap();
            let total: f64 = rep.predicted.iter().sum();
            assert!((total - 1e6).abs() <= 1e-9 * 1e6);
            assert_eq!(rep.predicted_at(3), rep.predicted_at(3 + p as i64));
        }
    }

    #[test]
    fn single_pair_matches_displayed_main_term() {
        let c = ConstantsConfig::default();
        let n = 10_000_000u64;
        let p = 7;
        let rep = predict_histogram::<f64>(n, p, &AdditiveRule::omega(), 1, &c, CUTOFF).unwrap();
        let base = n as f64 / p as f64;
        for r in 0..p {
            let e = Complex::from_polar(1.0, -std::f64::consts::TAU * r as f64 / p as f64);
            let want = base + 2.0 * base * (e * rep.a_t(1)).re;
            assert!((rep.predicted[r as usize] - want).abs() < 1e-6);
        }
    }

    #[test]
    fn error_magnitude_edges() {
        let c = ConstantsConfig::default();
        assert_eq!(error_magnitudes(1000, 3, &c).unwrap().b3, 0.0);
        // p = 5 leaves the single term t = 2
        let b3 = error_magnitudes(1000, 5, &c).unwrap().b3;
        let l = 1000f64.ln();
        assert!((b3 - 1000.0 / 125.0 * 2.0 * l.powf((std::f64::consts::TAU * 2.0 / 5.0).cos() - 1.0)).abs() < 1e-12);
        assert!(error_magnitudes(1000, 7, &c).unwrap().b3 > 0.0);
        let mut prev = f64::INFINITY;
        for k in 2..14 {
            let n = 10u64.pow(k);
            let b2n = error_magnitudes(n, 7, &c).unwrap().b2 / n as f64;
            assert!(b2n < prev);
            prev = b2n;
        }
    }

    #[test]
    fn prime_choice_examples() {
        let c = ConstantsConfig::default();
        let ch = choose_x_and_p(100_000_000, &c, None).unwrap();
        assert!(ch.x < 3.0);
        assert_eq!(ch.p, 5);
        assert!(ch.is_fallback());
        let ch = choose_x_and_p(100_000_000, &c, Some(7)).unwrap();
        assert_eq!(ch.p, 7);
        assert!(!ch.is_fallback());
        assert!(choose_x_and_p(100_000_000, &c, Some(9)).is_err());
    }

    #[test]
    fn predicted_selection_uses_sign_of_main_term() {
        let c = ConstantsConfig::default();
        let rep = predict_histogram::<f64>(10_000_000, 7, &AdditiveRule::omega(), 1, &c, CUTOFF).unwrap();
        let sel = choose_r_predicted(&rep);
        let base = 10_000_000f64 / 7.0;
        for r in 0..7u64 {
            let below = rep.predicted[r as usize] < base;
            assert_eq!(sel.residues.contains(&r), below);
        }
    }
}
