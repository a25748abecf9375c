//! Checks that the integer histogram and the exponential sums agree through
//! the finite Fourier transform and the character expansions.
//!
//! The histogram is always the ground truth; these identities only validate
//! the floating-point side.

use num_complex::Complex;
use serde::Serialize;

use super::characters::{unit_root_frac, CharacterTable};
use super::sums::ExpSumSet;
use crate::counting::ResidueHistogram;
use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::summation::CompensatedComplex;

/// Absolute tolerances, relative to `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourierTolerances {
    pub dft: f64,
    pub identity: f64,
}

impl Default for FourierTolerances {
    fn default() -> Self {
        Self { dft: 1e-6, identity: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub p: u64,
    pub reconstructed: Vec<f64>,
    /// `max_r |DFT(r) - a(r)|`
    pub dft_error: f64,
    /// `max_t |S_{0,t} - (S_t - S_{t,χ_0})|`
    pub principal_error: f64,
    /// `max_{k,t ≠ 0} |S_{k,t} - (p-1)^{-1} Σ_χ conj(χ(k)) S_{t,χ}|`
    pub inversion_error: f64,
    pub tolerances: FourierTolerances,
}

impl FourierReport {
    pub fn dft_ok(&self) -> bool {
        self.dft_error <= self.tolerances.dft * self.n as f64
    }

    pub fn principal_ok(&self) -> bool {
        self.principal_error <= self.tolerances.identity * self.n as f64
    }

    pub fn inversion_ok(&self) -> bool {
        self.inversion_error <= self.tolerances.identity * self.n as f64
    }

    pub fn holds(&self) -> bool {
        self.dft_ok() && self.principal_ok() && self.inversion_ok()
    }
}

pub fn verify_fourier_identities<T: Real>(
    sums: &ExpSumSet<T>,
    hist: &ResidueHistogram,
    table: &CharacterTable<T>,
    tolerances: FourierTolerances,
) -> Result<FourierReport> {
    if sums.n != hist.n || sums.p != hist.p || table.p() != sums.p {
        return Err(invalid(format!(
            "mismatched inputs: sums (N={}, p={}), histogram (N={}, p={}), characters mod {}",
            sums.n, sums.p, hist.n, hist.p, table.p()
        )));
    }
    let p = sums.p;
    let mut reconstructed = Vec::with_capacity(p as usize);
    let mut dft_error = 0f64;
    for r in 0..p {
        let mut acc = CompensatedComplex::<T>::new();
        for t in 0..p {
            for k in 0..p {
                let phase = ((k + p - r) * t) as i64;
                acc.add(unit_root_frac::<T>(phase, p) * sums.s_kt(k, t));
            }
        }
        let a = acc.value().re.to_f64_lossy() / p as f64;
        dft_error = dft_error.max((a - hist.counts[r as usize] as f64).abs());
        reconstructed.push(a);
    }

    let mut principal_error = 0f64;
    for t in 1..p {
        let diff = sums.s_kt(0, t) - (sums.s_t[t as usize] - sums.s_tchi(t, 0));
        principal_error = principal_error.max(diff.norm().to_f64_lossy());
    }

    let mut inversion_error = 0f64;
    let inv = T::one() / T::count(p - 1);
    for k in 1..p {
        for t in 1..p {
            let acc: CompensatedComplex<T> = (0..table.len())
                .map(|a| table.value(a, k).conj() * sums.s_tchi(t, a))
                .collect();
            let diff: Complex<T> = sums.s_kt(k, t) - acc.value() * inv;
            inversion_error = inversion_error.max(diff.norm().to_f64_lossy());
        }
    }

    Ok(FourierReport {
        n: sums.n,
        p,
        reconstructed,
        dft_error,
        principal_error,
        inversion_error,
        tolerances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::AdditiveRule;
    use crate::counting::residue_histogram;
    use crate::expsum::{build_characters, exp_sums};

    #[test]
    fn omega_twelve_mod_three_reconstructs() {
        let rule = AdditiveRule::omega();
        let table = build_characters::<f64>(3).unwrap();
        let sums = exp_sums(12, 3, &rule, &table).unwrap();
        let hist = residue_histogram(12, 3, &rule).unwrap();
        let rep = verify_fourier_identities(&sums, &hist, &table, FourierTolerances::default()).unwrap();
        let rounded: Vec<i64> = rep.reconstructed.iter().map(|a| a.round() as i64).collect();
        assert_eq!(rounded, vec![5, 3, 4]);
        assert!(rep.holds(), "{rep:?}");
    }

    #[test]
    fn zero_frequency_row_sums_to_n() {
        let table = build_characters::<f64>(5).unwrap();
        let sums = exp_sums(999, 5, &AdditiveRule::big_omega(), &table).unwrap();
        let total: f64 = (0..5).map(|k| sums.s_kt(k, 0).re).sum();
        assert_eq!(total, 999.0);
    }

    #[test]
    fn mismatch_is_an_error() {
        let rule = AdditiveRule::omega();
        let table = build_characters::<f64>(3).unwrap();
        let sums = exp_sums(12, 3, &rule, &table).unwrap();
        let hist = residue_histogram(13, 3, &rule).unwrap();
        assert!(verify_fourier_identities(&sums, &hist, &table, FourierTolerances::default()).is_err());
    }
}
