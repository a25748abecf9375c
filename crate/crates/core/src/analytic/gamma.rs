use num_complex::Complex;

use crate::scalar::Real;

// Lanczos, g = 7, n = 9
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for `Re z >= 1/2`.
fn ln_gamma_right<T: Real>(z: Complex<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    let zz = z - one;
    let mut a = Complex::new(T::lit(LANCZOS[0]), T::zero());
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += Complex::new(T::lit(c), T::zero()) / (zz + T::count(i as u64));
    }
    let t = zz + T::lit(LANCZOS_G + 0.5);
    let half_ln_tau = T::lit(0.5) * T::TAU().ln();
    (zz + T::lit(0.5)) * t.ln() - t + half_ln_tau + a.ln()
}

/// `1/Γ(z)`, entire; accurate to about `1e-14` for `|z| <= 4`.
///
/// Uses the reflection `1/Γ(z) = sin(πz) Γ(1 - z) / π` left of `Re z = 1/2`,
/// which gives exact zeros at the non-positive integers.
pub fn reciprocal_gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    if z.re >= half {
        (-ln_gamma_right(z)).exp()
    } else {
        let one = Complex::new(T::one(), T::zero());
        let s = (z * T::PI()).sin();
        if s == Complex::new(T::zero(), T::zero()) {
            return s;
        }
        s * ln_gamma_right(one - z).exp() / T::PI()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: shift by the recurrence, then Stirling's series.
    fn rgamma_stirling(z: Complex<f64>) -> Complex<f64> {
        const SHIFT: u32 = 20;
        const BERNOULLI: [f64; 8] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
            -3617.0 / 510.0,
        ];
        let w = z + SHIFT as f64;
        let mut lg = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * std::f64::consts::PI).ln();
        for (k, b) in BERNOULLI.iter().enumerate() {
            let m = 2 * (k as i32 + 1);
            lg += *b / ((m * (m - 1)) as f64) / w.powi(m - 1);
        }
        let mut prod = Complex::new(1.0, 0.0);
        for i in 0..SHIFT {
            prod *= z + i as f64;
        }
        prod * (-lg).exp()
    }

    #[test]
    fn spot_values() {
        let c = |re: f64| Complex::new(re, 0.0);
        assert!((reciprocal_gamma(c(1.0)) - c(1.0)).norm() < 1e-10);
        assert!((reciprocal_gamma(c(2.0)) - c(1.0)).norm() < 1e-10);
        assert!(reciprocal_gamma(c(0.0)).norm() < 1e-10);
        assert!(reciprocal_gamma(c(-3.0)).norm() < 1e-10);
        assert!((reciprocal_gamma(c(5.0)) - c(1.0 / 24.0)).norm() < 1e-14);
        assert!((reciprocal_gamma(c(0.5)) - c(1.0 / std::f64::consts::PI.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn unit_circle_matches_stirling_oracle() {
        for k in 0..720 {
            let z = Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / 720.0);
            let err = (reciprocal_gamma(z) - rgamma_stirling(z)).norm();
            assert!(err < 1e-10, "z = {z}, err = {err}");
        }
    }

    #[test]
    fn operating_disk_matches_stirling_oracle() {
        for i in -8..=8 {
            for j in -8..=8 {
                let z = Complex::new(i as f64 * 0.45, j as f64 * 0.45);
                if z.norm() > 4.0 {
                    continue;
                }
                let want = rgamma_stirling(z);
                let err = (reciprocal_gamma(z) - want).norm();
                assert!(err <= 1e-12 * want.norm().max(1.0), "z = {z}, err = {err}");
            }
        }
    }

    #[test]
    fn conjugate_symmetric() {
        let z = Complex::new(0.3f64, 0.8);
        assert!((reciprocal_gamma(z.conj()) - reciprocal_gamma(z).conj()).norm() < 1e-15);
    }

    #[test]
    fn single_precision_close() {
        let z = Complex::new(0.6f32, 0.4);
        let d = reciprocal_gamma(Complex::new(0.6f64, 0.4));
        let s = reciprocal_gamma(z);
        assert!(((s.re as f64) - d.re).abs() < 1e-5 && ((s.im as f64) - d.im).abs() < 1e-5);
    }
}
