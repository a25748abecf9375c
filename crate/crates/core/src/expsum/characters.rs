use num_complex::Complex;

use crate::arith::is_prime;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// `e(z) = exp(2πiz)`.
pub fn unit_root<T: Real>(z: T) -> Complex<T> {
    let (s, c) = (T::TAU() * z).sin_cos();
    Complex::new(c, s)
}

/// `e(num / den)` with the numerator reduced first, so large numerators do
/// not lose phase precision.
pub fn unit_root_frac<T: Real>(num: i64, den: u64) -> Complex<T> {
    let r = num.rem_euclid(den as i64) as u64;
    unit_root(T::count(r) / T::count(den))
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Smallest primitive root of the prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    if p == 2 {
        return Ok(1);
    }
    let order = p - 1;
    let mut factors = Vec::new();
    let mut m = order;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&f| mod_pow(g, order / f, p) != 1))
        .ok_or_else(|| invalid(format!("no primitive root mod {p}")))
}

/// All `p - 1` characters mod an odd prime `p`.
///
/// `χ_a(g^m) = e(a m / (p - 1))` for the smallest primitive root `g`, and
/// `χ_a(n) = 0` when `p | n`. `χ_0` is principal.
#[derive(Clone, Debug)]
pub struct CharacterTable<T> {
    p: u64,
    generator: u64,
    /// `index[n] = m` with `g^m ≡ n`; `index[0]` is unused.
    index: Vec<u32>,
    /// row `a`, column `n mod p`
    values: Vec<Complex<T>>,
}

pub fn build_characters<T: Real>(p: u64) -> Result<CharacterTable<T>> {
    if p < 3 || !is_prime(p) {
        return Err(invalid(format!("characters need an odd prime modulus, got {p}")));
    }
    let generator = primitive_root(p)?;
    let order = p - 1;
    let mut index = vec![u32::MAX; p as usize];
    let mut acc = 1u64;
    for m in 0..order {
        index[acc as usize] = m as u32;
        acc = acc * generator % p;
    }
    let mut values = vec![Complex::new(T::zero(), T::zero()); (order * p) as usize];
    for a in 0..order {
        for n in 1..p {
            let phase = (a * index[n as usize] as u64) % order;
            values[(a * p + n) as usize] = unit_root_frac(phase as i64, order);
        }
    }
    Ok(CharacterTable { p, generator, index, values })
}

impl<T: Real> CharacterTable<T> {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Number of characters, `p - 1`.
    pub fn len(&self) -> usize {
        (self.p - 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Discrete log of a unit, `None` for `n ≡ 0`.
    pub fn index(&self, n: u64) -> Option<u32> {
        let r = (n % self.p) as usize;
        (r != 0).then(|| self.index[r])
    }

    #[inline]
    pub fn value(&self, a: usize, n: u64) -> Complex<T> {
        self.values[a * self.p as usize + (n % self.p) as usize]
    }

    /// Largest deviation from the multiplicativity and both orthogonality
    /// relations, over every character and unit.
    pub fn orthogonality_error(&self) -> T {
        let p = self.p;
        let order = T::count(p - 1);
        let mut worst = T::zero();
        for a in 0..self.len() {
            let row: Complex<T> = (0..p).map(|n| self.value(a, n)).sum();
            let expect = if a == 0 { order } else { T::zero() };
            worst = worst.max((row - Complex::new(expect, T::zero())).norm());
            for m in 1..p {
                for n in 1..p {
                    let prod = self.value(a, m) * self.value(a, n);
                    worst = worst.max((prod - self.value(a, m * n % p)).norm());
                }
            }
        }
        for n in 1..p {
            for k in 1..p {
                let s: Complex<T> = (0..self.len()).map(|a| self.value(a, n) * self.value(a, k).conj()).sum();
                let expect = if n == k { order } else { T::zero() };
                worst = worst.max((s - Complex::new(expect, T::zero())).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_root_examples() {
        let one = unit_root(0.0f64);
        assert_eq!(one, Complex::new(1.0, 0.0));
        let half = unit_root(0.5f64);
        assert!((half - Complex::new(-1.0, 0.0)).norm() < 1e-15);
        let third = unit_root(1.0f64 / 3.0);
        assert!((third - Complex::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
        for k in 0..100 {
            assert!((unit_root(k as f64 * 0.0137).norm() - 1.0).abs() < 1e-15);
        }
        assert!((unit_root_frac::<f64>(1_000_000_000_000, 3) - third).norm() < 1e-15);
        assert!((unit_root_frac::<f64>(-2, 3) - third).norm() < 1e-15);
    }

    #[test]
    fn legendre_mod_three() {
        let t = build_characters::<f64>(3).unwrap();
        assert!((t.value(1, 1) - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!((t.value(1, 2) - Complex::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(t.value(1, 3), Complex::new(0.0, 0.0));
    }

    #[test]
    fn principal_mod_five() {
        let t = build_characters::<f64>(5).unwrap();
        for n in 1..5 {
            assert_eq!(t.value(0, n), Complex::new(1.0, 0.0));
        }
        assert_eq!(t.value(0, 5), Complex::new(0.0, 0.0));
    }

    #[test]
    fn discrete_log_mod_seven() {
        let t = build_characters::<f64>(7).unwrap();
        assert_eq!(t.generator(), 3);
        // brute-force discrete log
        let brute = (0..6).find(|&m| mod_pow(3, m, 7) == 3).unwrap();
        assert_eq!(t.index(3), Some(brute as u32));
        assert_eq!(t.index(3), Some(1));
        assert_eq!(t.index(7), None);
    }

    #[test]
    fn table_relations_hold() {
        for p in [3, 5, 7, 11, 13, 31] {
            let t = build_characters::<f64>(p).unwrap();
            assert!(t.orthogonality_error() < 1e-12, "p = {p}");
        }
        let single = build_characters::<f32>(11).unwrap();
        assert!(single.orthogonality_error() < 1e-4);
    }

    #[test]
    fn composite_rejected() {
        assert!(build_characters::<f64>(9).is_err());
        assert!(build_characters::<f64>(2).is_err());
        assert!(primitive_root(15).is_err());
    }

    #[test]
    fn primitive_roots_have_full_order() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 101, 997] {
            let g = primitive_root(p).unwrap();
            let mut x = 1;
            let mut order = 0;
            loop {
                x = x * g % p;
                order += 1;
                if x == 1 {
                    break;
                }
            }
            assert_eq!(order, p - 1);
        }
    }
}
