//! Deterministic JSON number formatting.
//!
//! Floats are written with exactly 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` and does not depend on the shortest-repr
//! algorithm of the serializer. Non-finite values become `null`.

use num_complex::Complex;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fixed17(pub f64);

impl Fixed17 {
    pub fn of<T: Real>(x: T) -> Self {
        Self(x.to_f64_lossy())
    }
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for Fixed17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_f64(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// `[re, im]`
pub fn pair<T: Real>(z: Complex<T>) -> [Fixed17; 2] {
    [Fixed17::of(z.re), Fixed17::of(z.im)]
}

pub fn pairs<T: Real>(zs: &[Complex<T>]) -> Vec<[Fixed17; 2]> {
    zs.iter().map(|&z| pair(z)).collect()
}

pub fn reals<T: Real>(xs: &[T]) -> Vec<Fixed17> {
    xs.iter().map(|&x| Fixed17::of(x)).collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<V: Serialize>(value: &V) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let text = serde_json::to_string(&Fixed17(0.1)).unwrap();
        assert_eq!(text, "1.0000000000000001e-1");
        assert_eq!(text.parse::<f64>().unwrap(), 0.1);
        assert_eq!(serde_json::to_string(&Fixed17(f64::NAN)).unwrap(), "null");
        assert_eq!(serde_json::to_string(&[Fixed17(-2.0)]).unwrap(), "[-2.0000000000000000e0]");
    }

    #[test]
    fn raw_numbers_reparse() {
        let text = serde_json::to_string(&pair(Complex::new(1.5f64, -3e-300))).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![1.5, -3e-300]);
    }
}
