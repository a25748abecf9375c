use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Constants the asymptotic statements leave unspecified.
///
/// None of them has a known true value; they only scale the reported
/// error magnitudes and diagnostics, and no hard check depends on them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    pub c6: f64,
    #[serde(rename = "c_B2")]
    pub c_b2: f64,
    #[serde(rename = "c_B3")]
    pub c_b3: f64,
    pub b1: f64,
    pub b2: f64,
    #[serde(rename = "C_Gamma")]
    pub c_gamma: f64,
    pub alpha: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { c6: 1.0, c_b2: 1.0, c_b3: 1.0, b1: 1.0, b2: 1.0, c_gamma: 1.0, alpha: 8.0 }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("c6", self.c6),
            ("c_B2", self.c_b2),
            ("c_B3", self.c_b3),
            ("b1", self.b1),
            ("b2", self.b2),
            ("C_Gamma", self.c_gamma),
            ("alpha", self.alpha),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
