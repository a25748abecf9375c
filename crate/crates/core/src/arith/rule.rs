//! Additive rules: `w` is fixed by its values on prime powers, and those
//! values depend on the exponent only.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineTail {
    pub slope: i64,
    pub intercept: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Omega,
    BigOmega,
    Custom,
}

/// `w(q^j) = f(j)` for every prime `q`.
///
/// `table[j - 1] = f(j)` for `1 <= j <= table.len()`, and
/// `f(j) = slope * j + intercept` beyond the table. `f(1) = 1` always.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveRule {
    kind: RuleKind,
    table: Vec<u32>,
    tail: AffineTail,
}

/// On-disk form of a custom rule: `{"f":[1,...], "tail":{"slope":s,"intercept":b}}`.
#[derive(Debug, Deserialize, Serialize)]
struct RuleFile {
    f: Vec<i64>,
    tail: AffineTail,
}

impl AdditiveRule {
    /// ω: `f(j) = 1`.
    pub fn omega() -> Self {
        Self { kind: RuleKind::Omega, table: vec![1], tail: AffineTail { slope: 0, intercept: 1 } }
    }

    /// Ω: `f(j) = j`.
    pub fn big_omega() -> Self {
        Self { kind: RuleKind::BigOmega, table: vec![1], tail: AffineTail { slope: 1, intercept: 0 } }
    }

    pub fn custom(table: Vec<i64>, tail: AffineTail) -> Result<Self> {
        let bad = |msg: String| Error::InvalidRule(msg);
        match table.first() {
            None => return Err(bad("table must contain at least f(1)".into())),
            Some(&f1) if f1 != 1 => return Err(bad(format!("f(1) must be 1, got {f1}"))),
            _ => {}
        }
        if let Some((j, v)) = table.iter().enumerate().find(|(_, &v)| v < 0 || v > u32::MAX as i64) {
            return Err(bad(format!("f({}) = {v} is not a non-negative 32-bit integer", j + 1)));
        }
        let first_tail_j = table.len() as i64 + 1;
        if tail.slope < 0 {
            return Err(bad(format!("tail slope {} must be non-negative", tail.slope)));
        }
        if tail.slope * first_tail_j + tail.intercept < 0 {
            return Err(bad(format!(
                "tail yields a negative value at j = {first_tail_j}"
            )));
        }
        Ok(Self {
            kind: RuleKind::Custom,
            table: table.into_iter().map(|v| v as u32).collect(),
            tail,
        })
    }

    /// Parses the JSON rule-file format, reporting the line of a syntax error.
    pub fn from_json_str(text: &str) -> Result<Self> {
        // serde_json messages end in "at line L column C"
        let parsed: RuleFile = serde_json::from_str(text).map_err(|e| Error::InvalidRule(e.to_string()))?;
        Self::custom(parsed.f, parsed.tail)
    }

    /// `omega`, `bigomega` or `custom:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec {
            "omega" => Ok(Self::omega()),
            "bigomega" => Ok(Self::big_omega()),
            other => match other.strip_prefix("custom:") {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::InvalidRule(format!("{path}: {e}")))?;
                    Self::from_json_str(&text).map_err(|e| match e {
                        Error::InvalidRule(msg) => Error::InvalidRule(format!("{path}: {msg}")),
                        other => other,
                    })
                }
                None => Err(Error::InvalidRule(format!(
                    "unknown rule `{other}` (expected omega, bigomega or custom:<path>)"
                ))),
            },
        }
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn tail(&self) -> AffineTail {
        self.tail
    }

    /// `f(j)`; `f(0) = 0`.
    #[inline]
    pub fn prime_power_value(&self, j: u32) -> u64 {
        if j == 0 {
            return 0;
        }
        match self.table.get(j as usize - 1) {
            Some(&v) => v as u64,
            None => (self.tail.slope * j as i64 + self.tail.intercept) as u64,
        }
    }

    /// The same rule expressed as an explicit table plus tail.
    pub fn to_custom(&self) -> Self {
        Self { kind: RuleKind::Custom, ..self.clone() }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        match self.kind {
            RuleKind::Omega => "omega".into(),
            RuleKind::BigOmega => "bigomega".into(),
            RuleKind::Custom => format!(
                "custom(f={:?},tail={}j+{})",
                self.table, self.tail.slope, self.tail.intercept
            ),
        }
    }

    /// Identity of the function `w`, independent of how the rule was spelled.
    ///
    /// Two rules agreeing on every `f(j)` get the same fingerprint, so a cache
    /// written for `omega` is valid for an equivalent custom table.
    pub fn fingerprint(&self) -> u64 {
        let mut canonical = self.table.clone();
        while canonical.len() > 1 {
            let j = canonical.len() as i64;
            let last = *canonical.last().unwrap() as i64;
            if self.tail.slope * j + self.tail.intercept == last {
                canonical.pop();
            } else {
                break;
            }
        }
        let text = format!("{:?};{};{}", canonical, self.tail.slope, self.tail.intercept);
        let digest = Sha256::digest(text.as_bytes());
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Exact `max_{n <= limit} w(n)`.
    ///
    /// For exponent-only rules the maximum is attained with exponents
    /// non-increasing along `2, 3, 5, ...`, so a small depth-first search over
    /// such exponent vectors is exhaustive.
    pub fn max_value_upto(&self, limit: u64) -> u64 {
        const SMALL_PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
        fn dfs(rule: &AdditiveRule, idx: usize, max_exp: u32, product: u64, limit: u64) -> u64 {
            if idx == SMALL_PRIMES.len() {
                return 0;
            }
            let q = SMALL_PRIMES[idx];
            let mut best = 0;
            let mut pk = product;
            for e in 1..=max_exp {
                pk = match pk.checked_mul(q) {
                    Some(v) if v <= limit => v,
                    _ => break,
                };
                let here = rule.prime_power_value(e) + dfs(rule, idx + 1, e, pk, limit);
                best = best.max(here);
            }
            best
        }
        if limit < 2 {
            return 0;
        }
        dfs(self, 0, 64, 1, limit)
    }

    /// Rejects rules whose values would not fit the 8-bit window cells.
    pub fn validate_upto(&self, limit: u64) -> Result<u64> {
        let max = self.max_value_upto(limit);
        if max > u8::MAX as u64 {
            return Err(Error::InvalidRule(format!(
                "max w(n) for n <= {limit} is {max}, which exceeds the 8-bit cell range"
            )));
        }
        Ok(max)
    }

    pub fn to_json(&self) -> String {
        let file = RuleFile {
            f: self.table.iter().map(|&v| v as i64).collect(),
            tail: self.tail,
        };
        serde_json::to_string(&file).expect("rule serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_values() {
        let o = AdditiveRule::omega();
        let b = AdditiveRule::big_omega();
        for j in 1..20 {
            assert_eq!(o.prime_power_value(j), 1);
            assert_eq!(b.prime_power_value(j), j as u64);
        }
        assert_eq!(o.prime_power_value(0), 0);
    }

    #[test]
    fn f1_must_be_one() {
        let err = AdditiveRule::custom(vec![2, 3], AffineTail { slope: 0, intercept: 1 });
        assert!(matches!(err, Err(Error::InvalidRule(_))));
        assert!(AdditiveRule::custom(vec![], AffineTail { slope: 0, intercept: 1 }).is_err());
    }

    #[test]
    fn negative_values_rejected() {
        assert!(AdditiveRule::custom(vec![1, -1], AffineTail { slope: 0, intercept: 1 }).is_err());
        assert!(AdditiveRule::custom(vec![1], AffineTail { slope: -1, intercept: 5 }).is_err());
        assert!(AdditiveRule::custom(vec![1, 0], AffineTail { slope: 1, intercept: -4 }).is_err());
        assert!(AdditiveRule::custom(vec![1, 0], AffineTail { slope: 1, intercept: -3 }).is_ok());
    }

    #[test]
    fn equivalent_rules_share_fingerprint() {
        let o = AdditiveRule::omega();
        let c = AdditiveRule::custom(vec![1, 1, 1], AffineTail { slope: 0, intercept: 1 }).unwrap();
        assert_eq!(o.fingerprint(), c.fingerprint());
        assert_ne!(o.fingerprint(), AdditiveRule::big_omega().fingerprint());
        let b = AdditiveRule::custom(vec![1, 2], AffineTail { slope: 1, intercept: 0 }).unwrap();
        assert_eq!(b.fingerprint(), AdditiveRule::big_omega().fingerprint());
    }

    #[test]
    fn max_value_matches_brute_force() {
        let rules = [
            AdditiveRule::omega(),
            AdditiveRule::big_omega(),
            AdditiveRule::custom(vec![1, 5, 0], AffineTail { slope: 0, intercept: 2 }).unwrap(),
        ];
        for rule in &rules {
            let mut brute = 0;
            for n in 1..=5000u64 {
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
                    d += 1;
                }
                if m > 1 {
                    w += 1;
                }
                brute = brute.max(w);
            }
            assert_eq!(rule.max_value_upto(5000), brute, "{}", rule.label());
        }
    }

    #[test]
    fn oversized_custom_rule_rejected() {
        let rule = AdditiveRule::custom(vec![1, 200], AffineTail { slope: 0, intercept: 200 }).unwrap();
        assert!(rule.validate_upto(100_000).is_err());
        assert!(rule.validate_upto(3).is_ok());
    }

    #[test]
    fn json_round_trip_and_diagnostics() {
        let rule = AdditiveRule::from_json_str(r#"{"f":[1,2,2,3],"tail":{"slope":0,"intercept":3}}"#).unwrap();
        assert_eq!(rule.prime_power_value(4), 3);
        assert_eq!(rule.prime_power_value(9), 3);
        assert_eq!(AdditiveRule::from_json_str(&rule.to_json()).unwrap(), rule);
        let err = AdditiveRule::from_json_str("{\n\"f\": [1,\n}").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }
}
