use serde::Serialize;

use crate::arith::{is_prime, AdditiveRule, WSource, WWindow};
use crate::error::{invalid, Result};

/// `a(r) = #{n <= N : n + w(n) ≡ r (mod p)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueHistogram {
    #[serde(rename = "N")]
    pub n: u64,
    pub p: u64,
    pub counts: Vec<u64>,
}

impl ResidueHistogram {
    pub fn empty(n: u64, p: u64) -> Self {
        Self { n, p, counts: vec![0; p as usize] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Element-wise addition of a histogram over a disjoint range.
    pub fn merge(&mut self, other: &ResidueHistogram) {
        debug_assert_eq!(self.p, other.p);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn get(&self, r: i64) -> u64 {
        self.counts[r.rem_euclid(self.p as i64) as usize]
    }

    /// CSV body, `r,a_r` rows after a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,a_r\n");
        for (r, a) in self.counts.iter().enumerate() {
            out.push_str(&format!("{r},{a}\n"));
        }
        out
    }
}

pub(crate) fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(invalid(format!("p must be an odd prime, got {p}")));
    }
    Ok(())
}

pub(crate) fn window_histogram(win: &WWindow, p: u64) -> Vec<u64> {
    let mut counts = vec![0u64; p as usize];
    let wmod: Vec<usize> = (0..256u64).map(|w| (w % p) as usize).collect();
    let p = p as usize;
    let mut k = (win.lo % p as u64) as usize;
    for &w in &win.values {
        let mut r = k + wmod[w as usize];
        if r >= p {
            r -= p;
        }
        counts[r] += 1;
        k += 1;
        if k == p {
            k = 0;
        }
    }
    counts
}

pub fn residue_histogram_from(src: &WSource, n: u64, p: u64) -> Result<ResidueHistogram> {
    check_odd_prime(p)?;
    if n < 1 {
        return Err(invalid("N must be >= 1"));
    }
    let mut hist = ResidueHistogram::empty(n, p);
    let counts = src.map_reduce(
        n,
        |win| window_histogram(win, p),
        |mut acc, part| {
            for (a, b) in acc.iter_mut().zip(&part) {
                *a += b;
            }
            acc
        },
        vec![0u64; p as usize],
    )?;
    hist.counts = counts;
    Ok(hist)
}

pub fn residue_histogram(n: u64, p: u64, rule: &AdditiveRule) -> Result<ResidueHistogram> {
    check_odd_prime(p)?;
    if n < 1 {
        return Err(invalid("N must be >= 1"));
    }
    residue_histogram_from(&WSource::new(rule, n)?, n, p)
}
