//! Exponential sums of `w(n)` twisted by residue classes and characters.
//!
//! `e(w(n) t / p)` depends on `w(n)` only through `w(n) mod p`, so one pass
//! over the windows accumulates the exact joint counts
//! `c[k][j] = #{n <= N : n ≡ k, w(n) ≡ j (mod p)}` in integers. Every sum is
//! then a compensated finite sum over `(k, j)`, which keeps the result
//! independent of window partitioning and thread count.

use num_complex::Complex;
use serde::Serialize;

use super::characters::{unit_root_frac, CharacterTable};
use crate::arith::{AdditiveRule, WSource, WWindow};
use crate::counting::histogram::check_odd_prime;
use crate::error::{invalid, Result};
use crate::export::{pairs, Fixed17, SCHEMA_VERSION};
use crate::scalar::Real;
use crate::summation::CompensatedComplex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointCounts {
    pub n: u64,
    pub p: u64,
    /// row-major `[k][j]`
    pub counts: Vec<u64>,
}

impl JointCounts {
    pub(crate) fn window(win: &WWindow, p: u64) -> Vec<u64> {
        let pu = p as usize;
        let mut counts = vec![0u64; pu * pu];
        let wmod: Vec<usize> = (0..256u64).map(|w| (w % p) as usize).collect();
        let mut k = (win.lo % p) as usize;
        for &w in &win.values {
            counts[k * pu + wmod[w as usize]] += 1;
            k += 1;
            if k == pu {
                k = 0;
            }
        }
        counts
    }

    pub fn compute(src: &WSource, n: u64, p: u64) -> Result<Self> {
        check_odd_prime(p)?;
        let counts = src.map_reduce(
            n,
            |win| Self::window(win, p),
            |mut acc, part| {
                for (a, b) in acc.iter_mut().zip(&part) {
                    *a += b;
                }
                acc
            },
            vec![0u64; (p * p) as usize],
        )?;
        Ok(Self { n, p, counts })
    }

    #[inline]
    pub fn get(&self, k: u64, j: u64) -> u64 {
        self.counts[(k * self.p + j) as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// `S_t`, `S_{k,t}` and `S_{t,χ}` for one `(N, p, rule)`.
#[derive(Clone, Debug)]
pub struct ExpSumSet<T> {
    pub n: u64,
    pub p: u64,
    pub rule: String,
    /// `S_t`, `t = 0..p`
    pub s_t: Vec<Complex<T>>,
    /// `S_{k,t}`, row-major `[k][t]`
    pub s_kt: Vec<Complex<T>>,
    /// `S_{t,χ_a}`, row-major `[t - 1][a]` for `t = 1..p`, `a = 0..p-1`
    pub s_tchi: Vec<Complex<T>>,
}

impl<T: Real> ExpSumSet<T> {
    pub fn from_counts(counts: &JointCounts, table: &CharacterTable<T>, rule: &AdditiveRule) -> Result<Self> {
        let p = counts.p;
        if table.p() != p {
            return Err(invalid(format!("character table is mod {}, counts mod {p}", table.p())));
        }
        let pu = p as usize;
        // e(j t / p) for j, t in 0..p
        let phase: Vec<Complex<T>> = (0..p * p)
            .map(|i| unit_root_frac(((i / p) * (i % p) % p) as i64, p))
            .collect();
        let e = |j: u64, t: u64| phase[(j * p + t) as usize];

        let mut by_j = vec![0u64; pu];
        for k in 0..p {
            for j in 0..p {
                by_j[j as usize] += counts.get(k, j);
            }
        }
        let s_t: Vec<Complex<T>> = (0..p)
            .map(|t| {
                (0..p)
                    .map(|j| e(j, t) * T::count(by_j[j as usize]))
                    .collect::<CompensatedComplex<T>>()
                    .value()
            })
            .collect();

        let mut s_kt = Vec::with_capacity(pu * pu);
        for k in 0..p {
            for t in 0..p {
                let acc: CompensatedComplex<T> = (0..p).map(|j| e(j, t) * T::count(counts.get(k, j))).collect();
                s_kt.push(acc.value());
            }
        }

        let chars = table.len();
        let mut s_tchi = Vec::with_capacity((pu - 1) * chars);
        for t in 1..p {
            for a in 0..chars {
                let mut acc = CompensatedComplex::new();
                for k in 1..p {
                    let chi = table.value(a, k);
                    for j in 0..p {
                        let c = counts.get(k, j);
                        if c != 0 {
                            acc.add(chi * e(j, t) * T::count(c));
                        }
                    }
                }
                s_tchi.push(acc.value());
            }
        }
        Ok(Self { n: counts.n, p, rule: rule.label(), s_t, s_kt, s_tchi })
    }

    #[inline]
    pub fn s_kt(&self, k: u64, t: u64) -> Complex<T> {
        self.s_kt[((k % self.p) * self.p + t % self.p) as usize]
    }

    /// `S_{t,χ_a}` for `t ≢ 0`.
    #[inline]
    pub fn s_tchi(&self, t: u64, a: usize) -> Complex<T> {
        let t = t % self.p;
        assert!(t != 0, "S_(t,chi) is stored for t != 0 only");
        self.s_tchi[(t as usize - 1) * (self.p as usize - 1) + a]
    }

    /// `max_{t ≠ 0, χ ≠ χ_0} |S_{t,χ}| / N`.
    pub fn nonprincipal_ratio(&self) -> T {
        let mut worst = T::zero();
        for t in 1..self.p {
            for a in 1..(self.p as usize - 1) {
                worst = worst.max(self.s_tchi(t, a).norm());
            }
        }
        worst / T::count(self.n)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            schema: u32,
            #[serde(rename = "N")]
            n: u64,
            p: u64,
            rule: &'a str,
            #[serde(rename = "S_t")]
            s_t: Vec<[Fixed17; 2]>,
            #[serde(rename = "S_kt")]
            s_kt: Vec<Vec<[Fixed17; 2]>>,
            #[serde(rename = "S_tchi")]
            s_tchi: Vec<Vec<[Fixed17; 2]>>,
        }
        let pu = self.p as usize;
        let out = Out {
            schema: SCHEMA_VERSION,
            n: self.n,
            p: self.p,
            rule: &self.rule,
            s_t: pairs(&self.s_t),
            s_kt: self.s_kt.chunks(pu).map(pairs).collect(),
            s_tchi: self.s_tchi.chunks(pu - 1).map(pairs).collect(),
        };
        crate::export::to_json(&out)
    }

    /// `family,i,j,re,im` rows; `S_t` rows use `j = ""`.
    pub fn to_csv(&self) -> String {
        let f = crate::export::format_f64;
        let mut out = String::from("family,i,j,re,im\n");
        for (t, z) in self.s_t.iter().enumerate() {
            out.push_str(&format!("S_t,{t},,{},{}\n", f(z.re.to_f64_lossy()), f(z.im.to_f64_lossy())));
        }
        let pu = self.p as usize;
        for (i, z) in self.s_kt.iter().enumerate() {
            out.push_str(&format!("S_kt,{},{},{},{}\n", i / pu, i % pu, f(z.re.to_f64_lossy()), f(z.im.to_f64_lossy())));
        }
        for (i, z) in self.s_tchi.iter().enumerate() {
            out.push_str(&format!(
                "S_tchi,{},{},{},{}\n",
                i / (pu - 1) + 1,
                i % (pu - 1),
                f(z.re.to_f64_lossy()),
                f(z.im.to_f64_lossy())
            ));
        }
        out
    }
}

pub fn exp_sums_from<T: Real>(src: &WSource, n: u64, table: &CharacterTable<T>) -> Result<ExpSumSet<T>> {
    if n < 1 {
        return Err(invalid("N must be >= 1"));
    }
    let counts = JointCounts::compute(src, n, table.p())?;
    ExpSumSet::from_counts(&counts, table, src.rule())
}

pub fn exp_sums<T: Real>(n: u64, p: u64, rule: &AdditiveRule, table: &CharacterTable<T>) -> Result<ExpSumSet<T>> {
    if table.p() != p {
        return Err(invalid(format!("character table is mod {}, requested p = {p}", table.p())));
    }
    if n < 1 {
        return Err(invalid("N must be >= 1"));
    }
    exp_sums_from(&WSource::new(rule, n)?, n, table)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub ratio: f64,
}

/// `max_{t ≠ 0, χ ≠ χ_0} |S_{t,χ}| / N` for each `N` in an ascending list.
pub fn nonprincipal_decay_scan_from<T: Real>(
    src: &WSource,
    table: &CharacterTable<T>,
    n_list: &[u64],
) -> Result<Vec<DecayRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N list must be strictly ascending"));
    }
    n_list
        .iter()
        .map(|&n| {
            let sums = exp_sums_from(src, n, table)?;
            Ok(DecayRow { n, ratio: sums.nonprincipal_ratio().to_f64_lossy() })
        })
        .collect()
}

pub fn nonprincipal_decay_scan<T: Real>(
    p: u64,
    rule: &AdditiveRule,
    table: &CharacterTable<T>,
    n_list: &[u64],
) -> Result<Vec<DecayRow>> {
    if table.p() != p {
        return Err(invalid("character table modulus mismatch"));
    }
    let top = n_list.iter().copied().max().unwrap_or(1).max(1);
    nonprincipal_decay_scan_from(&WSource::new(rule, top)?, table, n_list)
}

pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("N,ratio\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.n, crate::export::format_f64(r.ratio)));
    }
    out
}
