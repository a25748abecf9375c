//! Empirical-versus-predicted comparison runs and geometric scans.

use std::time::Instant;

use num_rational::Ratio;
use serde::Serialize;

use crate::analytic::{
    choose_r_predicted, choose_x_and_p, predict_histogram, ConstantsConfig, ErrorMagnitudes, PredictionReport,
    PrimeChoice, DEFAULT_PRIME_CUTOFF,
};
use crate::arith::WSource;
use crate::counting::histogram::window_histogram;
use crate::counting::{
    choose_r_empirical, scan_images, xi_lower_bound, xi_lower_bound_sharp, ResidueHistogram, ResidueSelection,
};
use crate::error::{invalid, Result};
use crate::export::{format_f64, Fixed17, SCHEMA_VERSION};
use crate::expsum::{build_characters, verify_fourier_identities, ExpSumSet, FourierReport, FourierTolerances, JointCounts};

pub const DEFAULT_BRUTEFORCE_CEILING: u64 = 10_000_000;
/// Smallest `N` for which `log log N > 0` is safely away from zero.
pub const MIN_PREDICTION_N: u64 = 16;

pub const FLAG_P_NOT_BELOW_N: &str = "p-not-below-N";
pub const FLAG_NO_PREDICTION: &str = "prediction-skipped-small-N";
pub const FLAG_XI_SKIPPED: &str = "xi-above-bruteforce-ceiling";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareConfig {
    pub n: u64,
    pub p: Option<u64>,
    /// Full-range truncation; `None` means `p - 1`.
    pub t_max: Option<u64>,
    pub constants: ConstantsConfig,
    pub prime_cutoff: u64,
    pub bruteforce_ceiling: u64,
    pub tolerances: FourierTolerances,
}

impl CompareConfig {
    pub fn new(n: u64) -> Self {
        Self {
            n,
            p: None,
            t_max: None,
            constants: ConstantsConfig::default(),
            prime_cutoff: DEFAULT_PRIME_CUTOFF,
            bruteforce_ceiling: DEFAULT_BRUTEFORCE_CEILING,
            tolerances: FourierTolerances::default(),
        }
    }
}

/// One prediction mode measured against the histogram.
#[derive(Clone, Debug)]
pub struct PredictionFit {
    pub t_max: u64,
    pub report: PredictionReport<f64>,
    /// `predicted(r) - N/p`
    pub corrections: Vec<f64>,
    /// Pearson correlation of deviations and corrections; `None` when either
    /// vector is constant.
    pub correlation: Option<f64>,
    /// Fraction of `r` where deviation and correction have the same sign.
    pub sign_agreement: f64,
    pub predicted_total: f64,
}

/// Exact residue-class lower bound for `Ξ(N)` from one choice of `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub selection: ResidueSelection,
    pub bound: Ratio<i128>,
    pub sharp_bound: i128,
    /// `bound <= Ξ(N)` and `sharp_bound <= Ξ(N)`, when `Ξ(N)` is known.
    pub holds: Option<bool>,
}

/// Quantities from the image scan, when `N` is under the ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImageChecks {
    pub xi: u64,
    pub collisions: u64,
    pub pair_sum_le_n: u64,
    pub excess_le_n: u64,
    pub images_le_n: u64,
    pub overflow: u64,
    /// `G >= Σ g(g-1)/2 >= Σ_{E^c} (g - 1)`
    pub pair_chain_holds: bool,
    /// `Σ g(n) >= N - overflow`
    pub image_floor_holds: bool,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub n: u64,
    pub p: u64,
    pub rule: String,
    pub prime_choice: PrimeChoice,
    pub empirical: ResidueHistogram,
    /// `a(r) - N/p`
    pub deviations: Vec<f64>,
    pub full: Option<PredictionFit>,
    pub main_term: Option<PredictionFit>,
    pub errors: Option<ErrorMagnitudes>,
    pub empirical_bound: BoundCheck,
    pub predicted_bound: Option<BoundCheck>,
    pub image: Option<ImageChecks>,
    pub fourier: FourierReport,
    pub nonprincipal_ratio: f64,
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
}

impl ComparisonReport {
    pub fn xi(&self) -> Option<u64> {
        self.image.map(|i| i.xi)
    }

    /// Every hard identity: histogram total, Fourier identities, the xi lower bounds and
    /// the image-count chain where computed, and the predicted total.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.empirical.total() != self.n {
            out.push(format!("histogram total {} != N = {}", self.empirical.total(), self.n));
        }
        if !self.fourier.dft_ok() {
            out.push(format!("DFT reconstruction error {:e}", self.fourier.dft_error));
        }
        if !self.fourier.principal_ok() {
            out.push(format!("principal character identity error {:e}", self.fourier.principal_error));
        }
        if !self.fourier.inversion_ok() {
            out.push(format!("character inversion error {:e}", self.fourier.inversion_error));
        }
        for b in std::iter::once(&self.empirical_bound).chain(self.predicted_bound.as_ref()) {
            if b.holds == Some(false) {
                out.push(format!("xi lower bound exceeds xi for {:?} selection", b.selection.strategy));
            }
        }
        if let Some(img) = &self.image {
            if !img.pair_chain_holds {
                out.push("collision chain violated".into());
            }
            if !img.image_floor_holds {
                out.push("image floor violated".into());
            }
            if img.images_le_n + img.overflow != self.n {
                out.push("image count does not balance".into());
            }
        }
        if let Some(fit) = &self.full {
            let n = self.n as f64;
            if (fit.predicted_total - n).abs() > 1e-9 * n {
                out.push(format!("predicted total {} != N", fit.predicted_total));
            }
        }
        out
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn to_json<'a>(&'a self) -> serde_json::Result<String> {
        #[derive(Serialize)]
        struct Fit<'a> {
            t_max: u64,
            #[serde(rename = "A")]
            a: Vec<[Fixed17; 2]>,
            predicted: Vec<Fixed17>,
            corrections: Vec<Fixed17>,
            correlation: Option<Fixed17>,
            sign_agreement: Fixed17,
            #[serde(rename = "R_predicted")]
            r_predicted: Option<&'a [u64]>,
        }
        #[derive(Serialize)]
        struct Bound<'a> {
            strategy: crate::counting::SelectionStrategy,
            residues: &'a [u64],
            bound: String,
            bound_value: Fixed17,
            sharp_bound: String,
            holds: Option<bool>,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            schema: u32,
            #[serde(rename = "N")]
            n: u64,
            p: u64,
            rule: &'a str,
            #[serde(rename = "X")]
            x: Fixed17,
            empirical: &'a [u64],
            deviations: Vec<Fixed17>,
            full: Option<Fit<'a>>,
            main_term: Option<Fit<'a>>,
            #[serde(rename = "B1")]
            b1: Option<Fixed17>,
            #[serde(rename = "B2")]
            b2: Option<Fixed17>,
            #[serde(rename = "B3")]
            b3: Option<Fixed17>,
            #[serde(rename = "B2_twise")]
            b2_twise: Option<Fixed17>,
            a1_ratio: Option<Fixed17>,
            dominance_holds: Option<bool>,
            xi_bounds: Vec<Bound<'a>>,
            xi: Option<u64>,
            image: Option<&'a ImageChecks>,
            fourier: FourierOut,
            nonprincipal_ratio: Fixed17,
            identities_hold: bool,
            violations: Vec<String>,
            flags: &'a [String],
            warnings: &'a [String],
            constants: Option<&'a ConstantsConfig>,
        }
        #[derive(Serialize)]
        struct FourierOut {
            dft_error: Fixed17,
            principal_error: Fixed17,
            inversion_error: Fixed17,
            holds: bool,
        }
        let fit = |f: &'a PredictionFit, r: Option<&'a [u64]>| Fit {
            t_max: f.t_max,
            a: crate::export::pairs(&f.report.a),
            predicted: crate::export::reals(&f.report.predicted),
            corrections: f.corrections.iter().map(|&x| Fixed17(x)).collect(),
            correlation: f.correlation.map(Fixed17),
            sign_agreement: Fixed17(f.sign_agreement),
            r_predicted: r,
        };
        let bound = |b: &'a BoundCheck| Bound {
            strategy: b.selection.strategy,
            residues: &b.selection.residues,
            bound: format!("{}/{}", b.bound.numer(), b.bound.denom()),
            bound_value: Fixed17(*b.bound.numer() as f64 / *b.bound.denom() as f64),
            sharp_bound: b.sharp_bound.to_string(),
            holds: b.holds,
        };
        let r_pred = self.predicted_bound.as_ref().map(|b| b.selection.residues.as_slice());
        let violations = self.violations();
        let out = Out {
            schema: SCHEMA_VERSION,
            n: self.n,
            p: self.p,
            rule: &self.rule,
            x: Fixed17(self.prime_choice.x),
            empirical: &self.empirical.counts,
            deviations: self.deviations.iter().map(|&x| Fixed17(x)).collect(),
            full: self.full.as_ref().map(|f| fit(f, None)),
            main_term: self.main_term.as_ref().map(|f| fit(f, r_pred)),
            b1: self.errors.map(|e| Fixed17(e.b1)),
            b2: self.errors.map(|e| Fixed17(e.b2)),
            b3: self.errors.map(|e| Fixed17(e.b3)),
            b2_twise: self.errors.map(|e| Fixed17(e.b2_twise)),
            a1_ratio: self.main_term.as_ref().map(|f| Fixed17(f.report.a1_ratio)),
            dominance_holds: self.main_term.as_ref().map(|f| f.report.dominance_holds),
            xi_bounds: std::iter::once(&self.empirical_bound).chain(self.predicted_bound.as_ref()).map(bound).collect(),
            xi: self.xi(),
            image: self.image.as_ref(),
            fourier: FourierOut {
                dft_error: Fixed17(self.fourier.dft_error),
                principal_error: Fixed17(self.fourier.principal_error),
                inversion_error: Fixed17(self.fourier.inversion_error),
                holds: self.fourier.holds(),
            },
            nonprincipal_ratio: Fixed17(self.nonprincipal_ratio),
            identities_hold: violations.is_empty(),
            violations,
            flags: &self.flags,
            warnings: &self.warnings,
            constants: self.full.as_ref().map(|f| &f.report.constants),
        };
        crate::export::to_json(&out)
    }

    /// `r,a_r,deviation,predicted_full,predicted_main` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,a_r,deviation,predicted_full,predicted_main\n");
        let cell = |f: &Option<PredictionFit>, r: usize| {
            f.as_ref().map(|f| format_f64(f.report.predicted[r])).unwrap_or_default()
        };
        for r in 0..self.p as usize {
            out.push_str(&format!(
                "{r},{},{},{},{}\n",
                self.empirical.counts[r],
                format_f64(self.deviations[r]),
                cell(&self.full, r),
                cell(&self.main_term, r)
            ));
        }
        out
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn sign_agreement(x: &[f64], y: &[f64]) -> f64 {
    let agree = x.iter().zip(y).filter(|(a, b)| a.signum() == b.signum() || (**a == 0.0 && **b == 0.0)).count();
    agree as f64 / x.len() as f64
}

fn fit(report: PredictionReport<f64>, deviations: &[f64]) -> PredictionFit {
    let corrections = report.corrections();
    PredictionFit {
        t_max: report.t_max,
        correlation: pearson(deviations, &corrections),
        sign_agreement: sign_agreement(deviations, &corrections),
        predicted_total: report.predicted.iter().sum(),
        corrections,
        report,
    }
}

fn bound_check(hist: &ResidueHistogram, selection: ResidueSelection, xi: Option<u64>) -> Result<BoundCheck> {
    let bound = xi_lower_bound(hist, &selection)?;
    let sharp_bound = xi_lower_bound_sharp(hist, &selection)?;
    let holds = xi.map(|x| bound <= Ratio::from_integer(x as i128) && sharp_bound <= x as i128);
    Ok(BoundCheck { selection, bound, sharp_bound, holds })
}

/// Histogram, joint counts and (under the ceiling) image statistics from a
/// single pass over the windows.
fn measure(src: &WSource, n: u64, p: u64, with_images: bool) -> Result<(ResidueHistogram, JointCounts, Option<ImageChecks>)> {
    let pu = p as usize;
    if !with_images {
        let (hist, joint) = src.map_reduce(
            n,
            |win| (window_histogram(win, p), JointCounts::window(win, p)),
            |(mut h, mut j), (hp, jp)| {
                h.iter_mut().zip(&hp).for_each(|(a, b)| *a += b);
                j.iter_mut().zip(&jp).for_each(|(a, b)| *a += b);
                (h, j)
            },
            (vec![0u64; pu], vec![0u64; pu * pu]),
        )?;
        return Ok((
            ResidueHistogram { n, p, counts: hist },
            JointCounts { n, p, counts: joint },
            None,
        ));
    }
    let mut hist = vec![0u64; pu];
    let mut joint = vec![0u64; pu * pu];
    let mut overflow = 0u64;
    let mut img = ImageChecks {
        xi: 0,
        collisions: 0,
        pair_sum_le_n: 0,
        excess_le_n: 0,
        images_le_n: 0,
        overflow: 0,
        pair_chain_holds: false,
        image_floor_holds: false,
    };
    scan_images(
        src,
        n,
        |win| {
            window_histogram(win, p).iter().zip(hist.iter_mut()).for_each(|(b, a)| *a += b);
            JointCounts::window(win, p).iter().zip(joint.iter_mut()).for_each(|(b, a)| *a += b);
            overflow += win.iter().filter(|&(m, w)| m + w as u64 > n).count() as u64;
        },
        |v, c| {
            let c = c as u64;
            img.collisions += c * c.saturating_sub(1);
            if v <= n {
                img.images_le_n += c;
                img.pair_sum_le_n += c * c.saturating_sub(1) / 2;
                if c == 0 {
                    img.xi += 1;
                } else {
                    img.excess_le_n += c - 1;
                }
            }
            Ok(())
        },
    )?;
    img.overflow = overflow;
    img.pair_chain_holds = img.collisions >= img.pair_sum_le_n && img.pair_sum_le_n >= img.excess_le_n;
    img.image_floor_holds = img.images_le_n >= n - overflow;
    Ok((
        ResidueHistogram { n, p, counts: hist },
        JointCounts { n, p, counts: joint },
        Some(img),
    ))
}

pub fn compare(src: &WSource, cfg: &CompareConfig) -> Result<ComparisonReport> {
    let n = cfg.n;
    if n < 1 {
        return Err(invalid("N must be >= 1"));
    }
    if n > src.limit() {
        return Err(invalid(format!("N = {n} exceeds the window source limit {}", src.limit())));
    }
    cfg.constants.validate()?;
    let prime_choice = prime_choice(n, cfg)?;
    let p = prime_choice.p;
    if let Some(t) = cfg.t_max {
        if t < 1 || t > p - 1 {
            return Err(invalid(format!("t_max must lie in 1..={}, got {t}", p - 1)));
        }
    }
    let mut flags = prime_choice.flags.clone();
    let mut warnings = Vec::new();
    if p >= n {
        flags.push(FLAG_P_NOT_BELOW_N.into());
        warnings.push(format!("p = {p} >= N = {n}: the histogram is degenerate"));
    }

    let with_images = n <= cfg.bruteforce_ceiling;
    if !with_images {
        flags.push(FLAG_XI_SKIPPED.into());
    }
    let (empirical, joint, image) = measure(src, n, p, with_images)?;
    let xi = image.map(|i| i.xi);

    let table = build_characters::<f64>(p)?;
    let sums = ExpSumSet::from_counts(&joint, &table, src.rule())?;
    let fourier = verify_fourier_identities(&sums, &empirical, &table, cfg.tolerances)?;

    let base = n as f64 / p as f64;
    let deviations: Vec<f64> = empirical.counts.iter().map(|&a| a as f64 - base).collect();
    let empirical_bound = bound_check(&empirical, choose_r_empirical(&empirical), xi)?;

    let (full, main_term, errors, predicted_bound) = if n >= MIN_PREDICTION_N {
        let t_full = cfg.t_max.unwrap_or(p - 1);
        let full = predict_histogram::<f64>(n, p, src.rule(), t_full, &cfg.constants, cfg.prime_cutoff)?;
        let main = predict_histogram::<f64>(n, p, src.rule(), 1, &cfg.constants, cfg.prime_cutoff)?;
        let errors = full.errors;
        let predicted_bound = bound_check(&empirical, choose_r_predicted(&main), xi)?;
        (Some(fit(full, &deviations)), Some(fit(main, &deviations)), Some(errors), Some(predicted_bound))
    } else {
        flags.push(FLAG_NO_PREDICTION.into());
        (None, None, None, None)
    };

    Ok(ComparisonReport {
        n,
        p,
        rule: src.rule().label(),
        prime_choice,
        empirical,
        deviations,
        full,
        main_term,
        errors,
        empirical_bound,
        predicted_bound,
        image,
        fourier,
        nonprincipal_ratio: sums.nonprincipal_ratio(),
        flags,
        warnings,
    })
}

fn prime_choice(n: u64, cfg: &CompareConfig) -> Result<PrimeChoice> {
    if n >= MIN_PREDICTION_N {
        return choose_x_and_p(n, &cfg.constants, cfg.p);
    }
    // X is undefined this low; only an explicit p or the fallback apply.
    let x = if n >= 3 { (n as f64).ln().ln().max(0.0).sqrt() / cfg.constants.alpha } else { 0.0 };
    let mut choice = choose_x_and_p(MIN_PREDICTION_N, &cfg.constants, cfg.p)?;
    choice.x = x;
    choice.interval = (3.0, x);
    if cfg.p.is_none() {
        choice.p = 5;
        if !choice.is_fallback() {
            choice.flags.push(crate::analytic::predict::FLAG_FALLBACK_P.into());
        }
    }
    Ok(choice)
}

/// One line of a scan campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub n: u64,
    pub p: u64,
    pub xi: Option<u64>,
    /// `sqrt(Σ_r (a(r) - N/p)^2)`
    pub deviation_norm: f64,
    pub abs_a1: Option<f64>,
    pub errors: Option<ErrorMagnitudes>,
    pub nonprincipal_ratio: f64,
    pub correlation: Option<f64>,
    pub sign_agreement: Option<f64>,
    pub identities_hold: bool,
    pub seconds: f64,
}

impl ScanRow {
    pub fn from_report(report: &ComparisonReport, seconds: f64) -> Self {
        Self {
            n: report.n,
            p: report.p,
            xi: report.xi(),
            deviation_norm: report.deviations.iter().map(|d| d * d).sum::<f64>().sqrt(),
            abs_a1: report.main_term.as_ref().map(|f| f.report.a[0].norm()),
            errors: report.errors,
            nonprincipal_ratio: report.nonprincipal_ratio,
            correlation: report.full.as_ref().and_then(|f| f.correlation),
            sign_agreement: report.full.as_ref().map(|f| f.sign_agreement),
            identities_hold: report.holds(),
            seconds,
        }
    }
}

pub const SCAN_COLUMNS: &str =
    "N,p,xi,deviation_norm,abs_A1,B1,B2,B3,B2_twise,nonprincipal_ratio,correlation,sign_agreement,identities_hold";

/// CSV of a campaign; the `seconds` column is appended only on request,
/// since timings differ between otherwise identical runs.
pub fn scan_csv(rows: &[ScanRow], timings: bool) -> String {
    let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
    let mut out = String::from(SCAN_COLUMNS);
    if timings {
        out.push_str(",seconds");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.p,
            r.xi.map(|x| x.to_string()).unwrap_or_default(),
            format_f64(r.deviation_norm),
            opt(r.abs_a1),
            opt(r.errors.map(|e| e.b1)),
            opt(r.errors.map(|e| e.b2)),
            opt(r.errors.map(|e| e.b3)),
            opt(r.errors.map(|e| e.b2_twise)),
            format_f64(r.nonprincipal_ratio),
            opt(r.correlation),
            opt(r.sign_agreement),
            r.identities_hold
        ));
        if timings {
            out.push_str(&format!(",{:.3}", r.seconds));
        }
        out.push('\n');
    }
    out
}

/// Runs [`compare`] for each `N` of a strictly ascending list. `make_source`
/// builds the window source for one `N`; give it a cache to make an
/// interrupted campaign resume cheaply.
pub fn scan<S>(n_list: &[u64], base: &CompareConfig, mut make_source: S) -> Result<Vec<ScanRow>>
where
    S: FnMut(u64) -> Result<WSource>,
{
    if n_list.is_empty() {
        return Err(invalid("scan needs at least one N"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("scan N list must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let start = Instant::now();
        let src = make_source(n)?;
        let report = compare(&src, &CompareConfig { n, ..*base })?;
        rows.push(ScanRow::from_report(&report, start.elapsed().as_secs_f64()));
    }
    Ok(rows)
}

/// `count` values from `start` to `stop`, equally spaced in log scale and
/// rounded, duplicates removed.
pub fn geometric_ns(start: u64, stop: u64, count: usize) -> Result<Vec<u64>> {
    if start < 1 || stop < start || count < 1 {
        return Err(invalid("geometric range needs 1 <= start <= stop and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = ((start as f64).ln(), (stop as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u64)
        .collect();
    out[0] = start;
    *out.last_mut().unwrap() = stop;
    out.dedup();
    Ok(out)
}
