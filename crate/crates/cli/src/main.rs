use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nwres::analytic::{choose_x_and_p, predict_histogram, ConstantsConfig, DEFAULT_PRIME_CUTOFF};
use nwres::counting::{collision_chain_check_from, residue_histogram_from, ImageSummary};
use nwres::export::{format_f64, Fixed17, SCHEMA_VERSION};
use nwres::expsum::{build_characters, decay_csv, exp_sums_from, nonprincipal_decay_scan_from, FourierTolerances};
use nwres::harness::{compare, geometric_ns, scan, scan_csv, CompareConfig, ScanRow, DEFAULT_BRUTEFORCE_CEILING};
use nwres::{AdditiveRule, WSource, WindowCache};

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 configuration error, 2 identity violation.

CSV columns:
  xi          N,xi,ratio
  collisions  N,G,ratio,pair_sum,excess_sum,images_le_n,overflow,xi,holds
  residues    r,a_r
  expsums     family,i,j,re,im   (with --ns: N,ratio)
  predict     r,predicted
  compare     r,a_r,deviation,predicted_full,predicted_main
  scan        N,p,xi,deviation_norm,abs_A1,B1,B2,B3,B2_twise,nonprincipal_ratio,
              correlation,sign_agreement,identities_hold[,seconds]";

#[derive(Parser, Debug)]
#[command(name = "nwres", version, about = "Values missed by n + w(n) and their residue profile", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count the naturals up to N not of the form n + w(n).
    Xi {
        #[command(flatten)]
        common: Common,
        /// Write the members of E up to N, one per line.
        #[arg(long)]
        members_out: Option<PathBuf>,
    },
    /// Collision count G(N) and the chain of image-count inequalities.
    Collisions {
        #[command(flatten)]
        common: Common,
        /// Constant C in w(n) <= C n^eps.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
    },
    /// Residue histogram a(r) of n + w(n) mod p.
    Residues {
        #[command(flatten)]
        common: Common,
    },
    /// Exponential sums S_t, S_{k,t}, S_{t,chi}, or a decay table with --ns.
    Expsums {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending N list for a non-principal decay table.
        #[arg(long, value_delimiter = ',', value_parser = parse_n)]
        ns: Option<Vec<u64>>,
    },
    /// Predicted residue profile from the Euler-product coefficients.
    Predict {
        #[command(flatten)]
        common: Common,
    },
    /// Empirical histogram against the prediction and lower bounds for xi.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// One comparison row per N over a list or a geometric range.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending N list.
        #[arg(long, value_delimiter = ',', value_parser = parse_n, conflicts_with = "geometric")]
        ns: Option<Vec<u64>>,
        /// START:STOP:COUNT, log-spaced.
        #[arg(long)]
        geometric: Option<String>,
        /// Append a wall-clock seconds column.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Upper limit N; accepts 100000, 1e5, 10^5 or 100_000.
    #[arg(long, value_parser = parse_n)]
    n: Option<u64>,
    /// Odd prime modulus; chosen from N and alpha when omitted.
    #[arg(long)]
    p: Option<u64>,
    /// omega, bigomega, or custom:PATH to a JSON rule file.
    #[arg(long, default_value = "omega")]
    rule: String,
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest frequency kept in the prediction (default p - 1).
    #[arg(long)]
    t_max: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for cached w-windows.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Largest N for which compare computes xi exactly.
    #[arg(long, value_parser = parse_n, default_value_t = DEFAULT_BRUTEFORCE_CEILING)]
    bruteforce_ceiling: u64,
    /// Largest prime in the truncated Euler products.
    #[arg(long, value_parser = parse_n, default_value_t = DEFAULT_PRIME_CUTOFF)]
    prime_cutoff: u64,
    /// Window length of the segmented sieve.
    #[arg(long, value_parser = parse_n)]
    window: Option<u64>,
    /// DFT reconstruction tolerance, relative to N.
    #[arg(long)]
    dft_tol: Option<f64>,
    /// Character identity tolerance, relative to N.
    #[arg(long)]
    identity_tol: Option<f64>,
    #[arg(long)]
    c6: Option<f64>,
    #[arg(long)]
    c_b2: Option<f64>,
    #[arg(long)]
    c_b3: Option<f64>,
    #[arg(long)]
    b1: Option<f64>,
    #[arg(long)]
    b2: Option<f64>,
    #[arg(long)]
    c_gamma: Option<f64>,
}

fn parse_n(text: &str) -> Result<u64, String> {
    let t = text.trim().replace('_', "");
    let bad = || format!("not a non-negative integer: {text}");
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return 10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or_else(bad);
    }
    if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return b.checked_pow(e).ok_or_else(bad);
    }
    t.parse().map_err(|_| bad())
}

impl Common {
    fn n(&self) -> Result<u64> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(n) => bail!("--n must be at least 1, got {n}"),
            None => bail!("--n is required"),
        }
    }

    fn rule(&self) -> Result<AdditiveRule> {
        Ok(AdditiveRule::from_spec(&self.rule)?)
    }

    fn constants(&self) -> Result<ConstantsConfig> {
        let d = ConstantsConfig::default();
        let c = ConstantsConfig {
            c6: self.c6.unwrap_or(d.c6),
            c_b2: self.c_b2.unwrap_or(d.c_b2),
            c_b3: self.c_b3.unwrap_or(d.c_b3),
            b1: self.b1.unwrap_or(d.b1),
            b2: self.b2.unwrap_or(d.b2),
            c_gamma: self.c_gamma.unwrap_or(d.c_gamma),
            alpha: self.alpha.unwrap_or(d.alpha),
        };
        c.validate()?;
        Ok(c)
    }

    fn tolerances(&self) -> FourierTolerances {
        let d = FourierTolerances::default();
        FourierTolerances { dft: self.dft_tol.unwrap_or(d.dft), identity: self.identity_tol.unwrap_or(d.identity) }
    }

    fn source(&self, rule: &AdditiveRule, limit: u64) -> nwres::Result<WSource> {
        let mut src = WSource::new(rule, limit)?;
        if let Some(len) = self.window {
            src = src.with_window_len(len);
        }
        if let Some(dir) = &self.cache_dir {
            src = src.with_cache(Some(WindowCache::open(dir)?));
        }
        Ok(src)
    }

    fn compare_config(&self, n: u64) -> Result<CompareConfig> {
        Ok(CompareConfig {
            n,
            p: self.p,
            t_max: self.t_max,
            constants: self.constants()?,
            prime_cutoff: self.prime_cutoff,
            bruteforce_ceiling: self.bruteforce_ceiling,
            tolerances: self.tolerances(),
        })
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_atomic(path, text.as_bytes()),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn json<V: Serialize>(value: &V) -> Result<String> {
    Ok(nwres::export::to_json(value)?)
}

/// `x log log N / N`, or `None` where `log log N <= 0`.
fn loglog_ratio(x: u64, n: u64) -> Option<f64> {
    let ll = (n as f64).ln().ln();
    (n >= 3 && ll > 0.0).then(|| x as f64 * ll / n as f64)
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

enum Outcome {
    Ok,
    Violation(Vec<String>),
}

fn cmd_xi(common: &Common, members_out: Option<&Path>) -> Result<Outcome> {
    let n = common.n()?;
    let rule = common.rule()?;
    let src = common.source(&rule, n)?;
    let summary = match members_out {
        Some(path) => {
            let tmp = path.with_extension("partial");
            let file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
            let mut w = std::io::BufWriter::new(file);
            let s = ImageSummary::compute_with_members(&src, n, &mut |v| {
                writeln!(w, "{v}").map_err(nwres::Error::from)
            })?;
            w.flush()?;
            drop(w);
            fs::rename(&tmp, path)?;
            s
        }
        None => ImageSummary::compute(&src, n)?,
    };
    let ratio = loglog_ratio(summary.xi, n);
    eprintln!("xi({n}) = {}", summary.xi);
    eprintln!("xi * loglog N / N = {}", ratio.map_or("undefined".into(), |r| r.to_string()));
    #[derive(Serialize)]
    struct Out<'a> {
        schema: u32,
        #[serde(rename = "N")]
        n: u64,
        rule: &'a str,
        xi: u64,
        ratio: Option<Fixed17>,
    }
    let label = rule.label();
    let text = match common.format {
        Format::Json => json(&Out { schema: SCHEMA_VERSION, n, rule: &label, xi: summary.xi, ratio: ratio.map(Fixed17) })?,
        Format::Csv => format!("N,xi,ratio\n{n},{},{}\n", summary.xi, opt_cell(ratio)),
    };
    common.emit(&text)?;
    Ok(Outcome::Ok)
}

fn cmd_collisions(common: &Common, c: f64, eps: f64) -> Result<Outcome> {
    let n = common.n()?;
    let rule = common.rule()?;
    let src = common.source(&rule, n)?;
    let report = collision_chain_check_from(&src, n, c, eps)?;
    let ratio = loglog_ratio(report.g, n);
    eprintln!("G({n}) = {}", report.g);
    eprintln!("G * loglog N / N = {}", ratio.map_or("undefined".into(), |r| r.to_string()));
    #[derive(Serialize)]
    struct Out<'a> {
        schema: u32,
        rule: &'a str,
        ratio: Option<Fixed17>,
        #[serde(flatten)]
        report: &'a nwres::counting::CollisionChainReport,
        holds: bool,
    }
    let label = rule.label();
    let text = match common.format {
        Format::Json => json(&Out {
            schema: SCHEMA_VERSION,
            rule: &label,
            ratio: ratio.map(Fixed17),
            report: &report,
            holds: report.holds(),
        })?,
        Format::Csv => format!(
            "N,G,ratio,pair_sum,excess_sum,images_le_n,overflow,xi,holds\n{n},{},{},{},{},{},{},{},{}\n",
            report.g,
            opt_cell(ratio),
            report.pair_sum,
            report.excess_sum,
            report.images_le_n,
            report.overflow,
            report.xi,
            report.holds()
        ),
    };
    common.emit(&text)?;
    if report.holds() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::Violation(vec!["image-count chain violated".into()]))
    }
}

fn resolve_p(common: &Common, n: u64) -> Result<u64> {
    match common.p {
        Some(p) => Ok(p),
        None => {
            let choice = choose_x_and_p(n.max(16), &common.constants()?, None)?;
            if choice.is_fallback() {
                eprintln!("X = {:.4} admits no prime; using p = {}", choice.x, choice.p);
            }
            Ok(choice.p)
        }
    }
}

fn cmd_residues(common: &Common) -> Result<Outcome> {
    let n = common.n()?;
    let rule = common.rule()?;
    let p = resolve_p(common, n)?;
    let hist = residue_histogram_from(&common.source(&rule, n)?, n, p)?;
    let text = match common.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema: u32,
                rule: &'a str,
                #[serde(flatten)]
                hist: &'a nwres::ResidueHistogram,
            }
            json(&Out { schema: SCHEMA_VERSION, rule: &rule.label(), hist: &hist })?
        }
        Format::Csv => hist.to_csv(),
    };
    common.emit(&text)?;
    if hist.total() != n {
        return Ok(Outcome::Violation(vec![format!("histogram total {} != N", hist.total())]));
    }
    Ok(Outcome::Ok)
}

fn cmd_expsums(common: &Common, ns: Option<&[u64]>) -> Result<Outcome> {
    let rule = common.rule()?;
    if let Some(ns) = ns {
        let last = *ns.last().context("--ns is empty")?;
        let p = resolve_p(common, last)?;
        let table = build_characters::<f64>(p)?;
        let rows = nonprincipal_decay_scan_from(&common.source(&rule, last)?, &table, ns)?;
        let text = match common.format {
            Format::Csv => decay_csv(&rows),
            Format::Json => {
                #[derive(Serialize)]
                struct Row {
                    #[serde(rename = "N")]
                    n: u64,
                    ratio: Fixed17,
                }
                #[derive(Serialize)]
                struct Out<'a> {
                    schema: u32,
                    p: u64,
                    rule: &'a str,
                    rows: Vec<Row>,
                }
                json(&Out {
                    schema: SCHEMA_VERSION,
                    p,
                    rule: &rule.label(),
                    rows: rows.iter().map(|r| Row { n: r.n, ratio: Fixed17(r.ratio) }).collect(),
                })?
            }
        };
        common.emit(&text)?;
        return Ok(Outcome::Ok);
    }
    let n = common.n()?;
    let p = resolve_p(common, n)?;
    let table = build_characters::<f64>(p)?;
    let sums = exp_sums_from(&common.source(&rule, n)?, n, &table)?;
    let text = match common.format {
        Format::Json => sums.to_json()?,
        Format::Csv => sums.to_csv(),
    };
    common.emit(&text)?;
    Ok(Outcome::Ok)
}

fn cmd_predict(common: &Common) -> Result<Outcome> {
    let n = common.n()?;
    let rule = common.rule()?;
    let constants = common.constants()?;
    let choice = choose_x_and_p(n, &constants, common.p)?;
    let p = choice.p;
    let t_max = common.t_max.unwrap_or(p - 1);
    let mut report = predict_histogram::<f64>(n, p, &rule, t_max, &constants, common.prime_cutoff)?;
    for f in choice.flags {
        if !report.flags.contains(&f) {
            report.flags.push(f);
        }
    }
    let text = match common.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    common.emit(&text)?;
    if t_max == p - 1 {
        let total: f64 = report.predicted.iter().sum();
        if (total - n as f64).abs() > 1e-9 * n as f64 {
            return Ok(Outcome::Violation(vec![format!("predicted total {total} != N")]));
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_compare(common: &Common) -> Result<Outcome> {
    let n = common.n()?;
    let rule = common.rule()?;
    let cfg = common.compare_config(n)?;
    let report = compare(&common.source(&rule, n)?, &cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(fit) = &report.full {
        eprintln!(
            "p = {}, correlation = {}, sign agreement = {}",
            report.p,
            fit.correlation.map_or("undefined".into(), |c| c.to_string()),
            fit.sign_agreement
        );
    }
    let text = match common.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    common.emit(&text)?;
    let violations = report.violations();
    if violations.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::Violation(violations))
    }
}

fn parse_geometric(spec: &str) -> Result<Vec<u64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        bail!("--geometric expects START:STOP:COUNT, got {spec:?}");
    };
    let start = parse_n(a).map_err(anyhow::Error::msg)?;
    let stop = parse_n(b).map_err(anyhow::Error::msg)?;
    let count: usize = c.parse().with_context(|| format!("count {c:?}"))?;
    Ok(geometric_ns(start, stop, count)?)
}

fn cmd_scan(common: &Common, ns: Option<&[u64]>, geometric: Option<&str>, timings: bool) -> Result<Outcome> {
    let ns = match (ns, geometric) {
        (Some(ns), _) => ns.to_vec(),
        (None, Some(g)) => parse_geometric(g)?,
        (None, None) => vec![common.n()?],
    };
    let rule = common.rule()?;
    let last = *ns.last().context("empty N list")?;
    let base = common.compare_config(last)?;
    let rows = scan(&ns, &base, |n| common.source(&rule, n))?;
    let text = match common.format {
        Format::Csv => scan_csv(&rows, timings),
        Format::Json => scan_json(&rows, &rule, timings)?,
    };
    common.emit(&text)?;
    let bad: Vec<String> =
        rows.iter().filter(|r| !r.identities_hold).map(|r| format!("identity violated at N = {}", r.n)).collect();
    if bad.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::Violation(bad))
    }
}

fn scan_json(rows: &[ScanRow], rule: &AdditiveRule, timings: bool) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        #[serde(rename = "N")]
        n: u64,
        p: u64,
        xi: Option<u64>,
        deviation_norm: Fixed17,
        #[serde(rename = "abs_A1")]
        abs_a1: Option<Fixed17>,
        #[serde(rename = "B1")]
        b1: Option<Fixed17>,
        #[serde(rename = "B2")]
        b2: Option<Fixed17>,
        #[serde(rename = "B3")]
        b3: Option<Fixed17>,
        #[serde(rename = "B2_twise")]
        b2_twise: Option<Fixed17>,
        nonprincipal_ratio: Fixed17,
        correlation: Option<Fixed17>,
        sign_agreement: Option<Fixed17>,
        identities_hold: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        seconds: Option<Fixed17>,
    }
    #[derive(Serialize)]
    struct Out<'a> {
        schema: u32,
        rule: &'a str,
        rows: Vec<Row>,
    }
    let f = |x: Option<f64>| x.map(Fixed17);
    let rows = rows
        .iter()
        .map(|r| Row {
            n: r.n,
            p: r.p,
            xi: r.xi,
            deviation_norm: Fixed17(r.deviation_norm),
            abs_a1: f(r.abs_a1),
            b1: f(r.errors.map(|e| e.b1)),
            b2: f(r.errors.map(|e| e.b2)),
            b3: f(r.errors.map(|e| e.b3)),
            b2_twise: f(r.errors.map(|e| e.b2_twise)),
            nonprincipal_ratio: Fixed17(r.nonprincipal_ratio),
            correlation: f(r.correlation),
            sign_agreement: f(r.sign_agreement),
            identities_hold: r.identities_hold,
            seconds: timings.then_some(Fixed17(r.seconds)),
        })
        .collect();
    json(&Out { schema: SCHEMA_VERSION, rule: &rule.label(), rows })
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Xi { common, .. }
        | Command::Collisions { common, .. }
        | Command::Residues { common }
        | Command::Expsums { common, .. }
        | Command::Predict { common }
        | Command::Compare { common }
        | Command::Scan { common, .. } => common,
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(threads) = common(&cli.command).threads {
        if threads == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match &cli.command {
        Command::Xi { common, members_out } => cmd_xi(common, members_out.as_deref()),
        Command::Collisions { common, c, eps } => cmd_collisions(common, *c, *eps),
        Command::Residues { common } => cmd_residues(common),
        Command::Expsums { common, ns } => cmd_expsums(common, ns.as_deref()),
        Command::Predict { common } => cmd_predict(common),
        Command::Compare { common } => cmd_compare(common),
        Command::Scan { common, ns, geometric, timings } => {
            cmd_scan(common, ns.as_deref(), geometric.as_deref(), *timings)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors; here 2 is reserved for identity violations
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation(list)) => {
            for v in list {
                eprintln!("identity violation: {v}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_notation() {
        assert_eq!(parse_n("100000"), Ok(100_000));
        assert_eq!(parse_n("1e8"), Ok(100_000_000));
        assert_eq!(parse_n("10^5"), Ok(100_000));
        assert_eq!(parse_n("1_000"), Ok(1000));
        assert!(parse_n("1.5e3").is_err());
        assert!(parse_n("abc").is_err());
        assert!(parse_n("1e30").is_err());
    }
}
