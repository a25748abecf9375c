//! Streaming image scan of `m -> m + w(m)` for `m <= N`.
//!
//! Since `w >= 0`, every `m` contributing to the value `v` lies in
//! `[v - max_w, v]`. After the windows covering `[1, hi)` have been consumed,
//! counts for all `v < hi` are final, so the scan keeps only a buffer of
//! `window + max_w` counters whatever `N` is.

use serde::Serialize;

use crate::arith::{AdditiveRule, WSource};
use crate::error::{invalid, Result};

/// Feeds every final `(v, c_v)` for `v` in `[1, N + max_w]` to `on_value`,
/// in ascending `v`, where `c_v = #{m <= N : m + w(m) = v}`.
///
/// `on_window` sees each window before its images are added.
pub fn scan_images<V, W>(src: &WSource, n: u64, mut on_window: W, mut on_value: V) -> Result<()>
where
    V: FnMut(u64, u32) -> Result<()>,
    W: FnMut(&crate::arith::WWindow),
{
    let mut base = 1u64;
    let mut buf: Vec<u32> = Vec::new();
    src.for_each_ordered(n, |win| {
        on_window(win);
        for (m, w) in win.iter() {
            let idx = (m + w as u64 - base) as usize;
            if idx >= buf.len() {
                buf.resize(idx + 1, 0);
            }
            buf[idx] += 1;
        }
        let done = ((win.hi - base) as usize).min(buf.len());
        for (i, &c) in buf[..done].iter().enumerate() {
            on_value(base + i as u64, c)?;
        }
        // values in [base + len, hi) received no image at all
        for v in base + buf.len() as u64..win.hi {
            on_value(v, 0)?;
        }
        buf.drain(..done);
        base = win.hi;
        Ok(())
    })?;
    for (i, &c) in buf.iter().enumerate() {
        on_value(base + i as u64, c)?;
    }
    Ok(())
}

/// Every quantity derived from one pass of [`scan_images`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageSummary {
    #[serde(rename = "N")]
    pub n: u64,
    pub max_w: u64,
    /// `Ξ(N) = #{v <= N : c_v = 0}`.
    pub xi: u64,
    /// Ordered collision pairs, `sum_v c_v (c_v - 1)` over all `v`.
    pub collisions: u64,
    pub max_multiplicity: u32,
    /// `sum_{v <= N} g(v)`.
    pub images_le_n: u64,
    /// `sum_{v <= N} g(v)(g(v) - 1)/2`.
    pub pair_sum_le_n: u64,
    /// `sum_{v in E^c, v <= N} (g(v) - 1)`.
    pub excess_le_n: u64,
    /// `#{m <= N : m + w(m) > N}`, counted from the `m` side.
    pub overflow: u64,
}

fn summarize(
    src: &WSource,
    n: u64,
    mut on_member: Option<&mut dyn FnMut(u64) -> Result<()>>,
) -> Result<ImageSummary> {
    let mut s = ImageSummary {
        n,
        max_w: 0,
        xi: 0,
        collisions: 0,
        max_multiplicity: 0,
        images_le_n: 0,
        pair_sum_le_n: 0,
        excess_le_n: 0,
        overflow: 0,
    };
    let mut overflow = 0u64;
    let mut max_w = 0u64;
    scan_images(
        src,
        n,
        |win| {
            for (m, w) in win.iter() {
                max_w = max_w.max(w as u64);
                if m + w as u64 > n {
                    overflow += 1;
                }
            }
        },
        |v, c| {
            let c64 = c as u64;
            s.collisions += c64 * c64.saturating_sub(1);
            s.max_multiplicity = s.max_multiplicity.max(c);
            if v <= n {
                s.images_le_n += c64;
                s.pair_sum_le_n += c64 * c64.saturating_sub(1) / 2;
                if c == 0 {
                    s.xi += 1;
                    if let Some(sink) = on_member.as_mut() {
                        sink(v)?;
                    }
                } else {
                    s.excess_le_n += c64 - 1;
                }
            }
            Ok(())
        },
    )?;
    s.overflow = overflow;
    s.max_w = max_w;
    Ok(s)
}

impl ImageSummary {
    pub fn compute(src: &WSource, n: u64) -> Result<Self> {
        summarize(src, n, None)
    }

    /// Same pass, streaming each member of `E ∩ [1, N]` to `sink`.
    pub fn compute_with_members(src: &WSource, n: u64, sink: &mut dyn FnMut(u64) -> Result<()>) -> Result<Self> {
        summarize(src, n, Some(sink))
    }
}

fn source(rule: &AdditiveRule, n: u64) -> Result<WSource> {
    if n < 1 {
        return Err(invalid("N must be >= 1"));
    }
    WSource::new(rule, n)
}

/// `g(v)` for `v` in `[0, N + max_w]`, dense.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageCounts {
    pub n: u64,
    pub g: Vec<u32>,
}

impl ImageCounts {
    pub fn get(&self, v: u64) -> u32 {
        self.g.get(v as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.g.iter().map(|&c| c as u64).sum()
    }
}

/// Dense image counts; memory is `4 (N + max_w)` bytes, so this is meant for
/// moderate `N`. The streaming [`ImageSummary`] covers the large runs.
pub fn image_multiplicity_from(src: &WSource, n: u64) -> Result<ImageCounts> {
    let mut g = vec![0u32; (n + src.max_w() + 1) as usize];
    scan_images(src, n, |_| {}, |v, c| {
        g[v as usize] = c;
        Ok(())
    })?;
    Ok(ImageCounts { n, g })
}

pub fn image_multiplicity(n: u64, rule: &AdditiveRule) -> Result<ImageCounts> {
    image_multiplicity_from(&source(rule, n)?, n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XiResult {
    #[serde(rename = "N")]
    pub n: u64,
    pub xi: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<u64>>,
}

pub fn xi_from(src: &WSource, n: u64, emit_members: bool) -> Result<XiResult> {
    if emit_members {
        let mut members = Vec::new();
        let s = ImageSummary::compute_with_members(src, n, &mut |v| {
            members.push(v);
            Ok(())
        })?;
        Ok(XiResult { n, xi: s.xi, members: Some(members) })
    } else {
        let s = ImageSummary::compute(src, n)?;
        Ok(XiResult { n, xi: s.xi, members: None })
    }
}

pub fn xi(n: u64, rule: &AdditiveRule, emit_members: bool) -> Result<XiResult> {
    xi_from(&source(rule, n)?, n, emit_members)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CollisionResult {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "G")]
    pub g: u64,
}

pub fn collisions_from(src: &WSource, n: u64) -> Result<CollisionResult> {
    let s = ImageSummary::compute(src, n)?;
    Ok(CollisionResult { n, g: s.collisions })
}

pub fn collisions(n: u64, rule: &AdditiveRule) -> Result<CollisionResult> {
    collisions_from(&source(rule, n)?, n)
}

/// Both sides of every inequality in the collision-count chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollisionChainReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub eps: f64,
    /// Supplied constant in `w(n) <= C n^eps`.
    pub c: f64,
    /// `max_{n <= N} w(n) / n^eps`.
    pub c_min: f64,
    pub c_valid: bool,
    #[serde(rename = "G")]
    pub g: u64,
    pub pair_sum: u64,
    pub excess_sum: u64,
    pub images_le_n: u64,
    pub overflow: u64,
    pub xi: u64,
    /// `N - C N^eps` with the supplied `C`.
    pub power_floor: f64,
    /// `G >= pair_sum >= excess_sum`
    pub pair_chain_holds: bool,
    /// `images_le_n >= N - overflow`
    pub image_floor_holds: bool,
    /// `images_le_n >= N - C N^eps`; only meaningful when `c_valid`.
    pub power_floor_holds: bool,
    /// `excess_sum = images_le_n - (N - xi)`
    pub excess_identity_holds: bool,
}

impl CollisionChainReport {
    pub fn holds(&self) -> bool {
        self.pair_chain_holds && self.image_floor_holds && self.excess_identity_holds
    }
}

pub fn collision_chain_check_from(src: &WSource, n: u64, c: f64, eps: f64) -> Result<CollisionChainReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let s = ImageSummary::compute(src, n)?;
    let mut c_min = 0f64;
    src.for_each_ordered(n, |win| {
        for (m, w) in win.iter() {
            if w > 0 {
                c_min = c_min.max(w as f64 / (m as f64).powf(eps));
            }
        }
        Ok(())
    })?;
    let power_floor = n as f64 - c * (n as f64).powf(eps);
    Ok(CollisionChainReport {
        n,
        eps,
        c,
        c_min,
        c_valid: c >= c_min,
        g: s.collisions,
        pair_sum: s.pair_sum_le_n,
        excess_sum: s.excess_le_n,
        images_le_n: s.images_le_n,
        overflow: s.overflow,
        xi: s.xi,
        power_floor,
        pair_chain_holds: s.collisions >= s.pair_sum_le_n && s.pair_sum_le_n >= s.excess_le_n,
        image_floor_holds: s.images_le_n + s.overflow >= n,
        power_floor_holds: s.images_le_n as f64 >= power_floor,
        excess_identity_holds: s.excess_le_n + n == s.images_le_n + s.xi,
    })
}

pub fn collision_chain_check(n: u64, rule: &AdditiveRule, c: f64, eps: f64) -> Result<CollisionChainReport> {
    collision_chain_check_from(&source(rule, n)?, n, c, eps)
}
