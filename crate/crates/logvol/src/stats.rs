//! Empirical-distribution machinery: normal CDF, one- and two-sample
//! Kolmogorov-Smirnov statistics, and the asymptotic error budgets used to
//! judge Monte Carlo agreement.

use crate::error::{Error, Result};
use serde::Serialize;
use std::sync::OnceLock;

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of `normal_cdf` for p in (0, 1), by bisection. Accurate to about
/// 1e-13 absolute; only used for grid construction, never in hot loops.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("quantile level {p} not in (0,1)")));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of a Kolmogorov-Smirnov comparison.
///
/// `mc_half_width` is the 95% half-width of the statistic's null fluctuation
/// and `critical_1pct` the 1% rejection threshold, both from the asymptotic
/// Kolmogorov distribution at the effective sample count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KSResult {
    pub statistic: f64,
    pub n_samples: usize,
    pub m_samples: Option<usize>,
    pub mc_half_width: f64,
    pub critical_1pct: f64,
}

impl KSResult {
    fn from_statistic(statistic: f64, n_samples: usize, m_samples: Option<usize>) -> Self {
        let n_eff = match m_samples {
            Some(m) => (n_samples as f64 * m as f64) / (n_samples + m) as f64,
            None => n_samples as f64,
        };
        KSResult {
            statistic,
            n_samples,
            m_samples,
            mc_half_width: kolmogorov_critical(0.05) / n_eff.sqrt(),
            critical_1pct: kolmogorov_critical(0.01) / n_eff.sqrt(),
        }
    }

    /// True when the statistic clears the 1% asymptotic threshold.
    pub fn consistent_at_1pct(&self) -> bool {
        self.statistic <= self.critical_1pct
    }
}

/// Tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2) of the
/// Kolmogorov distribution.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    for k in 1..200u32 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        let signed = if k % 2 == 1 { term } else { -term };
        sum += signed;
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Upper quantile lambda_alpha with Q(lambda) = alpha.
fn kolmogorov_critical(alpha: f64) -> f64 {
    static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
    let (one, five) = *CACHE.get_or_init(|| (solve_tail(0.01), solve_tail(0.05)));
    if alpha == 0.01 {
        one
    } else if alpha == 0.05 {
        five
    } else {
        solve_tail(alpha)
    }
}

fn solve_tail(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.1f64, 5.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_tail(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sorted_copy(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("sample batch contains NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted)
}

/// Kolmogorov-Smirnov distance between the ECDF of `samples` and a reference
/// CDF. Both one-sided gaps at each jump enter the supremum.
pub fn ks_one_sample(samples: impl AsRef<[f64]>, cdf: impl Fn(f64) -> f64) -> Result<KSResult> {
    let sorted = sorted_copy(samples.as_ref())?;
    let n = sorted.len() as f64;
    let mut statistic = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        statistic = statistic.max(above).max(below);
    }
    Ok(KSResult::from_statistic(
        statistic.clamp(0.0, 1.0),
        sorted.len(),
        None,
    ))
}

/// Kolmogorov-Smirnov distance between the ECDFs of two batches, in one merge
/// pass. Runs of equal values advance both ECDFs before the gap is taken.
pub fn ks_two_sample(a: impl AsRef<[f64]>, b: impl AsRef<[f64]>) -> Result<KSResult> {
    let xa = sorted_copy(a.as_ref())?;
    let xb = sorted_copy(b.as_ref())?;
    let (n, m) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut statistic = 0.0f64;
    while i < n || j < m {
        let v = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&w)) => u.min(w),
            (Some(&u), None) => u,
            (None, Some(&w)) => w,
            (None, None) => break,
        };
        while i < n && xa[i] == v {
            i += 1;
        }
        while j < m && xb[j] == v {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        statistic = statistic.max(gap);
    }
    Ok(KSResult::from_statistic(
        statistic.clamp(0.0, 1.0),
        n,
        Some(m),
    ))
}
