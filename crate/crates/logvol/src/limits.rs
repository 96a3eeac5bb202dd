//! Limit machinery for log-volumes with random radii: truncated moments of
//! the log-radius, the variance and tail conditions for a normal limit,
//! centering sequences for both regimes, and the alpha-stable and
//! Gaussian-plus-stable limit laws with their characteristic functions and
//! CDFs.

use crate::asymptotics::omega_sq;
use crate::error::{Error, Result};
use crate::quad;
use crate::sampling::RadialLaw;
use crate::simplex::{kahan_sum, spherical_moments, SimplexDims};
use crate::specfun::{log_gamma_real, polygamma_real, EULER_GAMMA};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

/// Parameters of the stable law that appears as the limit of standardized
/// log-volumes under heavy-tailed radii: tail index `alpha` in (0, 2), left
/// and right tail weights `c1, c2 >= 0` (not both zero), and a deterministic
/// location shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableParams {
    alpha: f64,
    c1: f64,
    c2: f64,
    gamma_shift: f64,
}

impl StableParams {
    pub fn new(alpha: f64, c1: f64, c2: f64, gamma_shift: f64) -> Result<Self> {
        validate_stable(alpha, c1, c2)?;
        if !gamma_shift.is_finite() {
            return Err(Error::invalid(format!(
                "location shift {gamma_shift} must be finite"
            )));
        }
        Ok(StableParams {
            alpha,
            c1,
            c2,
            gamma_shift,
        })
    }

    /// Parameters carrying the jump-compensation displacement, so that the
    /// limit of log-volumes standardized with `centering_stable` is
    /// distributed exactly by this law.
    pub fn compensated(alpha: f64, c1: f64, c2: f64) -> Result<Self> {
        let shift = compensation_shift(alpha, c1, c2)?;
        StableParams::new(alpha, c1, c2, shift)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn gamma_shift(&self) -> f64 {
        self.gamma_shift
    }

    /// Skewness (c2 - c1)/(c1 + c2), in [-1, 1].
    pub fn eta(&self) -> f64 {
        (self.c2 - self.c1) / (self.c1 + self.c2)
    }
}

fn validate_stable(alpha: f64, c1: f64, c2: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 2.0) {
        return Err(Error::invalid(format!(
            "stable index {alpha} must lie strictly between 0 and 2"
        )));
    }
    if !(c1.is_finite() && c1 >= 0.0 && c2.is_finite() && c2 >= 0.0) {
        return Err(Error::invalid(format!(
            "tail weights ({c1}, {c2}) must be nonnegative"
        )));
    }
    if c1 + c2 <= 0.0 {
        return Err(Error::invalid("tail weights must not both vanish"));
    }
    Ok(())
}

/// Location displacement produced by compensating small jumps through
/// x/(1 + x^2) in the centering sequences. Adding it to the stable law's
/// shift aligns the centered limit with the conventional parametrization.
pub fn compensation_shift(alpha: f64, c1: f64, c2: f64) -> Result<f64> {
    validate_stable(alpha, c1, c2)?;
    if alpha == 1.0 {
        Ok((c2 - c1) * (1.0 - EULER_GAMMA))
    } else {
        Ok(-(c2 - c1) * alpha * PI / (2.0 * cos_half_pi(alpha)))
    }
}

/// cos(pi alpha / 2) evaluated as -sin(pi (alpha - 1)/2), which stays
/// accurate near the sign change at alpha = 1.
fn cos_half_pi(alpha: f64) -> f64 {
    -(FRAC_PI_2 * (alpha - 1.0)).sin()
}

/// -alpha Gamma(-alpha) cos(pi alpha / 2): the positive factor that scales
/// |t|^alpha in the characteristic exponent. Equals pi/2 at alpha = 1.
fn alpha_scale(alpha: f64) -> f64 {
    if alpha == 1.0 {
        FRAC_PI_2
    } else {
        -libm::tgamma(2.0 - alpha) * cos_half_pi(alpha) / (alpha - 1.0)
    }
}

/// Exponent of the characteristic function of the stable law plus an
/// independent centered Gaussian of standard deviation q, at t != 0.
fn log_cf(params: &StableParams, q: f64, t: f64) -> Complex64 {
    let s = params.c1 + params.c2;
    let eta = params.eta();
    let at = t.abs();
    let (re, im) = if params.alpha == 1.0 {
        // t log|t| -> 0 at the origin; the denormal guard keeps 0 * inf out
        let t_log = if at < 1e-300 { 0.0 } else { t * at.ln() };
        (-s * FRAC_PI_2 * at, -s * eta * t_log)
    } else {
        let mag = alpha_scale(params.alpha) * s * at.powf(params.alpha);
        let tan_fac = (FRAC_PI_2 * params.alpha).sin() / cos_half_pi(params.alpha);
        (-mag, mag * eta * tan_fac * t.signum())
    };
    Complex64::new(re - 0.5 * q * q * t * t, im + params.gamma_shift * t)
}

/// Characteristic function of the stable limit law; 1 at t = 0, modulus
/// exp(-(c1 + c2) A(alpha) |t|^alpha) elsewhere.
pub fn stable_cf(params: &StableParams, t: f64) -> Complex64 {
    if t == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        log_cf(params, 0.0, t).exp()
    }
}

const CDF_TAIL_EPS: f64 = 1e-12;

/// Power-tail level below which the CDF switches to the one-term tail
/// expansion; second-order corrections there stay under ~1e-6.
const TAIL_SWITCH: f64 = 3e-4;

/// CDF of the stable limit law by inversion of its characteristic function,
/// accurate to roughly 1e-6 and clamped to [0, 1]. Far tails use the
/// one-term power expansion c |x|^(-alpha). Between the bulk and that
/// region, strongly oscillatory inversions can exhaust the quadrature
/// budget for small alpha and surface as a quadrature error.
pub fn stable_cdf(params: &StableParams, x: f64) -> Result<f64> {
    inversion_cdf(params, 0.0, x, CDF_TAIL_EPS)
}

/// CDF of q N(0,1) + Z, with N standard normal independent of the stable
/// variable Z. Same accuracy and conventions as `stable_cdf`.
pub fn mixed_cdf(q: f64, params: &StableParams, x: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::invalid(format!(
            "gaussian weight {q} must be positive and finite"
        )));
    }
    inversion_cdf(params, q, x, CDF_TAIL_EPS)
}

/// `stable_cdf` on a nondecreasing grid, with quadrature-level wiggles
/// ironed out by a running maximum so the result is a genuine CDF table.
pub fn stable_cdf_grid(params: &StableParams, xs: &[f64]) -> Result<Vec<f64>> {
    cdf_grid(xs, |x| stable_cdf(params, x))
}

/// `mixed_cdf` on a nondecreasing grid, monotone-corrected like
/// `stable_cdf_grid`.
pub fn mixed_cdf_grid(q: f64, params: &StableParams, xs: &[f64]) -> Result<Vec<f64>> {
    cdf_grid(xs, |x| mixed_cdf(q, params, x))
}

fn cdf_grid(xs: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("grid points must be nondecreasing"));
    }
    let mut best = 0.0f64;
    xs.iter()
        .map(|&x| {
            let v = f(x)?.max(best);
            best = v;
            Ok(v)
        })
        .collect()
}

fn inversion_cdf(params: &StableParams, q: f64, x: f64, tail_eps: f64) -> Result<f64> {
    let alpha = params.alpha;
    let s = params.c1 + params.c2;
    let a_fac = alpha_scale(alpha);
    let unit = (a_fac * s).powf(alpha.recip());
    let d = x - params.gamma_shift;
    // one-term power tails, valid once both the stable and Gaussian bulks
    // are far behind
    let guard = 32.0 * (unit + q);
    if d >= guard {
        let tail = params.c2 * d.powf(-alpha);
        if tail < TAIL_SWITCH {
            return Ok(1.0 - tail);
        }
    } else if -d >= guard {
        let tail = params.c1 * (-d).powf(-alpha);
        if tail < TAIL_SWITCH {
            return Ok(tail);
        }
    }
    // truncation point: the integrand modulus is below tail_eps past it
    let l = tail_eps.recip().ln();
    let mut t_max = (l / (a_fac * s)).powf(alpha.recip());
    if q > 0.0 {
        t_max = t_max.min((2.0 * l).sqrt() / q);
    }
    let t_mid = t_max.min(1.0);
    // lower cut: |Im e^w| <= 2|w| bounds the mass discarded near t = 0,
    // where w collects a |t|^e power and a linear term
    let eta = params.eta();
    let (pow_coef, pow_exp) = if alpha == 1.0 {
        // |t log t| <= 0.74 sqrt(t) on (0, 1]
        (s * (FRAC_PI_2 + 0.74 * eta.abs()) + 0.5 * q * q, 0.5)
    } else {
        let tan_fac = (FRAC_PI_2 * alpha).sin() / cos_half_pi(alpha);
        (
            a_fac * s * (1.0 + (eta * tan_fac).abs()) + 0.5 * q * q,
            alpha.min(1.0),
        )
    };
    let t0 = (pow_exp * tail_eps / (4.0 * pow_coef))
        .powf(pow_exp.recip())
        .min(tail_eps / (4.0 * d.abs().max(1e-12)))
        .min(t_mid);
    let integrand = |t: f64| {
        let w = log_cf(params, q, t);
        Complex64::new(w.re, w.im - t * x).exp().im
    };
    let mut integral = 0.0;
    // substituting t = e^v flattens the origin for every alpha
    if t0 < t_mid {
        integral += quad::adaptive(|v: f64| integrand(v.exp()), t0.ln(), t_mid.ln(), 2e-10)?;
    }
    if t_max > t_mid {
        integral += quad::adaptive(|t: f64| integrand(t) / t, t_mid, t_max, 2e-10)?;
    }
    Ok((0.5 - integral / PI).clamp(0.0, 1.0))
}

/// How a truncated-moment value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    /// Closed form.
    Exact,
    /// Adaptive quadrature against the log-radius density.
    Quadrature,
    /// Empirical moments of a sample.
    MonteCarlo,
}

/// Indicator-truncated mean and variance of the log-radius X at cutoff c:
/// mean = E[X 1{|X| < c}], var = E[X^2 1{|X| < c}] - mean^2, and the
/// excluded mass P(|X| >= c).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncatedMoments {
    pub mean: f64,
    pub var: f64,
    pub tail_prob: f64,
    pub method: MomentMethod,
    /// 99% half-width of `mean` for Monte Carlo results, zero otherwise.
    pub half_width: f64,
}

/// Truncated moments of the log-radius under `law` at ambient dimension n.
/// Point masses and the Pareto log-radius have closed forms; laws with a
/// smooth density go through adaptive quadrature.
pub fn truncated_mean_var(law: &RadialLaw, n: u32, cutoff: f64) -> Result<TruncatedMoments> {
    law.validate(n)?;
    check_cutoff(cutoff)?;
    match law {
        RadialLaw::SphericalUnit => Ok(TruncatedMoments {
            mean: 0.0,
            var: 0.0,
            tail_prob: 0.0,
            method: MomentMethod::Exact,
            half_width: 0.0,
        }),
        RadialLaw::ParetoLogRadius { alpha, scale } => Ok(pareto_truncated(*alpha, *scale, cutoff)),
        _ => {
            let profile = law
                .profile(n)?
                .expect("laws without a density are handled above");
            let inside = profile.expectation(|_| 1.0, -cutoff, cutoff)?;
            let first = profile.expectation(|x| x, -cutoff, cutoff)?;
            let second = profile.expectation(|x| x * x, -cutoff, cutoff)?;
            Ok(TruncatedMoments {
                mean: first,
                var: (second - first * first).max(0.0),
                tail_prob: (1.0 - inside).clamp(0.0, 1.0),
                method: MomentMethod::Quadrature,
                half_width: 0.0,
            })
        }
    }
}

/// Empirical counterpart of `truncated_mean_var` from log-radius samples.
pub fn truncated_moments_from_samples(samples: &[f64], cutoff: f64) -> Result<TruncatedMoments> {
    check_cutoff(cutoff)?;
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let count = samples.len() as f64;
    let keep = |x: &&f64| x.abs() < cutoff;
    let mean = kahan_sum(samples.iter().filter(keep).map(|&x| x)) / count;
    let second = kahan_sum(samples.iter().filter(keep).map(|&x| x * x)) / count;
    let outside = samples.len() - samples.iter().filter(keep).count();
    let var = (second - mean * mean).max(0.0);
    Ok(TruncatedMoments {
        mean,
        var,
        tail_prob: outside as f64 / count,
        method: MomentMethod::MonteCarlo,
        // z quantile at 99.5%
        half_width: 2.575_829_303_548_901 * (var / count).sqrt(),
    })
}

/// expm1(a l) / a, continuous through a = 0.
fn em1_ratio(a: f64, l: f64) -> f64 {
    if a.abs() < 1e-12 {
        l * (1.0 + 0.5 * a * l)
    } else {
        libm::expm1(a * l) / a
    }
}

fn pareto_truncated(alpha: f64, scale: f64, cutoff: f64) -> TruncatedMoments {
    if cutoff <= scale {
        // the window misses the support entirely
        return TruncatedMoments {
            mean: 0.0,
            var: 0.0,
            tail_prob: 1.0,
            method: MomentMethod::Exact,
            half_width: 0.0,
        };
    }
    let l = (cutoff / scale).ln();
    let first = alpha * scale * em1_ratio(1.0 - alpha, l);
    let second = alpha * scale * scale * em1_ratio(2.0 - alpha, l);
    TruncatedMoments {
        mean: first,
        var: (second - first * first).max(0.0),
        tail_prob: (-alpha * l).exp(),
        method: MomentMethod::Exact,
        half_width: 0.0,
    }
}

/// Window moments of one centered log-beta factor.
struct WindowMoments {
    /// P(|X| < w).
    inside: f64,
    /// E[X 1{|X| < w}].
    first: f64,
    /// E[X^2 1{|X| < w}].
    second: f64,
    /// P(|X| >= w).
    tail: f64,
}

const BETA_TOL: f64 = 1e-13;

/// Moments of X = log beta(zeta, eta) - m over the window {|X| < w}.
/// Integrates in the angle variable u = sin^2(theta), where both endpoint
/// factors stay bounded for shapes >= 1/2; narrow interior beta peaks are
/// bracketed with seeded cut points.
fn log_beta_window_moments(zeta: f64, eta: f64, m: f64, w: f64) -> Result<WindowMoments> {
    let ln_b = log_gamma_real(zeta)? + log_gamma_real(eta)? - log_gamma_real(zeta + eta)?;
    let a = 2.0 * zeta - 1.0;
    let b = 2.0 * eta - 1.0;
    let density = move |theta: f64| -> f64 {
        let (sin_t, cos_t) = theta.sin_cos();
        let mut e = LN_2 - ln_b;
        if a > 0.0 {
            if sin_t <= 0.0 {
                return 0.0;
            }
            e += a * sin_t.ln();
        }
        if b > 0.0 {
            if cos_t <= 0.0 {
                return 0.0;
            }
            e += b * cos_t.ln();
        }
        e.exp()
    };
    let first_f = |theta: f64| {
        let d = density(theta);
        if d == 0.0 {
            0.0
        } else {
            (2.0 * theta.sin().ln() - m) * d
        }
    };
    let second_f = |theta: f64| {
        let d = density(theta);
        if d == 0.0 {
            0.0
        } else {
            let x = 2.0 * theta.sin().ln() - m;
            x * x * d
        }
    };
    let theta_lo = (0.5 * (m - w)).exp().asin();
    let theta_hi = (0.5 * (m + w)).exp().min(1.0).asin();
    let total = zeta + eta;
    let mut cuts = Vec::new();
    if zeta > 1.0 && eta > 1.0 {
        let u_mode = (zeta - 1.0) / (total - 2.0);
        let u_sd = (zeta * eta / (total * total * (total + 1.0))).sqrt();
        let theta_mode = u_mode.sqrt().asin();
        let theta_sd = 0.5 * u_sd / (u_mode * (1.0 - u_mode)).sqrt();
        for k in [-8.0, -2.0, 0.0, 2.0, 8.0] {
            cuts.push(theta_mode + k * theta_sd);
        }
    }
    let inside = piecewise(&density, theta_lo, theta_hi, &cuts)?;
    let first = piecewise(&first_f, theta_lo, theta_hi, &cuts)?;
    let second = piecewise(&second_f, theta_lo, theta_hi, &cuts)?;
    let mut tail = piecewise(&density, 0.0, theta_lo, &cuts)?;
    if theta_hi < FRAC_PI_2 {
        tail += piecewise(&density, theta_hi, FRAC_PI_2, &cuts)?;
    }
    Ok(WindowMoments {
        inside,
        first,
        second,
        tail: tail.max(0.0),
    })
}

/// Adaptive integration over [lo, hi] split at interior cut points (sorted
/// ascending; points outside the interval are dropped).
fn piecewise(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, cuts: &[f64]) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mut points = vec![lo];
    for &c in cuts {
        if c > *points.last().unwrap() && c < hi {
            points.push(c);
        }
    }
    points.push(hi);
    let mut value = 0.0;
    for pair in points.windows(2) {
        value += quad::adaptive(f, pair[0], pair[1], BETA_TOL)?;
    }
    Ok(value)
}

/// Per-factor window moments of the centered log-betas, with windows of
/// half-width 2 * cutoff around each m_j = psi((n-j)/2) - psi(n/2).
fn beta_windows(dims: SimplexDims, cutoff: f64) -> Result<Vec<(f64, WindowMoments)>> {
    let n = f64::from(dims.n());
    let psi_half_n = polygamma_real(0, 0.5 * n)?;
    let w = 2.0 * cutoff;
    (1..dims.p())
        .map(|j| {
            let zeta = 0.5 * (n - f64::from(j));
            let eta = 0.5 * f64::from(j);
            let m = polygamma_real(0, zeta)? - psi_half_n;
            Ok((m, log_beta_window_moments(zeta, eta, m, w)?))
        })
        .collect()
}

/// Aggregated truncation effect over the beta factors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaTruncatedTerms {
    /// Sum over j of the truncated variances of the centered log-betas.
    pub sum_var: f64,
    /// Sum over j of the window-exceedance masses.
    pub sum_tail: f64,
}

/// Truncated variances and tail masses of the centered log-beta factors,
/// each taken over the window {|X_j| < 2 * cutoff}.
pub fn beta_truncated_terms(dims: SimplexDims, cutoff: f64) -> Result<BetaTruncatedTerms> {
    check_cutoff(cutoff)?;
    let windows = beta_windows(dims, cutoff)?;
    Ok(BetaTruncatedTerms {
        sum_var: kahan_sum(windows.iter().map(|(_, w)| w.second - w.first * w.first)),
        sum_tail: kahan_sum(windows.iter().map(|(_, w)| w.tail)),
    })
}

/// One epsilon probe of the tail condition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionTwoPoint {
    pub epsilon: f64,
    pub value: f64,
}

/// Evaluation of the two conditions under which the standardized log-volume
/// has a normal limit: the truncated-variance ratio (condition one, should
/// approach 1) and the summed small-jump tail masses at each epsilon
/// (condition two, should approach 0).
#[derive(Debug, Clone, Serialize)]
pub struct NormalConditionReport {
    pub dims: SimplexDims,
    pub sigma_n: f64,
    /// Truncated radial moments at cutoff sigma_n.
    pub radial: TruncatedMoments,
    /// Truncated beta terms at windows 2 sigma_n.
    pub beta: BetaTruncatedTerms,
    pub condition_one: f64,
    pub condition_two: Vec<ConditionTwoPoint>,
}

/// Evaluates the normal-limit conditions at one (dims, sigma_n) pair:
/// condition one is (p Var[X; sigma_n] + (1/4) sum_j Var[X_j; 2 sigma_n])
/// divided by sigma_n^2, condition two at epsilon sums p P(|X| >= eps
/// sigma_n) and the beta window exceedances at 2 eps sigma_n.
pub fn check_normal_conditions(
    law: &RadialLaw,
    dims: SimplexDims,
    sigma_n: f64,
    epsilons: &[f64],
) -> Result<NormalConditionReport> {
    check_sigma(sigma_n)?;
    let p = f64::from(dims.p());
    let radial = truncated_mean_var(law, dims.n(), sigma_n)?;
    let beta = beta_truncated_terms(dims, sigma_n)?;
    let condition_one = (p * radial.var + 0.25 * beta.sum_var) / (sigma_n * sigma_n);
    let mut condition_two = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon {epsilon} must be positive and finite"
            )));
        }
        let radial_eps = truncated_mean_var(law, dims.n(), epsilon * sigma_n)?;
        let beta_eps = beta_truncated_terms(dims, epsilon * sigma_n)?;
        condition_two.push(ConditionTwoPoint {
            epsilon,
            value: p * radial_eps.tail_prob + beta_eps.sum_tail,
        });
    }
    Ok(NormalConditionReport {
        dims,
        sigma_n,
        radial,
        beta,
        condition_one,
        condition_two,
    })
}

/// `check_normal_conditions` along a schedule of (dims, sigma_n) pairs, for
/// watching the conditions trend as the dimensions grow.
pub fn check_normal_conditions_scan(
    law: &RadialLaw,
    schedule: &[(SimplexDims, f64)],
    epsilons: &[f64],
) -> Result<Vec<NormalConditionReport>> {
    schedule
        .iter()
        .map(|&(dims, sigma_n)| check_normal_conditions(law, dims, sigma_n, epsilons))
        .collect()
}

/// Centering and scaling sequences for the standardized log-volume.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CenteringSequences {
    pub sigma_n: f64,
    pub b_n: f64,
    pub a_n: f64,
    pub c_n: f64,
    pub omega_n_sq: f64,
}

/// Centering for the normal regime. With X the log-radius and X_j the
/// centered log-beta factors, truncated at sigma_n and 2 sigma_n:
/// b_n = p E[X 1] - log p! + (1/2) sum_j E[log beta_j 1],
/// a_n = E[X 1] / sigma_n, and c_n adds the x/(1+x^2) jump compensation.
pub fn centering_normal(law: &RadialLaw, dims: SimplexDims, sigma_n: f64) -> Result<CenteringSequences> {
    check_sigma(sigma_n)?;
    let p = f64::from(dims.p());
    let radial = truncated_mean_var(law, dims.n(), sigma_n)?;
    let windows = beta_windows(dims, sigma_n)?;
    let beta_mean = kahan_sum(windows.iter().map(|(m, w)| m * w.inside + w.first));
    let a_n = radial.mean / sigma_n;
    let c_n = a_n + compensated_g_mean(law, dims.n(), sigma_n, a_n)?;
    Ok(CenteringSequences {
        sigma_n,
        b_n: p * radial.mean - log_gamma_real(p + 1.0)? + 0.5 * beta_mean,
        a_n,
        c_n,
        omega_n_sq: omega_sq(dims),
    })
}

/// Centering for the heavy-tailed regime: the beta factors enter through
/// their plain means and the radial part through the compensated sequence,
/// b_n = -log p! + (1/2) sum_j m_j + p sigma_n c_n.
pub fn centering_stable(law: &RadialLaw, dims: SimplexDims, sigma_n: f64) -> Result<CenteringSequences> {
    check_sigma(sigma_n)?;
    law.validate(dims.n())?;
    let p = f64::from(dims.p());
    let radial = truncated_mean_var(law, dims.n(), sigma_n)?;
    let a_n = radial.mean / sigma_n;
    let c_n = a_n + compensated_g_mean(law, dims.n(), sigma_n, a_n)?;
    let spherical = spherical_moments(dims)?;
    Ok(CenteringSequences {
        sigma_n,
        b_n: spherical.mean + p * sigma_n * c_n,
        a_n,
        c_n,
        omega_n_sq: omega_sq(dims),
    })
}

/// E[g(X/sigma_n - a_n)] with g(x) = x/(1+x^2), the tail-safe location of
/// the standardized log-radius.
fn compensated_g_mean(law: &RadialLaw, n: u32, sigma_n: f64, a_n: f64) -> Result<f64> {
    let g = |y: f64| {
        if y.is_finite() {
            y / (1.0 + y * y)
        } else {
            0.0
        }
    };
    match law {
        RadialLaw::SphericalUnit => Ok(g(-a_n)),
        RadialLaw::ParetoLogRadius { alpha, scale } => {
            // X = scale e^V with V ~ Exp(alpha); g is bounded, so cutting the
            // exponential weight at 40/alpha loses under e^-40
            let (alpha, scale) = (*alpha, *scale);
            let v_max = (40.0 / alpha).min(690.0);
            quad::adaptive(
                |v: f64| g(scale * v.exp() / sigma_n - a_n) * alpha * (-alpha * v).exp(),
                0.0,
                v_max,
                1e-12,
            )
        }
        _ => {
            let profile = law
                .profile(n)?
                .expect("laws without a density are handled above");
            profile.expectation(|x| g(x / sigma_n - a_n), f64::NEG_INFINITY, f64::INFINITY)
        }
    }
}

/// Bisection heuristic for a workable sigma_n: solves
/// (p Var[X; sigma] + spherical variance) / sigma^2 = 1 on a log grid. The
/// beta part enters untruncated, so treat the result as a seed to be
/// confirmed with `check_normal_conditions`, not as a definition.
pub fn propose_sigma_n(law: &RadialLaw, dims: SimplexDims) -> Result<f64> {
    let spherical_var = spherical_moments(dims)?.variance;
    let p = f64::from(dims.p());
    let excess = |sigma: f64| -> Result<f64> {
        let radial = truncated_mean_var(law, dims.n(), sigma)?;
        Ok((p * radial.var + spherical_var) / (sigma * sigma) - 1.0)
    };
    let mut lo = 1e-8;
    let mut hi = spherical_var.max(1e-12).sqrt().max(1e-6);
    let mut tries = 0;
    while excess(hi)? > 0.0 {
        hi *= 4.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::invalid(
                "truncated-variance ratio stays above 1 at every scale",
            ));
        }
    }
    while excess(lo)? < 0.0 {
        lo /= 4.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::invalid(
                "truncated-variance ratio stays below 1 at every scale; \
                 the law is too degenerate for a normal-regime sigma_n",
            ));
        }
    }
    for _ in 0..80 {
        let mid = (lo * hi).sqrt();
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff > 0.0 && cutoff.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "truncation cutoff {cutoff} must be positive and finite"
        )))
    }
}

fn check_sigma(sigma_n: f64) -> Result<()> {
    if sigma_n > 0.0 && sigma_n.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "sigma_n {sigma_n} must be positive and finite"
        )))
    }
}
