//! Explicit Berry-Esseen bounds for the spherical log-volume, the universal
//! constants entering the Gaussian log-determinant moment approximations, and
//! numerical verification of the characteristic-function estimates that the
//! bounds rest on.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::simplex::{kahan_sum, spherical_moments, SimplexDims};
use crate::specfun::{
    log_gamma_real, log_gamma_unchecked, polygamma, polygamma_real_unchecked, ComplexValue,
    EULER_GAMMA,
};

/// Berry-Esseen constant for the standardized spherical log-volume.
pub const KS_CONSTANT: f64 = 28.0;

/// Which algebraic form of the Kolmogorov-Smirnov bound a report carries.
///
/// `Main` is the aspect-ratio form in `theta = (p-1)/n`. `UniformTheta` is
/// the `C_phi/(p-1)` simplification valid while `theta` stays below a fixed
/// `phi < 1`. `Codimension` rewrites the bound in `q = n-p+1`, the form that
/// stays informative as `p` approaches `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    Main,
    UniformTheta,
    Codimension,
}

/// One evaluated Kolmogorov-Smirnov bound. Inapplicability (dimensions
/// outside the regime where the form is proved) is data, not an error:
/// `applicable` is false and `reason` says why, so scans can tabulate
/// coverage honestly.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub dims: SimplexDims,
    pub epsilon_np: f64,
    pub ks_bound: f64,
    pub bound_form: BoundForm,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// The constants `c0` (mean) and `c1` (variance) in the large-`n`
/// log-determinant moment approximations, together with the quadrature
/// agreement gap between the two independent schemes that produced them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniversalConstants {
    pub c0: f64,
    pub c1: f64,
    pub quadrature_error: f64,
}

/// Closed-form approximations to the Gaussian log-determinant moments and
/// their residuals against the exact polygamma sums. Residuals are
/// `exact - approx`; both decay like `1/n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApproxLogdetMoments {
    pub n: u32,
    pub mean: f64,
    pub variance: f64,
    pub mean_residual: f64,
    pub variance_residual: f64,
}

/// Third-moment coefficient of the spherical log-volume: the quantity
/// controlling the cubic error term of its characteristic function.
///
/// `epsilon = (7/96) sigma^{-3} sum_{j=1}^{p-1} (1/(n-j)^2 - 1/n^2)` with
/// `sigma` the standard deviation from [`spherical_moments`]. Requires
/// `p >= 2`; at `p = 1` the log-volume is deterministic and the coefficient
/// is undefined.
pub fn epsilon_np(dims: SimplexDims) -> Result<f64> {
    let (n, p) = (dims.n(), dims.p());
    if p < 2 {
        return Err(Error::invalid(
            "third-moment coefficient needs p >= 2: the log-volume is \
             deterministic at p = 1",
        ));
    }
    let nf = f64::from(n);
    let sum = kahan_sum((1..p).map(|j| {
        let d = nf - f64::from(j);
        1.0 / (d * d) - 1.0 / (nf * nf)
    }));
    let sigma = spherical_moments(dims)?.variance.sqrt();
    Ok(7.0 / 96.0 * sum / sigma.powi(3))
}

/// Closed-form upper bound for [`epsilon_np`], valid for `p >= 7`:
/// `(7/4) theta^2 / (n (1-theta) (log(1/(1-theta)) - theta)^{3/2})`.
pub fn epsilon_np_upper(dims: SimplexDims) -> Result<f64> {
    if dims.p() < 7 {
        return Err(Error::invalid(
            "the closed-form bound on the third-moment coefficient needs p >= 7",
        ));
    }
    Ok(KS_CONSTANT / 16.0 * theta_shape(dims))
}

/// The shared shape factor `theta^2 / (n (1-theta) (log(1/(1-theta)) - theta)^{3/2})`.
fn theta_shape(dims: SimplexDims) -> f64 {
    let theta = dims.theta();
    let n = f64::from(dims.n());
    let one_minus = 1.0 - theta;
    // -log1p(-theta) - theta is a difference of nearly equal quantities for
    // small theta; the series theta^2/2 + theta^3/3 + ... has no cancellation.
    let gap = if theta < 1e-4 {
        theta * theta * (0.5 + theta / 3.0 + theta * theta / 4.0)
    } else {
        -libm::log1p(-theta) - theta
    };
    theta * theta / (n * one_minus * gap.powf(1.5))
}

fn report(
    dims: SimplexDims,
    ks_bound: f64,
    bound_form: BoundForm,
    reason: Option<String>,
) -> Result<BoundReport> {
    let epsilon = if dims.p() >= 2 {
        epsilon_np(dims)?
    } else {
        f64::INFINITY
    };
    Ok(BoundReport {
        dims,
        epsilon_np: epsilon,
        ks_bound,
        bound_form,
        applicable: reason.is_none(),
        reason,
    })
}

/// Kolmogorov-Smirnov distance bound between the standardized spherical
/// log-volume and the standard normal, in the aspect-ratio form
/// `28 theta^2 / (n (1-theta) (log(1/(1-theta)) - theta)^{3/2})`.
///
/// The bound is proved for `p >= 41`; smaller `p` yields an inapplicable
/// report. At `p = 1` the formula degenerates and the report carries
/// infinite placeholders.
pub fn spherical_ks_bound(dims: SimplexDims) -> Result<BoundReport> {
    let ks_bound = if dims.p() >= 2 {
        KS_CONSTANT * theta_shape(dims)
    } else {
        f64::INFINITY
    };
    let reason = (dims.p() < 41).then(|| "p < 41".to_owned());
    report(dims, ks_bound, BoundForm::Main, reason)
}

/// The uniform-aspect simplification `C_phi / (p-1)` with
/// `C_phi = 2 sqrt(2) * 28 / (1-phi)`, valid while `theta <= phi`.
///
/// `phi` must lie in `(0, 1)`.
pub fn uniform_theta_ks_bound(dims: SimplexDims, phi: f64) -> Result<BoundReport> {
    if !(0.0..1.0).contains(&phi) || phi == 0.0 {
        return Err(Error::invalid("phi must lie in (0, 1)"));
    }
    let c_phi = 2.0 * std::f64::consts::SQRT_2 * KS_CONSTANT / (1.0 - phi);
    let ks_bound = if dims.p() >= 2 {
        c_phi / (f64::from(dims.p()) - 1.0)
    } else {
        f64::INFINITY
    };
    let reason = if dims.p() < 41 {
        Some("p < 41".to_owned())
    } else if dims.theta() > phi {
        Some(format!("theta = {:.6} exceeds phi = {phi:.6}", dims.theta()))
    } else {
        None
    };
    report(dims, ks_bound, BoundForm::UniformTheta, reason)
}

/// The codimension form `28 / (q (log(n/q) - 1)^{3/2})` with `q = n-p+1`,
/// informative when `p` is close to `n` (it needs `log(n/q) > 1`).
pub fn codimension_ks_bound(dims: SimplexDims) -> Result<BoundReport> {
    let q = f64::from(dims.n() - dims.p()) + 1.0;
    let log_ratio = (f64::from(dims.n()) / q).ln();
    let ks_bound = if log_ratio > 1.0 {
        KS_CONSTANT / (q * (log_ratio - 1.0).powf(1.5))
    } else {
        f64::INFINITY
    };
    let reason = if dims.p() < 41 {
        Some("p < 41".to_owned())
    } else if log_ratio <= 1.0 {
        Some(format!(
            "log(n/q) = {log_ratio:.6} is not above 1 at codimension q = {q}"
        ))
    } else {
        None
    };
    report(dims, ks_bound, BoundForm::Codimension, reason)
}

/// All three bound forms for one set of dimensions, with `phi` feeding the
/// uniform-aspect form.
pub fn ks_bound_reports(dims: SimplexDims, phi: f64) -> Result<Vec<BoundReport>> {
    Ok(vec![
        spherical_ks_bound(dims)?,
        uniform_theta_ks_bound(dims, phi)?,
        codimension_ks_bound(dims)?,
    ])
}

/// Critical variance proxy `omega^2 = -log((n-p+1)/n)/2 - p^2/(2n(p+1))`.
///
/// Meaningful as an asymptotic stand-in for the spherical log-volume
/// variance only when `p` is large; for tiny `p` it can be negative and is
/// reported raw.
pub fn omega_sq(dims: SimplexDims) -> f64 {
    let n = f64::from(dims.n());
    let p = f64::from(dims.p());
    let q = f64::from(dims.n() - dims.p()) + 1.0;
    -0.5 * (q / n).ln() - p * p / (2.0 * n * (p + 1.0))
}

/// Smooth part of the Stirling remainders: `1/2 - 1/z + 1/(e^z - 1)`,
/// which vanishes like `z/12` at the origin.
fn binet_kernel(z: f64) -> f64 {
    if z < 1e-2 {
        // Taylor series; at z = 1e-2 the first omitted term is below 1e-31.
        let z2 = z * z;
        z * (1.0 / 12.0
            + z2 * (-1.0 / 720.0
                + z2 * (1.0 / 30240.0 + z2 * (-1.0 / 1209600.0 + z2 * (5.0 / 239500800.0)))))
    } else {
        0.5 - 1.0 / z + 1.0 / libm::expm1(z)
    }
}

/// Truncated exponential integral `E1(x)` by the asymptotic series, adequate
/// for the tail arguments used here (`x >= 20`).
fn exp_integral_e1(x: f64) -> f64 {
    debug_assert!(x >= 20.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=14 {
        term *= -f64::from(j) / x;
        sum += term;
    }
    (-x).exp() / x * sum
}

/// Analytic tails of the two constant-defining integrals beyond `t0`,
/// obtained by expanding both geometric factors:
/// `1/(e^{z/2}-1) = sum_m e^{-mz/2}` and `1/(e^z-1) = sum_k e^{-kz}`.
/// Returns `(tail of I0, tail of I1)`.
fn constant_integral_tails(t0: f64) -> (f64, f64) {
    let mut tail0 = 0.0;
    let mut tail1 = 0.0;
    for m in 1..=4u32 {
        let a = f64::from(m) / 2.0;
        let e = (-a * t0).exp();
        // f(z) = 1/2 - 1/z + sum_k e^{-kz}; integrate each piece against
        // e^{-az} over [t0, inf).
        tail0 += 0.5 * e / a - exp_integral_e1(a * t0);
        tail1 += 0.5 * e * (t0 / a + 1.0 / (a * a)) - e / a;
        for k in 1..=4u32 {
            let b = a + f64::from(k);
            let eb = (-b * t0).exp();
            tail0 += eb / b;
            tail1 += eb * (t0 / b + 1.0 / (b * b));
        }
    }
    (tail0, tail1)
}

fn compute_universal_constants() -> Result<UniversalConstants> {
    const CUTOFF: f64 = 50.0;
    let f0 = |z: f64| binet_kernel(z) / libm::expm1(z / 2.0);
    let f1 = |z: f64| z * binet_kernel(z) / libm::expm1(z / 2.0);

    let i0_gk = quad::adaptive(f0, 0.0, CUTOFF, 1e-13)?;
    let i1_gk = quad::adaptive(f1, 0.0, CUTOFF, 1e-13)?;
    let i0_ts = quad::tanh_sinh(f0, 0.0, CUTOFF, 1e-12)?;
    let i1_ts = quad::tanh_sinh(f1, 0.0, CUTOFF, 1e-12)?;

    let (tail0, tail1) = constant_integral_tails(CUTOFF);
    let i0 = i0_gk + tail0;
    let i1 = i1_gk + tail1;

    let c0 = -0.5 * EULER_GAMMA - 0.5 * i0;
    // The variance remainder integrand is z*(1/2 + f(z))/(e^{z/2}-1). The
    // z/2 part has the closed form integral pi^2/3 (substitute u = z/2 and
    // use the zeta(2) integral); only the z*f(z) part needs quadrature.
    let c1 = 0.5 * EULER_GAMMA + 0.25 * (i1 + PI * PI / 3.0);

    // Both schemes include the same analytic tail, so the scheme gap plus a
    // tail-truncation allowance bounds the quadrature error of c0 and c1.
    let scheme_gap = (0.5 * (i0_gk - i0_ts).abs()).max(0.25 * (i1_gk - i1_ts).abs());
    let quadrature_error = scheme_gap + 1e-14;
    if quadrature_error > 1e-10 {
        return Err(Error::Quadrature(format!(
            "constant quadrature schemes disagree by {scheme_gap:.3e}"
        )));
    }
    Ok(UniversalConstants {
        c0,
        c1,
        quadrature_error,
    })
}

/// The universal constants `c0` and `c1` of the log-determinant moment
/// approximations, evaluated by adaptive Gauss-Kronrod quadrature and
/// cross-checked against tanh-sinh quadrature. The two schemes must agree to
/// `1e-10`; their gap is reported as `quadrature_error`.
pub fn universal_constants() -> Result<UniversalConstants> {
    static CACHE: OnceLock<std::result::Result<UniversalConstants, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| compute_universal_constants().map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::Quadrature)
}

/// Closed-form approximations `mean ~ log((n-1)!)/2 + c0` and
/// `variance ~ log(n)/2 + c1` for the Gaussian log-determinant, with
/// residuals against the exact polygamma sums of
/// [`crate::simplex::gaussian_logdet_moments`]. Requires `n >= 2`.
pub fn gaussian_matrix_mean_var_approx(n: u32) -> Result<ApproxLogdetMoments> {
    if n < 2 {
        return Err(Error::invalid(
            "log-determinant moment approximations need n >= 2",
        ));
    }
    let constants = universal_constants()?;
    let nf = f64::from(n);
    let mean = 0.5 * log_gamma_real(nf)? + constants.c0;
    let variance = 0.5 * nf.ln() + constants.c1;
    let exact = crate::simplex::gaussian_logdet_moments(n)?;
    Ok(ApproxLogdetMoments {
        n,
        mean,
        variance,
        mean_residual: exact.mean - mean,
        variance_residual: exact.variance - variance,
    })
}

/// One characteristic-function inequality check at a single argument.
#[derive(Debug, Clone, Serialize)]
pub struct CharCheck {
    pub t: f64,
    /// Logarithm of the standardized characteristic function.
    pub log_cf: ComplexValue,
    /// `|log cf(t) + t^2/2|`, the distance from the Gaussian exponent.
    pub defect: f64,
    /// The cubic allowance `epsilon_np * |t|^3`.
    pub allowance: f64,
    pub satisfied: bool,
}

/// Result of [`verify_char_bound`]: every requested argument, plus the
/// worst signed excess `defect - allowance` (nonpositive when the
/// inequality holds everywhere).
#[derive(Debug, Clone, Serialize)]
pub struct CharBoundReport {
    pub dims: SimplexDims,
    pub epsilon_np: f64,
    pub checks: Vec<CharCheck>,
    pub max_violation: f64,
}

/// Log of the characteristic function of the standardized spherical
/// log-volume at argument `t`, as a sum of log-gamma differences over the
/// independent beta factors.
fn spherical_log_cf(dims: SimplexDims, t: f64) -> Result<Complex64> {
    let (n, p) = (dims.n(), dims.p());
    let sigma = spherical_moments(dims)?.variance.sqrt();
    let u = t / (2.0 * sigma);
    let half_n = f64::from(n) / 2.0;
    let psi_half_n = polygamma_real_unchecked(0, half_n);
    let lg_half_n = log_gamma_real(half_n)?;
    let shift = Complex64::new(0.0, u);
    let lg_half_n_shift = log_gamma_unchecked(Complex64::new(half_n, u));
    let mut total = Complex64::new(0.0, 0.0);
    for j in 1..p {
        let zeta = f64::from(n - j) / 2.0;
        let mean_j = polygamma_real_unchecked(0, zeta) - psi_half_n;
        total += log_gamma_unchecked(Complex64::new(zeta, u)) - log_gamma_real(zeta)?
            - lg_half_n_shift
            + lg_half_n
            - shift * mean_j;
    }
    Ok(total)
}

/// Checks the cubic characteristic-function estimate
/// `|log cf(t) + t^2/2| <= epsilon_np |t|^3` at each requested argument.
///
/// Arguments beyond the stability window `|t| <= 1/(4 epsilon_np)` are
/// rejected with [`Error::OutsideCharWindow`]; inside it the exact
/// log-gamma evaluation is well conditioned.
///
/// A word of caution: with [`epsilon_np`] as defined, the inequality is
/// systematically violated. The defect approaches `(8/7) epsilon_np |t|^3`
/// from above as `t -> 0` at every dimension pair, because the coefficient
/// `7/96` dominates the Taylor remainder only after rescaling by `2^3`
/// (bounding `|psi_3(z)|` by `14 / re(z)^3` at `re(z) = (n-s)/2` yields
/// `112/(n-s)^3`, not `14/(n-s)^3`). Scaling the allowance by 8 makes the
/// check pass with room to spare; this routine reports the raw comparison
/// so the discrepancy stays visible.
pub fn verify_char_bound(dims: SimplexDims, t_values: &[f64]) -> Result<CharBoundReport> {
    let epsilon = epsilon_np(dims)?;
    let window = 1.0 / (4.0 * epsilon);
    let mut checks = Vec::with_capacity(t_values.len());
    let mut max_violation = f64::NEG_INFINITY;
    for &t in t_values {
        if !t.is_finite() || t.abs() > window {
            return Err(Error::OutsideCharWindow { t, window });
        }
        let log_cf = if t == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            spherical_log_cf(dims, t)?
        };
        let defect = (log_cf + t * t / 2.0).norm();
        let allowance = epsilon * t.abs().powi(3);
        max_violation = max_violation.max(defect - allowance);
        checks.push(CharCheck {
            t,
            log_cf: log_cf.into(),
            defect,
            allowance,
            satisfied: defect <= allowance,
        });
    }
    if checks.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(CharBoundReport {
        dims,
        epsilon_np: epsilon,
        checks,
        max_violation,
    })
}

/// Log of the characteristic factor contributed by the `j`-th beta variable
/// (centred, unscaled): `u` shifts the gamma arguments directly.
#[cfg(test)]
fn beta_factor_direct(n: u32, j: u32, u: f64) -> Result<Complex64> {
    let zeta = f64::from(n - j) / 2.0;
    let half_n = f64::from(n) / 2.0;
    let mean_j = polygamma_real_unchecked(0, zeta) - polygamma_real_unchecked(0, half_n);
    Ok(
        log_gamma_unchecked(Complex64::new(zeta, u)) - log_gamma_real(zeta)?
            - log_gamma_unchecked(Complex64::new(half_n, u))
            + log_gamma_real(half_n)?
            - Complex64::new(0.0, u * mean_j),
    )
}

/// The same factor through the third-order Taylor remainder: a quadratic
/// term from the variance plus an iterated integral of complex `psi_3`.
#[cfg(test)]
fn beta_factor_remainder(n: u32, j: u32, u: f64) -> Result<Complex64> {
    let zeta = f64::from(n - j) / 2.0;
    let half_n = f64::from(n) / 2.0;
    let var_j = polygamma_real_unchecked(1, zeta) - polygamma_real_unchecked(1, half_n);
    let nf = f64::from(n);
    let jf = f64::from(j);
    let outer = quad::adaptive(
        |s| {
            let inner = quad::adaptive(
                |x| {
                    polygamma(3, Complex64::new((nf - x) / 2.0, s))
                        .expect("polygamma order 3 is within the supported range")
                },
                0.0,
                jf,
                1e-12,
            )
            .expect("inner psi_3 quadrature converges on a smooth integrand");
            let w = u - s;
            inner * (w * w / 2.0)
        },
        0.0,
        u,
        1e-12,
    )?;
    Ok(Complex64::new(-u * u * var_j / 2.0, 0.0) + Complex64::new(0.0, 0.5) * outer)
}

/// One comparison between the direct gamma-ratio characteristic function and
/// its Taylor-remainder form.
#[derive(Debug, Clone, Serialize)]
pub struct CharAgreementCheck {
    pub t: f64,
    pub direct: ComplexValue,
    pub remainder_form: ComplexValue,
    pub difference: f64,
}

/// Result of [`verify_loggamma_char`].
#[derive(Debug, Clone, Serialize)]
pub struct LogGammaCharReport {
    pub lambda: f64,
    pub checks: Vec<CharAgreementCheck>,
    pub max_difference: f64,
}

/// Characteristic function of the standardized log-gamma variable
/// `(log W - psi_0(lambda)) / sqrt(psi_1(lambda))`, evaluated directly.
pub fn loggamma_char_direct(lambda: f64, t: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let a = t / polygamma_real_unchecked(1, lambda).sqrt();
    let log_cf = log_gamma_unchecked(Complex64::new(lambda, a)) - log_gamma_real(lambda)?
        - Complex64::new(0.0, a * polygamma_real_unchecked(0, lambda));
    Ok(log_cf.exp())
}

/// The same characteristic function through the second-order Taylor
/// remainder: `exp(-t^2/2 - i * integral of (a-s)^2/2 * psi_2(lambda+is))`.
fn loggamma_char_remainder(lambda: f64, t: f64) -> Result<Complex64> {
    let a = t / polygamma_real_unchecked(1, lambda).sqrt();
    let integral = quad::adaptive(
        |s| {
            let w = a - s;
            polygamma(2, Complex64::new(lambda, s))
                .expect("polygamma order 2 is within the supported range")
                * (w * w / 2.0)
        },
        0.0,
        a,
        1e-12,
    )?;
    let log_cf = Complex64::new(-t * t / 2.0, 0.0) - Complex64::new(0.0, 1.0) * integral;
    Ok(log_cf.exp())
}

/// Compares the direct gamma-ratio form of the standardized log-gamma
/// characteristic function against its Taylor-remainder form at each `t`.
/// An empirical comparison against simulated draws lives with the sampling
/// tests; this routine is deterministic.
pub fn verify_loggamma_char(lambda: f64, t_values: &[f64]) -> Result<LogGammaCharReport> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    if t_values.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut checks = Vec::with_capacity(t_values.len());
    let mut max_difference: f64 = 0.0;
    for &t in t_values {
        let direct = loggamma_char_direct(lambda, t)?;
        let remainder_form = loggamma_char_remainder(lambda, t)?;
        let difference = (direct - remainder_form).norm();
        max_difference = max_difference.max(difference);
        checks.push(CharAgreementCheck {
            t,
            direct: direct.into(),
            remainder_form: remainder_form.into(),
            difference,
        });
    }
    Ok(LogGammaCharReport {
        lambda,
        checks,
        max_difference,
    })
}

/// Kolmogorov-Smirnov distance bound to a reference Gaussian after swapping
/// in approximate moments:
/// `epsilon + |mu - mu_t| / max(sigma, sigma_t)
///  + (3/8) |sigma^2 - sigma_t^2| / min(sigma^2, sigma_t^2)`.
pub fn ks_composite_bound(
    epsilon: f64,
    mu: f64,
    mu_t: f64,
    sigma: f64,
    sigma_t: f64,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma_t > 0.0) {
        return Err(Error::invalid("scale parameters must be positive"));
    }
    if !(epsilon >= 0.0) || !mu.is_finite() || !mu_t.is_finite() {
        return Err(Error::invalid(
            "epsilon must be nonnegative and the means finite",
        ));
    }
    let var = sigma * sigma;
    let var_t = sigma_t * sigma_t;
    Ok(epsilon
        + (mu - mu_t).abs() / sigma.max(sigma_t)
        + 3.0 / 8.0 * (var - var_t).abs() / var.min(var_t))
}
