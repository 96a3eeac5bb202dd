//! Radial laws for rotationally invariant vectors, their log-radius
//! densities, admissibility diagnostics, and samplers.
//!
//! A law contributes the factor sum_j log R_j to the log-volume. Presets with
//! exact gamma representations are sampled directly; custom admissible pairs
//! (g, h) go through an envelope rejection sampler on the log-radius density
//! g(x) exp(-n h(x)).

use crate::error::{Error, Result};
use crate::quad;
use crate::sampling::sample_log_gamma;
use crate::stats::normal_cdf;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A (g, h) pair describing a log-radius density g(x) e^{-n h(x)}, together
/// with the constants of its admissibility certificate: the mode `x0`, the
/// neighbourhood half-width `delta`, and the tail constants (alpha, c, C).
#[derive(Clone)]
pub struct AdmissiblePair {
    pub g: RealFn,
    pub h: RealFn,
    pub x0: f64,
    pub delta: f64,
    pub alpha: f64,
    pub c: f64,
    pub c_bound: f64,
}

impl AdmissiblePair {
    pub fn new(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x0: f64,
        delta: f64,
        alpha: f64,
        c: f64,
        c_bound: f64,
    ) -> Self {
        AdmissiblePair {
            g: Arc::new(g),
            h: Arc::new(h),
            x0,
            delta,
            alpha,
            c,
            c_bound,
        }
    }
}

impl fmt::Debug for AdmissiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdmissiblePair")
            .field("x0", &self.x0)
            .field("delta", &self.delta)
            .field("alpha", &self.alpha)
            .field("c", &self.c)
            .field("c_bound", &self.c_bound)
            .finish_non_exhaustive()
    }
}

/// Distribution of the radius of one column vector.
#[derive(Debug, Clone)]
pub enum RadialLaw {
    /// Unit radius: the vector is uniform on the sphere.
    SphericalUnit,
    /// Standard Gaussian vector divided by sqrt(n); radius is sqrt(chi2_n/n).
    ScaledGaussian,
    /// Beta-prime vector with density proportional to (1+|y|^2)^{-n(1+phi)/2}.
    BetaPrime { phi: f64 },
    /// Radius whose logarithm is Pareto distributed with tail index `alpha`
    /// and minimum `scale`: P(log R > x) = (scale/x)^alpha for x >= scale.
    /// The log-radius is positive and heavy-tailed, the regime with stable
    /// rather than Gaussian log-volume fluctuations.
    ParetoLogRadius { alpha: f64, scale: f64 },
    /// User-supplied admissible (g, h) pair in log-radius coordinates.
    CustomAdmissible(AdmissiblePair),
}

impl RadialLaw {
    /// Checks the parameters, and for custom laws runs the full admissibility
    /// diagnostic at dimension n.
    pub fn validate(&self, n: u32) -> Result<()> {
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        match self {
            RadialLaw::SphericalUnit | RadialLaw::ScaledGaussian => Ok(()),
            RadialLaw::BetaPrime { phi } => {
                if *phi > 0.0 && phi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("beta-prime phi {phi} must be positive")))
                }
            }
            RadialLaw::ParetoLogRadius { alpha, scale } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::invalid(format!("pareto index {alpha} must be positive")));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::invalid(format!("pareto scale {scale} must be positive")));
                }
                Ok(())
            }
            RadialLaw::CustomAdmissible(pair) => check_admissible(pair, n),
        }
    }

    /// The smooth (g, h) description when one exists. SphericalUnit is a
    /// point mass and the Pareto radius has a density jump at its lower
    /// endpoint, so neither fits the admissible framework.
    pub(crate) fn profile(&self, n: u32) -> Result<Option<RadialProfile>> {
        match self {
            RadialLaw::SphericalUnit | RadialLaw::ParetoLogRadius { .. } => Ok(None),
            RadialLaw::ScaledGaussian => {
                let pair = AdmissiblePair::new(
                    |_| 1.0,
                    |x: f64| 0.5 * (2.0 * x).exp() - x,
                    0.0,
                    0.5,
                    1.0,
                    0.5,
                    2.0,
                );
                RadialProfile::build(&pair, n).map(Some)
            }
            RadialLaw::BetaPrime { phi } => {
                let phi = *phi;
                if !(phi > 0.0 && phi.is_finite()) {
                    return Err(Error::invalid(format!("beta-prime phi {phi} must be positive")));
                }
                let pair = AdmissiblePair::new(
                    |_| 1.0,
                    move |x: f64| 0.5 * (1.0 + phi) * libm::log1p((2.0 * x).exp()) - x,
                    -0.5 * phi.ln(),
                    0.5,
                    1.0,
                    0.5 * phi.min(1.0),
                    2.0,
                );
                RadialProfile::build(&pair, n).map(Some)
            }
            RadialLaw::CustomAdmissible(pair) => RadialProfile::build(pair, n).map(Some),
        }
    }
}

const GRID_POINTS: usize = 10_000;

/// Diagnostic admissibility check on a grid around the mode plus tail probes.
pub fn check_admissible(pair: &AdmissiblePair, n: u32) -> Result<()> {
    if !(pair.delta > 0.0 && pair.delta.is_finite()) {
        return Err(Error::NotAdmissible(format!("delta {} must be positive", pair.delta)));
    }
    if pair.alpha <= 0.0 || pair.c <= 0.0 || pair.c_bound <= 0.0 {
        return Err(Error::NotAdmissible(
            "tail constants alpha, c, C must be positive".into(),
        ));
    }
    let (g, h) = (&pair.g, &pair.h);
    let (x0, delta) = (pair.x0, pair.delta);
    let g0 = g(x0);
    if !(g0 > 0.0 && g0.is_finite()) {
        return Err(Error::NotAdmissible(format!("g(x0) = {g0} must be positive")));
    }
    let h2 = second_derivative(h, x0, delta);
    if !(h2 > 0.0 && h2.is_finite()) {
        return Err(Error::NotAdmissible(format!(
            "h''(x0) = {h2} must be positive for a quadratic local model"
        )));
    }

    // Unimodality of g e^{-n h} over the diagnostic window, with x0 as a
    // minimum of h.
    let lo = x0 - 10.0 * delta;
    let step = 20.0 * delta / (GRID_POINTS - 1) as f64;
    let nf = f64::from(n);
    let h0 = h(x0);
    let log_density = |x: f64| {
        let gv = g(x);
        if gv <= 0.0 {
            f64::NEG_INFINITY
        } else {
            gv.ln() - nf * h(x)
        }
    };
    let values: Vec<f64> = (0..GRID_POINTS).map(|i| log_density(lo + step * i as f64)).collect();
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let peak_x = lo + step * peak as f64;
    if (peak_x - x0).abs() > 2.0 * step {
        return Err(Error::NotAdmissible(format!(
            "density maximum sits at {peak_x}, away from the declared mode {x0}"
        )));
    }
    let slack = 1e-9;
    for i in 0..GRID_POINTS - 1 {
        let (a, b) = (values[i], values[i + 1]);
        let tol = slack * (1.0 + a.abs().min(b.abs()));
        let violated = if i < peak { a > b + tol } else { b > a + tol };
        if violated && (a.is_finite() || b.is_finite()) {
            return Err(Error::NotAdmissible(format!(
                "density is not unimodal near x = {}",
                lo + step * i as f64
            )));
        }
    }

    for i in 0..GRID_POINTS {
        let x = lo + step * i as f64;
        let u = x - x0;
        if u.abs() <= delta {
            // Local quadratic control: h(x) = h(x0) + h''(x0)(u^2/2 + r),
            // g(x) = g(x0)(1 + q).
            let r = (h(x) - h0) / h2 - 0.5 * u * u;
            let r_cap = u.abs().powi(3) / (4.0 * delta);
            if r.abs() > r_cap * (1.0 + 1e-6) + 1e-10 {
                return Err(Error::NotAdmissible(format!(
                    "remainder |r({x})| = {} exceeds |x-x0|^3/(4 delta) = {r_cap}",
                    r.abs()
                )));
            }
            let q = g(x) / g0 - 1.0;
            let q_cap = u.abs() / (4.0 * delta);
            if q.abs() > q_cap * (1.0 + 1e-6) + 1e-10 {
                return Err(Error::NotAdmissible(format!(
                    "perturbation |q({x})| = {} exceeds |x-x0|/(4 delta) = {q_cap}",
                    q.abs()
                )));
            }
            if h(x) < h0 - 1e-12 * (1.0 + h0.abs()) {
                return Err(Error::NotAdmissible(format!("h({x}) dips below h(x0)")));
            }
        }
    }

    // Tail control on grid points outside the neighbourhood plus far probes.
    let mut tail_points: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo + step * i as f64)
        .filter(|x| (x - x0).abs() > delta)
        .collect();
    for &m in &[12.0, 20.0, 50.0, 100.0, 1e3, 1e4] {
        tail_points.push(x0 - m * delta);
        tail_points.push(x0 + m * delta);
    }
    for x in tail_points {
        let u = (x - x0).abs();
        let floor = pair.c * libm::log1p(u);
        if h(x) < floor - 1e-12 * (1.0 + floor) {
            return Err(Error::NotAdmissible(format!(
                "tail bound fails: h({x}) = {} below c log(1+|x-x0|) = {floor}",
                h(x)
            )));
        }
        let cap = pair.c_bound * (1.0 + u.powf(pair.alpha));
        if g(x) > cap * (1.0 + 1e-12) {
            return Err(Error::NotAdmissible(format!(
                "tail bound fails: g({x}) = {} above C(1+|x-x0|^alpha) = {cap}",
                g(x)
            )));
        }
    }
    Ok(())
}

/// Richardson-extrapolated central second difference.
fn second_derivative(h: &RealFn, x0: f64, delta: f64) -> f64 {
    let e = delta * 1e-2;
    let d2 = |e: f64| (h(x0 + e) - 2.0 * h(x0) + h(x0 - e)) / (e * e);
    (4.0 * d2(0.5 * e) - d2(e)) / 3.0
}

/// Normalized log-radius density of a smooth law at fixed dimension, with its
/// quadrature window and normalizing mass precomputed.
pub(crate) struct RadialProfile {
    g: RealFn,
    h: RealFn,
    n: f64,
    pub mode: f64,
    pub curvature: f64,
    window: (f64, f64),
    log_peak: f64,
    mass: f64,
}

impl RadialProfile {
    fn build(pair: &AdmissiblePair, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let nf = f64::from(n);
        let (g, h) = (pair.g.clone(), pair.h.clone());
        // Refine the mode by ternary search on the log-density.
        let neg_log_t = |x: f64| {
            let gv = g(x);
            if gv <= 0.0 {
                f64::INFINITY
            } else {
                nf * h(x) - gv.ln()
            }
        };
        let (mut a, mut b) = (pair.x0 - pair.delta, pair.x0 + pair.delta);
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if neg_log_t(m1) < neg_log_t(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let mode = 0.5 * (a + b);
        let curvature = second_derivative(&h, mode, pair.delta);
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::NotAdmissible(format!(
                "h''(x0) = {curvature} must be positive"
            )));
        }
        let log_peak = g(mode).ln() - nf * h(mode);
        let rel = |x: f64| {
            let gv = g(x);
            if gv <= 0.0 {
                0.0
            } else {
                (gv.ln() - nf * h(x) - log_peak).exp()
            }
        };
        let scale = (1.0 / (nf * curvature)).sqrt();
        let mut width = (4.0 * scale).max(pair.delta);
        let mut expansions = 0u32;
        while rel(mode - width).max(rel(mode + width)) > 1e-18 {
            width *= 2.0;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::Quadrature(
                    "log-radius density window failed to close".into(),
                ));
            }
        }
        let window = (mode - width, mode + width);
        let mut profile = RadialProfile {
            g,
            h,
            n: nf,
            mode,
            curvature,
            window,
            log_peak,
            mass: 1.0,
        };
        profile.mass = profile.integrate_raw(|_| 1.0, window.0, window.1)?;
        if !(profile.mass > 0.0 && profile.mass.is_finite()) {
            return Err(Error::Quadrature(format!(
                "log-radius normalizer {} is not positive",
                profile.mass
            )));
        }
        Ok(profile)
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Peak-relative density before normalization.
    fn relative(&self, x: f64) -> f64 {
        let gv = (self.g)(x);
        if gv <= 0.0 {
            return 0.0;
        }
        (gv.ln() - self.n * (self.h)(x) - self.log_peak).exp()
    }

    /// Normalized density of the log-radius.
    pub fn density(&self, x: f64) -> f64 {
        self.relative(x) / self.mass
    }

    /// Integral of f against the peak-relative density, seeded so the sharp
    /// peak is never missed by the first quadrature panel.
    fn integrate_raw(&self, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let scale = (1.0 / (self.n * self.curvature)).sqrt();
        let mut cuts = vec![lo];
        for b in [
            self.mode - 8.0 * scale,
            self.mode - 2.0 * scale,
            self.mode,
            self.mode + 2.0 * scale,
            self.mode + 8.0 * scale,
        ] {
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
        cuts.push(hi);
        let integrand = |x: f64| f(x) * self.relative(x);
        let mut rough = 0.0f64;
        for pair in cuts.windows(2) {
            rough += quad::adaptive(&integrand, pair[0], pair[1], 1e-8 * scale.max(1e-8))?;
        }
        let tol = (1e-13 * rough.abs()).max(1e-16);
        let mut refined = 0.0f64;
        for pair in cuts.windows(2) {
            refined += quad::adaptive(&integrand, pair[0], pair[1], tol)?;
        }
        Ok(refined)
    }

    /// E[f(X)] restricted to [lo, hi] (clipped to the quadrature window).
    pub fn expectation(&self, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        let lo = lo.max(self.window.0);
        let hi = hi.min(self.window.1);
        Ok(self.integrate_raw(f, lo, hi)? / self.mass)
    }

    /// Mean and variance of the log-radius.
    pub fn mean_var(&self) -> Result<(f64, f64)> {
        let mode = self.mode;
        let m1 = self.expectation(|x| x - mode, self.window.0, self.window.1)?;
        let m2 = self.expectation(|x| (x - mode) * (x - mode), self.window.0, self.window.1)?;
        Ok((mode + m1, (m2 - m1 * m1).max(0.0)))
    }
}

/// Reusable sampler for the log-radius of one vector under a radial law.
/// Build once per (law, n); custom laws pay their envelope setup here.
pub struct RadiusSampler {
    inner: SamplerKind,
}

enum SamplerKind {
    Point,
    ChiLog { half_n: f64, log_n: f64 },
    GammaRatioLog { half_n: f64, half_phi_n: f64 },
    ParetoLog { inv_alpha: f64, scale: f64 },
    Rejection(Box<RejectionSampler>),
}

impl RadiusSampler {
    pub fn new(law: &RadialLaw, n: u32) -> Result<Self> {
        law.validate(n)?;
        let nf = f64::from(n);
        let inner = match law {
            RadialLaw::SphericalUnit => SamplerKind::Point,
            RadialLaw::ScaledGaussian => SamplerKind::ChiLog {
                half_n: 0.5 * nf,
                log_n: nf.ln(),
            },
            RadialLaw::BetaPrime { phi } => SamplerKind::GammaRatioLog {
                half_n: 0.5 * nf,
                half_phi_n: 0.5 * phi * nf,
            },
            RadialLaw::ParetoLogRadius { alpha, scale } => SamplerKind::ParetoLog {
                inv_alpha: 1.0 / alpha,
                scale: *scale,
            },
            RadialLaw::CustomAdmissible(pair) => {
                let profile = RadialProfile::build(pair, n)?;
                SamplerKind::Rejection(Box::new(RejectionSampler::new(profile)))
            }
        };
        Ok(RadiusSampler { inner })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match &self.inner {
            SamplerKind::Point => Ok(0.0),
            SamplerKind::ChiLog { half_n, log_n } => {
                // R^2 = chi2_n / n = 2 Gamma(n/2) / n.
                Ok(0.5 * (sample_log_gamma_unchecked(*half_n, rng) + std::f64::consts::LN_2 - log_n))
            }
            SamplerKind::GammaRatioLog { half_n, half_phi_n } => {
                let top = sample_log_gamma_unchecked(*half_n, rng);
                let bottom = sample_log_gamma_unchecked(*half_phi_n, rng);
                Ok(0.5 * (top - bottom))
            }
            SamplerKind::ParetoLog { inv_alpha, scale } => {
                // scale * U^(-1/alpha) through the exponential representation.
                let e: f64 = Exp1.sample(rng);
                Ok(scale * (e * inv_alpha).exp())
            }
            SamplerKind::Rejection(sampler) => sampler.sample(rng),
        }
    }
}

fn sample_log_gamma_unchecked<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    sample_log_gamma(shape, rng).expect("positive shape")
}

/// Envelope rejection sampler on a peak-relative log-radius density. The
/// envelope is a mode-centred Gaussian mixed with a uniform floor over the
/// density's support window; the dominating constant self-corrects upward if
/// a scan gap is discovered.
pub(crate) struct RejectionSampler {
    profile: RadialProfile,
    sd: f64,
    gauss_mass: f64,
    bound_bits: AtomicU64,
}

const ENVELOPE_GAUSS_WEIGHT: f64 = 0.9;
const MIN_ACCEPT_RATE: f64 = 1e-6;

impl RejectionSampler {
    fn new(profile: RadialProfile) -> Self {
        let sd = (1.69 / (profile.n * profile.curvature)).sqrt();
        let (lo, hi) = profile.window();
        let gauss_mass =
            normal_cdf((hi - profile.mode) / sd) - normal_cdf((lo - profile.mode) / sd);
        let mut this = RejectionSampler {
            profile,
            sd,
            gauss_mass,
            bound_bits: AtomicU64::new(1.0f64.to_bits()),
        };
        let mut bound = 0.0f64;
        let mut scan = |x: f64| {
            let ratio = this.profile.relative(x) / this.envelope(x);
            if ratio.is_finite() {
                bound = bound.max(ratio);
            }
        };
        let steps = GRID_POINTS;
        for i in 0..=steps {
            scan(lo + (hi - lo) * i as f64 / steps as f64);
        }
        let (nlo, nhi) = (
            (this.profile.mode - 10.0 * sd).max(lo),
            (this.profile.mode + 10.0 * sd).min(hi),
        );
        for i in 0..=2000 {
            scan(nlo + (nhi - nlo) * i as f64 / 2000.0);
        }
        this.bound_bits = AtomicU64::new((1.2 * bound).to_bits());
        this
    }

    /// Normalized envelope density.
    fn envelope(&self, x: f64) -> f64 {
        let (lo, hi) = self.profile.window();
        let z = (x - self.profile.mode) / self.sd;
        let gauss = (-0.5 * z * z).exp()
            / (self.sd * (2.0 * std::f64::consts::PI).sqrt() * self.gauss_mass);
        ENVELOPE_GAUSS_WEIGHT * gauss + (1.0 - ENVELOPE_GAUSS_WEIGHT) / (hi - lo)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let (lo, hi) = self.profile.window();
        let max_attempts = (2.0 / MIN_ACCEPT_RATE) as u64;
        for _ in 0..max_attempts {
            let x = if rng.random::<f64>() < ENVELOPE_GAUSS_WEIGHT {
                loop {
                    let z: f64 = StandardNormal.sample(rng);
                    let x = self.profile.mode + self.sd * z;
                    if x >= lo && x <= hi {
                        break x;
                    }
                }
            } else {
                lo + (hi - lo) * rng.random::<f64>()
            };
            let bound = f64::from_bits(self.bound_bits.load(Ordering::Relaxed));
            let ratio = self.profile.relative(x) / (bound * self.envelope(x));
            if ratio > 1.0 {
                // The scan under-estimated the dominating constant; raise it
                // and keep drawing.
                let _ = self.bound_bits.fetch_update(
                    Ordering::Relaxed,
                    Ordering::Relaxed,
                    |bits| {
                        let current = f64::from_bits(bits);
                        let wanted = 2.0 * bound.max(current);
                        Some(wanted.to_bits())
                    },
                );
                continue;
            }
            if rng.random::<f64>() < ratio {
                return Ok(x);
            }
        }
        Err(Error::RejectionFailure {
            rate: MIN_ACCEPT_RATE,
        })
    }
}

/// Standardized Laplace density of the log-radius: the law's density mapped
/// to zero mean and unit variance.
pub struct LaplaceDensity {
    profile: RadialProfile,
    mean: f64,
    sd: f64,
}

impl LaplaceDensity {
    pub fn new(law: &RadialLaw, n: u32) -> Result<Self> {
        law.validate(n)?;
        let profile = law.profile(n)?.ok_or_else(|| {
            Error::NotAdmissible("law has no smooth log-radius density".into())
        })?;
        let (mean, var) = profile.mean_var()?;
        if !(var > 0.0) {
            return Err(Error::Quadrature(format!(
                "log-radius variance {var} is not positive"
            )));
        }
        Ok(LaplaceDensity {
            profile,
            mean,
            sd: var.sqrt(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn mode(&self) -> f64 {
        self.profile.mode
    }

    /// Density of (X - mean)/sd at x.
    pub fn density(&self, x: f64) -> f64 {
        self.sd * self.profile.density(self.mean + self.sd * x)
    }
}

/// One-shot evaluation of the standardized log-radius density.
pub fn standardized_laplace_density(law: &RadialLaw, n: u32, x: f64) -> Result<f64> {
    Ok(LaplaceDensity::new(law, n)?.density(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use crate::stats::ks_one_sample;
    use approx::assert_relative_eq;

    fn gaussian_pair() -> AdmissiblePair {
        AdmissiblePair::new(|_| 1.0, |x: f64| 0.5 * x * x, 0.0, 1.0, 1.0, 0.5, 2.0)
    }

    fn perturbed_pair() -> AdmissiblePair {
        AdmissiblePair::new(
            |x: f64| 1.0 + x * x / 8.0,
            |x: f64| 0.5 * x * x + x.powi(4) / 50.0,
            0.0,
            1.0,
            2.0,
            0.5,
            2.0,
        )
    }

    #[test]
    fn gaussian_test_law_is_admissible() {
        check_admissible(&gaussian_pair(), 100).unwrap();
        check_admissible(&perturbed_pair(), 50).unwrap();
    }

    #[test]
    fn bad_laws_are_rejected() {
        // Bimodal h.
        let bimodal = AdmissiblePair::new(
            |_| 1.0,
            |x: f64| (x * x - 1.0) * (x * x - 1.0),
            1.0,
            0.4,
            1.0,
            0.5,
            2.0,
        );
        assert!(matches!(
            check_admissible(&bimodal, 30),
            Err(Error::NotAdmissible(_))
        ));
        // Tail of h too flat for the declared c.
        let flat = AdmissiblePair::new(
            |_| 1.0,
            |x: f64| 0.5 * x * x / (1.0 + x * x),
            0.0,
            0.5,
            1.0,
            2.0,
            2.0,
        );
        assert!(check_admissible(&flat, 30).is_err());
    }

    #[test]
    fn laplace_density_gaussian_case_is_exact() {
        let law = RadialLaw::CustomAdmissible(gaussian_pair());
        for &n in &[10u32, 1000] {
            let dens = LaplaceDensity::new(&law, n).unwrap();
            for &x in &[-2.0f64, -0.5, 0.0, 1.0, 3.0] {
                let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
                assert_relative_eq!(dens.density(x), phi, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn laplace_density_moments_normalize() {
        let law = RadialLaw::CustomAdmissible(perturbed_pair());
        let dens = LaplaceDensity::new(&law, 200).unwrap();
        let norm = quad::adaptive(|x| dens.density(x), -12.0, 12.0, 1e-11).unwrap();
        let mean = quad::adaptive(|x| x * dens.density(x), -12.0, 12.0, 1e-11).unwrap();
        let var = quad::adaptive(|x| x * x * dens.density(x), -12.0, 12.0, 1e-11).unwrap();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-8);
        assert!(mean.abs() < 1e-8);
        assert_relative_eq!(var, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn scaled_gaussian_profile_matches_polygamma_moments() {
        // log radius = (log chi2_n - log n)/2 has variance psi_1(n/2)/4.
        let n = 100u32;
        let profile = RadialLaw::ScaledGaussian.profile(n).unwrap().unwrap();
        let (mean, var) = profile.mean_var().unwrap();
        let half = f64::from(n) / 2.0;
        let want_mean = 0.5
            * (crate::specfun::polygamma_real(0, half).unwrap() + std::f64::consts::LN_2
                - f64::from(n).ln());
        let want_var = crate::specfun::polygamma_real(1, half).unwrap() / 4.0;
        assert_relative_eq!(mean, want_mean, epsilon = 1e-9);
        assert_relative_eq!(var, want_var, max_relative = 1e-8);
    }

    #[test]
    fn beta_prime_mode_location() {
        let phi = 0.7f64;
        let profile = RadialLaw::BetaPrime { phi }.profile(64).unwrap().unwrap();
        assert_relative_eq!(profile.mode, -0.5 * phi.ln(), epsilon = 1e-6);
    }

    #[test]
    fn rejection_sampler_matches_gaussian_target() {
        let law = RadialLaw::CustomAdmissible(gaussian_pair());
        let n = 10_000u32;
        let sampler = RadiusSampler::new(&law, n).unwrap();
        let stream = RngStream::new(11, 0);
        let count = 4000usize;
        let scaled: Vec<f64> = (0..count)
            .map(|i| {
                let mut rng = stream.substream(i as u64);
                sampler.sample(&mut rng).unwrap() * f64::from(n).sqrt()
            })
            .collect();
        let ks = ks_one_sample(&scaled, crate::stats::normal_cdf).unwrap();
        assert!(
            ks.statistic <= ks.critical_1pct,
            "ks {} vs {}",
            ks.statistic,
            ks.critical_1pct
        );
    }

    #[test]
    fn pareto_log_radius_samples() {
        let law = RadialLaw::ParetoLogRadius { alpha: 1.5, scale: 2.0 };
        let sampler = RadiusSampler::new(&law, 5).unwrap();
        let stream = RngStream::new(3, 9);
        let count = 100_000usize;
        let mut draws = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = stream.substream(i as u64);
            let x = sampler.sample(&mut rng).unwrap();
            assert!(x >= 2.0);
            draws.push(x);
        }
        let ks = crate::stats::ks_one_sample(&draws, |x| {
            if x < 2.0 {
                0.0
            } else {
                1.0 - (2.0f64 / x).powf(1.5)
            }
        })
        .unwrap();
        assert!(
            ks.statistic <= ks.critical_1pct,
            "ks {} vs {}",
            ks.statistic,
            ks.critical_1pct
        );
    }

    #[test]
    fn spherical_unit_is_degenerate() {
        let sampler = RadiusSampler::new(&RadialLaw::SphericalUnit, 7).unwrap();
        let mut rng = RngStream::new(0, 0).rng();
        assert_eq!(sampler.sample(&mut rng).unwrap(), 0.0);
        assert!(LaplaceDensity::new(&RadialLaw::SphericalUnit, 7).is_err());
    }
}
