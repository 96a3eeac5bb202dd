//! Log-volumes of rotationally invariant random simplices with the origin as
//! a vertex: exact Gram evaluation, the beta-product representation on the
//! sphere, the general radial representation, Gaussian log-determinants, and
//! their exact polygamma moments.

use crate::error::{Error, Result};
use crate::sampling::{sample_log_beta, RadialLaw, RadiusSampler};
use crate::specfun::{log_gamma_real, polygamma_real};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

/// Ambient dimension n and vertex count p (non-origin vertices), 1 <= p <= n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimplexDims {
    n: u32,
    p: u32,
}

impl SimplexDims {
    pub fn new(n: u32, p: u32) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::invalid("dimensions must be positive"));
        }
        if p > n {
            return Err(Error::invalid(format!(
                "vertex count p={p} exceeds ambient dimension n={n}"
            )));
        }
        Ok(SimplexDims { n, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Aspect ratio theta = (p-1)/n, in [0, 1).
    pub fn theta(&self) -> f64 {
        f64::from(self.p - 1) / f64::from(self.n)
    }
}

/// Exact mean/variance, with an optional upper bound on the centred absolute
/// third moment (always at least variance^{3/2}).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub third_abs_bound: Option<f64>,
}

/// Compensated sum.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn neg_log_factorial(p: u32) -> f64 {
    -log_gamma_real(f64::from(p) + 1.0).expect("positive argument")
}

/// Log-volume of the simplex spanned by the origin and the given vectors:
/// -log p! + (1/2) log det(Gram), by completely pivoted Cholesky.
pub fn log_volume_gram(vectors: &[Vec<f64>]) -> Result<f64> {
    let p = vectors.len();
    if p == 0 {
        return Err(Error::invalid("need at least one vector"));
    }
    let n = vectors[0].len();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("vectors have mixed dimensions"));
    }
    if p > n {
        return Err(Error::invalid(format!(
            "{p} vectors in dimension {n} are never independent"
        )));
    }
    if vectors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("vectors contain non-finite entries"));
    }

    let mut gram = vec![0.0f64; p * p];
    for i in 0..p {
        for j in i..p {
            let dot = kahan_sum(vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b));
            gram[i * p + j] = dot;
            gram[j * p + i] = dot;
        }
    }

    let max_diag = (0..p).map(|i| gram[i * p + i]).fold(0.0f64, f64::max);
    // Pivots below ~p eps max_diag are Cholesky noise; 64 eps keeps a safe
    // margin over that floor while rejecting as few of the genuinely thin
    // (but full-rank) random simplices as possible.
    let threshold = 64.0 * f64::EPSILON * max_diag;
    let mut half_log_det = 0.0f64;
    let mut order: Vec<usize> = (0..p).collect();

    // In-place Cholesky with diagonal pivoting; the Gram matrix is PSD so the
    // largest remaining diagonal entry is always the best pivot.
    for k in 0..p {
        let pivot = (k..p)
            .max_by(|&a, &b| gram[a * p + a].total_cmp(&gram[b * p + b]))
            .unwrap();
        if pivot != k {
            order.swap(k, pivot);
            for c in 0..p {
                gram.swap(k * p + c, pivot * p + c);
            }
            for r in 0..p {
                gram.swap(r * p + k, r * p + pivot);
            }
        }
        let d = gram[k * p + k];
        if !(d > threshold) {
            return Err(Error::DegenerateSimplex { pivot: d });
        }
        let l = d.sqrt();
        half_log_det += l.ln();
        for r in (k + 1)..p {
            gram[r * p + k] /= l;
        }
        for r in (k + 1)..p {
            let lrk = gram[r * p + k];
            for c in (k + 1)..=r {
                gram[r * p + c] -= lrk * gram[c * p + k];
                gram[c * p + r] = gram[r * p + c];
            }
        }
    }
    Ok(neg_log_factorial(p as u32) + half_log_det)
}

/// One draw of the log-volume of the spherical simplex, through the product
/// of independent beta((n-j)/2, j/2) factors.
pub fn sample_logvol_spherical<R: Rng + ?Sized>(dims: SimplexDims, rng: &mut R) -> Result<f64> {
    let (n, p) = (f64::from(dims.n), dims.p);
    let mut acc = neg_log_factorial(p);
    for j in 1..p {
        let jf = f64::from(j);
        acc += 0.5 * sample_log_beta((n - jf) / 2.0, jf / 2.0, rng)?;
    }
    Ok(acc)
}

/// Reusable log-volume sampler under a radial law; builds the radius sampler
/// once per (law, dims).
pub struct LogVolumeSampler {
    dims: SimplexDims,
    radius: RadiusSampler,
}

impl LogVolumeSampler {
    pub fn new(law: &RadialLaw, dims: SimplexDims) -> Result<Self> {
        Ok(LogVolumeSampler {
            dims,
            radius: RadiusSampler::new(law, dims.n)?,
        })
    }

    /// -log p! + (1/2) sum_j log beta_{(n-j)/2, j/2} + sum_i log R_i.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let mut acc = sample_logvol_spherical(self.dims, rng)?;
        for _ in 0..self.dims.p {
            acc += self.radius.sample(rng)?;
        }
        Ok(acc)
    }
}

/// One draw of the log-volume when vertex radii follow `law`.
pub fn sample_logvol_radial<R: Rng + ?Sized>(
    law: &RadialLaw,
    dims: SimplexDims,
    rng: &mut R,
) -> Result<f64> {
    LogVolumeSampler::new(law, dims)?.sample(rng)
}

/// Exact moments of the spherical log-volume:
/// mean = -log p! + (1/2) sum_j (psi_0((n-j)/2) - psi_0(n/2)),
/// variance = (1/4) sum_j (psi_1((n-j)/2) - psi_1(n/2)).
///
/// The third-moment bound applies Lyapunov to the exact fourth central
/// moment of the sum: (sum_j kappa4_j + 3 variance^2)^{3/4} with
/// kappa4_j = (psi_3((n-j)/2) - psi_3(n/2))/16.
pub fn spherical_moments(dims: SimplexDims) -> Result<MomentSummary> {
    let n = f64::from(dims.n);
    let half_n = n / 2.0;
    let psi0_n = polygamma_real(0, half_n)?;
    let psi1_n = polygamma_real(1, half_n)?;
    let psi3_n = polygamma_real(3, half_n)?;
    let mut mean_terms = Vec::with_capacity(dims.p as usize);
    let mut var_terms = Vec::with_capacity(dims.p as usize);
    let mut kappa4_terms = Vec::with_capacity(dims.p as usize);
    for j in 1..dims.p {
        let zeta = (n - f64::from(j)) / 2.0;
        mean_terms.push(polygamma_real(0, zeta)? - psi0_n);
        var_terms.push(polygamma_real(1, zeta)? - psi1_n);
        kappa4_terms.push(polygamma_real(3, zeta)? - psi3_n);
    }
    let mean = neg_log_factorial(dims.p) + 0.5 * kahan_sum(mean_terms);
    let variance = 0.25 * kahan_sum(var_terms);
    let fourth = kahan_sum(kappa4_terms) / 16.0 + 3.0 * variance * variance;
    Ok(MomentSummary {
        mean,
        variance,
        third_abs_bound: Some(fourth.powf(0.75)),
    })
}

/// One draw of log |det A_n| for an n x n matrix of standard Gaussians:
/// (n/2) log 2 + (1/2) sum_{j=1}^n log Gamma(j/2)-draws.
///
/// Gamma draws are multiplied in chunks so only a few logarithms are taken
/// per sample; the running product is flushed before it can leave f64 range.
pub fn goodman_sample_logdet<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be positive"));
    }
    let mut log_acc = 0.0f64;
    let mut product = 1.0f64;
    let mut in_chunk = 0u32;
    for j in 1..=n {
        let gamma = Gamma::new(f64::from(j) / 2.0, 1.0)
            .map_err(|e| Error::invalid(format!("gamma construction: {e}")))?;
        let mut w: f64 = gamma.sample(rng);
        while w <= 0.0 {
            w = gamma.sample(rng);
        }
        product *= w;
        in_chunk += 1;
        if in_chunk == 8 || !(1e-226..=1e226).contains(&product) {
            log_acc += product.ln();
            product = 1.0;
            in_chunk = 0;
        }
    }
    log_acc += product.ln();
    Ok(0.5 * f64::from(n) * std::f64::consts::LN_2 + 0.5 * log_acc)
}

/// Exact mean/variance of log |det A_n|:
/// mean = (n/2) log 2 + (1/2) sum psi_0(j/2), variance = (1/4) sum psi_1(j/2).
pub fn gaussian_logdet_moments(n: u32) -> Result<MomentSummary> {
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be positive"));
    }
    let mut psi0_terms = Vec::with_capacity(n as usize);
    let mut psi1_terms = Vec::with_capacity(n as usize);
    let mut psi3_terms = Vec::with_capacity(n as usize);
    for j in 1..=n {
        let half_j = f64::from(j) / 2.0;
        psi0_terms.push(polygamma_real(0, half_j)?);
        psi1_terms.push(polygamma_real(1, half_j)?);
        psi3_terms.push(polygamma_real(3, half_j)?);
    }
    let mean = 0.5 * f64::from(n) * std::f64::consts::LN_2 + 0.5 * kahan_sum(psi0_terms);
    let variance = 0.25 * kahan_sum(psi1_terms);
    let fourth = kahan_sum(psi3_terms) / 16.0 + 3.0 * variance * variance;
    Ok(MomentSummary {
        mean,
        variance,
        third_abs_bound: Some(fourth.powf(0.75)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{generate_batch, sample_sphere_point, RngStream};
    use crate::stats::{ks_two_sample, normal_cdf};
    use approx::assert_relative_eq;

    #[test]
    fn gram_orthonormal_frame() {
        for p in 1..=5usize {
            let vectors: Vec<Vec<f64>> = (0..p)
                .map(|i| (0..8).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            let got = log_volume_gram(&vectors).unwrap();
            let want = -log_gamma_real(p as f64 + 1.0).unwrap();
            assert_relative_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn gram_hand_values() {
        assert_relative_eq!(
            log_volume_gram(&[vec![2.0, 0.0, 0.0]]).unwrap(),
            2.0f64.ln(),
            epsilon = 1e-14
        );
        let got = log_volume_gram(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_relative_eq!(got, -2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn gram_detects_rank_deficiency() {
        let err = log_volume_gram(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateSimplex { .. }));
    }

    #[test]
    fn gram_scaling_covariance() {
        let vectors = vec![
            vec![0.3, -1.2, 0.7, 0.1],
            vec![1.1, 0.4, -0.2, 0.9],
            vec![-0.5, 0.8, 0.3, 1.4],
        ];
        let lambda = 2.5f64;
        let scaled: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| v.iter().map(|x| lambda * x).collect())
            .collect();
        let base = log_volume_gram(&vectors).unwrap();
        let shifted = log_volume_gram(&scaled).unwrap();
        assert_relative_eq!(shifted - base, 3.0 * lambda.ln(), epsilon = 1e-10);
    }

    #[test]
    fn gram_rotation_invariance() {
        let vectors = vec![vec![0.9, -0.1, 0.4], vec![0.2, 1.3, -0.7]];
        // Rotation about the z-axis then the x-axis.
        let (c, s) = (0.6f64, 0.8f64);
        let rotate = |v: &[f64]| {
            let w = [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
            vec![w[0], c * w[1] - s * w[2], s * w[1] + c * w[2]]
        };
        let rotated: Vec<Vec<f64>> = vectors.iter().map(|v| rotate(v)).collect();
        let a = log_volume_gram(&vectors).unwrap();
        let b = log_volume_gram(&rotated).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn spherical_sampler_degenerate_and_mean() {
        let mut rng = RngStream::new(40, 0).rng();
        let dims = SimplexDims::new(9, 1).unwrap();
        for _ in 0..50 {
            assert_eq!(sample_logvol_spherical(dims, &mut rng).unwrap(), 0.0);
        }
        let dims = SimplexDims::new(2, 2).unwrap();
        let n = 200_000usize;
        let batch = generate_batch(n, RngStream::new(41, 0), |rng| {
            sample_logvol_spherical(dims, rng)
        })
        .unwrap();
        let mean = batch.values.iter().sum::<f64>() / n as f64;
        let sd = (spherical_moments(dims).unwrap().variance / n as f64).sqrt();
        assert!((mean + 2.0 * 2.0f64.ln()).abs() < 4.0 * sd, "mean {mean}");
    }

    #[test]
    fn spherical_moments_closed_forms() {
        let trivial = spherical_moments(SimplexDims::new(17, 1).unwrap()).unwrap();
        assert_eq!(trivial.mean, 0.0);
        assert_eq!(trivial.variance, 0.0);
        let two = spherical_moments(SimplexDims::new(2, 2).unwrap()).unwrap();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert_relative_eq!(two.variance, pi2 / 12.0, max_relative = 1e-13);
        let bound = two.third_abs_bound.unwrap();
        assert!(bound >= two.variance.powf(1.5));
    }

    #[test]
    fn rough_variance_bound_at_p_seven_plus() {
        for &(n, p) in &[(10u32, 7u32), (50, 20), (300, 299), (1000, 41)] {
            let dims = SimplexDims::new(n, p).unwrap();
            let theta = dims.theta();
            let floor = 0.25 * ((1.0 / (1.0 - theta)).ln() - theta);
            let var = spherical_moments(dims).unwrap().variance;
            assert!(var >= floor, "({n},{p}): {var} < {floor}");
        }
    }

    #[test]
    fn miles_identity_beta_product_vs_gram() {
        let dims = SimplexDims::new(6, 4).unwrap();
        let count = 100_000usize;
        let product = generate_batch(count, RngStream::new(42, 0), |rng| {
            sample_logvol_spherical(dims, rng)
        })
        .unwrap();
        let gram = generate_batch(count, RngStream::new(42, 1), |rng| {
            let vectors: Result<Vec<Vec<f64>>> =
                (0..4).map(|_| sample_sphere_point(6, rng)).collect();
            log_volume_gram(&vectors?)
        })
        .unwrap();
        let ks = ks_two_sample(&product, &gram).unwrap();
        assert!(ks.statistic <= ks.critical_1pct, "ks {}", ks.statistic);
    }

    #[test]
    fn radial_unit_law_matches_spherical() {
        let dims = SimplexDims::new(7, 3).unwrap();
        let count = 50_000usize;
        let spherical = generate_batch(count, RngStream::new(43, 0), |rng| {
            sample_logvol_spherical(dims, rng)
        })
        .unwrap();
        let radial = generate_batch(count, RngStream::new(43, 1), |rng| {
            sample_logvol_radial(&RadialLaw::SphericalUnit, dims, rng)
        })
        .unwrap();
        let ks = ks_two_sample(&spherical, &radial).unwrap();
        assert!(ks.statistic <= ks.critical_1pct);
    }

    #[test]
    fn radial_gaussian_law_matches_gram_of_gaussian_vectors() {
        let dims = SimplexDims::new(8, 3).unwrap();
        let count = 100_000usize;
        let sampler = LogVolumeSampler::new(&RadialLaw::ScaledGaussian, dims).unwrap();
        let radial =
            generate_batch(count, RngStream::new(44, 0), |rng| sampler.sample(rng)).unwrap();
        let scale = (8.0f64).sqrt();
        let gram = generate_batch(count, RngStream::new(44, 1), |rng| {
            let vectors: Vec<Vec<f64>> = (0..3)
                .map(|_| {
                    (0..8)
                        .map(|_| {
                            let z: f64 = rand_distr::StandardNormal.sample(rng);
                            z / scale
                        })
                        .collect()
                })
                .collect();
            log_volume_gram(&vectors)
        })
        .unwrap();
        let ks = ks_two_sample(&radial, &gram).unwrap();
        assert!(ks.statistic <= ks.critical_1pct, "ks {}", ks.statistic);
    }

    #[test]
    fn radial_sampling_is_reproducible() {
        let dims = SimplexDims::new(12, 5).unwrap();
        let law = RadialLaw::BetaPrime { phi: 0.8 };
        let a = generate_batch(64, RngStream::new(45, 2), |rng| {
            sample_logvol_radial(&law, dims, rng)
        })
        .unwrap();
        let b = generate_batch(64, RngStream::new(45, 2), |rng| {
            sample_logvol_radial(&law, dims, rng)
        })
        .unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn goodman_dimension_one_is_log_abs_normal() {
        let count = 100_000usize;
        let goodman = generate_batch(count, RngStream::new(46, 0), |rng| {
            goodman_sample_logdet(1, rng)
        })
        .unwrap();
        let direct = generate_batch(count, RngStream::new(46, 1), |rng| {
            let z: f64 = rand_distr::StandardNormal.sample(rng);
            Ok(z.abs().ln())
        })
        .unwrap();
        let ks = ks_two_sample(&goodman, &direct).unwrap();
        assert!(ks.statistic <= ks.critical_1pct, "ks {}", ks.statistic);
        // And against the closed-form CDF of log|Z|.
        let ks_cdf = crate::stats::ks_one_sample(&goodman, |x: f64| {
            2.0 * normal_cdf(x.exp()) - 1.0
        })
        .unwrap();
        assert!(ks_cdf.statistic <= ks_cdf.critical_1pct);
    }

    #[test]
    fn goodman_dimension_three_matches_direct_determinant() {
        let count = 100_000usize;
        let goodman = generate_batch(count, RngStream::new(47, 0), |rng| {
            goodman_sample_logdet(3, rng)
        })
        .unwrap();
        let direct = generate_batch(count, RngStream::new(47, 1), |rng| {
            let mut m = [[0.0f64; 3]; 3];
            for row in &mut m {
                for x in row.iter_mut() {
                    *x = rand_distr::StandardNormal.sample(rng);
                }
            }
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            Ok(det.abs().ln())
        })
        .unwrap();
        let ks = ks_two_sample(&goodman, &direct).unwrap();
        assert!(ks.statistic <= ks.critical_1pct, "ks {}", ks.statistic);
    }

    #[test]
    fn goodman_mean_matches_exact_moments() {
        let n = 10u32;
        let count = 200_000usize;
        let batch = generate_batch(count, RngStream::new(48, 0), |rng| {
            goodman_sample_logdet(n, rng)
        })
        .unwrap();
        let summary = gaussian_logdet_moments(n).unwrap();
        let mean = batch.values.iter().sum::<f64>() / count as f64;
        let se = (summary.variance / count as f64).sqrt();
        assert!((mean - summary.mean).abs() < 4.0 * se);
    }

    #[test]
    fn logdet_moment_closed_forms() {
        let one = gaussian_logdet_moments(1).unwrap();
        assert_relative_eq!(one.mean, -0.6351814227307391, epsilon = 1e-12);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert_relative_eq!(one.variance, pi2 / 8.0, max_relative = 1e-13);
    }

    #[test]
    fn dims_validation() {
        assert!(SimplexDims::new(5, 6).is_err());
        assert!(SimplexDims::new(0, 0).is_err());
        let dims = SimplexDims::new(100, 51).unwrap();
        assert_relative_eq!(dims.theta(), 0.5, epsilon = 1e-15);
    }
}
