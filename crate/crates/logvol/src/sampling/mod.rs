//! Reproducible Monte Carlo sampling: gamma/beta primitives in log space,
//! uniform sphere points, radial laws, and batch generation keyed by
//! per-sample substreams.

mod laws;
mod rng;

pub use laws::{
    check_admissible, standardized_laplace_density, AdmissiblePair, LaplaceDensity, RadialLaw,
    RadiusSampler,
};
pub use rng::RngStream;

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io;

/// log W for W ~ Gamma(lambda, scale 1).
///
/// For lambda < 1 the draw goes through the shape-boost identity
/// W = W' U^{1/lambda} with W' ~ Gamma(lambda+1), applied in log space, so
/// small shapes never underflow to -inf.
pub fn sample_log_gamma<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("gamma shape {lambda} must be positive")));
    }
    if lambda >= 1.0 {
        let gamma = Gamma::new(lambda, 1.0)
            .map_err(|e| Error::invalid(format!("gamma construction: {e}")))?;
        let w: f64 = gamma.sample(rng);
        Ok(w.ln())
    } else {
        let boosted = Gamma::new(lambda + 1.0, 1.0)
            .map_err(|e| Error::invalid(format!("gamma construction: {e}")))?;
        let w: f64 = boosted.sample(rng);
        let mut u: f64 = rng.random();
        while u <= 0.0 {
            u = rng.random();
        }
        Ok(w.ln() + u.ln() / lambda)
    }
}

/// log B for B ~ Beta(zeta, eta), built from two log-gamma draws and combined
/// stably: log G1 - log(G1 + G2) without leaving log space.
pub fn sample_log_beta<R: Rng + ?Sized>(zeta: f64, eta: f64, rng: &mut R) -> Result<f64> {
    if !(zeta.is_finite() && zeta > 0.0 && eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!(
            "beta parameters ({zeta}, {eta}) must be positive"
        )));
    }
    let g1 = sample_log_gamma(zeta, rng)?;
    let g2 = sample_log_gamma(eta, rng)?;
    // log B = g1 - logaddexp(g1, g2)
    if g1 >= g2 {
        Ok(-libm::log1p((g2 - g1).exp()))
    } else {
        Ok((g1 - g2) - libm::log1p((g1 - g2).exp()))
    }
}

/// Uniform point on the unit sphere in dimension n.
pub fn sample_sphere_point<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("sphere dimension must be positive"));
    }
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for x in &mut v {
                *x /= norm;
            }
            return Ok(v);
        }
    }
}

/// One log-radius draw under a radial law in dimension n. Builds a sampler
/// per call; for batches use [`RadiusSampler`] directly.
pub fn sample_log_radius<R: Rng + ?Sized>(law: &RadialLaw, n: u32, rng: &mut R) -> Result<f64> {
    RadiusSampler::new(law, n)?.sample(rng)
}

/// A batch of scalar samples with its seed, for serialization and KS tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub values: Vec<f64>,
}

impl SampleBatch {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {bad}")));
        }
        Ok(SampleBatch {
            seed,
            count: values.len(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// One value per line under a `value` header.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "value")?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl AsRef<[f64]> for SampleBatch {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Draws `count` samples, one independent substream per sample index, fanned
/// out across the rayon pool. Results are identical for any worker count.
pub fn generate_batch<F>(count: usize, stream: RngStream, sampler: F) -> Result<SampleBatch>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    let values = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64);
            sampler(&mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    SampleBatch::new(values, stream.seed)
}
