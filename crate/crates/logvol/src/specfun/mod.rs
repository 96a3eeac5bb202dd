//! Gamma-family special functions and log-beta moment machinery.

use num_complex::Complex64;
use serde::Serialize;

mod gamma;
mod moments;

/// Serializable mirror of a complex number for report payloads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

pub use gamma::{
    digamma, log_gamma, log_gamma_real, polygamma, polygamma_real, EULER_GAMMA,
    MAX_POLYGAMMA_ORDER,
};
pub(crate) use gamma::{log_gamma_unchecked, polygamma_real_unchecked};
pub use moments::{
    log_beta_central_moment, log_beta_moment, log_beta_third_abs_bound, partition_term_count,
    PartitionMoment, K_MAX,
};
