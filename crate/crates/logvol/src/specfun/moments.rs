//! Moments of log-beta variables through set-partition sums.
//!
//! The cumulant generating function of X = log beta(zeta, eta) is a
//! difference of log-gamma functions, so the j-th cumulant is
//! q_j = psi_{j-1}(zeta) - psi_{j-1}(zeta + eta). Raw moments follow by
//! summing products of q over all set partitions of {1..k}; central moments
//! keep only the partitions without singleton blocks.

use crate::error::{Error, Result};
use crate::specfun::gamma::polygamma_real_internal;

/// Largest moment order the partition sums accept. Bell(12) = 4,213,597
/// terms, grouped by block-size multiset so only 77 products are evaluated.
pub const K_MAX: u32 = 12;

/// A moment of a fixed order, produced by one of the partition sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionMoment {
    pub order: u32,
    pub value: f64,
}

fn check_order(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("moment order must be positive"));
    }
    if k > K_MAX {
        return Err(Error::MomentOrder { order: k, max: K_MAX });
    }
    Ok(())
}

fn check_shape(zeta: f64, eta: f64) -> Result<()> {
    if !(zeta.is_finite() && zeta > 0.0 && eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!(
            "beta parameters ({zeta}, {eta}) must be positive and finite"
        )));
    }
    Ok(())
}

/// Cumulant q_j(zeta, eta) of log beta(zeta, eta).
pub(crate) fn log_beta_cumulant(j: u32, zeta: f64, eta: f64) -> Result<f64> {
    debug_assert!(j >= 1);
    Ok(polygamma_real_internal(j - 1, zeta)? - polygamma_real_internal(j - 1, zeta + eta)?)
}

/// Integer partitions of k as (part, multiplicity) pairs, parts descending.
fn integer_partitions(k: u32) -> Vec<Vec<(u32, u32)>> {
    fn extend(remaining: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<(u32, u32)>>) {
        if remaining == 0 {
            let mut packed: Vec<(u32, u32)> = Vec::new();
            for &part in prefix.iter() {
                match packed.last_mut() {
                    Some((p, m)) if *p == part => *m += 1,
                    _ => packed.push((part, 1)),
                }
            }
            out.push(packed);
            return;
        }
        let mut part = max_part.min(remaining);
        while part >= 1 {
            prefix.push(part);
            extend(remaining - part, part, prefix, out);
            prefix.pop();
            part -= 1;
        }
    }
    let mut out = Vec::new();
    extend(k, k, &mut Vec::new(), &mut out);
    out
}

fn factorial_f64(n: u32) -> f64 {
    (2..=n as u64).map(|i| i as f64).product()
}

/// Number of set partitions of {1..k} whose block sizes form the given
/// integer partition: k! / prod_j (j!)^{m_j} m_j!.
fn set_partition_count(k: u32, shape: &[(u32, u32)]) -> f64 {
    let mut denom = 1.0f64;
    for &(part, mult) in shape {
        denom *= factorial_f64(part).powi(mult as i32) * factorial_f64(mult);
    }
    factorial_f64(k) / denom
}

fn partition_sum(k: u32, zeta: f64, eta: f64, singleton_free: bool) -> Result<f64> {
    let mut q = vec![0.0f64; k as usize + 1];
    for j in 1..=k {
        q[j as usize] = log_beta_cumulant(j, zeta, eta)?;
    }
    let mut total = 0.0f64;
    for shape in integer_partitions(k) {
        if singleton_free && shape.iter().any(|&(part, _)| part == 1) {
            continue;
        }
        let mut product = set_partition_count(k, &shape);
        for &(part, mult) in &shape {
            product *= q[part as usize].powi(mult as i32);
        }
        total += product;
    }
    Ok(total)
}

/// Raw moment E[(log beta(zeta, eta))^k].
pub fn log_beta_moment(k: u32, zeta: f64, eta: f64) -> Result<PartitionMoment> {
    check_order(k)?;
    check_shape(zeta, eta)?;
    let value = partition_sum(k, zeta, eta, false)?;
    Ok(PartitionMoment { order: k, value })
}

/// Central moment E[(log beta(zeta, eta) - E log beta)^k].
pub fn log_beta_central_moment(k: u32, zeta: f64, eta: f64) -> Result<PartitionMoment> {
    check_order(k)?;
    check_shape(zeta, eta)?;
    let value = partition_sum(k, zeta, eta, true)?;
    Ok(PartitionMoment { order: k, value })
}

/// How many set partitions feed the order-k sum; the raw-moment count is the
/// Bell number, the central-moment count drops all partitions with singletons.
pub fn partition_term_count(k: u32, singleton_free: bool) -> Result<u64> {
    check_order(k)?;
    let mut total = 0u64;
    for shape in integer_partitions(k) {
        if singleton_free && shape.iter().any(|&(part, _)| part == 1) {
            continue;
        }
        total += set_partition_count(k, &shape) as u64;
    }
    Ok(total)
}

/// Upper bound on E|log beta - E log beta|^3 in terms of the second and
/// fourth cumulants: (q_4 + q_2^2)^{3/4}.
pub fn log_beta_third_abs_bound(zeta: f64, eta: f64) -> Result<f64> {
    check_shape(zeta, eta)?;
    let q2 = log_beta_cumulant(2, zeta, eta)?;
    let q4 = log_beta_cumulant(4, zeta, eta)?;
    Ok((q4 + q2 * q2).powf(0.75))
}
