//! Authority and halo effects on source trust.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `tau * y_source + (1 - tau) * y_local`.
pub fn authority_mix<T: Scalar>(y_source: T, y_local: T, tau_s: T) -> Result<T> {
    if !(tau_s >= T::zero() && tau_s <= T::one()) {
        return Err(Error::Precondition(format!("trust {tau_s} outside [0, 1]")));
    }
    Ok(tau_s * y_source + (T::one() - tau_s) * y_local)
}

/// Mitigation: flags disagreement between the authoritative source and an
/// independent local estimate, which should force trust recalibration.
pub fn dual_source_validate<T: Scalar>(y_source: T, y_local: T, tolerance: T) -> bool {
    (y_source - y_local).abs() > tolerance
}

/// Per-task trust with a task-similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustModel<T> {
    pub tau: Vec<T>,
    pub learning_rate: T,
    pub rho: Vec<Vec<T>>,
}

impl<T: Scalar> TrustModel<T> {
    pub fn new(tau: Vec<T>, learning_rate: T, rho: Vec<Vec<T>>) -> Result<Self> {
        let n = tau.len();
        if !(learning_rate > T::zero()) {
            return Err(Error::Precondition("learning rate must be > 0".into()));
        }
        if rho.len() != n || rho.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("rho must be square and match tau".into()));
        }
        for (i, row) in rho.iter().enumerate() {
            if row[i] != T::one() {
                return Err(Error::Precondition("rho must have a unit diagonal".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= T::zero() && v <= T::one()) || v != rho[j][i] {
                    return Err(Error::Precondition("rho must be symmetric with entries in [0, 1]".into()));
                }
            }
        }
        let tau = tau.into_iter().map(clamp01).collect();
        Ok(Self { tau, learning_rate, rho })
    }
}

fn clamp01<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// After a success on task `i`, every task `j` gains `eta * rho_ij` trust.
/// With `separate_domains`, cross-task transfer is switched off.
pub fn halo_update<T: Scalar>(
    trust: &TrustModel<T>,
    succeeded_task: usize,
    success: bool,
    separate_domains: bool,
) -> Result<TrustModel<T>> {
    if succeeded_task >= trust.tau.len() {
        return Err(Error::Precondition(format!("task index {succeeded_task} out of range")));
    }
    let mut next = trust.clone();
    if !success {
        return Ok(next);
    }
    for (j, tau) in next.tau.iter_mut().enumerate() {
        let rho = if separate_domains && j != succeeded_task {
            T::zero()
        } else {
            trust.rho[succeeded_task][j]
        };
        *tau = clamp01(*tau + trust.learning_rate * rho);
    }
    Ok(next)
}
