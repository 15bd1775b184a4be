//! Recency / primacy weighting of a sequence of observations.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalReference {
    /// Weight peaks at the newest observation (recency).
    Latest,
    /// Weight peaks at the oldest observation (primacy).
    Earliest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalWeighting<T> {
    pub lambda: T,
    pub reference: TemporalReference,
}

impl<T: Scalar> TemporalWeighting<T> {
    pub fn new(lambda: T, reference: TemporalReference) -> Result<Self> {
        if !(lambda >= T::zero()) {
            return Err(Error::Precondition(format!("lambda {lambda} must be >= 0")));
        }
        Ok(Self { lambda, reference })
    }

    pub fn uniform() -> Self {
        Self {
            lambda: T::zero(),
            reference: TemporalReference::Latest,
        }
    }
}

/// Normalized `w_t ∝ exp(-lambda * |ref - t|)` for `t = 0..n`.
pub fn temporal_weights<T: Scalar>(n: usize, model: &TemporalWeighting<T>) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::Precondition("need at least one observation".into()));
    }
    let reference = match model.reference {
        TemporalReference::Latest => n - 1,
        TemporalReference::Earliest => 0,
    };
    let raw: Vec<T> = (0..n)
        .map(|t| {
            let d = T::lit(t.abs_diff(reference) as f64);
            (-model.lambda * d).exp()
        })
        .collect();
    let total: T = raw.iter().copied().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// `sum w_t x_t / sum w_t`.
pub fn weighted_estimate<T: Scalar>(xs: &[T], model: &TemporalWeighting<T>) -> Result<T> {
    let w = temporal_weights(xs.len(), model)?;
    Ok(xs.iter().zip(&w).map(|(x, w)| *x * *w).sum())
}

/// Mitigation: uniform averages over consecutive windows of `window`
/// observations, then a uniform average of the window means.
pub fn multi_window_average<T: Scalar>(xs: &[T], window: usize) -> Result<T> {
    if xs.is_empty() || window == 0 {
        return Err(Error::Precondition("need observations and a positive window".into()));
    }
    let means: Vec<T> = xs
        .chunks(window)
        .map(|c| weighted_estimate(c, &TemporalWeighting::uniform()))
        .collect::<Result<_>>()?;
    weighted_estimate(&means, &TemporalWeighting::uniform())
}
