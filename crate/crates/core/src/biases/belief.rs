//! Belief-formation operators: confirmation, availability, social
//! (groupthink) updating and survivorship.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One piece of evidence with its likelihood under H and under not-H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence<T> {
    pub likelihood_h: T,
    pub likelihood_not_h: T,
    pub supports_h: bool,
}

impl<T: Scalar> Evidence<T> {
    pub fn new(likelihood_h: T, likelihood_not_h: T) -> Self {
        Self {
            likelihood_h,
            likelihood_not_h,
            supports_h: likelihood_h > likelihood_not_h,
        }
    }
}

/// Posterior of H. With `selective`, only evidence that supports H enters
/// the update; with it off every item counts (symmetric sampling).
pub fn confirmation_posterior<T: Scalar>(prior: T, evidence: &[Evidence<T>], selective: bool) -> Result<T> {
    if !(prior > T::zero() && prior < T::one()) {
        return Err(Error::Precondition(format!("prior {prior} outside (0, 1)")));
    }
    let mut log_odds = (prior / (T::one() - prior)).ln();
    for e in evidence {
        if !(e.likelihood_h > T::zero() && e.likelihood_not_h > T::zero()) {
            return Err(Error::Precondition("likelihoods must be positive".into()));
        }
        if selective && !e.supports_h {
            continue;
        }
        log_odds = log_odds + e.likelihood_h.ln() - e.likelihood_not_h.ln();
    }
    Ok(T::one() / (T::one() + (-log_odds).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalientEvent<T> {
    pub evidences_event: bool,
    pub salience: T,
}

/// Salience-weighted frequency of the event.
pub fn availability_estimate<T: Scalar>(events: &[SalientEvent<T>]) -> Result<T> {
    let mut total = T::zero();
    let mut hits = T::zero();
    for e in events {
        if !(e.salience >= T::zero()) {
            return Err(Error::Precondition("salience must be non-negative".into()));
        }
        total = total + e.salience;
        if e.evidences_event {
            hits = hits + e.salience;
        }
    }
    if !(total > T::zero()) {
        return Err(Error::Precondition("total salience must be positive".into()));
    }
    Ok(hits / total)
}

/// Mitigation: every event weighs the same.
pub fn base_rate_estimate<T: Scalar>(events: &[SalientEvent<T>]) -> Result<T> {
    let flat: Vec<_> = events
        .iter()
        .map(|e| SalientEvent {
            evidences_event: e.evidences_event,
            salience: T::one(),
        })
        .collect();
    availability_estimate(&flat)
}

/// Combines own belief in X with the peers' signal as a normalized product
/// over {X, not X}.
pub fn social_bayes_update<T: Scalar>(own_belief: T, peer_signal: T) -> Result<T> {
    for (name, v) in [("own belief", own_belief), ("peer signal", peer_signal)] {
        if !(v > T::zero() && v < T::one()) {
            return Err(Error::Precondition(format!("{name} {v} outside (0, 1)")));
        }
    }
    let yes = own_belief * peer_signal;
    let no = (T::one() - own_belief) * (T::one() - peer_signal);
    Ok(yes / (yes + no))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub value: T,
    pub survived: bool,
}

/// Mean over survivors only (biased) or over every logged outcome.
pub fn survivorship_estimate<T: Scalar>(samples: &[Sample<T>], survivors_only: bool) -> Result<T> {
    let picked: Vec<T> = samples
        .iter()
        .filter(|s| !survivors_only || s.survived)
        .map(|s| s.value)
        .collect();
    if picked.is_empty() {
        return Err(Error::Empty("no samples in the selected subset"));
    }
    Ok(picked.iter().copied().sum::<T>() / T::lit(picked.len() as f64))
}
