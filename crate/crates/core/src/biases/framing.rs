//! Framing effect: reading a resource state differently depending on
//! whether it was phrased as a loss ("used") or a gain ("free").
//! The mitigation is [`crate::scenario::canonicalize`].

use crate::error::Result;
use crate::scalar::Scalar;
use crate::scenario::{canonicalize, FramedState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramingBias<T> {
    /// How much a loss frame shrinks the perceived free share.
    pub loss_aversion: T,
}

/// Perceived free share. A state phrased in terms of usage is discounted by
/// `1 + loss_aversion`; a state phrased in terms of headroom is read as is.
pub fn framed_reading<T: Scalar>(state: &FramedState<T>, bias: &FramingBias<T>) -> Result<T> {
    let c = canonicalize(state)?;
    if state.used.is_some() && state.free.is_none() {
        Ok(c.free_fraction / (T::one() + bias.loss_aversion.max(T::zero())))
    } else {
        Ok(c.free_fraction)
    }
}
