use rand::Rng;

use crate::error::{Error, Result};
use crate::scenario::SliceId;
use crate::twin::{min_bw_for_sla, TwinState};

const BUFFER: f64 = 1.05;

/// Minimum SLA bandwidth plus a 5% negotiation buffer.
pub fn fixed_anchor(state: &TwinState<f64>, slice: SliceId, sla_ms: f64, b_total_mhz: f64) -> Result<f64> {
    let min_bw = min_bw_for_sla(state, slice, sla_ms)?;
    let anchor = min_bw * BUFFER;
    if anchor > b_total_mhz {
        return Err(Error::Infeasible(format!(
            "anchor {anchor:.3} MHz for `{slice}` exceeds the {b_total_mhz} MHz pool"
        )));
    }
    Ok(anchor)
}

/// Upper end of the randomized anchor range: `min(0.8 * b_total, 1.5 * min_bw)`,
/// never below 1 MHz.
pub fn random_anchor_bound(min_bw_mhz: f64, b_total_mhz: f64) -> f64 {
    (0.8 * b_total_mhz).min(1.5 * min_bw_mhz).max(1.0)
}

/// Uniform draw in `[1, random_anchor_bound]`.
pub fn randomized_anchor<R: Rng + ?Sized>(
    state: &TwinState<f64>,
    slice: SliceId,
    sla_ms: f64,
    b_total_mhz: f64,
    rng: &mut R,
) -> Result<f64> {
    let min_bw = min_bw_for_sla(state, slice, sla_ms)?;
    let hi = random_anchor_bound(min_bw, b_total_mhz);
    if hi <= 1.0 {
        return Ok(1.0);
    }
    Ok(rng.gen_range(1.0..=hi))
}
