//! Choice operators: anchoring, neglect of uncertainty, status quo and sunk
//! cost.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anchor `a0` with deviation penalty `gamma * |a - a0|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorModel<T> {
    pub anchor: T,
    pub gamma: T,
}

impl<T: Scalar> AnchorModel<T> {
    pub fn new(anchor: T, gamma: T) -> Result<Self> {
        if !(gamma >= T::zero()) {
            return Err(Error::Precondition(format!("gamma {gamma} must be >= 0")));
        }
        Ok(Self { anchor, gamma })
    }

    pub fn distance(&self, action: T) -> T {
        (action - self.anchor).abs()
    }

    pub fn penalized(&self, c: &Candidate<T>) -> T {
        if self.gamma == T::zero() {
            c.utility
        } else {
            c.utility - self.gamma * self.distance(c.action)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<T> {
    pub action: T,
    pub utility: T,
}

/// `argmax_a U(a) - gamma * |a - a0|`; ties go to the action nearer the
/// anchor, then to the smaller action. Returns the index into `candidates`.
pub fn anchored_choice<T: Scalar>(candidates: &[Candidate<T>], model: &AnchorModel<T>) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::Empty("anchored_choice needs at least one candidate"));
    }
    let key = |c: &Candidate<T>| (model.penalized(c), model.distance(c.action), c.action);
    let better = |a: &Candidate<T>, b: &Candidate<T>| -> bool {
        let (ua, da, xa) = key(a);
        let (ub, db, xb) = key(b);
        match ua.partial_cmp(&ub).unwrap_or(Ordering::Less) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match da.partial_cmp(&db).unwrap_or(Ordering::Equal) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => xa < xb,
            },
        }
    };
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if better(c, &candidates[best]) {
            best = i;
        }
    }
    Ok(best)
}

/// Picks an action. With `neglect`, utility is evaluated only at the
/// weighted-mean scenario; otherwise expected utility over the scenarios is
/// maximized. Ties go to the earlier action. Returns an index into `actions`.
pub fn uncertainty_choice<T, A, F>(actions: &[A], scenarios: &[(T, T)], utility: F, neglect: bool) -> Result<usize>
where
    T: Scalar,
    F: Fn(&A, T) -> T,
{
    if actions.is_empty() {
        return Err(Error::Empty("uncertainty_choice needs at least one action"));
    }
    if scenarios.is_empty() {
        return Err(Error::Empty("uncertainty_choice needs at least one scenario"));
    }
    let total: T = scenarios.iter().map(|(_, w)| *w).sum();
    if !(total > T::zero()) || scenarios.iter().any(|(_, w)| !(*w >= T::zero())) {
        return Err(Error::Precondition("scenario weights must be non-negative and not all zero".into()));
    }
    let score = |a: &A| -> T {
        if neglect {
            let mean = scenarios.iter().map(|(x, w)| *x * *w).sum::<T>() / total;
            utility(a, mean)
        } else {
            scenarios.iter().map(|(x, w)| utility(a, *x) * *w).sum::<T>() / total
        }
    };
    let mut best = 0;
    let mut best_u = score(&actions[0]);
    for (i, a) in actions.iter().enumerate().skip(1) {
        let u = score(a);
        if u > best_u {
            best = i;
            best_u = u;
        }
    }
    Ok(best)
}

/// Switch only if the gain strictly exceeds the switching cost.
pub fn status_quo_gate<T: Scalar>(u_new: T, u_current: T, c_switch: T) -> bool {
    u_new - u_current > c_switch
}

/// Opportunity-cost view of the switch decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatusQuoMitigation<T> {
    /// Decision epochs over which a forgone gain keeps accruing.
    pub horizon: u32,
    /// Multiplier in (0, 1] applied to the switching cost.
    pub switch_cost_scale: T,
}

pub fn status_quo_gate_mitigated<T: Scalar>(
    u_new: T,
    u_current: T,
    c_switch: T,
    mitigation: &StatusQuoMitigation<T>,
) -> bool {
    let gain = (u_new - u_current) * T::lit(f64::from(mitigation.horizon.max(1)));
    gain > c_switch * mitigation.switch_cost_scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvestmentTransform {
    /// `ln(1 + S)`.
    Log1p,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunkCostParams<T> {
    pub alpha: T,
    pub investment: T,
    pub transform: InvestmentTransform,
}

/// `(E[B] - C) + alpha * f(S)`.
pub fn sunk_cost_utility<T: Scalar>(expected_benefit: T, cost: T, params: &SunkCostParams<T>) -> Result<T> {
    if !(params.alpha > T::zero()) {
        return Err(Error::Precondition("alpha must be > 0".into()));
    }
    if !(params.investment >= T::zero()) {
        return Err(Error::Precondition("investment must be >= 0".into()));
    }
    let f = match params.transform {
        InvestmentTransform::Log1p => params.investment.ln_1p(),
    };
    Ok(expected_benefit - cost + params.alpha * f)
}

/// Mitigation: history carries no weight.
pub fn reset_sunk_cost<T: Scalar>(expected_benefit: T, cost: T) -> T {
    expected_benefit - cost
}
