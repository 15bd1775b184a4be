//! Groupthink: consensus-regularized joint choice,
//! `min sum_i L_i(a_i) + lambda * sum_i (a_i - mean(a))^2`,
//! with quadratic per-agent losses `L_i(a) = c_i / 2 * (a - m_i)^2`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticLoss<T> {
    pub curvature: T,
    pub minimizer: T,
}

impl<T: Scalar> QuadraticLoss<T> {
    pub fn value(&self, a: T) -> T {
        let d = a - self.minimizer;
        T::lit(0.5) * self.curvature * d * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusParams<T> {
    pub lambda: T,
    pub max_iters: usize,
    pub tol: T,
}

/// Block-coordinate descent: one block per agent (exact coordinate
/// minimization) plus a common-mode block that shifts every action by the
/// same amount. The common-mode block is what keeps convergence fast when
/// `lambda` dwarfs the curvatures.
pub fn groupthink_consensus<T: Scalar>(losses: &[QuadraticLoss<T>], params: &ConsensusParams<T>) -> Result<Vec<T>> {
    if !(params.lambda >= T::zero()) {
        return Err(Error::Precondition("lambda must be >= 0".into()));
    }
    if losses.iter().any(|l| !(l.curvature > T::zero())) {
        return Err(Error::Precondition("each loss needs positive curvature".into()));
    }
    let n = losses.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = T::lit(n as f64);
    let two = T::lit(2.0);
    let mut a: Vec<T> = losses.iter().map(|l| l.minimizer).collect();
    let c_total: T = losses.iter().map(|l| l.curvature).sum();
    let scale = a.iter().fold(T::one(), |m, x| m.max(x.abs()));

    for _ in 0..params.max_iters {
        let mut moved = T::zero();
        for i in 0..n {
            let others: T = a.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).sum();
            let l = &losses[i];
            let coupling = two * params.lambda * (nf - T::one()) / nf;
            let next = (l.curvature * l.minimizer + two * params.lambda * others / nf) / (l.curvature + coupling);
            moved = moved.max((next - a[i]).abs());
            a[i] = next;
        }
        let grad: T = losses.iter().zip(&a).map(|(l, x)| l.curvature * (*x - l.minimizer)).sum();
        let shift = -grad / c_total;
        if shift != T::zero() {
            for x in a.iter_mut() {
                *x = *x + shift;
            }
            moved = moved.max(shift.abs());
        }
        if moved <= params.tol * scale {
            return Ok(a);
        }
    }
    Err(Error::NonConvergence(
        "groupthink consensus".into(),
        params.max_iters,
        a.iter().map(|x| x.to_f64_lossy()).collect(),
    ))
}

/// Spread of the joint action, `sum_i (a_i - mean(a))^2`.
pub fn dispersion<T: Scalar>(a: &[T]) -> T {
    if a.is_empty() {
        return T::zero();
    }
    let mean = a.iter().copied().sum::<T>() / T::lit(a.len() as f64);
    a.iter().map(|x| (*x - mean) * (*x - mean)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn losses(ms: &[f64]) -> Vec<QuadraticLoss<f64>> {
        ms.iter().map(|&m| QuadraticLoss { curvature: 1.0, minimizer: m }).collect()
    }

    fn params(lambda: f64) -> ConsensusParams<f64> {
        ConsensusParams { lambda, max_iters: 10_000, tol: 1e-12 }
    }

    #[test]
    fn decoupled_agents_keep_their_minimizers() {
        assert_eq!(groupthink_consensus(&losses(&[1.0, 3.0, 8.0]), &params(0.0)).unwrap(), vec![1.0, 3.0, 8.0]);
    }

    #[test]
    fn strong_conformity_collapses_to_the_mean() {
        let a = groupthink_consensus(&losses(&[1.0, 3.0, 8.0]), &params(1e6)).unwrap();
        for x in a {
            assert!((x - 4.0).abs() < 1e-3, "{x}");
        }
    }

    #[test]
    fn single_agent_is_unaffected() {
        for lambda in [0.0, 1.0, 1e6] {
            assert_eq!(groupthink_consensus(&losses(&[2.5]), &params(lambda)).unwrap(), vec![2.5]);
        }
    }

    #[test]
    fn non_convergence_carries_the_iterate() {
        let p = ConsensusParams { lambda: 1.0, max_iters: 1, tol: 0.0 };
        match groupthink_consensus(&losses(&[1.0, 3.0, 8.0]), &p) {
            Err(Error::NonConvergence(_, 1, iterate)) => assert_eq!(iterate.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
