//! Summary statistics over trial records.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::TrialRecord;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn sorted<T: Scalar>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::Empty("statistics need at least one value"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Precondition("NaN in sample".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(v)
}

/// Right-continuous empirical CDF as `(value, F(value))` at each distinct value.
pub fn cdf<T: Scalar>(values: &[T]) -> Result<Vec<(T, T)>> {
    let v = sorted(values)?;
    let n = T::lit(v.len() as f64);
    let mut out: Vec<(T, T)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let f = T::lit((i + 1) as f64) / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => out.push((x, f)),
        }
    }
    Ok(out)
}

/// Lower median: for even `n` the smaller of the two middle values.
pub fn median<T: Scalar>(values: &[T]) -> Result<T> {
    let v = sorted(values)?;
    Ok(v[(v.len() - 1) / 2])
}

/// Mean and population standard deviation.
pub fn mean_sd<T: Scalar>(values: &[T]) -> Result<(T, T)> {
    if values.is_empty() {
        return Err(Error::Empty("statistics need at least one value"));
    }
    let n = T::lit(values.len() as f64);
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    Ok((mean, var.sqrt()))
}

/// Share of values strictly above `threshold`.
pub fn fraction_above<T: Scalar>(values: &[T], threshold: T) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Empty("statistics need at least one value"));
    }
    let k = values.iter().filter(|&&v| v > threshold).count();
    Ok(T::lit(k as f64) / T::lit(values.len() as f64))
}

/// Successes per failure among all logged retrievals; `f64::INFINITY`
/// when no failure was retrieved.
pub fn retrieval_ratio(records: &[TrialRecord]) -> Result<f64> {
    let (mut ok, mut bad) = (0usize, 0usize);
    for r in records.iter().flat_map(|t| &t.retrievals) {
        if r.was_failure {
            bad += 1;
        } else {
            ok += 1;
        }
    }
    if ok + bad == 0 {
        return Err(Error::Empty("no retrievals logged"));
    }
    Ok(if bad == 0 { f64::INFINITY } else { ok as f64 / bad as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeStats {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

/// Mean and population SD of retrieved-record ages, in trials.
pub fn memory_age_stats(records: &[TrialRecord]) -> Result<AgeStats> {
    let ages: Vec<f64> = records
        .iter()
        .flat_map(|t| &t.retrievals)
        .map(|r| r.age as f64)
        .collect();
    let (mean, sd) = mean_sd(&ages).map_err(|_| Error::Empty("no retrievals logged"))?;
    Ok(AgeStats {
        mean,
        sd,
        count: ages.len(),
    })
}

/// Finite realized latencies and the number of trials whose queue diverged.
pub fn latencies(records: &[TrialRecord]) -> (Vec<f64>, usize) {
    let finite: Vec<f64> = records.iter().filter_map(|r| r.latency_ms).collect();
    let infeasible = records.len() - finite.len();
    (finite, infeasible)
}

pub fn energy_savings(records: &[TrialRecord]) -> Vec<f64> {
    records.iter().map(|r| r.energy_saving_pct).collect()
}

/// Anchor distances of agreed trials, pooled over both agents.
pub fn anchor_distances(records: &[TrialRecord]) -> Vec<f64> {
    records
        .iter()
        .flat_map(|r| r.distance_from_anchor.values().copied())
        .collect()
}
