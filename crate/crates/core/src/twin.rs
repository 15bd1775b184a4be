//! Digital twin: a fluid-flow queue model for radio and compute latency, a
//! power-law energy model, and Monte Carlo what-if evaluation used to vet
//! allocations before anyone commits to them.
//!
//! Units: traffic in Mb/s, backlog in Mb, bandwidth in MHz, CPU in GHz,
//! spectral efficiency in bits/Hz/s, latency in ms.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{CapacityConfig, ScenarioConfig, SliceId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceLoad<T> {
    pub traffic_rate_mbps: T,
    pub queue_backlog_mb: T,
}

/// The twin's synchronized view of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinState<T> {
    pub per_slice: BTreeMap<SliceId, SliceLoad<T>>,
    pub eta_current: T,
    pub trial_index: u64,
}

impl<T: Scalar> TwinState<T> {
    /// State seeded from the nominal loads in `cfg`.
    pub fn from_config(cfg: &ScenarioConfig, eta: T) -> Self {
        let per_slice = cfg
            .slices
            .iter()
            .map(|s| {
                (
                    s.id,
                    SliceLoad {
                        traffic_rate_mbps: T::lit(s.traffic_rate_mbps),
                        queue_backlog_mb: T::lit(s.queue_backlog_mb),
                    },
                )
            })
            .collect();
        Self {
            per_slice,
            eta_current: eta,
            trial_index: 0,
        }
    }

    pub fn load(&self, slice: SliceId) -> Result<SliceLoad<T>> {
        self.per_slice
            .get(&slice)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("twin has no state for slice `{slice}`")))
    }

    /// Multiplies every traffic rate by `factor`.
    pub fn scaled_traffic(&self, factor: T) -> Self {
        let mut s = self.clone();
        for load in s.per_slice.values_mut() {
            load.traffic_rate_mbps = load.traffic_rate_mbps * factor;
        }
        s
    }
}

/// Capacity figures in the scalar type of the kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity<T> {
    pub b_total_mhz: T,
    pub b_max_mhz: T,
    pub f_max_ghz: T,
    pub eta_min: T,
    pub eta_max: T,
    pub cycles_per_bit: T,
}

impl<T: Scalar> Capacity<T> {
    pub fn from_config(c: &CapacityConfig) -> Self {
        Self {
            b_total_mhz: T::lit(c.b_total_mhz),
            b_max_mhz: T::lit(c.b_max_mhz),
            f_max_ghz: T::lit(c.f_max_ghz),
            eta_min: T::lit(c.eta_min_bits_per_hz),
            eta_max: T::lit(c.eta_max_bits_per_hz),
            cycles_per_bit: T::lit(c.cycles_per_bit),
        }
    }
}

/// Predicted latency in milliseconds, or `Infeasible` when the queue never drains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Latency<T> {
    Ms(T),
    Infeasible,
}

impl<T: Scalar> Latency<T> {
    pub fn ms(self) -> Option<T> {
        match self {
            Latency::Ms(v) => Some(v),
            Latency::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, Latency::Ms(_))
    }

    /// True when finite and at most `sla`.
    pub fn meets(self, sla: T) -> bool {
        matches!(self, Latency::Ms(v) if v <= sla)
    }

    fn add(self, other: Self) -> Self {
        match (self, other) {
            (Latency::Ms(a), Latency::Ms(b)) => Latency::Ms(a + b),
            _ => Latency::Infeasible,
        }
    }
}

/// Radio queue latency `Q / (B * eta - lambda)` in ms.
pub fn queue_latency<T: Scalar>(load: SliceLoad<T>, bandwidth_mhz: T, eta: T) -> Result<Latency<T>> {
    if !(bandwidth_mhz >= T::zero()) {
        return Err(Error::Precondition(format!("bandwidth must be >= 0, got {bandwidth_mhz}")));
    }
    let service = bandwidth_mhz * eta;
    let drain = service - load.traffic_rate_mbps;
    if drain <= T::zero() {
        return Ok(Latency::Infeasible);
    }
    Ok(Latency::Ms(load.queue_backlog_mb / drain * T::lit(1e3)))
}

/// Compute-stage latency: the backlog's cycles drained by whatever CPU
/// capacity the arrivals leave free, `c * Q / (f - c * lambda)`, in ms.
pub fn compute_latency<T: Scalar>(load: SliceLoad<T>, cpu_ghz: T, cycles_per_bit: T) -> Result<Latency<T>> {
    if !(cpu_ghz > T::zero()) {
        return Err(Error::Precondition(format!("cpu frequency must be > 0, got {cpu_ghz}")));
    }
    let mega = T::lit(1e6);
    let spare = cpu_ghz * T::lit(1e9) - cycles_per_bit * load.traffic_rate_mbps * mega;
    if spare <= T::zero() {
        return Ok(Latency::Infeasible);
    }
    Ok(Latency::Ms(cycles_per_bit * load.queue_backlog_mb * mega / spare * T::lit(1e3)))
}

/// Latency of one slice given its bandwidth and, optionally, the CPU serving it.
pub fn predict_latency<T: Scalar>(
    state: &TwinState<T>,
    slice: SliceId,
    bandwidth_mhz: T,
    cpu_ghz: Option<T>,
    cycles_per_bit: T,
) -> Result<Latency<T>> {
    let load = state.load(slice)?;
    let radio = queue_latency(load, bandwidth_mhz, state.eta_current)?;
    match cpu_ghz {
        None => Ok(radio),
        Some(f) => Ok(radio.add(compute_latency(load, f, cycles_per_bit)?)),
    }
}

/// End-to-end latency of the RAN/edge chain: radio queue on the RAN load
/// plus compute on the edge load.
pub fn predict_chain_latency<T: Scalar>(
    state: &TwinState<T>,
    bandwidth_mhz: T,
    cpu_ghz: T,
    cycles_per_bit: T,
) -> Result<Latency<T>> {
    let radio = queue_latency(state.load(SliceId::Ran)?, bandwidth_mhz, state.eta_current)?;
    let compute = compute_latency(state.load(SliceId::Edge)?, cpu_ghz, cycles_per_bit)?;
    Ok(radio.add(compute))
}

/// Energy saving in percent: linear in bandwidth, cubic in CPU frequency,
/// averaged over the components present.
pub fn predict_energy_saving<T: Scalar>(
    bandwidth_mhz: Option<T>,
    cpu_ghz: Option<T>,
    caps: &Capacity<T>,
) -> Result<T> {
    let hundred = T::lit(100.0);
    let mut parts = Vec::with_capacity(2);
    if let Some(b) = bandwidth_mhz {
        let slack = caps.b_max_mhz * T::rel_eps();
        if !(b >= T::zero() && b <= caps.b_max_mhz + slack) {
            return Err(Error::Precondition(format!("bandwidth {b} outside [0, {}]", caps.b_max_mhz)));
        }
        parts.push((T::one() - (b / caps.b_max_mhz).min(T::one())) * hundred);
    }
    if let Some(f) = cpu_ghz {
        let slack = caps.f_max_ghz * T::rel_eps();
        if !(f > T::zero() && f <= caps.f_max_ghz + slack) {
            return Err(Error::Precondition(format!("cpu {f} outside (0, {}]", caps.f_max_ghz)));
        }
        let r = (f / caps.f_max_ghz).min(T::one());
        parts.push((T::one() - r * r * r) * hundred);
    }
    if parts.is_empty() {
        return Err(Error::Precondition("no allocation component given".into()));
    }
    let n = T::lit(parts.len() as f64);
    Ok(parts.into_iter().sum::<T>() / n)
}

/// Smallest bandwidth meeting the slice's SLA at the current spectral
/// efficiency: `(Q / L_sla + lambda) / eta`.
pub fn min_bw_for_sla<T: Scalar>(state: &TwinState<T>, slice: SliceId, sla_latency_ms: T) -> Result<T> {
    if !(sla_latency_ms > T::zero()) {
        return Err(Error::Precondition("sla latency must be > 0".into()));
    }
    let load = state.load(slice)?;
    let eta = state.eta_current;
    if load.traffic_rate_mbps == T::zero() && load.queue_backlog_mb == T::zero() {
        return Ok(T::zero());
    }
    let needed_rate = load.queue_backlog_mb / (sla_latency_ms / T::lit(1e3)) + load.traffic_rate_mbps;
    let mut bw = needed_rate / eta;
    // Rounding (or an empty queue, where the infimum sits exactly on the
    // stability boundary) can leave the closed form a hair short.
    let mut step = bw.abs().max(T::one()) * T::epsilon();
    for _ in 0..64 {
        if queue_latency(load, bw, eta)?.meets(sla_latency_ms) {
            break;
        }
        bw = bw + step;
        step = step + step;
    }
    Ok(bw)
}

/// One allocation under evaluation: MHz for radio slices, GHz for `Edge`.
pub type Allocation<T> = BTreeMap<SliceId, T>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation<T> {
    /// Sigma of the multiplicative lognormal factor on traffic.
    pub sigma: T,
}

impl<T: Scalar> Perturbation<T> {
    pub fn none() -> Self {
        Self { sigma: T::zero() }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        if self.sigma == T::zero() {
            return T::one();
        }
        let z: f64 = rng.sample(StandardNormal);
        (self.sigma * T::lit(z)).exp()
    }
}

/// `[latency, energy saving, fairness, risk]` of an allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostVector<T> {
    pub latency: Latency<T>,
    pub energy_saving: T,
    pub fairness: T,
    pub risk: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceOutcome<T> {
    /// Mean over feasible draws; `Infeasible` when no draw was feasible.
    pub latency: Latency<T>,
    pub sla_ms: T,
    pub risk: T,
    /// Latency components attributable to this slice's own resource.
    pub own_latency: Latency<T>,
    pub samples: Vec<Latency<T>>,
}

impl<T: Scalar> SliceOutcome<T> {
    /// `clip((sla - latency) / sla, 0, 1)`; zero when infeasible.
    pub fn margin(&self) -> T {
        margin_ratio(self.own_latency, self.sla_ms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub cost: CostVector<T>,
    pub per_slice: BTreeMap<SliceId, SliceOutcome<T>>,
}

pub fn margin_ratio<T: Scalar>(latency: Latency<T>, sla: T) -> T {
    match latency {
        Latency::Ms(l) => ((sla - l) / sla).max(T::zero()).min(T::one()),
        Latency::Infeasible => T::zero(),
    }
}

/// Jain's index `(sum x)^2 / (n * sum x^2)`; zero when every entry is zero.
pub fn jain_index<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let s: T = xs.iter().copied().sum();
    let sq: T = xs.iter().map(|x| *x * *x).sum();
    if sq == T::zero() {
        return T::zero();
    }
    let n = T::lit(xs.len() as f64);
    (s * s / (n * sq)).min(T::one())
}

/// Twin parameters needed for what-if evaluation.
/// (end-to-end, own stage).
type StageLatency<T> = (Latency<T>, Latency<T>);

#[derive(Debug, Clone)]
pub struct TwinModel<T> {
    pub caps: Capacity<T>,
    pub sla_ms: BTreeMap<SliceId, T>,
}

impl<T: Scalar> TwinModel<T> {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            caps: Capacity::from_config(&cfg.capacity),
            sla_ms: cfg.slices.iter().map(|s| (s.id, T::lit(s.sla_latency_ms))).collect(),
        }
    }

    fn sla(&self, slice: SliceId) -> Result<T> {
        self.sla_ms
            .get(&slice)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("no SLA for slice `{slice}`")))
    }

    /// Latency per slice with every traffic rate scaled by `factor`. The pair
    /// is (end-to-end latency, latency of the slice's own stage).
    fn realize(
        &self,
        state: &TwinState<T>,
        alloc: &Allocation<T>,
        factor: T,
    ) -> Result<BTreeMap<SliceId, StageLatency<T>>> {
        let load = |slice| -> Result<SliceLoad<T>> {
            let mut l = state.load(slice)?;
            l.traffic_rate_mbps = l.traffic_rate_mbps * factor;
            Ok(l)
        };
        let mut out = BTreeMap::new();
        if let (Some(&bw), Some(&cpu)) = (alloc.get(&SliceId::Ran), alloc.get(&SliceId::Edge)) {
            let radio = queue_latency(load(SliceId::Ran)?, bw, state.eta_current)?;
            let compute = compute_latency(load(SliceId::Edge)?, cpu, self.caps.cycles_per_bit)?;
            let chain = radio.add(compute);
            out.insert(SliceId::Ran, (chain, radio));
            out.insert(SliceId::Edge, (chain, compute));
        } else {
            for (&slice, &bw) in alloc {
                let l = queue_latency(load(slice)?, bw, state.eta_current)?;
                out.insert(slice, (l, l));
            }
        }
        Ok(out)
    }

    /// Energy saving of a whole allocation. Radio slices are pooled against
    /// `b_max`; the edge contributes its CPU term.
    pub fn energy_saving(&self, alloc: &Allocation<T>) -> Result<T> {
        let bw: T = alloc
            .iter()
            .filter(|(id, _)| **id != SliceId::Edge)
            .map(|(_, v)| *v)
            .sum();
        predict_energy_saving(Some(bw), alloc.get(&SliceId::Edge).copied(), &self.caps)
    }

    fn check_allocation(&self, alloc: &Allocation<T>) -> Result<()> {
        if alloc.is_empty() {
            return Err(Error::Precondition("empty allocation".into()));
        }
        let mut bw = T::zero();
        for (&slice, &v) in alloc {
            if !(v >= T::zero()) {
                return Err(Error::Precondition(format!("negative allocation for `{slice}`")));
            }
            if slice == SliceId::Edge {
                if v > self.caps.f_max_ghz * (T::one() + T::rel_eps()) {
                    return Err(Error::Precondition(format!("cpu {v} exceeds f_max")));
                }
            } else {
                bw = bw + v;
            }
        }
        let cap = self.caps.b_total_mhz.min(self.caps.b_max_mhz);
        if bw > cap * (T::one() + T::rel_eps()) {
            return Err(Error::Precondition(format!("bandwidth {bw} exceeds cap {cap}")));
        }
        Ok(())
    }

    /// Monte Carlo what-if over `horizon` perturbed traffic draws.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        state: &TwinState<T>,
        alloc: &Allocation<T>,
        horizon: usize,
        perturbation: Perturbation<T>,
        rng: &mut R,
    ) -> Result<Evaluation<T>> {
        if horizon == 0 {
            return Err(Error::Precondition("horizon must be >= 1".into()));
        }
        let factors: Vec<T> = (0..horizon).map(|_| perturbation.draw(rng)).collect();
        self.evaluate(state, alloc, &factors)
    }

    /// Monte Carlo evaluation over caller-supplied traffic factors, so that
    /// several candidates can be compared on common random numbers.
    pub fn evaluate(&self, state: &TwinState<T>, alloc: &Allocation<T>, factors: &[T]) -> Result<Evaluation<T>> {
        self.check_allocation(alloc)?;
        if factors.is_empty() {
            return Err(Error::Precondition("horizon must be >= 1".into()));
        }
        let horizon = factors.len();
        let energy_saving = self.energy_saving(alloc)?;
        let nominal = self.realize(state, alloc, T::one())?;

        let mut draws: BTreeMap<SliceId, Vec<Latency<T>>> = BTreeMap::new();
        let mut any_violation = 0usize;
        let mut worst_mean = T::zero();
        let mut worst_n = 0usize;
        for &factor in factors {
            let realized = self.realize(state, alloc, factor)?;
            let mut violated = false;
            let mut worst: Option<T> = Some(T::zero());
            for (&slice, &(l, _)) in &realized {
                let sla = self.sla(slice)?;
                if !l.meets(sla) {
                    violated = true;
                }
                worst = match (worst, l.ms()) {
                    (Some(w), Some(v)) => Some(w.max(v)),
                    _ => None,
                };
                draws.entry(slice).or_default().push(l);
            }
            if violated {
                any_violation += 1;
            }
            if let Some(w) = worst {
                worst_n += 1;
                worst_mean = worst_mean + (w - worst_mean) / T::lit(worst_n as f64);
            }
        }

        let h = T::lit(horizon as f64);
        let mut per_slice = BTreeMap::new();
        for (slice, samples) in draws {
            let sla = self.sla(slice)?;
            let (own_nominal, latency) = {
                let (_, own) = nominal[&slice];
                let feasible: Vec<T> = samples.iter().filter_map(|l| l.ms()).collect();
                let mean = if feasible.is_empty() {
                    Latency::Infeasible
                } else {
                    Latency::Ms(running_mean(&feasible))
                };
                (own, mean)
            };
            let bad = samples.iter().filter(|l| !l.meets(sla)).count();
            per_slice.insert(
                slice,
                SliceOutcome {
                    latency,
                    sla_ms: sla,
                    risk: T::lit(bad as f64) / h,
                    own_latency: own_nominal,
                    samples,
                },
            );
        }
        let margins: Vec<T> = per_slice.values().map(|o| o.margin()).collect();
        let cost = CostVector {
            latency: if worst_n == 0 {
                Latency::Infeasible
            } else {
                Latency::Ms(worst_mean)
            },
            energy_saving,
            fairness: jain_index(&margins),
            risk: T::lit(any_violation as f64) / h,
        };
        Ok(Evaluation { cost, per_slice })
    }
}

/// Incremental mean; exact when all inputs are equal.
fn running_mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter()
        .enumerate()
        .fold(T::zero(), |m, (k, &x)| m + (x - m) / T::lit((k + 1) as f64))
}

/// True iff at least a `1 - epsilon` share of samples meet `sla` (inclusive).
pub fn check_chance_constraint<T: Scalar>(samples: &[Latency<T>], sla_ms: T, epsilon: T) -> bool {
    if samples.is_empty() {
        return false;
    }
    let n = samples.len() as f64;
    let bad = samples.iter().filter(|l| !l.meets(sla_ms)).count() as f64;
    bad <= epsilon.to_f64_lossy() * n + 1e-9 * n
}

/// Observed telemetry for [`sync`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Telemetry<T> {
    pub per_slice: BTreeMap<SliceId, SliceLoad<T>>,
    pub eta: Option<T>,
}

/// Shadows production: traffic is smoothed with an EMA (weight 0.5), backlog
/// is replaced by the observation.
pub fn sync<T: Scalar>(state: &TwinState<T>, observed: &Telemetry<T>) -> Result<TwinState<T>> {
    let half = T::lit(0.5);
    let mut next = state.clone();
    for (&slice, obs) in &observed.per_slice {
        if !(obs.traffic_rate_mbps >= T::zero() && obs.queue_backlog_mb >= T::zero()) {
            return Err(Error::Precondition(format!("negative telemetry for slice `{slice}`")));
        }
        let entry = next.per_slice.entry(slice).or_insert(*obs);
        entry.traffic_rate_mbps = half * entry.traffic_rate_mbps + half * obs.traffic_rate_mbps;
        entry.queue_backlog_mb = obs.queue_backlog_mb;
    }
    if let Some(eta) = observed.eta {
        if !(eta > T::zero()) {
            return Err(Error::Precondition("observed eta must be > 0".into()));
        }
        next.eta_current = eta;
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(q: f64, lambda: f64, eta: f64) -> TwinState<f64> {
        let mut per_slice = BTreeMap::new();
        per_slice.insert(
            SliceId::Urllc,
            SliceLoad {
                traffic_rate_mbps: lambda,
                queue_backlog_mb: q,
            },
        );
        TwinState {
            per_slice,
            eta_current: eta,
            trial_index: 0,
        }
    }

    fn caps() -> Capacity<f64> {
        Capacity::from_config(&ScenarioConfig::uc2_default().capacity)
    }

    #[test]
    fn queue_latency_hand_computed() {
        // mu = 10 * 7 = 70 Mb/s; 0.1 Mb / 20 Mb/s = 5 ms
        let l = predict_latency(&state(0.1, 50.0, 7.0), SliceId::Urllc, 10.0, None, 100.0).unwrap();
        assert_eq!(l, Latency::Ms(5.0));
    }

    #[test]
    fn zero_drain_is_infeasible() {
        let l = predict_latency(&state(0.1, 70.0, 7.0), SliceId::Urllc, 10.0, None, 100.0).unwrap();
        assert_eq!(l, Latency::Infeasible);
    }

    #[test]
    fn empty_queue_has_zero_latency() {
        let l = predict_latency(&state(0.0, 10.0, 7.0), SliceId::Urllc, 10.0, None, 100.0).unwrap();
        assert_eq!(l, Latency::Ms(0.0));
    }

    #[test]
    fn negative_bandwidth_is_rejected() {
        assert!(predict_latency(&state(0.1, 50.0, 7.0), SliceId::Urllc, -1.0, None, 100.0).is_err());
    }

    #[test]
    fn compute_stage_adds_latency() {
        // cycles: 100 * 0.1e6 = 1e7; spare: 45e9 - 100 * 50e6 = 40e9 -> 0.25 ms
        let l = predict_latency(&state(0.1, 50.0, 7.0), SliceId::Urllc, 10.0, Some(45.0), 100.0).unwrap();
        assert!((l.ms().unwrap() - 5.25).abs() < 1e-12);
    }

    #[test]
    fn energy_saving_examples() {
        let c = caps();
        assert_eq!(predict_energy_saving(Some(c.b_max_mhz), None, &c).unwrap(), 0.0);
        assert_eq!(predict_energy_saving(Some(c.b_max_mhz / 2.0), None, &c).unwrap(), 50.0);
        assert_eq!(predict_energy_saving(None, Some(c.f_max_ghz / 2.0), &c).unwrap(), 87.5);
        let both = predict_energy_saving(Some(c.b_max_mhz), Some(c.f_max_ghz / 2.0), &c).unwrap();
        assert_eq!(both, 43.75);
        assert!(predict_energy_saving::<f64>(None, None, &c).is_err());
    }

    #[test]
    fn energy_saving_rejects_over_cap() {
        let c = caps();
        assert!(predict_energy_saving(Some(c.b_max_mhz + 1.0), None, &c).is_err());
        assert!(predict_energy_saving(Some(1.0), Some(c.f_max_ghz * 2.0), &c).is_err());
    }

    #[test]
    fn min_bw_examples() {
        let b = min_bw_for_sla(&state(0.1, 50.0, 7.0), SliceId::Urllc, 10.0).unwrap();
        assert!((b - 60.0 / 7.0).abs() < 1e-9);
        let b = min_bw_for_sla(&state(0.1, 50.0, 7.0), SliceId::Urllc, 50.0).unwrap();
        assert!((b - 52.0 / 7.0).abs() < 1e-9);
        assert_eq!(min_bw_for_sla(&state(0.0, 0.0, 7.0), SliceId::Urllc, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn min_bw_with_empty_queue_is_strictly_stable() {
        let s = state(0.0, 50.0, 7.0);
        let b = min_bw_for_sla(&s, SliceId::Urllc, 10.0).unwrap();
        assert!(predict_latency(&s, SliceId::Urllc, b, None, 100.0).unwrap().meets(10.0));
    }

    #[test]
    fn chance_constraint_boundaries() {
        let mk = |ok: usize, n: usize| -> Vec<Latency<f64>> {
            (0..n).map(|i| if i < ok { Latency::Ms(1.0) } else { Latency::Ms(20.0) }).collect()
        };
        assert!(check_chance_constraint(&mk(100, 100), 10.0, 0.05));
        assert!(!check_chance_constraint(&mk(94, 100), 10.0, 0.05));
        assert!(check_chance_constraint(&mk(95, 100), 10.0, 0.05));
    }

    #[test]
    fn sync_examples() {
        let mut s = state(0.1, 50.0, 7.0);
        let obs = |rate: f64| Telemetry {
            per_slice: [(SliceId::Urllc, SliceLoad { traffic_rate_mbps: rate, queue_backlog_mb: 0.2 })].into(),
            eta: None,
        };
        let same = sync(&s, &obs(50.0)).unwrap();
        assert_eq!(same.per_slice[&SliceId::Urllc].traffic_rate_mbps, 50.0);
        assert_eq!(same.per_slice[&SliceId::Urllc].queue_backlog_mb, 0.2);
        s.per_slice.get_mut(&SliceId::Urllc).unwrap().traffic_rate_mbps = 40.0;
        assert_eq!(sync(&s, &obs(60.0)).unwrap().per_slice[&SliceId::Urllc].traffic_rate_mbps, 50.0);
        assert!(sync(&s, &obs(-1.0)).is_err());
    }

    fn uc1() -> (TwinModel<f64>, TwinState<f64>) {
        let cfg = ScenarioConfig::uc1_default();
        (TwinModel::from_config(&cfg), TwinState::from_config(&cfg, 7.0))
    }

    #[test]
    fn degenerate_monte_carlo_matches_deterministic() {
        let (m, s) = uc1();
        let alloc: Allocation<f64> = [(SliceId::Embb, 35.0), (SliceId::Urllc, 10.0)].into();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = m.simulate(&s, &alloc, 1, Perturbation::none(), &mut rng).unwrap();
        let det = predict_latency(&s, SliceId::Urllc, 10.0, None, 100.0).unwrap();
        assert_eq!(e.per_slice[&SliceId::Urllc].latency, det);
        assert!((e.cost.energy_saving - 10.0).abs() < 1e-12);
        for h in [2, 7, 30] {
            let again = m.simulate(&s, &alloc, h, Perturbation::none(), &mut rng).unwrap();
            assert_eq!(again.cost, e.cost);
        }
    }

    #[test]
    fn certain_violation_has_full_risk() {
        let (m, s) = uc1();
        let alloc: Allocation<f64> = [(SliceId::Embb, 5.0), (SliceId::Urllc, 1.0)].into();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = m.simulate(&s, &alloc, 16, Perturbation { sigma: 0.1 }, &mut rng).unwrap();
        assert_eq!(e.cost.risk, 1.0);
        assert_eq!(e.cost.latency, Latency::Infeasible);
    }

    #[test]
    fn equal_margins_are_perfectly_fair() {
        let mut per_slice = BTreeMap::new();
        let load = SliceLoad { traffic_rate_mbps: 50.0, queue_backlog_mb: 0.1 };
        per_slice.insert(SliceId::Embb, load);
        per_slice.insert(SliceId::Urllc, load);
        let s = TwinState { per_slice, eta_current: 7.0, trial_index: 0 };
        let mut m = uc1().0;
        m.sla_ms.insert(SliceId::Embb, 10.0);
        let alloc: Allocation<f64> = [(SliceId::Embb, 12.0), (SliceId::Urllc, 12.0)].into();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = m.simulate(&s, &alloc, 1, Perturbation::none(), &mut rng).unwrap();
        assert_eq!(e.cost.fairness, 1.0);
    }

    #[test]
    fn empty_allocation_is_rejected() {
        let (m, s) = uc1();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(m.simulate(&s, &Allocation::new(), 1, Perturbation::none(), &mut rng).is_err());
    }

    #[test]
    fn chain_latency_sums_stages() {
        let cfg = ScenarioConfig::uc2_default();
        let s = TwinState::<f64>::from_config(&cfg, 7.0);
        let l = predict_chain_latency(&s, 20.0, 20.0, 100.0).unwrap().ms().unwrap();
        // radio: 0.1 / (140 - 60) s = 1.25 ms; compute: 1e7 / (20e9 - 6e9) s
        assert!((l - (1.25 + 1e7 / 14e9 * 1e3)).abs() < 1e-12);
    }
}
