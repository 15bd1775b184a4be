use std::cell::RefCell;
use std::collections::HashMap;

use rand::Rng;

use super::{utility, Proposal};
use crate::error::{Error, Result};
use crate::scenario::{ScenarioConfig, ScenarioKind, SliceId};
use crate::twin::{check_chance_constraint, CostVector, Evaluation, Perturbation, TwinModel, TwinState};

/// The negotiating agents of a scenario, opener first. The agent guarding
/// the tighter SLA opens.
pub fn agent_pair(kind: ScenarioKind) -> [SliceId; 2] {
    match kind {
        ScenarioKind::Uc1 => [SliceId::Urllc, SliceId::Embb],
        ScenarioKind::Uc2 => [SliceId::Edge, SliceId::Ran],
    }
}

/// Everything an agent may consult while negotiating one trial: the scenario,
/// the synchronized twin state and a fixed set of Monte Carlo traffic factors
/// shared by every what-if in the trial.
#[derive(Debug)]
pub struct Session<'a> {
    pub cfg: &'a ScenarioConfig,
    pub model: TwinModel<f64>,
    pub state: TwinState<f64>,
    factors: Vec<f64>,
    cache: RefCell<HashMap<Vec<u64>, Evaluation<f64>>>,
}

impl<'a> Session<'a> {
    pub fn new<R: Rng + ?Sized>(cfg: &'a ScenarioConfig, state: TwinState<f64>, rng: &mut R) -> Self {
        let p = Perturbation {
            sigma: cfg.twin.perturbation_sigma,
        };
        let factors = (0..cfg.twin.horizon).map(|_| p.draw(rng)).collect();
        Self::with_factors(cfg, state, factors)
    }

    pub fn with_factors(cfg: &'a ScenarioConfig, state: TwinState<f64>, factors: Vec<f64>) -> Self {
        Self {
            cfg,
            model: TwinModel::from_config(cfg),
            state,
            factors,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn is_chain(&self) -> bool {
        self.cfg.scenario == ScenarioKind::Uc2
    }

    /// The two agents, opener first.
    pub fn agents(&self) -> [SliceId; 2] {
        agent_pair(self.cfg.scenario)
    }

    pub fn other(&self, agent: SliceId) -> SliceId {
        let [a, b] = self.agents();
        if agent == a {
            b
        } else {
            a
        }
    }

    pub fn sla(&self, agent: SliceId) -> f64 {
        self.cfg.slice(agent).map(|s| s.sla_latency_ms).unwrap_or(f64::INFINITY)
    }

    pub fn threshold(&self, agent: SliceId) -> f64 {
        self.cfg.threshold_for(agent)
    }

    /// Full range of the resource `agent` negotiates.
    pub fn range(&self, agent: SliceId) -> f64 {
        let c = &self.cfg.capacity;
        match agent {
            SliceId::Edge => c.f_max_ghz,
            SliceId::Ran => c.b_max_mhz,
            SliceId::Embb | SliceId::Urllc => c.b_total_mhz.min(c.b_max_mhz),
        }
    }

    /// Largest value `agent` may claim given the rest of `p`.
    pub fn cap(&self, agent: SliceId, p: &Proposal) -> f64 {
        if self.is_chain() {
            return self.range(agent);
        }
        let other = p.get(&self.other(agent)).copied().unwrap_or(0.0);
        (self.range(agent) - other).max(0.0)
    }

    pub fn within_caps(&self, p: &Proposal) -> bool {
        let agents = self.agents();
        if p.len() != 2 || !agents.iter().all(|a| p.contains_key(a)) {
            return false;
        }
        let tol = 1e-9;
        if p.values().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return false;
        }
        if self.is_chain() {
            p[&SliceId::Ran] <= self.range(SliceId::Ran) + tol
                && p[&SliceId::Edge] > 0.0
                && p[&SliceId::Edge] <= self.range(SliceId::Edge) + tol
        } else {
            p.values().sum::<f64>() <= self.range(agents[0]) + tol
        }
    }

    /// Twin what-if for `p` over the session's traffic factors. Memoized.
    pub fn evaluate(&self, p: &Proposal) -> Result<Evaluation<f64>> {
        if !self.within_caps(p) {
            return Err(Error::Precondition(format!("proposal {p:?} violates capacity")));
        }
        let key: Vec<u64> = p.values().map(|v| v.to_bits()).collect();
        if let Some(e) = self.cache.borrow().get(&key) {
            return Ok(e.clone());
        }
        let e = self.model.evaluate(&self.state, p, &self.factors)?;
        self.cache.borrow_mut().insert(key, e.clone());
        Ok(e)
    }

    fn slice_safe(&self, e: &Evaluation<f64>, slice: SliceId) -> bool {
        e.per_slice
            .get(&slice)
            .map(|o| check_chance_constraint(&o.samples, o.sla_ms, self.cfg.weights.epsilon))
            .unwrap_or(false)
    }

    /// Chance constraint on the agent's own slice.
    pub fn own_safe(&self, agent: SliceId, p: &Proposal) -> Result<bool> {
        Ok(self.slice_safe(&self.evaluate(p)?, agent))
    }

    /// Capacity, every slice's chance constraint and the risk cap.
    pub fn feasible(&self, p: &Proposal) -> Result<bool> {
        if !self.within_caps(p) {
            return Ok(false);
        }
        let e = self.evaluate(p)?;
        Ok(self.agents().iter().all(|&a| self.slice_safe(&e, a)) && e.cost.risk <= self.cfg.weights.r_max)
    }

    /// The cost vector as `agent` sees it: its own latency and risk, the
    /// energy saving it is accountable for, and the joint fairness.
    pub fn agent_cost(&self, agent: SliceId, p: &Proposal, e: &Evaluation<f64>) -> Result<CostVector<f64>> {
        let own = e
            .per_slice
            .get(&agent)
            .ok_or_else(|| Error::Precondition(format!("no outcome for `{agent}`")))?;
        let caps = &self.model.caps;
        let energy_saving = match agent {
            SliceId::Ran => crate::twin::predict_energy_saving(Some(p[&SliceId::Ran]), None, caps)?,
            SliceId::Edge => crate::twin::predict_energy_saving(None, Some(p[&SliceId::Edge]), caps)?,
            _ => e.cost.energy_saving,
        };
        Ok(CostVector {
            latency: own.latency,
            energy_saving,
            fairness: e.cost.fairness,
            risk: own.risk,
        })
    }

    pub fn utility(&self, agent: SliceId, p: &Proposal) -> Result<f64> {
        let e = self.evaluate(p)?;
        let cost = self.agent_cost(agent, p, &e)?;
        Ok(utility(&cost, self.sla(agent), &self.cfg.weights))
    }

    /// Operating point used as the memoryless opening and as the fallback
    /// when talks fail: a fixed fraction of each cap. Shared bandwidth is
    /// split in proportion to the slices' nominal SLA minimums.
    pub fn status_quo(&self) -> Result<Proposal> {
        let q = self.cfg.protocol.status_quo_fraction;
        if self.is_chain() {
            return Ok(self.agents().iter().map(|&a| (a, q * self.range(a))).collect());
        }
        let mins = self
            .agents()
            .iter()
            .map(|&a| Ok((a, crate::twin::min_bw_for_sla(&self.state, a, self.sla(a))?)))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = mins.iter().map(|(_, m)| m).sum();
        let pool = q * self.range(self.agents()[0]);
        Ok(mins
            .into_iter()
            .map(|(a, m)| (a, if total > 0.0 { pool * m / total } else { pool / 2.0 }))
            .collect())
    }

}
