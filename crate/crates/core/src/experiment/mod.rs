//! Trial runner and the metrics behind the reports.

mod report;
pub mod stats;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::{
    AnchorPoint, MemoryPolicy, MemoryStore, NegotiationResult, OutcomeSummary, Query, RetrievalWeights,
    StrategyRecord,
};
use crate::negotiation::{
    fixed_anchor, randomized_anchor, run_negotiation, AnchorStrategy, LlmAdapter, LlmConfig, NegotiationOutcome,
    Policy, PolicyHooks, Precedent, Proposal, ScriptedPolicy, Session,
};
use crate::scenario::{ScenarioConfig, ScenarioKind, SliceId};
use crate::twin::{Perturbation, TwinState};

pub use report::{emit_report, read_json, write_csv, write_json, write_plot_script, write_retrievals_csv, CSV_VERSION};

/// Everything that selects one run besides the scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub trials: u64,
    pub seed: u64,
    pub anchor_strategy: AnchorStrategy,
    pub memory: MemoryPolicy,
    /// External model endpoint; scripted agents when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm_endpoint: Option<String>,
}

impl RunSpec {
    pub fn new(trials: u64, seed: u64, anchor_strategy: AnchorStrategy, memory: MemoryPolicy) -> Self {
        Self {
            trials,
            seed,
            anchor_strategy,
            memory,
            llm_endpoint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalEntry {
    pub record_id: String,
    pub was_failure: bool,
    pub age: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub scenario: ScenarioKind,
    pub anchor_strategy: AnchorStrategy,
    pub memory_policy: MemoryPolicy,
    pub result: NegotiationResult,
    pub rounds_used: u32,
    /// True when the status quo was enforced because talks failed.
    pub fallback: bool,
    pub eta: f64,
    pub anchors: BTreeMap<SliceId, f64>,
    /// Enforced allocation: the agreement, or the status quo on fallback.
    pub allocations: BTreeMap<SliceId, f64>,
    /// `None` when the realized queue did not drain.
    pub latency_ms: Option<f64>,
    pub energy_saving_pct: f64,
    /// `|agreed - anchor|` per agent; empty when no agreement was reached.
    pub distance_from_anchor: BTreeMap<SliceId, f64>,
    pub retrievals: Vec<RetrievalEntry>,
}

/// Output of [`run_trials`].
#[derive(Debug, Clone)]
pub struct Run {
    pub records: Vec<TrialRecord>,
    pub outcomes: Vec<NegotiationOutcome>,
    pub memory: MemoryStore,
}

/// `stream(seed, trial)`: every trial draws from its own ChaCha stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn bucket(x: f64, lo: f64, hi: f64) -> &'static str {
    let t = if hi > lo { (x - lo) / (hi - lo) } else { 0.5 };
    if t < 1.0 / 3.0 {
        "low"
    } else if t < 2.0 / 3.0 {
        "mid"
    } else {
        "high"
    }
}

/// Context keywords a trial is filed and queried under.
pub fn trial_keywords(cfg: &ScenarioConfig, state: &TwinState<f64>, traffic_factor: f64) -> Vec<String> {
    let c = &cfg.capacity;
    let sigma = cfg.twin.perturbation_sigma;
    let (lo, hi) = ((-sigma).exp(), sigma.exp());
    let mut kw = vec![cfg.scenario.as_str().to_string()];
    kw.extend(cfg.slices.iter().map(|s| s.id.as_str().to_string()));
    kw.push(format!("traffic{}", bucket(traffic_factor, lo, hi)));
    kw.push(format!(
        "eta{}",
        bucket(state.eta_current, c.eta_min_bits_per_hz, c.eta_max_bits_per_hz)
    ));
    kw
}

/// Per-trial network state: `eta` uniform over its range and every slice's
/// traffic scaled by one draw of the perturbation model.
pub fn sample_state<R: Rng + ?Sized>(cfg: &ScenarioConfig, trial: u64, rng: &mut R) -> (TwinState<f64>, f64) {
    let c = &cfg.capacity;
    let eta = if c.eta_max_bits_per_hz > c.eta_min_bits_per_hz {
        rng.gen_range(c.eta_min_bits_per_hz..=c.eta_max_bits_per_hz)
    } else {
        c.eta_min_bits_per_hz
    };
    let factor = Perturbation {
        sigma: cfg.twin.perturbation_sigma,
    }
    .draw(rng);
    let mut state = TwinState::from_config(cfg, eta).scaled_traffic(factor);
    state.trial_index = trial;
    (state, factor)
}

fn anchors_for<R: Rng + ?Sized>(
    session: &Session<'_>,
    spec: &RunSpec,
    policies: &[ScriptedPolicy; 2],
    precedents: &[Precedent],
    rng: &mut R,
) -> Result<Proposal> {
    let cfg = session.cfg;
    let status_quo = session.status_quo()?;
    if session.is_chain() {
        if spec.memory == MemoryPolicy::None {
            return Ok(status_quo);
        }
        return policies
            .iter()
            .map(|p| Ok((p.agent, p.memory_opening(session, precedents, &status_quo)?)))
            .collect();
    }
    let b_total = cfg.capacity.b_total_mhz;
    session
        .agents()
        .iter()
        .map(|&a| {
            let sla = session.sla(a);
            let v = match spec.anchor_strategy {
                AnchorStrategy::Fixed => fixed_anchor(&session.state, a, sla, b_total)?,
                AnchorStrategy::Randomized => randomized_anchor(&session.state, a, sla, b_total, rng)?,
            };
            Ok((a, v))
        })
        .collect()
}

/// Runs `spec.trials` sequential trials. Memory carries over from trial to
/// trial; everything random in trial `t` comes from `trial_rng(seed, t)`.
pub fn run_trials(cfg: &ScenarioConfig, spec: &RunSpec) -> Result<Run> {
    if spec.trials == 0 {
        return Err(Error::validation("trials", "must be >= 1"));
    }
    let mut memory = MemoryStore::new(spec.memory);
    let mut records = Vec::with_capacity(spec.trials as usize);
    let mut outcomes = Vec::with_capacity(spec.trials as usize);
    let hooks = PolicyHooks::from_config(cfg);

    for trial in 0..spec.trials {
        let mut rng = trial_rng(spec.seed, trial);
        let (state, traffic_factor) = sample_state(cfg, trial, &mut rng);
        let eta = state.eta_current;
        let keywords = trial_keywords(cfg, &state, traffic_factor);
        let session = Session::new(cfg, state, &mut rng);
        let agents = session.agents();
        let opener = agents[0];

        let status_quo = session.status_quo()?;
        let retrieval = match RetrievalWeights::for_policy(&cfg.memory, spec.memory, session.range(opener)) {
            Some(w) => memory.query(
                &Query {
                    trial_number: trial,
                    keywords: keywords.clone(),
                    initial_anchor: Some(AnchorPoint {
                        resource: opener,
                        value: status_quo[&opener],
                    }),
                },
                &w,
            )?,
            None => Default::default(),
        };
        let precedents: Vec<Precedent> = retrieval
            .items
            .iter()
            .map(|m| Precedent {
                allocation: m.record.outcome_summary.final_allocations.clone(),
                failure: m.record.is_failure(),
                age: m.age(trial),
            })
            .collect();

        let scripted = agents.map(|a| ScriptedPolicy::new(a, hooks.clone()));
        let anchors = anchors_for(&session, spec, &scripted, &precedents, &mut rng)?;
        let outcome = match &spec.llm_endpoint {
            None => {
                let [mut a, mut b] = scripted;
                run_negotiation(&session, [&mut a, &mut b], &anchors, &precedents, &mut rng)?
            }
            Some(url) => {
                let [a, b] = scripted;
                let mut a = LlmAdapter::new(LlmConfig::new(url.clone()), a);
                let mut b = LlmAdapter::new(LlmConfig::new(url.clone()), b);
                let policies: [&mut dyn Policy; 2] = [&mut a, &mut b];
                run_negotiation(&session, policies, &anchors, &precedents, &mut rng)?
            }
        };

        let attempted = if outcome.agreed() {
            outcome.final_allocations.clone()
        } else {
            outcome
                .transcript
                .iter()
                .rev()
                .find(|m| !m.proposal.is_empty())
                .map(|m| m.proposal.clone())
                .unwrap_or_default()
        };
        let exec = &outcome.execution;
        memory.record_episode(StrategyRecord::new(
            format!("trial-{trial:05}"),
            trial,
            keywords,
            OutcomeSummary {
                negotiation_result: outcome.result,
                final_allocations: attempted,
                latency_ms: exec.latency_ms,
                energy_saving_pct: Some(exec.energy_saving_pct),
            },
        ))?;

        let distance_from_anchor = outcome
            .final_allocations
            .iter()
            .map(|(a, v)| (*a, (v - outcome.anchors[a]).abs()))
            .collect();
        records.push(TrialRecord {
            trial_index: trial,
            scenario: cfg.scenario,
            anchor_strategy: spec.anchor_strategy,
            memory_policy: spec.memory,
            result: outcome.result,
            rounds_used: outcome.rounds_used,
            fallback: exec.fallback,
            eta,
            anchors: outcome.anchors.clone(),
            allocations: exec.applied.clone(),
            latency_ms: exec.latency_ms,
            energy_saving_pct: exec.energy_saving_pct,
            distance_from_anchor,
            retrievals: retrieval
                .items
                .iter()
                .map(|m| RetrievalEntry {
                    record_id: m.record.id.clone(),
                    was_failure: m.record.is_failure(),
                    age: m.age(trial),
                    score: m.final_score,
                })
                .collect(),
        });
        outcomes.push(outcome);
    }
    Ok(Run {
        records,
        outcomes,
        memory,
    })
}
