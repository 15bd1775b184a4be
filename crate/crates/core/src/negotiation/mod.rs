//! Two-agent negotiation: anchors, the message protocol and its engine, the
//! scripted twin-grounded policy and an adapter for an external LLM service.

mod anchors;
mod engine;
mod llm;
mod scripted;
mod session;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::NegotiationResult;
use crate::scenario::{SliceId, UtilityWeights};
use crate::twin::{CostVector, Latency};

pub use anchors::{fixed_anchor, random_anchor_bound, randomized_anchor};
pub use engine::{run_negotiation, AgentView, Execution, Policy, Precedent};
pub use llm::{LlmAdapter, LlmConfig, LlmReply, API_KEY_ENV};
pub use scripted::{PolicyHooks, ScriptedPolicy};
pub use scripted::Plan;
pub use session::{agent_pair, Session};

/// Joint proposal: one value per negotiating agent (MHz, or GHz for the edge).
pub type Proposal = BTreeMap<SliceId, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Propose,
    CounterPropose,
    Confirm,
    Reject,
    Commit,
    Explain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationMessage {
    pub intent: Intent,
    pub sender: SliceId,
    pub round: u32,
    pub proposal: Proposal,
    pub reason: String,
}

impl NegotiationMessage {
    pub fn new(intent: Intent, sender: SliceId, round: u32, proposal: Proposal, reason: impl Into<String>) -> Self {
        Self {
            intent,
            sender,
            round,
            proposal,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationOutcome {
    pub result: NegotiationResult,
    /// Agreed allocation; empty when talks failed.
    pub final_allocations: Proposal,
    /// Round of the confirmation that closed the deal, or the last round played.
    pub rounds_used: u32,
    pub anchors: BTreeMap<SliceId, f64>,
    /// Utilities of the agreed proposal, recomputed by the engine.
    pub utilities: BTreeMap<SliceId, f64>,
    pub transcript: Vec<NegotiationMessage>,
    /// What was enforced (agreement or fallback) and how it performed.
    pub execution: Execution,
    /// Set when a policy error or malformed message ended the session.
    pub abort_reason: Option<String>,
}

impl NegotiationOutcome {
    pub fn agreed(&self) -> bool {
        !self.final_allocations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorStrategy {
    Fixed,
    Randomized,
}

impl AnchorStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            AnchorStrategy::Fixed => "fixed",
            AnchorStrategy::Randomized => "randomized",
        }
    }
}

impl fmt::Display for AnchorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnchorStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(AnchorStrategy::Fixed),
            "randomized" => Ok(AnchorStrategy::Randomized),
            other => Err(Error::validation("anchor_strategy", format!("unknown strategy `{other}`"))),
        }
    }
}

/// Weighted scalarization of a cost vector into [0, 1]:
/// `w_L * clip((sla - L) / sla) + w_E * ES / 100 + w_F * F + w_R * (1 - R)`.
/// An infeasible latency is worth nothing.
pub fn utility(cost: &CostVector<f64>, sla_ms: f64, weights: &UtilityWeights) -> f64 {
    let latency = match cost.latency {
        Latency::Ms(l) => l,
        Latency::Infeasible => return 0.0,
    };
    let margin = ((sla_ms - latency) / sla_ms).clamp(0.0, 1.0);
    weights.latency() * margin
        + weights.energy() * (cost.energy_saving / 100.0).clamp(0.0, 1.0)
        + weights.fairness() * cost.fairness.clamp(0.0, 1.0)
        + weights.risk() * (1.0 - cost.risk.clamp(0.0, 1.0))
}
