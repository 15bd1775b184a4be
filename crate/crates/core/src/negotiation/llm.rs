use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::engine::{AgentView, Policy};
use super::scripted::ScriptedPolicy;
use super::{Intent, NegotiationMessage};
use crate::error::{Error, Result};
use crate::twin::min_bw_for_sla;

/// Environment variable holding the bearer token for the LLM endpoint.
pub const API_KEY_ENV: &str = "BIASNET_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmConfig {
    pub endpoint: String,
    pub timeout: Duration,
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmReply {
    pub proposal_mhz: f64,
    pub reason: String,
}

/// Asks an external model for the agent's next value. Any failure (network,
/// timeout, malformed or out-of-range reply) falls back to the scripted
/// policy and the message reason is tagged `fallback`.
#[derive(Debug)]
pub struct LlmAdapter {
    pub config: LlmConfig,
    pub fallback: ScriptedPolicy,
    agent: ureq::Agent,
}

impl LlmAdapter {
    pub fn new(config: LlmConfig, fallback: ScriptedPolicy) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Self { config, fallback, agent }
    }

    /// Request body sent for `view`.
    pub fn request_body(&self, view: &AgentView<'_>) -> Result<serde_json::Value> {
        let session = view.session;
        let slice = self.fallback.agent;
        let min_bw = match session.cfg.slice(slice) {
            Some(s) if !session.is_chain() => Some(min_bw_for_sla(&session.state, slice, s.sla_latency_ms)?),
            _ => None,
        };
        let load = session.state.load(slice).ok();
        let stage = if view.round <= 1 { "Initial Proposal" } else { "Counter Proposal" };
        let retrievals: Vec<_> = view
            .retrievals
            .iter()
            .map(|r| json!({ "allocation": r.allocation, "failure": r.failure, "age": r.age }))
            .collect();
        Ok(json!({
            "negotiation_stage": stage,
            "slice_id": slice,
            "min_bw_for_sla_mhz": min_bw.map(|m| format!("{m:.2}")),
            "dt_context": {
                "eta_bits_per_hz": session.state.eta_current,
                "traffic_rate_mbps": load.map(|l| l.traffic_rate_mbps),
                "queue_backlog_mb": load.map(|l| l.queue_backlog_mb),
            },
            "initial_proposal_mhz": format!("{:.2}", view.own_anchor),
            "standing_proposal": view.standing,
            "round": view.round,
            "max_rounds": view.max_rounds,
            "retrievals": retrievals,
        }))
    }

    fn ask(&self, view: &AgentView<'_>) -> Result<LlmReply> {
        let body = self.request_body(view)?;
        let mut req = self.agent.post(&self.config.endpoint);
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = req.send_json(body).map_err(|e| Error::Adapter(e.to_string()))?;
        let reply: LlmReply = resp
            .into_json()
            .map_err(|e| Error::Adapter(format!("malformed reply: {e}")))?;
        let cap = view.session.cap(self.fallback.agent, view.standing);
        if !(reply.proposal_mhz.is_finite() && reply.proposal_mhz >= 0.0 && reply.proposal_mhz <= cap) {
            return Err(Error::Adapter(format!(
                "proposal {} outside [0, {cap:.2}]",
                reply.proposal_mhz
            )));
        }
        Ok(reply)
    }
}

impl Policy for LlmAdapter {
    fn step(&mut self, view: &AgentView<'_>) -> Result<NegotiationMessage> {
        let agent = self.fallback.agent;
        match self.ask(view) {
            Ok(reply) => {
                let mut proposal = view.standing.clone();
                proposal.insert(agent, reply.proposal_mhz);
                let intent = if &proposal == view.standing && view.session.feasible(&proposal)? {
                    Intent::Confirm
                } else {
                    Intent::Propose
                };
                Ok(NegotiationMessage::new(intent, agent, view.round, proposal, reply.reason))
            }
            Err(e) => {
                let mut msg = self.fallback.step(view)?;
                msg.reason = format!("fallback ({e}): {}", msg.reason);
                Ok(msg)
            }
        }
    }
}
