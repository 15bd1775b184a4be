use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Intent, NegotiationMessage, NegotiationOutcome, Proposal, Session};
use crate::error::{Error, Result};
use crate::memory::NegotiationResult;
use crate::scenario::SliceId;
use crate::twin::Perturbation;

/// A retrieved memory as an agent sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct Precedent {
    pub allocation: Proposal,
    pub failure: bool,
    pub age: u64,
}

/// What one agent sees when it is its turn.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'s> {
    pub session: &'s Session<'s>,
    pub agent: SliceId,
    pub round: u32,
    pub max_rounds: u32,
    pub standing: &'s Proposal,
    pub own_anchor: f64,
    /// Memories in retrieval order.
    pub retrievals: &'s [Precedent],
    pub transcript: &'s [NegotiationMessage],
}

pub trait Policy {
    /// The agent's message for this round. Errors abort the session.
    fn step(&mut self, view: &AgentView<'_>) -> Result<NegotiationMessage>;
}

/// The allocation that was enforced after talks ended and how it performed
/// under one perturbed traffic realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Execution {
    pub applied: Proposal,
    pub fallback: bool,
    /// Worst slice (UC1) or end-to-end chain (UC2); `None` if the queue diverged.
    pub latency_ms: Option<f64>,
    pub per_slice_latency_ms: BTreeMap<SliceId, Option<f64>>,
    pub energy_saving_pct: f64,
    pub sla_violated: bool,
}

fn execute<R: Rng + ?Sized>(session: &Session<'_>, applied: Proposal, fallback: bool, rng: &mut R) -> Result<Execution> {
    let factor = Perturbation {
        sigma: session.cfg.twin.perturbation_sigma,
    }
    .draw(rng);
    let e = session.model.evaluate(&session.state, &applied, &[factor])?;
    let per_slice_latency_ms: BTreeMap<_, _> = e.per_slice.iter().map(|(&s, o)| (s, o.samples[0].ms())).collect();
    let sla_violated = e.per_slice.values().any(|o| !o.samples[0].meets(o.sla_ms));
    Ok(Execution {
        applied,
        fallback,
        latency_ms: e.cost.latency.ms(),
        per_slice_latency_ms,
        energy_saving_pct: e.cost.energy_saving,
        sla_violated,
    })
}

/// Checks that a policy's message is well formed for this turn.
fn validate(session: &Session<'_>, msg: &NegotiationMessage, agent: SliceId, round: u32, standing: &Proposal) -> Result<()> {
    if msg.sender != agent {
        return Err(Error::Protocol(format!("`{agent}` sent a message as `{}`", msg.sender)));
    }
    if msg.round != round {
        return Err(Error::Protocol(format!("expected round {round}, got {}", msg.round)));
    }
    match msg.intent {
        Intent::Propose | Intent::CounterPropose => {
            let agents = session.agents();
            let complete = msg.proposal.len() == 2 && agents.iter().all(|a| msg.proposal.contains_key(a));
            if !complete || msg.proposal.values().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Protocol(format!("malformed proposal {:?}", msg.proposal)));
            }
        }
        Intent::Confirm => {
            if &msg.proposal != standing {
                return Err(Error::Protocol("confirmation does not match the standing proposal".into()));
            }
        }
        Intent::Reject | Intent::Explain => {}
        Intent::Commit => {
            return Err(Error::Protocol(format!("intent {:?} is reserved to the engine", msg.intent)));
        }
    }
    Ok(())
}

fn utilities(session: &Session<'_>, p: &Proposal) -> Result<BTreeMap<SliceId, f64>> {
    session.agents().iter().map(|&a| Ok((a, session.utility(a, p)?))).collect()
}

/// True when `p` is an agreement the engine can certify: within capacity,
/// twin-feasible and above every agent's acceptance threshold.
fn certifiable(session: &Session<'_>, p: &Proposal) -> Result<Option<BTreeMap<SliceId, f64>>> {
    if !session.feasible(p)? {
        return Ok(None);
    }
    let u = utilities(session, p)?;
    Ok(u.iter().all(|(&a, &v)| v >= session.threshold(a)).then_some(u))
}

/// Plays one session. The opener's anchor proposal takes round 1; agents
/// then alternate. A confirmation of the standing proposal closes the deal
/// when the engine can certify it, and the commit takes the following round,
/// so a deal must be struck by round `max_rounds - 1`. Rejections and policy
/// errors end the session unresolved; the status quo is then enforced.
pub fn run_negotiation<R: Rng + ?Sized>(
    session: &Session<'_>,
    policies: [&mut dyn Policy; 2],
    anchors: &Proposal,
    retrievals: &[Precedent],
    rng: &mut R,
) -> Result<NegotiationOutcome> {
    let max_rounds = session.cfg.protocol.max_rounds;
    if max_rounds == 0 {
        return Err(Error::Precondition("max_rounds must be >= 1".into()));
    }
    let agents = session.agents();
    for a in agents {
        if !anchors.contains_key(&a) {
            return Err(Error::Precondition(format!("missing anchor for `{a}`")));
        }
    }

    let mut transcript = vec![NegotiationMessage::new(
        Intent::Propose,
        agents[0],
        1,
        anchors.clone(),
        "opening anchor",
    )];
    let mut standing = anchors.clone();
    let mut agreed: Option<(Proposal, BTreeMap<SliceId, f64>, u32)> = None;
    let mut abort_reason = None;
    let mut last_round = 1;

    for round in 2..=max_rounds {
        last_round = round;
        let idx = ((round - 1) % 2) as usize;
        let agent = agents[idx];
        let own_anchor = anchors[&agent];
        let msg = {
            let view = AgentView {
                session,
                agent,
                round,
                max_rounds,
                standing: &standing,
                own_anchor,
                retrievals,
                transcript: &transcript,
            };
            policies[idx]
                .step(&view)
                .and_then(|m| validate(session, &m, agent, round, &standing).map(|_| m))
        };
        let msg = match msg {
            Ok(m) => m,
            Err(e) => {
                abort_reason = Some(e.to_string());
                break;
            }
        };
        let intent = msg.intent;
        transcript.push(msg);
        match intent {
            Intent::Confirm => {
                if round < max_rounds {
                    if let Some(u) = certifiable(session, &standing)? {
                        agreed = Some((standing.clone(), u, round));
                        break;
                    }
                }
            }
            Intent::Propose | Intent::CounterPropose => {
                standing = transcript.last().expect("just pushed").proposal.clone();
            }
            Intent::Reject => break,
            _ => {}
        }
    }

    let status_quo = session.status_quo()?;
    let outcome = match agreed {
        Some((deal, utilities, round)) => {
            transcript.push(NegotiationMessage::new(
                Intent::Commit,
                transcript.last().expect("confirmation present").sender,
                round + 1,
                deal.clone(),
                "commit",
            ));
            let execution = execute(session, deal.clone(), false, rng)?;
            let result = if execution.sla_violated {
                NegotiationResult::AgreementWithSlaViolation
            } else {
                NegotiationResult::AgreementSuccess
            };
            NegotiationOutcome {
                result,
                final_allocations: deal,
                rounds_used: round,
                anchors: anchors.clone(),
                utilities,
                transcript,
                execution,
                abort_reason,
            }
        }
        None => NegotiationOutcome {
            result: NegotiationResult::UnresolvedNegotiation,
            final_allocations: Proposal::new(),
            rounds_used: last_round,
            anchors: anchors.clone(),
            utilities: BTreeMap::new(),
            transcript,
            execution: execute(session, status_quo, true, rng)?,
            abort_reason,
        },
    };
    Ok(outcome)
}
