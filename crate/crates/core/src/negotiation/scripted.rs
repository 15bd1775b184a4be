use std::collections::BTreeMap;

use super::engine::{AgentView, Policy, Precedent};
use super::{Intent, NegotiationMessage, Proposal, Session};
use crate::biases::{
    anchored_choice, automated_action, weighted_estimate, AnchorModel, Candidate, SuggestionHook, TemplateLibrary,
    TemporalWeighting, ToolProposal, Verdict,
};
use crate::error::Result;
use crate::scenario::{CanonicalState, ScenarioConfig, SliceId, Unit};

/// Bias operators wired into a scripted negotiator.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyHooks {
    /// Pull toward the agent's own anchor (`anchored_choice`); 0 disables it.
    pub anchoring_gamma: f64,
    /// Fraction of the way toward its best response an agent moves per turn.
    pub concession_rate: f64,
    /// Twin verification of every candidate before it is emitted.
    pub verify: bool,
    /// Prompt-induced utility shift; `None` for neutral prompts.
    pub suggestion: Option<SuggestionHook<f64>>,
    /// Recency weighting of successful precedents when forming an opening.
    /// `None` opens from the single top-ranked precedent.
    pub temporal: Option<TemporalWeighting<f64>>,
    /// Candidate grid spacing in resource units.
    pub grid_step: f64,
    /// Smallest own-utility gain worth a counter-proposal when the standing
    /// proposal is already acceptable.
    pub min_gain: f64,
    /// Half-width of the excluded neighbourhood around a failed precedent,
    /// as a fraction of the resource range.
    pub failure_radius: f64,
}

impl PolicyHooks {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            anchoring_gamma: cfg.protocol.anchoring_gamma,
            concession_rate: cfg.protocol.concession_rate,
            verify: true,
            suggestion: None,
            temporal: None,
            grid_step: 0.25,
            min_gain: 0.005,
            failure_radius: cfg.memory.sigma_fraction,
        }
    }
}

/// What a scripted agent would do with the standing proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// Candidate values that pass verification and the utility threshold.
    pub acceptable: Vec<f64>,
    /// Best response among `acceptable`.
    pub frontier: Option<f64>,
    pub target: Option<f64>,
    pub choice: Option<f64>,
}

/// Twin-grounded negotiator. Each turn it screens a grid of own values,
/// moves a fraction of the way toward its best response and lets the
/// anchoring hook pull the pick back toward its own opening.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    pub agent: SliceId,
    pub hooks: PolicyHooks,
    templates: TemplateLibrary,
}

fn unit_of(agent: SliceId) -> &'static str {
    if agent == SliceId::Edge {
        "GHz"
    } else {
        "MHz"
    }
}

fn with_value(p: &Proposal, agent: SliceId, x: f64) -> Proposal {
    let mut q = p.clone();
    q.insert(agent, x);
    q
}

/// Values of `agent` in failed precedents.
fn failed_values(retrievals: &[Precedent], agent: SliceId) -> Vec<f64> {
    retrievals
        .iter()
        .filter(|r| r.failure)
        .filter_map(|r| r.allocation.get(&agent).copied())
        .collect()
}

impl ScriptedPolicy {
    pub fn new(agent: SliceId, hooks: PolicyHooks) -> Self {
        Self {
            agent,
            hooks,
            templates: TemplateLibrary::negotiation_default(),
        }
    }

    fn excluded(&self, session: &Session<'_>, x: f64, failed: &[f64]) -> bool {
        let radius = self.hooks.failure_radius * session.range(self.agent);
        failed.iter().any(|f| (x - f).abs() <= radius)
    }

    /// Grid over `[0, upper]` plus every precedent's value below `upper`, the
    /// anchor and the standing value, optionally minus failed neighbourhoods.
    fn candidates(&self, view: &AgentView<'_>, upper: f64, avoid_failures: bool) -> Vec<f64> {
        let session = view.session;
        let step = self.hooks.grid_step;
        let n = (upper / step).floor() as usize;
        let mut xs: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
        xs.push(upper);
        xs.extend(view.retrievals.iter().filter_map(|r| r.allocation.get(&self.agent).copied()));
        xs.retain(|x| *x <= upper);
        xs.push(view.own_anchor);
        if let Some(&x) = view.standing.get(&self.agent) {
            xs.push(x);
        }
        let failed = if avoid_failures {
            failed_values(view.retrievals, self.agent)
        } else {
            Vec::new()
        };
        let mut xs: Vec<f64> = xs
            .into_iter()
            .filter(|x| x.is_finite() && *x >= 0.0)
            .filter(|x| !self.excluded(session, *x, &failed))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// Own-side utility as the agent perceives it, or `None` when the
    /// candidate fails verification or the threshold.
    fn screen(&self, session: &Session<'_>, p: &Proposal) -> Result<Option<f64>> {
        if !session.within_caps(p) {
            return Ok(None);
        }
        let agent = self.agent;
        let verify = |q: &Proposal| -> Result<Verdict<f64>> {
            let e = session.evaluate(q)?;
            let risk = e.per_slice.get(&agent).map(|o| o.risk).unwrap_or(1.0);
            Ok(Verdict {
                passed: session.own_safe(agent, q)?,
                risk,
                reason: format!("twin risk {risk:.3}"),
            })
        };
        let decision = automated_action(
            ToolProposal {
                action: p.clone(),
                confidence: None,
            },
            self.hooks.verify.then_some(verify),
        );
        if decision.executed().is_none() {
            return Ok(None);
        }
        let mut u = session.utility(agent, p)?;
        if let Some(h) = self.hooks.suggestion {
            u = h.apply(u);
        }
        Ok((u >= session.threshold(agent)).then_some(u))
    }

    /// Works out the agent's move against the standing proposal. `free`
    /// restricts the agent to the free share of its resource. Values next to
    /// a failed precedent are avoided unless nothing else is acceptable.
    pub fn plan(&self, view: &AgentView<'_>, free: Option<&CanonicalState<f64>>) -> Result<Plan> {
        let plan = self.plan_with(view, free, true)?;
        if plan.choice.is_some() || failed_values(view.retrievals, self.agent).is_empty() {
            return Ok(plan);
        }
        self.plan_with(view, free, false)
    }

    fn plan_with(&self, view: &AgentView<'_>, free: Option<&CanonicalState<f64>>, avoid_failures: bool) -> Result<Plan> {
        let session = view.session;
        let agent = self.agent;
        let mut upper = session.cap(agent, view.standing);
        if let Some(c) = free {
            let unit = if agent == SliceId::Edge { Unit::GHz } else { Unit::MHz };
            upper = upper.min(c.free_in(unit));
        }
        let xs = self.candidates(view, upper, avoid_failures);
        let mut scored = Vec::with_capacity(xs.len());
        for &x in &xs {
            scored.push((x, self.screen(session, &with_value(view.standing, agent, x))?));
        }
        let acceptable: Vec<f64> = scored.iter().filter(|(_, u)| u.is_some()).map(|(x, _)| *x).collect();
        let frontier = scored
            .iter()
            .filter_map(|(x, u)| u.map(|u| (*x, u)))
            .fold(None, |best: Option<(f64, f64)>, (x, u)| match best {
                Some((_, bu)) if bu >= u => best,
                _ => Some((x, u)),
            })
            .map(|(x, _)| x);
        let Some(frontier) = frontier else {
            return Ok(Plan {
                acceptable,
                frontier: None,
                target: None,
                choice: None,
            });
        };
        let current = view.standing.get(&agent).copied().unwrap_or(view.own_anchor);
        let target = current + self.hooks.concession_rate * (frontier - current);
        let penalty = 10.0 * session.range(agent);
        let candidates: Vec<Candidate<f64>> = scored
            .iter()
            .map(|(x, u)| Candidate {
                action: *x,
                utility: -(x - target).abs() - if u.is_some() { 0.0 } else { penalty },
            })
            .collect();
        let model = AnchorModel::new(view.own_anchor, self.hooks.anchoring_gamma)?;
        let choice = candidates[anchored_choice(&candidates, &model)?].action;
        Ok(Plan {
            acceptable,
            frontier: Some(frontier),
            target: Some(target),
            choice: Some(choice),
        })
    }

    fn reason(&self, intent: &str, value: f64, why: &str) -> Result<String> {
        let ctx: BTreeMap<String, String> = [
            ("slice", self.agent.as_str().to_string()),
            ("value", format!("{value:.2}")),
            ("unit", unit_of(self.agent).to_string()),
            ("why", why.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        self.templates.neutralize_prompt(intent, &ctx)
    }

    /// Opening value for a memory-backed agent. Starts from its precedents
    /// (the top-ranked success, or a temporally weighted estimate over the
    /// successes when the hook is set) and explores one concession step
    /// toward its best response, unless that lands next to a failure.
    /// Without successful precedents it opens at `fallback`.
    pub fn memory_opening(&self, session: &Session<'_>, retrievals: &[Precedent], fallback: &Proposal) -> Result<f64> {
        let agent = self.agent;
        let mut successes: Vec<&Precedent> = retrievals.iter().filter(|r| !r.failure).collect();
        successes.retain(|r| r.allocation.contains_key(&agent));
        let Some(top) = successes.first() else {
            return Ok(fallback[&agent]);
        };
        let base = match &self.hooks.temporal {
            None => top.allocation[&agent],
            Some(model) => {
                successes.sort_by_key(|r| std::cmp::Reverse(r.age));
                let xs: Vec<f64> = successes.iter().map(|r| r.allocation[&agent]).collect();
                weighted_estimate(&xs, model)?
            }
        };
        let base = base.clamp(0.0, session.cap(agent, fallback));
        let view = AgentView {
            session,
            agent,
            round: 1,
            max_rounds: session.cfg.protocol.max_rounds,
            standing: &with_value(fallback, agent, base),
            own_anchor: base,
            retrievals,
            transcript: &[],
        };
        let hooks = PolicyHooks {
            anchoring_gamma: 0.0,
            ..self.hooks.clone()
        };
        let explorer = ScriptedPolicy {
            agent,
            hooks,
            templates: self.templates.clone(),
        };
        let plan = explorer.plan(&view, None)?;
        let failed = failed_values(retrievals, agent);
        match plan.target {
            Some(t) if !self.excluded(session, t, &failed) => Ok(t),
            _ => Ok(base),
        }
    }
}

impl Policy for ScriptedPolicy {
    fn step(&mut self, view: &AgentView<'_>) -> Result<NegotiationMessage> {
        let session = view.session;
        let agent = self.agent;
        let plan = self.plan(view, None)?;
        let Some(choice) = plan.choice else {
            let current = view.standing.get(&agent).copied().unwrap_or(0.0);
            let reason = self.reason("reject", current, "no verified allocation meets the threshold")?;
            return Ok(NegotiationMessage::new(Intent::Reject, agent, view.round, view.standing.clone(), reason));
        };
        let counter = with_value(view.standing, agent, choice);
        if session.feasible(view.standing)? {
            let standing_u = session.utility(agent, view.standing)?;
            let gain = session.utility(agent, &counter)? - standing_u;
            let settled = counter == *view.standing || gain < self.hooks.min_gain || view.round + 1 >= view.max_rounds;
            if settled && standing_u >= session.threshold(agent) {
                let reason = self.reason("confirm", choice, "")?;
                return Ok(NegotiationMessage::new(Intent::Confirm, agent, view.round, view.standing.clone(), reason));
            }
        }
        let reason = self.reason("counter_propose", choice, "")?;
        Ok(NegotiationMessage::new(Intent::CounterPropose, agent, view.round, counter, reason))
    }
}
