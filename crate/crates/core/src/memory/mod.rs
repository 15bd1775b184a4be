//! Collective memory of distilled negotiation strategies.
//!
//! Three retrieval policies are supported: no memory at all, a vanilla store
//! that only keeps successful agreements and favours recent ones, and an
//! unbiased store that keeps failures, boosts them at retrieval time, decays
//! age gently and penalises precedents that sit on top of the opening anchor.

mod log;
mod scoring;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{DecayForm, MemoryConfig, SliceId};

pub use log::{append_record, read_log, replay, write_log, LogLine, SCHEMA_VERSION};
pub use scoring::{anchor_penalty, jaccard, score, time_decay, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegotiationResult {
    AgreementSuccess,
    UnresolvedNegotiation,
    AgreementWithSlaViolation,
}

impl NegotiationResult {
    pub fn is_failure(self) -> bool {
        !matches!(self, NegotiationResult::AgreementSuccess)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NegotiationResult::AgreementSuccess => "agreement_success",
            NegotiationResult::UnresolvedNegotiation => "unresolved_negotiation",
            NegotiationResult::AgreementWithSlaViolation => "agreement_with_sla_violation",
        }
    }
}

impl fmt::Display for NegotiationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordContext {
    pub trial_number: u64,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSummary {
    pub negotiation_result: NegotiationResult,
    pub final_allocations: BTreeMap<SliceId, f64>,
    pub latency_ms: Option<f64>,
    pub energy_saving_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyRecord {
    pub id: String,
    pub description: String,
    pub context: RecordContext,
    pub outcome_summary: OutcomeSummary,
}

impl StrategyRecord {
    /// Record whose description is its keyword list verbatim.
    pub fn new(id: impl Into<String>, trial_number: u64, keywords: Vec<String>, outcome: OutcomeSummary) -> Self {
        Self {
            id: id.into(),
            description: keywords.join(" "),
            context: RecordContext { trial_number, keywords },
            outcome_summary: outcome,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.outcome_summary.negotiation_result.is_failure()
    }

    pub fn allocation(&self, resource: SliceId) -> Option<f64> {
        self.outcome_summary.final_allocations.get(&resource).copied()
    }
}

/// Opening anchor a query is made against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorPoint<T> {
    pub resource: SliceId,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query<T> {
    pub trial_number: u64,
    pub keywords: Vec<String>,
    pub initial_anchor: Option<AnchorPoint<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalWeights<T> {
    pub alpha: T,
    pub beta: T,
    pub delta: T,
    pub theta: T,
    pub kappa: T,
    /// Anchor-penalty width in resource units.
    pub sigma: T,
    pub top_n: usize,
    pub decay_form: DecayForm,
}

impl<T: Scalar> RetrievalWeights<T> {
    pub fn validated(self) -> Result<Self> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("delta", self.delta),
            ("kappa", self.kappa),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::validation(name, "must be finite and >= 0"));
            }
        }
        if !(self.theta > T::zero()) {
            return Err(Error::validation("theta", "must be > 0"));
        }
        if !(self.sigma > T::zero()) {
            return Err(Error::validation("sigma", "must be > 0"));
        }
        if self.top_n == 0 {
            return Err(Error::validation("top_n", "must be >= 1"));
        }
        Ok(self)
    }

    /// Weights the given policy retrieves with; `resource_range` scales the
    /// anchor-penalty width. `None` for the memoryless policy.
    pub fn for_policy(cfg: &MemoryConfig, policy: MemoryPolicy, resource_range: T) -> Option<Self> {
        let sigma = T::lit(cfg.sigma_fraction) * resource_range;
        let base = Self {
            alpha: T::lit(cfg.alpha),
            beta: T::lit(cfg.beta),
            delta: T::lit(cfg.delta),
            theta: T::lit(cfg.theta),
            kappa: T::lit(cfg.kappa),
            sigma,
            top_n: cfg.top_n,
            decay_form: cfg.decay_form,
        };
        match policy {
            MemoryPolicy::None => None,
            MemoryPolicy::Vanilla => Some(Self {
                delta: T::zero(),
                kappa: T::zero(),
                theta: T::lit(cfg.vanilla_theta),
                ..base
            }),
            MemoryPolicy::Unbiased => Some(base),
        }
    }
}

/// A record with every term of its retrieval score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredMemory<T> {
    pub record: StrategyRecord,
    pub semantic: T,
    pub decay: T,
    pub bonus: T,
    pub anchor_penalty: T,
    pub final_score: T,
}

impl<T: Scalar> ScoredMemory<T> {
    pub fn age(&self, current_trial: u64) -> u64 {
        current_trial.saturating_sub(self.record.context.trial_number)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Retrieval<T> {
    pub items: Vec<ScoredMemory<T>>,
    pub average_score: T,
}

impl<T: Scalar> Retrieval<T> {
    pub fn successes(&self) -> usize {
        self.items.iter().filter(|m| !m.record.is_failure()).count()
    }

    pub fn failures(&self) -> usize {
        self.items.len() - self.successes()
    }
}

/// Top `weights.top_n` records by descending score; ties go to the newer
/// record, then the smaller id.
pub fn query_memory<T: Scalar>(
    records: &[StrategyRecord],
    query: &Query<T>,
    weights: &RetrievalWeights<T>,
) -> Result<Retrieval<T>> {
    let weights = weights.validated()?;
    let mut scored = records
        .iter()
        .map(|r| score(r, query, &weights))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| {
        b.final_score
            .partial_cmp(&a.final_score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.record.context.trial_number.cmp(&a.record.context.trial_number))
            .then_with(|| a.record.id.cmp(&b.record.id))
    });
    scored.truncate(weights.top_n);
    let average_score = if scored.is_empty() {
        T::zero()
    } else {
        scored.iter().map(|m| m.final_score).sum::<T>() / T::lit(scored.len() as f64)
    };
    Ok(Retrieval { items: scored, average_score })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryPolicy {
    None,
    Vanilla,
    Unbiased,
}

impl MemoryPolicy {
    pub const ALL: [MemoryPolicy; 3] = [MemoryPolicy::None, MemoryPolicy::Vanilla, MemoryPolicy::Unbiased];

    pub fn as_str(self) -> &'static str {
        match self {
            MemoryPolicy::None => "none",
            MemoryPolicy::Vanilla => "vanilla",
            MemoryPolicy::Unbiased => "unbiased",
        }
    }
}

impl fmt::Display for MemoryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MemoryPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(MemoryPolicy::None),
            "vanilla" => Ok(MemoryPolicy::Vanilla),
            "unbiased" => Ok(MemoryPolicy::Unbiased),
            other => Err(Error::validation("memory", format!("unknown policy `{other}`"))),
        }
    }
}

/// Shared strategy store. Single writer; readers work on `records()`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryStore {
    policy: MemoryPolicy,
    records: Vec<StrategyRecord>,
    seen: BTreeSet<String>,
}

impl MemoryStore {
    pub fn new(policy: MemoryPolicy) -> Self {
        Self {
            policy,
            records: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    pub fn policy(&self) -> MemoryPolicy {
        self.policy
    }

    pub fn records(&self) -> &[StrategyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Offers an episode to the store. Returns whether it was kept: the
    /// memoryless policy keeps nothing and vanilla keeps successes only.
    pub fn record_episode(&mut self, record: StrategyRecord) -> Result<bool> {
        if record.id.is_empty() {
            return Err(Error::validation("id", "must not be empty"));
        }
        if !self.seen.insert(record.id.clone()) {
            return Err(Error::DuplicateRecord(record.id));
        }
        let keep = match self.policy {
            MemoryPolicy::None => false,
            MemoryPolicy::Vanilla => !record.is_failure(),
            MemoryPolicy::Unbiased => true,
        };
        if keep {
            self.records.push(record);
        }
        Ok(keep)
    }

    pub fn query<T: Scalar>(&self, query: &Query<T>, weights: &RetrievalWeights<T>) -> Result<Retrieval<T>> {
        query_memory(&self.records, query, weights)
    }
}
