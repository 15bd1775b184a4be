//! Cognitive-bias operators, each paired with its mitigation.
//!
//! Every operator is a pure function (trust updates are value in, value
//! out). Agents compose them through the hook set in
//! [`crate::negotiation::PolicyHooks`]; the `biases-demo` report runs each
//! pair on canned inputs.

mod automation;
mod belief;
mod choice;
mod consensus;
pub mod demo;
mod framing;
mod prompt;
mod temporal;
mod trust;

pub use automation::{automated_action, AutomatedDecision, ToolProposal, Verdict, DEFAULT_TOOL_CONFIDENCE};
pub use belief::{
    availability_estimate, base_rate_estimate, confirmation_posterior, social_bayes_update, survivorship_estimate,
    Evidence, SalientEvent, Sample,
};
pub use choice::{
    anchored_choice, reset_sunk_cost, status_quo_gate, status_quo_gate_mitigated, sunk_cost_utility,
    uncertainty_choice, AnchorModel, Candidate, InvestmentTransform, StatusQuoMitigation, SunkCostParams,
};
pub use consensus::{dispersion, groupthink_consensus, ConsensusParams, QuadraticLoss};
pub use framing::{framed_reading, FramingBias};
pub use prompt::{SuggestionHook, Template, TemplateLibrary, PRIMING_PHRASES};
pub use temporal::{multi_window_average, temporal_weights, weighted_estimate, TemporalReference, TemporalWeighting};
pub use trust::{authority_mix, dual_source_validate, halo_update, TrustModel};
