//! Automation bias: acting on tool output with or without an independent
//! verification step.

use crate::error::Result;
use crate::scalar::Scalar;

/// Confidence attached to tool output that reports none.
pub const DEFAULT_TOOL_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ToolProposal<A, T> {
    pub action: A,
    pub confidence: Option<T>,
}

/// Result of a verification pass (for instance a twin rollout).
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub passed: bool,
    pub risk: T,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AutomatedDecision<A, T> {
    Execute {
        action: A,
        verified: bool,
        confidence: T,
    },
    Reject {
        action: A,
        risk: T,
        reason: String,
    },
    /// The verifier itself failed; nothing is executed.
    Defer {
        action: A,
        error: String,
    },
}

impl<A, T: Scalar> AutomatedDecision<A, T> {
    pub fn executed(&self) -> Option<&A> {
        match self {
            AutomatedDecision::Execute { action, .. } => Some(action),
            _ => None,
        }
    }

    pub fn is_verified(&self) -> bool {
        matches!(self, AutomatedDecision::Execute { verified: true, .. })
    }
}

/// Without `verify`, the tool's action passes straight through. With it,
/// the action runs only if the verifier passes it, and the attached
/// confidence becomes the verifier's `1 - risk`.
pub fn automated_action<A, T, V>(tool: ToolProposal<A, T>, verify: Option<V>) -> AutomatedDecision<A, T>
where
    T: Scalar,
    V: FnOnce(&A) -> Result<Verdict<T>>,
{
    let confidence = tool
        .confidence
        .unwrap_or_else(|| T::lit(DEFAULT_TOOL_CONFIDENCE))
        .max(T::zero())
        .min(T::one());
    let Some(verify) = verify else {
        return AutomatedDecision::Execute {
            action: tool.action,
            verified: false,
            confidence,
        };
    };
    match verify(&tool.action) {
        Ok(v) if v.passed => AutomatedDecision::Execute {
            action: tool.action,
            verified: true,
            confidence: T::one() - v.risk.max(T::zero()).min(T::one()),
        },
        Ok(v) => AutomatedDecision::Reject {
            action: tool.action,
            risk: v.risk,
            reason: v.reason,
        },
        Err(e) => AutomatedDecision::Defer {
            action: tool.action,
            error: e.to_string(),
        },
    }
}
