//! Suggestion bias mitigation: a library of neutral message templates that
//! refuses goal-priming wording, plus controlled re-prompting.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Phrases that push an agent toward a goal instead of describing the task.
pub const PRIMING_PHRASES: &[&str] = &[
    "at all costs",
    "at any cost",
    "no matter what",
    "never concede",
    "must win",
    "aggressively",
    "obviously",
    "clearly the best",
    "do not give up",
    "maximize at any",
];

/// A parsed template: literal text interleaved with `{name}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
    parts: Vec<Part>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Part {
    Text(String),
    Slot(String),
}

impl Template {
    pub fn parse(source: &str) -> Result<Self> {
        let mut parts = Vec::new();
        let mut rest = source;
        while let Some(open) = rest.find('{') {
            if open > 0 {
                parts.push(Part::Text(rest[..open].to_string()));
            }
            let after = &rest[open + 1..];
            let close = after
                .find('}')
                .ok_or_else(|| Error::Template(format!("unclosed placeholder in `{source}`")))?;
            let name = after[..close].trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Template(format!("bad placeholder `{{{name}}}` in `{source}`")));
            }
            parts.push(Part::Slot(name.to_string()));
            rest = &after[close + 1..];
        }
        if !rest.is_empty() {
            parts.push(Part::Text(rest.to_string()));
        }
        Ok(Self {
            source: source.to_string(),
            parts,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().filter_map(|p| match p {
            Part::Slot(n) => Some(n.as_str()),
            Part::Text(_) => None,
        })
    }

    pub fn render(&self, context: &BTreeMap<String, String>) -> Result<String> {
        let mut out = String::with_capacity(self.source.len());
        for p in &self.parts {
            match p {
                Part::Text(t) => out.push_str(t),
                Part::Slot(n) => out.push_str(
                    context
                        .get(n)
                        .ok_or_else(|| Error::Template(format!("unbound placeholder `{n}`")))?,
                ),
            }
        }
        Ok(out)
    }

    fn priming_phrase(&self) -> Option<&'static str> {
        let lower = self.source.to_lowercase();
        PRIMING_PHRASES.iter().copied().find(|p| lower.contains(p))
    }
}

/// Named intents, each with one or more semantically equivalent neutral forms.
#[derive(Debug, Clone, Default)]
pub struct TemplateLibrary {
    intents: BTreeMap<String, Vec<Template>>,
}

impl TemplateLibrary {
    /// Builds a library, rejecting any template that contains priming wording
    /// or whose variants disagree on placeholders.
    pub fn new<'a>(entries: impl IntoIterator<Item = (&'a str, Vec<&'a str>)>) -> Result<Self> {
        let mut intents = BTreeMap::new();
        for (name, forms) in entries {
            if forms.is_empty() {
                return Err(Error::Template(format!("intent `{name}` has no templates")));
            }
            let parsed: Vec<Template> = forms.iter().map(|f| Template::parse(f)).collect::<Result<_>>()?;
            for t in &parsed {
                if let Some(p) = t.priming_phrase() {
                    return Err(Error::Template(format!("template `{}` contains priming phrase `{p}`", t.source)));
                }
            }
            let slots = |t: &Template| {
                let mut v: Vec<String> = t.placeholders().map(str::to_string).collect();
                v.sort();
                v.dedup();
                v
            };
            let first = slots(&parsed[0]);
            if parsed.iter().any(|t| slots(t) != first) {
                return Err(Error::Template(format!("variants of `{name}` bind different placeholders")));
            }
            intents.insert(name.to_string(), parsed);
        }
        Ok(Self { intents })
    }

    /// Neutral forms used by the scripted negotiators.
    pub fn negotiation_default() -> Self {
        Self::new([
            (
                "propose",
                vec![
                    "propose bandwidth for {slice}: {value} {unit}",
                    "{slice} requests an allocation of {value} {unit}",
                    "allocation proposal for {slice}: {value} {unit}",
                ],
            ),
            (
                "counter_propose",
                vec![
                    "counter-proposal for {slice}: {value} {unit}",
                    "{slice} revises its allocation to {value} {unit}",
                    "revised allocation for {slice}: {value} {unit}",
                ],
            ),
            (
                "confirm",
                vec![
                    "{slice} accepts the standing proposal",
                    "standing proposal accepted by {slice}",
                ],
            ),
            (
                "reject",
                vec![
                    "{slice} cannot accept: {why}",
                    "proposal declined by {slice}: {why}",
                ],
            ),
        ])
        .expect("built-in templates are neutral")
    }

    pub fn forms(&self, intent: &str) -> Result<&[Template]> {
        self.intents
            .get(intent)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Template(format!("unknown intent `{intent}`")))
    }

    /// Renders the first neutral form of `intent`.
    pub fn neutralize_prompt(&self, intent: &str, context: &BTreeMap<String, String>) -> Result<String> {
        self.forms(intent)?[0].render(context)
    }

    /// Renders up to `k` distinct equivalent forms with identical bindings.
    pub fn controlled_reprompt(&self, intent: &str, context: &BTreeMap<String, String>, k: usize) -> Result<Vec<String>> {
        let forms = self.forms(intent)?;
        if k > forms.len() {
            return Err(Error::Template(format!(
                "intent `{intent}` has {} forms, {k} requested",
                forms.len()
            )));
        }
        forms.iter().take(k).map(|t| t.render(context)).collect()
    }
}

/// Scalar stand-in for a prompt-induced preference shift on a scripted
/// policy's utility: `u + beta * s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuggestionHook<T> {
    pub beta: T,
    pub shift: T,
}

impl<T: Scalar> SuggestionHook<T> {
    pub fn apply(&self, utility: T) -> T {
        utility + self.beta * self.shift
    }
}
