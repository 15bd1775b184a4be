//! Scenario configuration: slices, capacities, utility weights and the
//! protocol/twin/memory knobs, loaded from a TOML document with explicit
//! units in every field name.

mod canonical;
mod presets;

pub use canonical::{canonicalize, CanonicalState, FramedState, Quantity, Unit};
pub use presets::{UC1_DEFAULT, UC2_DEFAULT};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceId {
    Embb,
    Urllc,
    Ran,
    Edge,
}

impl SliceId {
    pub fn as_str(self) -> &'static str {
        match self {
            SliceId::Embb => "embb",
            SliceId::Urllc => "urllc",
            SliceId::Ran => "ran",
            SliceId::Edge => "edge",
        }
    }
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SliceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "embb" => Ok(SliceId::Embb),
            "urllc" => Ok(SliceId::Urllc),
            "ran" => Ok(SliceId::Ran),
            "edge" => Ok(SliceId::Edge),
            other => Err(Error::validation("slices.id", format!("unknown slice `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Two slices share one bandwidth pool.
    Uc1,
    /// A RAN domain (bandwidth) and an edge domain (CPU) share one latency budget.
    Uc2,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Uc1 => "uc1",
            ScenarioKind::Uc2 => "uc2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub id: SliceId,
    pub sla_latency_ms: f64,
    pub traffic_rate_mbps: f64,
    pub queue_backlog_mb: f64,
    /// Falls back to `protocol.accept_threshold` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_utility_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub b_total_mhz: f64,
    pub b_max_mhz: f64,
    pub f_max_ghz: f64,
    pub eta_min_bits_per_hz: f64,
    pub eta_max_bits_per_hz: f64,
    #[serde(default = "default_cycles_per_bit")]
    pub cycles_per_bit: f64,
}

fn default_cycles_per_bit() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityWeights {
    /// Latency, energy, fairness, risk.
    pub w: [f64; 4],
    pub epsilon: f64,
    pub r_max: f64,
}

impl UtilityWeights {
    pub fn latency(&self) -> f64 {
        self.w[0]
    }
    pub fn energy(&self) -> f64 {
        self.w[1]
    }
    pub fn fairness(&self) -> f64 {
        self.w[2]
    }
    pub fn risk(&self) -> f64 {
        self.w[3]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwinConfig {
    /// Sigma of the multiplicative lognormal traffic noise.
    #[serde(default = "default_sigma")]
    pub perturbation_sigma: f64,
    /// Monte Carlo draws per what-if evaluation.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
}

fn default_sigma() -> f64 {
    0.1
}
fn default_horizon() -> usize {
    64
}

impl Default for TwinConfig {
    fn default() -> Self {
        Self {
            perturbation_sigma: default_sigma(),
            horizon: default_horizon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default = "default_accept_threshold")]
    pub accept_threshold: f64,
    #[serde(default = "default_concession")]
    pub concession_rate: f64,
    /// Operating point, as a fraction of each cap, used as the status-quo
    /// opening and as the fallback configuration when talks fail.
    #[serde(default = "default_status_quo")]
    pub status_quo_fraction: f64,
    /// Deviation-from-anchor penalty of the scripted agents; 0 disables anchoring.
    #[serde(default = "default_anchoring_gamma")]
    pub anchoring_gamma: f64,
}

fn default_max_rounds() -> u32 {
    8
}
fn default_accept_threshold() -> f64 {
    0.6
}
fn default_concession() -> f64 {
    0.25
}
fn default_status_quo() -> f64 {
    0.75
}
fn default_anchoring_gamma() -> f64 {
    2.0
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            max_rounds: default_max_rounds(),
            accept_threshold: default_accept_threshold(),
            concession_rate: default_concession(),
            status_quo_fraction: default_status_quo(),
            anchoring_gamma: default_anchoring_gamma(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayForm {
    /// `exp(-age / theta)`.
    Factor,
    /// `exp(-theta * age)`.
    Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryConfig {
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_beta")]
    pub beta: f64,
    #[serde(default = "d_delta")]
    pub delta: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
    /// Decay factor used by the vanilla (success-only) store.
    #[serde(default = "d_vanilla_theta")]
    pub vanilla_theta: f64,
    #[serde(default = "d_kappa")]
    pub kappa: f64,
    /// Anchor-penalty width as a fraction of the negotiated resource's range.
    #[serde(default = "d_sigma_fraction")]
    pub sigma_fraction: f64,
    #[serde(default = "d_top_n")]
    pub top_n: usize,
    #[serde(default = "d_decay_form")]
    pub decay_form: DecayForm,
}

fn d_alpha() -> f64 {
    1.0
}
fn d_beta() -> f64 {
    0.5
}
fn d_delta() -> f64 {
    1.0
}
fn d_theta() -> f64 {
    5.0
}
fn d_vanilla_theta() -> f64 {
    1.0
}
fn d_kappa() -> f64 {
    0.5
}
fn d_sigma_fraction() -> f64 {
    0.1
}
fn d_top_n() -> usize {
    5
}
fn d_decay_form() -> DecayForm {
    DecayForm::Factor
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self {
            alpha: d_alpha(),
            beta: d_beta(),
            delta: d_delta(),
            theta: d_theta(),
            vanilla_theta: d_vanilla_theta(),
            kappa: d_kappa(),
            sigma_fraction: d_sigma_fraction(),
            top_n: d_top_n(),
            decay_form: d_decay_form(),
        }
    }
}

/// Root of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub capacity: CapacityConfig,
    pub slices: Vec<SliceSpec>,
    pub weights: UtilityWeights,
    #[serde(default)]
    pub twin: TwinConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub memory: MemoryConfig,
}

impl ScenarioConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(doc: &str) -> Result<Self> {
        let raw: ScenarioConfig =
            toml::from_str(doc).map_err(|e| Error::validation("document", e.message().to_string()))?;
        raw.validated()
    }

    /// Parses either a TOML config or a JSON document (manifests embed the
    /// resolved config as JSON).
    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let raw: ScenarioConfig =
            serde_json::from_value(value).map_err(|e| Error::validation("document", e.to_string()))?;
        raw.validated()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn slice(&self, id: SliceId) -> Option<&SliceSpec> {
        self.slices.iter().find(|s| s.id == id)
    }

    pub fn threshold_for(&self, id: SliceId) -> f64 {
        self.slice(id)
            .and_then(|s| s.min_utility_threshold)
            .unwrap_or(self.protocol.accept_threshold)
    }

    pub fn uc1_default() -> Self {
        Self::from_toml_str(UC1_DEFAULT).expect("built-in UC1 config is valid")
    }

    pub fn uc2_default() -> Self {
        Self::from_toml_str(UC2_DEFAULT).expect("built-in UC2 config is valid")
    }

    /// Checks every type invariant and normalizes `weights.w` to sum to one.
    pub fn validated(mut self) -> Result<Self> {
        let c = &self.capacity;
        positive("capacity.b_total_mhz", c.b_total_mhz)?;
        positive("capacity.b_max_mhz", c.b_max_mhz)?;
        positive("capacity.f_max_ghz", c.f_max_ghz)?;
        positive("capacity.eta_min_bits_per_hz", c.eta_min_bits_per_hz)?;
        positive("capacity.cycles_per_bit", c.cycles_per_bit)?;
        if !(c.eta_min_bits_per_hz <= c.eta_max_bits_per_hz) {
            return Err(Error::validation(
                "capacity.eta_max_bits_per_hz",
                "must be >= eta_min_bits_per_hz",
            ));
        }

        if self.slices.is_empty() {
            return Err(Error::validation("slices", "at least one slice is required"));
        }
        if self.slices.len() != 2 {
            return Err(Error::validation("slices", "a session negotiates exactly two slices"));
        }
        let mut seen = BTreeMap::new();
        for s in &self.slices {
            positive(&format!("slices[{}].sla_latency_ms", s.id), s.sla_latency_ms)?;
            nonneg(&format!("slices[{}].traffic_rate_mbps", s.id), s.traffic_rate_mbps)?;
            nonneg(&format!("slices[{}].queue_backlog_mb", s.id), s.queue_backlog_mb)?;
            if let Some(t) = s.min_utility_threshold {
                unit_interval(&format!("slices[{}].min_utility_threshold", s.id), t)?;
            }
            if seen.insert(s.id, ()).is_some() {
                return Err(Error::validation("slices.id", format!("duplicate slice `{}`", s.id)));
            }
        }
        let expected: &[SliceId] = match self.scenario {
            ScenarioKind::Uc1 => &[SliceId::Embb, SliceId::Urllc],
            ScenarioKind::Uc2 => &[SliceId::Ran, SliceId::Edge],
        };
        for id in expected {
            if !seen.contains_key(id) {
                return Err(Error::validation("slices.id", format!("scenario requires slice `{id}`")));
            }
        }

        let w = &mut self.weights;
        for (i, x) in w.w.iter().enumerate() {
            nonneg(&format!("weights.w[{i}]"), *x)?;
        }
        let sum: f64 = w.w.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::validation("weights.w", "weights must not all be zero"));
        }
        // Already-normalized weights are left alone so that reloading a
        // saved config is a no-op.
        if (sum - 1.0).abs() > 1e-12 {
            for x in w.w.iter_mut() {
                *x /= sum;
            }
        }
        if !(0.0..=0.5).contains(&w.epsilon) {
            return Err(Error::validation("weights.epsilon", "must lie in [0, 0.5]"));
        }
        unit_interval("weights.r_max", w.r_max)?;

        nonneg("twin.perturbation_sigma", self.twin.perturbation_sigma)?;
        if self.twin.horizon == 0 {
            return Err(Error::validation("twin.horizon", "must be >= 1"));
        }

        let p = &self.protocol;
        if p.max_rounds == 0 {
            return Err(Error::validation("protocol.max_rounds", "must be >= 1"));
        }
        unit_interval("protocol.accept_threshold", p.accept_threshold)?;
        unit_interval("protocol.concession_rate", p.concession_rate)?;
        unit_interval("protocol.status_quo_fraction", p.status_quo_fraction)?;
        nonneg("protocol.anchoring_gamma", p.anchoring_gamma)?;

        let m = &self.memory;
        for (name, v) in [
            ("memory.alpha", m.alpha),
            ("memory.beta", m.beta),
            ("memory.delta", m.delta),
            ("memory.kappa", m.kappa),
        ] {
            nonneg(name, v)?;
        }
        positive("memory.theta", m.theta)?;
        positive("memory.vanilla_theta", m.vanilla_theta)?;
        positive("memory.sigma_fraction", m.sigma_fraction)?;
        if m.top_n == 0 {
            return Err(Error::validation("memory.top_n", "must be >= 1"));
        }
        Ok(self)
    }
}

/// Reads and validates a config document from disk.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_toml_str(&text)
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive, got {v}")))
    }
}

fn nonneg(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be non-negative, got {v}")))
    }
}

fn unit_interval(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must lie in [0, 1], got {v}")))
    }
}
