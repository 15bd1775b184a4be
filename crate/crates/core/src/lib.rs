//! Negotiation simulator for network resource allocation in which agent
//! policies can be instrumented with cognitive-bias operators and their
//! mitigations.
//!
//! The numeric kernels ([`twin`], [`biases`], [`memory`] scoring and the
//! statistics in [`experiment::stats`]) are generic over [`Scalar`]; the
//! aliases below pin them to `f64`, which is what the simulation engine uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biases;
pub mod error;
pub mod experiment;
pub mod memory;
pub mod negotiation;
pub mod scalar;
pub mod scenario;
pub mod twin;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use scenario::{load_config, ScenarioConfig, SliceId};

pub type TwinState = twin::TwinState<f64>;
pub type TwinModel = twin::TwinModel<f64>;
pub type CostVector = twin::CostVector<f64>;
pub type Latency = twin::Latency<f64>;
pub type Allocation = twin::Allocation<f64>;
pub type CanonicalState = scenario::CanonicalState<f64>;
pub type Query = memory::Query<f64>;
pub type RetrievalWeights = memory::RetrievalWeights<f64>;
pub type ScoredMemory = memory::ScoredMemory<f64>;
pub type Retrieval = memory::Retrieval<f64>;
pub type AnchorModel = biases::AnchorModel<f64>;
pub type TrustModel = biases::TrustModel<f64>;
