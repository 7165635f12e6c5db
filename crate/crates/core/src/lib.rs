//! Two-party bargaining benchmark: product catalogs, the alternating-offers
//! session protocol, pluggable buyer/seller agents, the offer-generator buyer,
//! and profit metrics aggregated over benchmark runs.

pub mod agents;
pub mod catalog;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod money;
pub mod og_narrator;
pub mod protocol;

pub use agents::{Agent, AgentSpec, Observation};
pub use catalog::{Catalog, Product, Scenario, SessionConfig};
pub use error::{Error, Result};
pub use metrics::{BenchmarkSummary, SessionScore};
pub use money::Money;
pub use protocol::{Action, Offer, Role, SessionRecord, SessionState, SessionStatus, Turn};
