//! The agent contract and its implementations.
//!
//! An agent receives an [`Observation`] for its role and produces either raw
//! text in the `Thought:/Talk:/Action:` layout or an already structured
//! [`Turn`]. When a reply fails to parse or breaks a rule, the session runner
//! calls the agent again with [`Feedback`] describing the problem.

pub mod endpoint;
pub mod llm;
pub mod observation;
pub mod prompts;
pub mod scripted;
pub mod spec;

pub use endpoint::{ChatEndpoint, ChatMessage, ChatRequest, EndpointConfig, HttpEndpoint, ReplayEndpoint};
pub use llm::LlmAgent;
pub use observation::{observe, Observation, ProductInfo, VisibleTurn};
pub use prompts::{build_buyer_prompt, build_seller_prompt, Prompt};
pub use scripted::{ScriptedBuyer, ScriptedSeller};
pub use spec::{AgentSpec, NarratorSpec, SeedMode};

use crate::protocol::Turn;

/// Default number of re-prompts after a rejected reply.
pub const DEFAULT_RETRY_BUDGET: u32 = 2;

pub enum Reply {
    /// Free text to be parsed with [`crate::protocol::parse_turn`].
    Text(String),
    Turn(Turn),
}

/// Why the previous reply for this half-move was refused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feedback {
    pub category: String,
    pub message: String,
}

impl Feedback {
    pub fn notice(&self) -> String {
        format!(
            "Your previous reply was rejected ({}): {}. Reply again with Thought, Talk, and Action, \
             following the required format and rules.",
            self.category, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("transport failure: {0}")]
    Transport(String),
}

pub trait Agent: Send {
    fn act(&mut self, obs: &Observation, feedback: Option<&Feedback>) -> Result<Reply, AgentError>;
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn act(&mut self, obs: &Observation, feedback: Option<&Feedback>) -> Result<Reply, AgentError> {
        (**self).act(obs, feedback)
    }
}
