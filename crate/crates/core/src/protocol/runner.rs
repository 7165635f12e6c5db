//! Drives a buyer and a seller through one session.

use super::record::{RejectedReply, SessionRecord};
use super::session::SessionState;
use super::turn::{parse_turn, Role};
use crate::agents::{observe, Agent, AgentError, Feedback, Reply};
use crate::catalog::SessionConfig;

/// Asks `agent` for the next half-move and applies it, re-prompting up to
/// `retry_budget` times after a parse error or rule violation. Refused
/// replies are appended to `rejected`; the accepted reply's raw text is
/// returned. When retries run out or the transport fails, the session is
/// marked invalid and `None` is returned.
pub fn play_half_move(
    state: &mut SessionState,
    agent: &mut dyn Agent,
    retry_budget: u32,
    rejected: &mut Vec<RejectedReply>,
) -> Option<String> {
    let role = state.next_mover();
    let obs = observe(state, role);
    let mut feedback: Option<Feedback> = None;
    let mut failures = 0;
    loop {
        let reply = match agent.act(&obs, feedback.as_ref()) {
            Ok(r) => r,
            Err(AgentError::Transport(message)) => {
                tracing::warn!(%role, %message, "agent transport failed");
                state.mark_invalid("transport");
                return None;
            }
        };
        let parsed = match reply {
            Reply::Text(raw) => parse_turn(&raw, role)
                .map(|turn| (turn, raw.clone()))
                .map_err(|e| (e.kind.as_str().to_string(), e.message, raw)),
            Reply::Turn(turn) => {
                let raw = turn.to_message();
                Ok((turn, raw))
            }
        };
        let outcome = parsed.and_then(|(turn, raw)| match state.check_legality(&turn) {
            Ok(()) => Ok((turn, raw)),
            Err(v) => Err((v.kind.as_str().to_string(), v.message, raw)),
        });
        match outcome {
            Ok((turn, raw)) => {
                state.advance(turn).expect("legality already checked");
                return Some(raw);
            }
            Err((category, message, raw)) => {
                tracing::debug!(%role, %category, "reply refused");
                rejected.push(RejectedReply {
                    role,
                    category: category.clone(),
                    message: message.clone(),
                    raw,
                });
                failures += 1;
                if failures > retry_budget {
                    state.mark_invalid(category);
                    return None;
                }
                feedback = Some(Feedback { category, message });
            }
        }
    }
}

/// Runs a session to completion. Each half-move gets `retry_budget`
/// re-prompts after a parse error or rule violation; when those run out, or
/// the agent's transport fails, the session is recorded as invalid.
pub fn run_session(
    session_id: &str,
    config: &SessionConfig,
    buyer: &mut dyn Agent,
    seller: &mut dyn Agent,
    retry_budget: u32,
) -> SessionRecord {
    let mut state = SessionState::new(config.clone());
    let mut raws = Vec::new();
    let mut rejected = Vec::new();
    while state.status().is_open() {
        let agent: &mut dyn Agent = match state.next_mover() {
            Role::Buyer => &mut *buyer,
            Role::Seller => &mut *seller,
        };
        if let Some(raw) = play_half_move(&mut state, agent, retry_budget, &mut rejected) {
            raws.push(raw);
        }
    }
    tracing::debug!(session_id, status = ?state.status(), "session finished");
    SessionRecord::from_state(session_id, &state, raws, rejected)
}
