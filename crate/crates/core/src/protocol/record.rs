//! The per-session log record, one JSON object per line.

use serde::{Deserialize, Serialize};

use super::action::Action;
use super::session::{SessionState, SessionStatus, Violation};
use super::turn::{Role, Turn};
use crate::catalog::{Product, Scenario, SessionConfig};
use crate::money::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogStatus {
    Deal,
    Quit,
    Exhausted,
    Invalid,
}

/// An accepted half-move with the agent output it was parsed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedTurn {
    pub role: Role,
    pub thought: String,
    pub talk: String,
    pub action: Action,
    pub raw: String,
}

impl LoggedTurn {
    pub fn to_turn(&self) -> Turn {
        Turn::new(self.role, self.thought.clone(), self.talk.clone(), self.action.clone())
    }
}

/// An agent output refused by the parser or the legality rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedReply {
    pub role: Role,
    pub category: String,
    pub message: String,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub codename: String,
    #[serde(rename = "B")]
    pub budget: Money,
    #[serde(rename = "C")]
    pub cost: Money,
    #[serde(rename = "L")]
    pub list_price: Money,
    pub f: f64,
    pub t_m: u32,
    pub scenario: Scenario,
    pub status: LogStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quit_by: Option<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid_reason: Option<String>,
    pub deal_price: Option<Money>,
    pub valid: bool,
    pub first_buyer_bid: Option<Money>,
    pub history: Vec<LoggedTurn>,
    #[serde(default)]
    pub rejected: Vec<RejectedReply>,
}

/// Price of the buyer's first BUY, if any.
pub fn first_buyer_bid<'a>(turns: impl IntoIterator<Item = (Role, &'a Action)>) -> Option<Money> {
    turns.into_iter().find_map(|(role, action)| match action {
        Action::Buy(o) if role == Role::Buyer => Some(o.price),
        _ => None,
    })
}

impl SessionRecord {
    /// Builds the record for a finished (or abandoned) session.
    pub fn from_state(
        session_id: impl Into<String>,
        state: &SessionState,
        raws: Vec<String>,
        rejected: Vec<RejectedReply>,
    ) -> Self {
        let cfg = state.config();
        debug_assert_eq!(raws.len(), state.history().len());
        let history: Vec<LoggedTurn> = state
            .history()
            .iter()
            .zip(raws)
            .map(|(t, raw)| LoggedTurn {
                role: t.role,
                thought: t.thought.clone(),
                talk: t.talk.clone(),
                action: t.action.clone(),
                raw,
            })
            .collect();
        let (status, quit_by, invalid_reason) = match state.status() {
            SessionStatus::Deal { .. } => (LogStatus::Deal, None, None),
            SessionStatus::NoDealQuit { by } => (LogStatus::Quit, Some(*by), None),
            SessionStatus::NoDealExhausted => (LogStatus::Exhausted, None, None),
            SessionStatus::Invalid { reason } => (LogStatus::Invalid, None, Some(reason.clone())),
            SessionStatus::Open => (LogStatus::Invalid, None, Some("unfinished".to_string())),
        };
        SessionRecord {
            session_id: session_id.into(),
            codename: cfg.codename().to_string(),
            budget: cfg.budget,
            cost: cfg.cost,
            list_price: cfg.list_price,
            f: cfg.budget_factor,
            t_m: cfg.max_turns,
            scenario: cfg.scenario,
            status,
            quit_by,
            invalid_reason,
            deal_price: state.status().deal_price(),
            valid: state.status().is_valid_terminal(),
            first_buyer_bid: first_buyer_bid(history.iter().map(|t| (t.role, &t.action))),
            history,
            rejected,
        }
    }

    /// Terminal status as recorded.
    pub fn session_status(&self) -> SessionStatus {
        match self.status {
            LogStatus::Deal => SessionStatus::Deal {
                price: self.deal_price.unwrap_or(Money::ZERO),
            },
            LogStatus::Quit => SessionStatus::NoDealQuit {
                by: self.quit_by.unwrap_or(Role::Buyer),
            },
            LogStatus::Exhausted => SessionStatus::NoDealExhausted,
            LogStatus::Invalid => SessionStatus::Invalid {
                reason: self.invalid_reason.clone().unwrap_or_default(),
            },
        }
    }

    pub fn is_deal(&self) -> bool {
        self.status == LogStatus::Deal
    }

    /// A configuration carrying the recorded prices. Product text is not
    /// logged, so title and description are empty.
    pub fn config(&self) -> SessionConfig {
        SessionConfig {
            product: Product {
                title: String::new(),
                description: String::new(),
                features: Vec::new(),
                category: String::new(),
                highest_price: self.list_price,
                lowest_price: self.cost,
                current_price: None,
                image_url: None,
                codename: self.codename.clone(),
            },
            list_price: self.list_price,
            cost: self.cost,
            budget: self.budget,
            budget_factor: self.f,
            max_turns: self.t_m,
            sigma: Money::CENT,
            scenario: self.scenario,
            quantity: 1,
        }
    }

    /// Re-plays the logged half-moves through the legality rules and returns
    /// the status they produce. For an invalid record the replay must stay
    /// open, after which the recorded reason is applied.
    pub fn replay(&self) -> Result<SessionStatus, Violation> {
        let mut state = SessionState::new(self.config());
        for turn in &self.history {
            state.play(turn.to_turn())?;
        }
        if let Some(reason) = &self.invalid_reason {
            state.mark_invalid(reason.clone());
        }
        Ok(state.status().clone())
    }

    /// True when the logged transcript reproduces the logged outcome.
    pub fn is_self_consistent(&self) -> bool {
        let derived_bid = first_buyer_bid(self.history.iter().map(|t| (t.role, &t.action)));
        self.replay().is_ok_and(|s| s == self.session_status())
            && self.valid == self.session_status().is_valid_terminal()
            && derived_bid == self.first_buyer_bid
    }
}
