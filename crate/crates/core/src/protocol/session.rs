//! The alternating-offers state machine.

use serde::{Deserialize, Serialize};

use super::action::{Action, Offer, Verb};
use super::turn::{Role, Turn};
use crate::catalog::SessionConfig;
use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionStatus {
    Open,
    Deal { price: Money },
    NoDealQuit { by: Role },
    NoDealExhausted,
    Invalid { reason: String },
}

impl SessionStatus {
    pub fn is_open(&self) -> bool {
        matches!(self, SessionStatus::Open)
    }

    /// Ended by DEAL, QUIT, or turn exhaustion.
    pub fn is_valid_terminal(&self) -> bool {
        matches!(
            self,
            SessionStatus::Deal { .. } | SessionStatus::NoDealQuit { .. } | SessionStatus::NoDealExhausted
        )
    }

    pub fn deal_price(&self) -> Option<Money> {
        match self {
            SessionStatus::Deal { price } => Some(*price),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    WrongVerbForRole,
    PrematureDeal,
    DealMismatch,
    BadQuantity,
    BadCodename,
    FirstAction,
    NotYourTurn,
    SessionClosed,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::WrongVerbForRole => "wrong_verb_for_role",
            ViolationKind::PrematureDeal => "premature_deal",
            ViolationKind::DealMismatch => "deal_mismatch",
            ViolationKind::BadQuantity => "bad_quantity",
            ViolationKind::BadCodename => "bad_codename",
            ViolationKind::FirstAction => "first_action",
            ViolationKind::NotYourTurn => "not_your_turn",
            ViolationKind::SessionClosed => "move_on_closed_session",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}: {message}", kind.as_str())]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation {
            kind,
            message: message.into(),
        }
    }
}

fn allowed_verbs(role: Role) -> [Verb; 4] {
    match role {
        Role::Buyer => [Verb::Buy, Verb::Reject, Verb::Deal, Verb::Quit],
        Role::Seller => [Verb::Sell, Verb::Reject, Verb::Deal, Verb::Quit],
    }
}

/// A session in progress: configuration, accepted half-moves, and the
/// round counter. `round` counts completed buyer+seller exchanges.
#[derive(Debug, Clone)]
pub struct SessionState {
    config: SessionConfig,
    history: Vec<Turn>,
    round: u32,
    next_mover: Role,
    status: SessionStatus,
}

impl SessionState {
    pub fn new(config: SessionConfig) -> Self {
        SessionState {
            config,
            history: Vec::new(),
            round: 0,
            next_mover: Role::Buyer,
            status: SessionStatus::Open,
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn history(&self) -> &[Turn] {
        &self.history
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn next_mover(&self) -> Role {
        self.next_mover
    }

    pub fn status(&self) -> &SessionStatus {
        &self.status
    }

    pub fn rounds_remaining(&self) -> u32 {
        self.config.max_turns.saturating_sub(self.round)
    }

    /// Most recent BUY (for the buyer) or SELL (for the seller) proposal.
    pub fn last_proposal_by(&self, role: Role) -> Option<&Offer> {
        self.history
            .iter()
            .rev()
            .filter(|t| t.role == role)
            .find_map(|t| t.action.proposal())
    }

    pub fn moves_by(&self, role: Role) -> usize {
        self.history.iter().filter(|t| t.role == role).count()
    }

    /// Checks a proposed half-move against the turn order and the
    /// role, first-move, echo, quantity, and product rules.
    pub fn check_legality(&self, turn: &Turn) -> Result<(), Violation> {
        if !self.status.is_open() {
            return Err(Violation::new(ViolationKind::SessionClosed, "session has ended"));
        }
        if turn.role != self.next_mover {
            return Err(Violation::new(
                ViolationKind::NotYourTurn,
                format!("expected a {} move", self.next_mover),
            ));
        }
        let verb = turn.action.verb();
        if !allowed_verbs(turn.role).contains(&verb) {
            return Err(Violation::new(
                ViolationKind::WrongVerbForRole,
                format!("a {} may not use [{verb}]", turn.role),
            ));
        }
        if turn.role == Role::Buyer && self.history.is_empty() && !matches!(verb, Verb::Buy | Verb::Reject) {
            return Err(Violation::new(
                ViolationKind::FirstAction,
                "the buyer's first action must be [BUY] or [REJECT]",
            ));
        }
        if let Some(offer) = turn.action.offer() {
            if offer.quantity != self.config.quantity {
                return Err(Violation::new(
                    ViolationKind::BadQuantity,
                    format!("quantity must be {}, got {}", self.config.quantity, offer.quantity),
                ));
            }
            if offer.codename != self.config.codename() {
                return Err(Violation::new(
                    ViolationKind::BadCodename,
                    format!("this session is about `{}`, not `{}`", self.config.codename(), offer.codename),
                ));
            }
        }
        if let Action::Deal(deal) = &turn.action {
            let standing = self.last_proposal_by(turn.role.counterpart()).ok_or_else(|| {
                Violation::new(
                    ViolationKind::PrematureDeal,
                    format!("the {} has not made an offer yet", turn.role.counterpart()),
                )
            })?;
            if standing != deal {
                return Err(Violation::new(
                    ViolationKind::DealMismatch,
                    format!(
                        "[DEAL] must copy the standing offer ${} ({}x {})",
                        standing.price.plain(),
                        standing.quantity,
                        standing.codename
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Appends a half-move and updates status. Does not re-run the legality
    /// rules beyond turn order; call [`check_legality`](Self::check_legality)
    /// first or use [`play`](Self::play).
    pub fn advance(&mut self, turn: Turn) -> Result<&SessionStatus, Violation> {
        if !self.status.is_open() {
            return Err(Violation::new(ViolationKind::SessionClosed, "session has ended"));
        }
        if turn.role != self.next_mover {
            return Err(Violation::new(
                ViolationKind::NotYourTurn,
                format!("expected a {} move", self.next_mover),
            ));
        }
        let role = turn.role;
        match &turn.action {
            Action::Deal(o) => self.status = SessionStatus::Deal { price: o.price },
            Action::Quit => self.status = SessionStatus::NoDealQuit { by: role },
            _ => {}
        }
        self.history.push(turn);
        if self.status.is_open() {
            if role == Role::Seller {
                self.round += 1;
                if self.round >= self.config.max_turns {
                    self.status = SessionStatus::NoDealExhausted;
                }
            }
            self.next_mover = role.counterpart();
        }
        Ok(&self.status)
    }

    /// `check_legality` followed by `advance`.
    pub fn play(&mut self, turn: Turn) -> Result<&SessionStatus, Violation> {
        self.check_legality(&turn)?;
        self.advance(turn)
    }

    pub fn mark_invalid(&mut self, reason: impl Into<String>) {
        if self.status.is_open() {
            self.status = SessionStatus::Invalid { reason: reason.into() };
        }
    }
}
