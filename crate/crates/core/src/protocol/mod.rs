//! Action grammar, the alternating-offers state machine, and the session
//! runner that drives two agents through it.

pub mod action;
pub mod record;
pub mod runner;
pub mod session;
pub mod turn;

pub use action::{parse_action, parse_action_prefix, render_action, Action, Offer, ParseError, ParseErrorKind, Verb};
pub use record::{LogStatus, LoggedTurn, RejectedReply, SessionRecord};
pub use runner::{play_half_move, run_session};
pub use session::{SessionState, SessionStatus, Violation, ViolationKind};
pub use turn::{parse_turn, Role, Turn};
