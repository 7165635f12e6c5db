//! Deterministic agents with closed-form price schedules, used as oracles.

use super::{Agent, AgentError, Feedback, Observation, Reply};
use crate::error::{Error, Result};
use crate::money::Money;
use crate::protocol::{Action, Offer, Role, Turn};

const THOUGHT: &str = "Following the scripted schedule.";

fn talk_for(action: &Action) -> String {
    match action {
        Action::Buy(o) | Action::Sell(o) => format!("Offering ${} for {}x {}.", o.price.plain(), o.quantity, o.codename),
        Action::Deal(o) => format!("Deal at ${} for {}x {}.", o.price.plain(), o.quantity, o.codename),
        Action::Reject => "I reject that offer.".to_string(),
        Action::Quit => "No deal.".to_string(),
    }
}

fn scripted_turn(role: Role, action: Action) -> Reply {
    let talk = talk_for(&action);
    Reply::Turn(Turn::new(role, THOUGHT, talk, action))
}

/// Buyer that bids along a straight line from `open_ratio * B` to
/// `close_ratio * B` over its moves.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedBuyer {
    pub open_ratio: f64,
    pub close_ratio: f64,
}

impl ScriptedBuyer {
    pub fn new(open_ratio: f64, close_ratio: f64) -> Result<Self> {
        if !(open_ratio > 0.0 && open_ratio <= 1.0) || !(close_ratio >= open_ratio && close_ratio <= 1.0) {
            return Err(Error::AgentConfig(format!(
                "scripted buyer needs 0 < r0 <= r1 <= 1, got r0={open_ratio}, r1={close_ratio}"
            )));
        }
        Ok(ScriptedBuyer { open_ratio, close_ratio })
    }

    /// Target bid at the buyer's `k`-th move (0-indexed).
    pub fn target(&self, k: u32, max_turns: u32, budget: Money) -> Money {
        if max_turns <= 1 {
            return budget.scale(self.open_ratio);
        }
        let ratio = self.open_ratio + (self.close_ratio - self.open_ratio) * k as f64 / (max_turns - 1) as f64;
        budget.scale(ratio)
    }

    pub fn decide(&self, obs: &Observation) -> Action {
        let k = obs.own_moves() as u32;
        let target = self.target(k, obs.t_m, obs.private_value());
        match obs.standing_offer() {
            Some(offer) if offer.price <= target => Action::Deal(offer.clone()),
            // The opening move must be a bid, even when it is also the last.
            _ if k > 0 && k + 1 >= obs.t_m => Action::Quit,
            _ => Action::Buy(Offer::new(target, 1, obs.codename())),
        }
    }
}

impl Agent for ScriptedBuyer {
    fn act(&mut self, obs: &Observation, _feedback: Option<&Feedback>) -> Result<Reply, AgentError> {
        Ok(scripted_turn(Role::Buyer, self.decide(obs)))
    }
}

/// Time-dependent conceder: asks `open_ratio * L` and drops linearly toward
/// its reservation price `C * (1 + margin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedSeller {
    pub margin: f64,
    pub open_ratio: f64,
    reservation: Money,
}

impl ScriptedSeller {
    pub fn new(margin: f64, open_ratio: f64, cost: Money, list_price: Money) -> Result<Self> {
        if !(margin >= 0.0) || !(open_ratio > 0.0 && open_ratio <= 1.0) {
            return Err(Error::AgentConfig(format!(
                "scripted seller needs m >= 0 and 0 < s0 <= 1, got m={margin}, s0={open_ratio}"
            )));
        }
        let reservation = cost.scale(1.0 + margin);
        if reservation.as_f64() > open_ratio * list_price.as_f64() {
            return Err(Error::AgentConfig(format!(
                "reservation {reservation} exceeds opening ask {open_ratio} x {list_price}"
            )));
        }
        Ok(ScriptedSeller {
            margin,
            open_ratio,
            reservation,
        })
    }

    pub fn reservation(&self) -> Money {
        self.reservation
    }

    /// Ask at the seller's `k`-th move (0-indexed).
    pub fn ask(&self, k: u32, max_turns: u32, list_price: Money) -> Money {
        let decay = 1.0 - k as f64 / max_turns as f64;
        list_price.scale(self.open_ratio * decay).max(self.reservation)
    }

    pub fn decide(&self, obs: &Observation) -> Action {
        let k = obs.own_moves() as u32;
        let ask = self.ask(k, obs.t_m, obs.product.list_price);
        let last_move = k + 1 >= obs.t_m;
        match obs.standing_offer() {
            Some(bid) if bid.price >= ask || (last_move && bid.price >= self.reservation) => Action::Deal(bid.clone()),
            _ => Action::Sell(Offer::new(ask, 1, obs.codename())),
        }
    }
}

impl Agent for ScriptedSeller {
    fn act(&mut self, obs: &Observation, _feedback: Option<&Feedback>) -> Result<Reply, AgentError> {
        Ok(scripted_turn(Role::Seller, self.decide(obs)))
    }
}
