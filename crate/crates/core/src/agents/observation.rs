use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::protocol::{Action, Offer, Role, SessionState};

/// Public product information shown to both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductInfo {
    pub codename: String,
    pub title: String,
    pub description: String,
    #[serde(rename = "L")]
    pub list_price: Money,
}

/// A half-move as the other side sees it: no Thought.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleTurn {
    pub role: Role,
    pub talk: String,
    pub action: Action,
}

/// What one role may know about a session. The buyer sees `B` and never
/// `C`; the seller the reverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub role: Role,
    #[serde(flatten)]
    pub product: ProductInfo,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Money>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Money>,
    pub history: Vec<VisibleTurn>,
    pub turns_remaining: u32,
    pub t_m: u32,
}

impl Observation {
    /// Budget for the buyer, cost for the seller.
    pub fn private_value(&self) -> Money {
        match self.role {
            Role::Buyer => self.budget.expect("buyer observation carries B"),
            Role::Seller => self.cost.expect("seller observation carries C"),
        }
    }

    pub fn codename(&self) -> &str {
        &self.product.codename
    }

    /// The counterpart's most recent BUY/SELL, which is the only offer a
    /// DEAL may accept.
    pub fn standing_offer(&self) -> Option<&Offer> {
        let other = self.role.counterpart();
        self.history
            .iter()
            .rev()
            .filter(|t| t.role == other)
            .find_map(|t| t.action.proposal())
    }

    /// Number of half-moves this role has already made.
    pub fn own_moves(&self) -> usize {
        self.history.iter().filter(|t| t.role == self.role).count()
    }
}

/// Projects a session onto what `role` is allowed to see.
pub fn observe(state: &SessionState, role: Role) -> Observation {
    let cfg = state.config();
    Observation {
        role,
        product: ProductInfo {
            codename: cfg.product.codename.clone(),
            title: cfg.product.title.clone(),
            description: cfg.product.description.clone(),
            list_price: cfg.list_price,
        },
        budget: (role == Role::Buyer).then_some(cfg.budget),
        cost: (role == Role::Seller).then_some(cfg.cost),
        history: state
            .history()
            .iter()
            .map(|t| VisibleTurn {
                role: t.role,
                talk: t.talk.clone(),
                action: t.action.clone(),
            })
            .collect(),
        turns_remaining: state.rounds_remaining(),
        t_m: cfg.max_turns,
    }
}
