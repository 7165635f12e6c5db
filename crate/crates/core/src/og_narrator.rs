//! Offer-generator buyer: a fixed linear bid schedule decides every action,
//! and a narrator only phrases it.

use crate::agents::endpoint::{ChatEndpoint, ChatMessage, ChatRequest};
use crate::agents::prompts::{inventory_block, NARRATOR_DEMO_ASSISTANT, NARRATOR_DEMO_USER, NARRATOR_SYSTEM};
use crate::agents::{Agent, AgentError, Feedback, Observation, Reply};
use crate::error::{Error, Result};
use crate::money::Money;
use crate::protocol::{Action, Offer, Role, Turn};

pub const DEFAULT_FLOOR_RATIO: f64 = 0.5;
pub const DEFAULT_CEILING_RATIO: f64 = 1.0;

/// Bid as a fraction of budget, interpolated linearly from `floor` at the
/// buyer's first move to `ceiling` at move `t_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfferSchedule {
    floor: f64,
    ceiling: f64,
}

impl Default for OfferSchedule {
    fn default() -> Self {
        OfferSchedule {
            floor: DEFAULT_FLOOR_RATIO,
            ceiling: DEFAULT_CEILING_RATIO,
        }
    }
}

impl OfferSchedule {
    pub fn new(floor: f64, ceiling: f64) -> Result<Self> {
        if !(floor > 0.0 && floor <= ceiling && ceiling <= 1.0) {
            return Err(Error::AgentConfig(format!(
                "offer schedule needs 0 < floor <= ceiling <= 1, got {floor} and {ceiling}"
            )));
        }
        Ok(OfferSchedule { floor, ceiling })
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    /// Price at buyer move `t`, clamped to `t_m`.
    pub fn price(&self, t: u32, max_turns: u32, budget: Money) -> Money {
        let max_turns = max_turns.max(1);
        let t = t.min(max_turns);
        let ratio = self.floor + (self.ceiling - self.floor) * (t as f64 / max_turns as f64);
        budget.scale(ratio)
    }
}

/// `(0.5 + 0.5 * t / t_m) * B`, rounded to cents.
pub fn offer_price(t: u32, max_turns: u32, budget: Money) -> Money {
    OfferSchedule::default().price(t, max_turns, budget)
}

/// Accepts the seller's standing offer when it is at or below `price`,
/// otherwise bids `price`.
pub fn og_decide(standing_seller_offer: Option<&Offer>, price: Money, codename: &str) -> Action {
    match standing_seller_offer {
        Some(offer) if offer.price <= price => Action::Deal(offer.clone()),
        _ => Action::Buy(Offer::new(price, 1, codename)),
    }
}

/// Per-session generator state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OgState {
    pub buyer_move: u32,
    pub max_turns: u32,
    pub budget: Money,
    pub schedule: OfferSchedule,
}

impl OgState {
    pub fn current_price(&self) -> Money {
        self.schedule.price(self.buyer_move, self.max_turns, self.budget)
    }
}

pub trait Narrator: Send {
    fn narrate(&mut self, obs: &Observation, action: &Action) -> String;
}

pub fn narrate(obs: &Observation, action: &Action, narrator: &mut dyn Narrator) -> String {
    narrator.narrate(obs, action)
}

/// Fixed sentences per verb.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateNarrator;

impl TemplateNarrator {
    pub fn sentence(action: &Action) -> String {
        match action {
            Action::Buy(o) => format!("I can offer ${} for {}x {}.", o.price.plain(), o.quantity, o.codename),
            Action::Sell(o) => format!("I can sell {}x {} for ${}.", o.quantity, o.codename, o.price.plain()),
            Action::Deal(o) => format!("Deal. {}x {} for ${}.", o.quantity, o.codename, o.price.plain()),
            Action::Reject => "That doesn't work for me.".to_string(),
            Action::Quit => "I'm afraid we can't make a deal.".to_string(),
        }
    }
}

impl Narrator for TemplateNarrator {
    fn narrate(&mut self, _obs: &Observation, action: &Action) -> String {
        Self::sentence(action)
    }
}

/// Pulls the text after the last `Sentences:` label, minus surrounding quotes.
pub fn extract_sentences(reply: &str) -> Option<String> {
    let lower = reply.to_ascii_lowercase();
    let at = lower.rfind("sentences:")?;
    let text = reply[at + "sentences:".len()..].trim();
    let text = text.strip_prefix('"').unwrap_or(text);
    let text = text.strip_suffix('"').unwrap_or(text).trim();
    (!text.is_empty()).then(|| text.to_string())
}

fn role_tag(role: Role) -> &'static str {
    match role {
        Role::Buyer => "BUYER",
        Role::Seller => "SELLER",
    }
}

/// Builds the live narrator request after the one-shot demonstration.
pub fn narrator_messages(obs: &Observation, action: &Action) -> Vec<ChatMessage> {
    let inventory = inventory_block(
        obs.codename(),
        &obs.product.title,
        &obs.product.description,
        obs.product.list_price,
        None,
    );
    let dialogue: String = obs
        .history
        .iter()
        .map(|t| {
            format!(
                "\"{}\": \"{}: {}\",\n",
                t.action.render(),
                role_tag(t.role),
                t.talk.replace('"', "'")
            )
        })
        .collect();
    let live = format!(
        "{inventory}\n\nDialogue:\n{dialogue}\nFinal Role: \"{}\"\nFinal Action: \"{}\"",
        role_tag(obs.role),
        action.render()
    );
    vec![
        ChatMessage::system(NARRATOR_SYSTEM),
        ChatMessage::user(NARRATOR_DEMO_USER),
        ChatMessage::assistant(NARRATOR_DEMO_ASSISTANT),
        ChatMessage::user(live),
    ]
}

/// Chat-model narrator. Falls back to the template sentence when the
/// endpoint fails or the reply has no `Sentences:` field.
pub struct LlmNarrator {
    endpoint: Box<dyn ChatEndpoint>,
    model: String,
    seed: Option<u64>,
}

impl LlmNarrator {
    pub fn new(endpoint: Box<dyn ChatEndpoint>, model: impl Into<String>, seed: Option<u64>) -> Self {
        LlmNarrator {
            endpoint,
            model: model.into(),
            seed,
        }
    }
}

impl Narrator for LlmNarrator {
    fn narrate(&mut self, obs: &Observation, action: &Action) -> String {
        let request = ChatRequest {
            model: self.model.clone(),
            messages: narrator_messages(obs, action),
            temperature: 0.0,
            seed: self.seed,
        };
        match self.endpoint.complete(&request) {
            Ok(reply) => extract_sentences(&reply).unwrap_or_else(|| {
                tracing::debug!("narrator reply lacks Sentences:, using template");
                TemplateNarrator::sentence(action)
            }),
            Err(e) => {
                tracing::warn!(error = %e, "narrator unavailable, using template");
                TemplateNarrator::sentence(action)
            }
        }
    }
}

/// Buyer whose prices come from an [`OfferSchedule`]. Never quits; the
/// session ends by a deal, a seller quit, or running out of turns.
pub struct OgBuyer {
    schedule: OfferSchedule,
    narrator: Box<dyn Narrator>,
}

impl OgBuyer {
    pub fn new(schedule: OfferSchedule, narrator: Box<dyn Narrator>) -> Self {
        OgBuyer { schedule, narrator }
    }

    pub fn with_template(schedule: OfferSchedule) -> Self {
        Self::new(schedule, Box::new(TemplateNarrator))
    }

    pub fn state(&self, obs: &Observation) -> OgState {
        OgState {
            buyer_move: obs.own_moves() as u32,
            max_turns: obs.t_m,
            budget: obs.private_value(),
            schedule: self.schedule,
        }
    }
}

impl Agent for OgBuyer {
    fn act(&mut self, obs: &Observation, _feedback: Option<&Feedback>) -> Result<Reply, AgentError> {
        let price = self.state(obs).current_price();
        let action = og_decide(obs.standing_offer(), price, obs.codename());
        let talk = narrate(obs, &action, self.narrator.as_mut());
        Ok(Reply::Turn(Turn::new(Role::Buyer, "", talk, action)))
    }
}
