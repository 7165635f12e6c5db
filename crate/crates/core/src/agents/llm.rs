//! Chat-model agent driven by the buyer/seller prompt templates.

use super::endpoint::{ChatEndpoint, ChatMessage, ChatRequest};
use super::prompts::Prompt;
use super::{Agent, AgentError, Feedback, Observation, Reply, VisibleTurn};

/// Sends the conversation so far to a chat endpoint at temperature 0.
///
/// The agent's own earlier replies go back verbatim as assistant messages,
/// Thought included; the counterpart's turns arrive as user messages with
/// Talk and Action only.
pub struct LlmAgent {
    endpoint: Box<dyn ChatEndpoint>,
    model: String,
    prompt: Prompt,
    seed: Option<u64>,
    accepted: Vec<String>,
    pending: Option<String>,
    retries: Vec<(String, String)>,
}

pub(crate) fn counterpart_message(turn: &VisibleTurn) -> String {
    format!("Talk: {}\nAction: {}", turn.talk, turn.action.render())
}

/// Appends a message, folding consecutive user messages into one so the
/// conversation strictly alternates.
fn push(messages: &mut Vec<ChatMessage>, msg: ChatMessage) {
    if let Some(last) = messages.last_mut() {
        if last.role == "user" && msg.role == "user" {
            last.content.push_str("\n\n");
            last.content.push_str(&msg.content);
            return;
        }
    }
    messages.push(msg);
}

impl LlmAgent {
    pub fn new(endpoint: Box<dyn ChatEndpoint>, model: impl Into<String>, prompt: Prompt, seed: Option<u64>) -> Self {
        LlmAgent {
            endpoint,
            model: model.into(),
            prompt,
            seed,
            accepted: Vec::new(),
            pending: None,
            retries: Vec::new(),
        }
    }

    pub fn messages(&self, obs: &Observation) -> Vec<ChatMessage> {
        let mut messages = vec![ChatMessage::system(&self.prompt.system)];
        push(&mut messages, ChatMessage::user(&self.prompt.user));
        let mut own = self.accepted.iter();
        for turn in &obs.history {
            if turn.role == obs.role {
                let content = own.next().cloned().unwrap_or_else(|| counterpart_message(turn));
                push(&mut messages, ChatMessage::assistant(content));
            } else {
                push(&mut messages, ChatMessage::user(counterpart_message(turn)));
            }
        }
        for (raw, notice) in &self.retries {
            push(&mut messages, ChatMessage::assistant(raw));
            push(&mut messages, ChatMessage::user(notice));
        }
        messages
    }
}

impl Agent for LlmAgent {
    fn act(&mut self, obs: &Observation, feedback: Option<&Feedback>) -> Result<Reply, AgentError> {
        match feedback {
            Some(fb) => {
                if let Some(raw) = self.pending.take() {
                    self.retries.push((raw, fb.notice()));
                }
            }
            None => {
                if let Some(raw) = self.pending.take() {
                    self.accepted.push(raw);
                }
                self.retries.clear();
            }
        }
        let request = ChatRequest {
            model: self.model.clone(),
            messages: self.messages(obs),
            temperature: 0.0,
            seed: self.seed,
        };
        let content = self.endpoint.complete(&request)?;
        self.pending = Some(content.clone());
        Ok(Reply::Text(content))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::endpoint::ReplayEndpoint;
    use crate::agents::ProductInfo;
    use crate::money::Money;
    use crate::protocol::{parse_turn, Action, Offer, Role};

    struct Capture {
        inner: ReplayEndpoint,
        seen: std::sync::Arc<std::sync::Mutex<Vec<ChatRequest>>>,
    }

    impl ChatEndpoint for Capture {
        fn complete(&mut self, request: &ChatRequest) -> Result<String, AgentError> {
            self.seen.lock().unwrap().push(request.clone());
            self.inner.complete(request)
        }
    }

    fn obs(history: Vec<VisibleTurn>) -> Observation {
        Observation {
            role: Role::Seller,
            product: ProductInfo {
                codename: "toys-games_22".into(),
                title: "DJI".into(),
                description: String::new(),
                list_price: Money::dollars(1000),
            },
            budget: None,
            cost: Some(Money::dollars(700)),
            history,
            turns_remaining: 10,
            t_m: 10,
        }
    }

    fn bid(d: i64) -> VisibleTurn {
        VisibleTurn {
            role: Role::Buyer,
            talk: "hi".into(),
            action: Action::Buy(Offer::new(Money::dollars(d), 1, "toys-games_22")),
        }
    }

    #[test]
    fn well_formed_completion_parses() {
        let reply = "Thought: go low\nTalk: Would you take $800?\nAction: [BUY] $800 (1x toys-games_22)";
        let mut agent = LlmAgent::new(
            Box::new(ReplayEndpoint::scripted([reply])),
            "m",
            Prompt {
                system: "s".into(),
                user: "u".into(),
            },
            None,
        );
        let mut o = obs(vec![]);
        o.role = Role::Buyer;
        let Reply::Text(text) = agent.act(&o, None).unwrap() else {
            panic!("expected text")
        };
        let turn = parse_turn(&text, Role::Buyer).unwrap();
        assert_eq!(turn.action.price(), Some(Money::dollars(800)));
    }

    #[test]
    fn message_layout_and_retry_notice() {
        let seen = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
        let endpoint = Capture {
            inner: ReplayEndpoint::scripted(["bad reply", "Thought: t\nTalk: ok\nAction: [SELL] $950 (1x toys-games_22)", "x"]),
            seen: seen.clone(),
        };
        let mut agent = LlmAgent::new(
            Box::new(endpoint),
            "m",
            Prompt {
                system: "SYS".into(),
                user: "USER".into(),
            },
            Some(3),
        );
        let first = obs(vec![bid(800)]);
        agent.act(&first, None).unwrap();
        let fb = Feedback {
            category: "no_action".into(),
            message: "missing".into(),
        };
        agent.act(&first, Some(&fb)).unwrap();

        // Next half-move: the accepted reply is replayed as an assistant message.
        let mut history = first.history.clone();
        history.push(VisibleTurn {
            role: Role::Seller,
            talk: "ok".into(),
            action: Action::Sell(Offer::new(Money::dollars(950), 1, "toys-games_22")),
        });
        history.push(bid(850));
        agent.act(&obs(history), None).unwrap();

        let seen = seen.lock().unwrap();
        let roles = |r: &ChatRequest| r.messages.iter().map(|m| m.role.clone()).collect::<Vec<_>>();
        assert_eq!(roles(&seen[0]), ["system", "user"]);
        assert!(seen[0].messages[1].content.starts_with("USER\n\nTalk: hi\nAction: [BUY] $800"));
        assert_eq!(roles(&seen[1]), ["system", "user", "assistant", "user"]);
        assert_eq!(seen[1].messages[2].content, "bad reply");
        assert!(seen[1].messages[3].content.contains("no_action"));
        assert_eq!(roles(&seen[2]), ["system", "user", "assistant", "user"]);
        assert!(seen[2].messages[2].content.starts_with("Thought: t"));
        assert!(seen[2].messages[3].content.contains("[BUY] $850"));
        assert!(seen.iter().all(|r| r.temperature == 0.0 && r.seed == Some(3)));
    }

    #[test]
    fn deterministic_with_replay() {
        let run = || {
            let text = "Thought: a\nTalk: b\nAction: [SELL] $990 (1x toys-games_22)";
            let mut agent = LlmAgent::new(
                Box::new(ReplayEndpoint::scripted([text])),
                "m",
                Prompt {
                    system: "s".into(),
                    user: "u".into(),
                },
                None,
            );
            match agent.act(&obs(vec![bid(800)]), None).unwrap() {
                Reply::Text(t) => parse_turn(&t, Role::Seller).unwrap(),
                Reply::Turn(t) => t,
            }
        };
        assert_eq!(run(), run());
    }
}
