use std::fmt;

use serde::{Deserialize, Serialize};

use super::action::{parse_action_prefix, Action, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Buyer,
    Seller,
}

impl Role {
    pub fn counterpart(self) -> Role {
        match self {
            Role::Buyer => Role::Seller,
            Role::Seller => Role::Buyer,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Buyer => "buyer",
            Role::Seller => "seller",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "buyer" => Ok(Role::Buyer),
            "seller" => Ok(Role::Seller),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// One half-move. `thought` stays with its author; only `talk` and
/// `action` reach the counterpart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub role: Role,
    pub thought: String,
    pub talk: String,
    pub action: Action,
}

impl Turn {
    pub fn new(role: Role, thought: impl Into<String>, talk: impl Into<String>, action: Action) -> Self {
        Turn {
            role,
            thought: thought.into(),
            talk: talk.into(),
            action,
        }
    }

    /// The three-part reply layout agents are asked to produce.
    pub fn to_message(&self) -> String {
        format!(
            "Thought: {}\nTalk: {}\nAction: {}",
            self.thought,
            self.talk,
            self.action.render()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Thought,
    Talk,
    Action,
}

struct LabelHit {
    label: Label,
    line_start: usize,
    content_start: usize,
}

fn find_labels(raw: &str) -> Vec<LabelHit> {
    let mut hits = Vec::new();
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        let body = line.trim_start();
        let indent = line.len() - body.len();
        for (label, name) in [
            (Label::Thought, "thought:"),
            (Label::Talk, "talk:"),
            (Label::Action, "action:"),
        ] {
            if body.len() >= name.len() && body[..name.len()].eq_ignore_ascii_case(name) {
                hits.push(LabelHit {
                    label,
                    line_start: offset,
                    content_start: offset + indent + name.len(),
                });
                break;
            }
        }
        offset += line.len();
    }
    hits
}

/// Splits an agent reply into Thought, Talk, and Action.
///
/// Labels are recognised at line starts, case-insensitively, and the last
/// `Action:` label wins. Missing Thought or Talk yields empty text; the
/// action must be present and grammatical.
pub fn parse_turn(raw: &str, role: Role) -> Result<Turn, ParseError> {
    let hits = find_labels(raw);
    let Some(action_pos) = hits.iter().rposition(|h| h.label == Label::Action) else {
        return Err(ParseError::new(ParseErrorKind::NoAction, "no `Action:` label found"));
    };

    let action_region = &raw[hits[action_pos].content_start..];
    let mut first_error = None;
    let mut action = None;
    for (i, _) in action_region.match_indices('[') {
        match parse_action_prefix(&action_region[i..]) {
            Ok((a, _)) => {
                action = Some(a);
                break;
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let Some(action) = action else {
        let detail = first_error.map_or_else(|| "no bracketed action".to_string(), |e| e.to_string());
        return Err(ParseError::new(
            ParseErrorKind::NoAction,
            format!("no grammatical action after `Action:` ({detail})"),
        ));
    };

    let section = |label: Label| -> String {
        hits[..action_pos]
            .iter()
            .rposition(|h| h.label == label)
            .map(|i| {
                let end = hits.get(i + 1).map_or(raw.len(), |next| next.line_start);
                raw[hits[i].content_start..end].trim().to_string()
            })
            .unwrap_or_default()
    };

    Ok(Turn {
        role,
        thought: section(Label::Thought),
        talk: section(Label::Talk),
        action,
    })
}
