//! The five-verb action grammar: `[BUY] $10 (1x product_1)`, `[REJECT]`, ...

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::money::Money;

/// A priced proposal for some quantity of one product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Offer {
    pub price: Money,
    pub quantity: u32,
    pub codename: String,
}

impl Offer {
    pub fn new(price: Money, quantity: u32, codename: impl Into<String>) -> Self {
        Offer {
            price,
            quantity,
            codename: codename.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Buy(Offer),
    Sell(Offer),
    Reject,
    Deal(Offer),
    Quit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verb {
    Buy,
    Sell,
    Reject,
    Deal,
    Quit,
}

impl Verb {
    pub const ALL: [Verb; 5] = [Verb::Buy, Verb::Sell, Verb::Reject, Verb::Deal, Verb::Quit];

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Buy => "BUY",
            Verb::Sell => "SELL",
            Verb::Reject => "REJECT",
            Verb::Deal => "DEAL",
            Verb::Quit => "QUIT",
        }
    }

    fn from_keyword(s: &str) -> Option<Verb> {
        Verb::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn is_priced(self) -> bool {
        matches!(self, Verb::Buy | Verb::Sell | Verb::Deal)
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Action {
    pub fn verb(&self) -> Verb {
        match self {
            Action::Buy(_) => Verb::Buy,
            Action::Sell(_) => Verb::Sell,
            Action::Reject => Verb::Reject,
            Action::Deal(_) => Verb::Deal,
            Action::Quit => Verb::Quit,
        }
    }

    pub fn offer(&self) -> Option<&Offer> {
        match self {
            Action::Buy(o) | Action::Sell(o) | Action::Deal(o) => Some(o),
            Action::Reject | Action::Quit => None,
        }
    }

    /// The standing proposal this action puts on the table, if any.
    /// DEAL closes a session and is never itself a proposal.
    pub fn proposal(&self) -> Option<&Offer> {
        match self {
            Action::Buy(o) | Action::Sell(o) => Some(o),
            _ => None,
        }
    }

    pub fn price(&self) -> Option<Money> {
        self.offer().map(|o| o.price)
    }

    /// Canonical text: `[SELL] $34.50 (1x electronics_203)`.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.verb())?;
        if let Some(o) = self.offer() {
            write!(f, " ${} ({}x {})", o.price.plain(), o.quantity, o.codename)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    UnknownVerb,
    MissingPrice,
    MalformedPayload,
    NoAction,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::UnknownVerb => "unknown_verb",
            ParseErrorKind::MissingPrice => "missing_price",
            ParseErrorKind::MalformedPayload => "malformed_payload",
            ParseErrorKind::NoAction => "no_action",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}: {message}", kind.as_str())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            message: message.into(),
        }
    }
}

/// Parses a complete action string; surrounding whitespace is ignored but
/// nothing else may follow the action.
pub fn parse_action(text: &str) -> Result<Action, ParseError> {
    let trimmed = text.trim();
    let (action, used) = parse_action_prefix(trimmed)?;
    let rest = trimmed[used..].trim();
    if !rest.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::MalformedPayload,
            format!("unexpected trailing text `{rest}`"),
        ));
    }
    Ok(action)
}

pub fn render_action(action: &Action) -> String {
    action.render()
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, ch: char) -> bool {
        if self.peek() == Some(ch) {
            self.pos += ch.len_utf8();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let rest = self.rest();
        let len = rest.find(|c: char| !pred(c)).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }
}

fn malformed(message: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::MalformedPayload, message)
}

/// Parses one action at the start of `text` and reports how many bytes it
/// consumed. Used by the turn parser, which tolerates text after the action.
pub fn parse_action_prefix(text: &str) -> Result<(Action, usize), ParseError> {
    let mut cur = Cursor { src: text, pos: 0 };
    if !cur.eat('[') {
        return Err(malformed("action must start with `[`"));
    }
    let keyword = cur.take_while(|c| c != ']' && c != '\n');
    if !cur.eat(']') {
        return Err(malformed("unterminated verb bracket"));
    }
    let verb = Verb::from_keyword(keyword).ok_or_else(|| {
        ParseError::new(ParseErrorKind::UnknownVerb, format!("unknown verb `{keyword}`"))
    })?;
    if !verb.is_priced() {
        let action = if verb == Verb::Reject {
            Action::Reject
        } else {
            Action::Quit
        };
        return Ok((action, cur.pos));
    }

    cur.skip_ws();
    if !cur.eat('$') {
        return Err(ParseError::new(
            ParseErrorKind::MissingPrice,
            format!("[{verb}] requires `$<price> (<n>x <codename>)`"),
        ));
    }
    let number = cur.take_while(|c| c.is_ascii_digit() || c == ',' || c == '.');
    let price = Money::parse_decimal(number).map_err(|_| malformed(format!("bad price `{number}`")))?;
    if !price.is_positive() {
        return Err(malformed("price must be positive"));
    }
    cur.skip_ws();
    if !cur.eat('(') {
        return Err(malformed("expected `(` before quantity"));
    }
    cur.skip_ws();
    let qty_text = cur.take_while(|c| c.is_ascii_digit());
    let quantity: u32 = qty_text
        .parse()
        .map_err(|_| malformed(format!("bad quantity `{qty_text}`")))?;
    if quantity == 0 {
        return Err(malformed("quantity must be positive"));
    }
    cur.skip_ws();
    if !cur.eat('x') {
        return Err(malformed("expected `x` after quantity"));
    }
    cur.skip_ws();
    let codename = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if codename.is_empty() {
        return Err(malformed("missing codename"));
    }
    cur.skip_ws();
    if !cur.eat(')') {
        return Err(malformed("expected `)` after codename"));
    }
    let offer = Offer::new(price, quantity, codename);
    let action = match verb {
        Verb::Buy => Action::Buy(offer),
        Verb::Sell => Action::Sell(offer),
        _ => Action::Deal(offer),
    };
    Ok((action, cur.pos))
}

impl FromStr for Action {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_action(s)
    }
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_action(&s).map_err(serde::de::Error::custom)
    }
}
