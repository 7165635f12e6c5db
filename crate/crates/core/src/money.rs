//! Fixed-point currency amounts.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An amount of money held as whole cents.
///
/// Serialized as a JSON number in currency units (`319.2`), parsed from
/// either a number or a decimal string with at most two fractional digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid money amount `{0}`")]
pub struct MoneyParseError(pub String);

/// Rounds an amount in cents to the nearest cent, halves away from zero.
/// The amount is first snapped to a millionth of a cent so that binary
/// representation error (`0.7 * 15` is `10.4999...`) cannot flip a tie.
fn round_cents(cents: f64) -> i64 {
    ((cents * 1e6).round() / 1e6).round() as i64
}

impl Money {
    pub const ZERO: Money = Money(0);
    pub const CENT: Money = Money(1);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    /// Whole currency units, e.g. `Money::dollars(30)` is `$30.00`.
    pub const fn dollars(units: i64) -> Self {
        Money(units * 100)
    }

    /// Rounds a floating amount in currency units to the nearest cent,
    /// halves away from zero.
    pub fn from_f64(units: f64) -> Self {
        Money(round_cents(units * 100.0))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// `factor * self`, rounded to cents with halves away from zero.
    pub fn scale(self, factor: f64) -> Self {
        Money(round_cents(factor * self.0 as f64))
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    /// Canonical price text without the currency sign: `30`, `34.50`.
    /// Whole amounts drop the cents entirely.
    pub fn plain(self) -> String {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        if abs % 100 == 0 {
            format!("{sign}{}", abs / 100)
        } else {
            format!("{sign}{}.{:02}", abs / 100, abs % 100)
        }
    }

    /// Parses `1234`, `1,234.5`, `34.50`, optionally prefixed by `$`.
    /// Thousands separators must be well placed; more than two decimals
    /// is rejected.
    pub fn parse_decimal(text: &str) -> Result<Self, MoneyParseError> {
        let err = || MoneyParseError(text.to_string());
        let mut s = text.trim();
        let negative = if let Some(rest) = s.strip_prefix('-') {
            s = rest;
            true
        } else {
            false
        };
        s = s.strip_prefix('$').unwrap_or(s);
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (s, None),
        };
        let digits = strip_thousands(int_part).ok_or_else(err)?;
        let whole: i64 = digits.parse().map_err(|_| err())?;
        let frac = match frac_part {
            None => 0,
            Some(f) if (1..=2).contains(&f.len()) && f.bytes().all(|b| b.is_ascii_digit()) => {
                let v: i64 = f.parse().map_err(|_| err())?;
                if f.len() == 1 {
                    v * 10
                } else {
                    v
                }
            }
            Some(_) => return Err(err()),
        };
        let cents = whole
            .checked_mul(100)
            .and_then(|c| c.checked_add(frac))
            .ok_or_else(err)?;
        Ok(Money(if negative { -cents } else { cents }))
    }
}

/// Validates optional `,` grouping and returns the bare digit string.
fn strip_thousands(int_part: &str) -> Option<String> {
    if int_part.is_empty() {
        return None;
    }
    if !int_part.contains(',') {
        return int_part
            .bytes()
            .all(|b| b.is_ascii_digit())
            .then(|| int_part.to_string());
    }
    let groups: Vec<&str> = int_part.split(',').collect();
    let first = groups[0];
    if first.is_empty() || first.len() > 3 || !first.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    for g in &groups[1..] {
        if g.len() != 3 || !g.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    Some(groups.concat())
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 < 0 {
            write!(f, "-${}", self.abs().plain())
        } else {
            write!(f, "${}", self.plain())
        }
    }
}

impl FromStr for Money {
    type Err = MoneyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Money::parse_decimal(s)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) if v.is_finite() => Ok(Money::from_f64(v)),
            Raw::Number(v) => Err(serde::de::Error::custom(format!("non-finite amount {v}"))),
            Raw::Text(s) => Money::parse_decimal(&s).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_rendering_drops_zero_cents() {
        assert_eq!(Money::from_cents(3000).plain(), "30");
        assert_eq!(Money::from_cents(3450).plain(), "34.50");
        assert_eq!(Money::from_cents(5).plain(), "0.05");
        assert_eq!(Money::from_cents(-251).to_string(), "-$2.51");
    }

    #[test]
    fn decimal_ties_round_away_from_zero() {
        assert_eq!(Money::from_cents(15).scale(0.7), Money::from_cents(11));
        assert_eq!(Money::from_cents(-15).scale(0.7), Money::from_cents(-11));
        assert_eq!(Money::from_f64(0.285), Money::from_cents(29));
        assert_eq!(Money::from_cents(3199).scale(0.5), Money::from_cents(1600));
    }

    #[test]
    fn parses_grouped_and_fractional_amounts() {
        assert_eq!(Money::parse_decimal("1,234.5").unwrap(), Money::from_cents(123450));
        assert_eq!(Money::parse_decimal("$34.50").unwrap(), Money::from_cents(3450));
        assert_eq!(Money::parse_decimal("30").unwrap(), Money::dollars(30));
        assert!(Money::parse_decimal("1.234").is_err());
        assert!(Money::parse_decimal("12,34").is_err());
        assert!(Money::parse_decimal("1.").is_err());
        assert!(Money::parse_decimal("").is_err());
    }

    #[test]
    fn scale_rounds_half_away_from_zero() {
        assert_eq!(Money::dollars(399).scale(0.8), Money::from_cents(31920));
        assert_eq!(Money::from_cents(3999).scale(0.8), Money::from_cents(3199));
        assert_eq!(Money::from_cents(1).scale(0.5), Money::from_cents(1));
        assert_eq!(Money::from_cents(-1).scale(0.5), Money::from_cents(-1));
    }

    #[test]
    fn json_number_round_trip() {
        let m = Money::from_cents(31920);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "319.2");
        assert_eq!(serde_json::from_str::<Money>(&s).unwrap(), m);
        assert_eq!(serde_json::from_str::<Money>("\"1,099.99\"").unwrap(), Money::from_cents(109999));
    }
}
