//! Profits, normalized profits, and benchmark aggregates.
//!
//! Normalized profit divides each side's profit by the size of the bargaining
//! gap `|B - C|`, so a deal inside the gap splits exactly one unit between
//! the two sides (or minus one unit when the budget is below cost). A set of
//! valid sessions therefore satisfies
//! `SNP_b + SNP_s = #MI deals - #CI deals`.

use serde::{Deserialize, Serialize};

use crate::catalog::Scenario;
use crate::money::Money;
use crate::protocol::SessionRecord;

/// `(B - D, D - C)`.
pub fn profits(budget: Money, cost: Money, deal: Money) -> (Money, Money) {
    (budget - deal, deal - cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("utilities are undefined when budget equals cost")]
pub struct DegenerateGap;

/// `((B - D) / (B - C), (D - C) / (B - C))`. Signed by `B - C`, so in
/// conflicting-interest sessions a losing buyer can show positive utility;
/// aggregates use [`normalized_profits`] instead.
pub fn rubinstein_utilities(budget: Money, cost: Money, deal: Money) -> Result<(f64, f64), DegenerateGap> {
    let gap = (budget - cost).as_f64();
    if gap == 0.0 {
        return Err(DegenerateGap);
    }
    let (pb, ps) = profits(budget, cost, deal);
    Ok((pb.as_f64() / gap, ps.as_f64() / gap))
}

/// `(0, 0)` without a deal, else profits divided by `|B - C|`.
pub fn normalized_profits(budget: Money, cost: Money, deal: Option<Money>) -> (f64, f64) {
    let Some(deal) = deal else {
        return (0.0, 0.0);
    };
    let gap = (budget - cost).abs();
    debug_assert!(gap.is_positive(), "budget equals cost; sigma adjustment missing");
    let (pb, ps) = profits(budget, cost, deal);
    // Integer cents keep both numerators exact before the single division.
    let gap = gap.cents() as f64;
    (pb.cents() as f64 / gap, ps.cents() as f64 / gap)
}

/// Buyer's first BUY price divided by the budget.
pub fn first_bid_ratio(record: &SessionRecord) -> Option<f64> {
    record.first_buyer_bid.map(|bid| bid.cents() as f64 / record.budget.cents() as f64)
}

/// Per-session scores in the units the summary aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionScore {
    pub session_id: String,
    pub scenario: Scenario,
    pub valid: bool,
    pub dealt: bool,
    pub deal_price: Option<Money>,
    #[serde(rename = "P_b")]
    pub p_b: Option<Money>,
    #[serde(rename = "P_s")]
    pub p_s: Option<Money>,
    #[serde(rename = "NP_b")]
    pub np_b: f64,
    #[serde(rename = "NP_s")]
    pub np_s: f64,
    #[serde(rename = "FBR")]
    pub fbr: Option<f64>,
}

impl SessionScore {
    pub fn from_record(record: &SessionRecord) -> Self {
        let deal = if record.valid { record.deal_price } else { None };
        let (np_b, np_s) = normalized_profits(record.budget, record.cost, deal);
        let p = deal.map(|d| profits(record.budget, record.cost, d));
        SessionScore {
            session_id: record.session_id.clone(),
            scenario: record.scenario,
            valid: record.valid,
            dealt: deal.is_some(),
            deal_price: deal,
            p_b: p.map(|p| p.0),
            p_s: p.map(|p| p.1),
            np_b,
            np_s,
            fbr: if record.valid { first_bid_ratio(record) } else { None },
        }
    }
}

/// Counts and normalized-profit sums over one scope of valid sessions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScopeTally {
    pub count: u64,
    pub deals: u64,
    pub snp_b: f64,
    pub snp_s: f64,
}

impl ScopeTally {
    fn add(&mut self, s: &SessionScore) {
        self.count += 1;
        self.deals += u64::from(s.dealt);
        self.snp_b += s.np_b;
        self.snp_s += s.np_s;
    }

    fn merge(&mut self, other: &ScopeTally) {
        self.count += other.count;
        self.deals += other.deals;
        self.snp_b += other.snp_b;
        self.snp_s += other.snp_s;
    }

    /// Deals over valid sessions in this scope; `None` for an empty scope.
    pub fn deal_rate(&self) -> Option<f64> {
        (self.count > 0).then(|| self.deals as f64 / self.count as f64)
    }
}

/// `SNP_b / (SNP_b + SNP_s)` and its complement; `None` when the total is
/// not positive.
pub fn share(snp_b: f64, snp_s: f64) -> Option<(f64, f64)> {
    let total = snp_b + snp_s;
    (total > 0.0).then(|| (snp_b / total, snp_s / total))
}

/// Commutative fold over session scores. Invalid sessions are counted
/// separately and contribute nothing else.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Accumulator {
    all: ScopeTally,
    mi: ScopeTally,
    ci: ScopeTally,
    fbr_sum: f64,
    fbr_count: u64,
    invalid: u64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, score: &SessionScore) {
        if !score.valid {
            self.invalid += 1;
            return;
        }
        self.all.add(score);
        match score.scenario {
            Scenario::MI => self.mi.add(score),
            Scenario::CI => self.ci.add(score),
        }
        if let Some(fbr) = score.fbr {
            self.fbr_sum += fbr;
            self.fbr_count += 1;
        }
    }

    pub fn add_record(&mut self, record: &SessionRecord) {
        self.add(&SessionScore::from_record(record));
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.all.merge(&other.all);
        self.mi.merge(&other.mi);
        self.ci.merge(&other.ci);
        self.fbr_sum += other.fbr_sum;
        self.fbr_count += other.fbr_count;
        self.invalid += other.invalid;
    }

    pub fn finish(&self) -> BenchmarkSummary {
        let shares = share(self.all.snp_b, self.all.snp_s);
        BenchmarkSummary {
            all: self.all,
            mi: self.mi,
            ci: self.ci,
            share_b: shares.map(|s| s.0),
            share_s: shares.map(|s| s.1),
            avg_fbr: (self.fbr_count > 0).then(|| self.fbr_sum / self.fbr_count as f64),
            invalid: self.invalid,
        }
    }
}

/// Per-scope aggregates for one buyer/seller pairing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub all: ScopeTally,
    pub mi: ScopeTally,
    pub ci: ScopeTally,
    pub share_b: Option<f64>,
    pub share_s: Option<f64>,
    pub avg_fbr: Option<f64>,
    /// Sessions excluded for failing to end correctly.
    pub invalid: u64,
}

impl BenchmarkSummary {
    /// `SNP_b + SNP_s - (#MI deals - #CI deals)`.
    pub fn identity_residual(&self) -> f64 {
        (self.all.snp_b + self.all.snp_s) - (self.mi.deals as f64 - self.ci.deals as f64)
    }
}

pub fn aggregate<'a>(records: impl IntoIterator<Item = &'a SessionRecord>) -> BenchmarkSummary {
    let mut acc = Accumulator::new();
    for r in records {
        acc.add_record(r);
    }
    acc.finish()
}

pub fn identity_residual<'a>(records: impl IntoIterator<Item = &'a SessionRecord>) -> f64 {
    aggregate(records).identity_residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::LogStatus;
    use proptest::prelude::*;

    fn m(d: f64) -> Money {
        Money::from_f64(d)
    }

    fn record(b: i64, c: i64, deal: Option<i64>, valid: bool) -> SessionRecord {
        let budget = Money::from_cents(b);
        let cost = Money::from_cents(c);
        SessionRecord {
            session_id: "r".into(),
            codename: "x_1".into(),
            budget,
            cost,
            list_price: Money::from_cents(b.max(c) + 100),
            f: 0.8,
            t_m: 10,
            scenario: crate::catalog::classify_interest(budget, cost),
            status: match (valid, deal) {
                (false, _) => LogStatus::Invalid,
                (true, Some(_)) => LogStatus::Deal,
                (true, None) => LogStatus::Exhausted,
            },
            quit_by: None,
            invalid_reason: (!valid).then(|| "no_action".into()),
            deal_price: deal.map(Money::from_cents),
            valid,
            first_buyer_bid: None,
            history: vec![],
            rejected: vec![],
        }
    }

    #[test]
    fn profit_examples() {
        assert_eq!(profits(m(100.0), m(60.0), m(80.0)), (m(20.0), m(20.0)));
        assert_eq!(profits(m(319.20), m(329.0), m(29.0)), (m(290.20), m(-300.0)));
        assert_eq!(profits(m(100.0), m(60.0), m(100.0)), (Money::ZERO, m(40.0)));
    }

    #[test]
    fn utilities() {
        assert_eq!(rubinstein_utilities(m(100.0), m(60.0), m(80.0)).unwrap(), (0.5, 0.5));
        let (ub, _) = rubinstein_utilities(m(50.0), m(60.0), m(55.0)).unwrap();
        assert_eq!(ub, 0.5);
        assert!(profits(m(50.0), m(60.0), m(55.0)).0 < Money::ZERO);
        assert!(rubinstein_utilities(m(50.0), m(50.0), m(50.0)).is_err());
    }

    #[test]
    fn normalized_examples() {
        assert_eq!(normalized_profits(m(100.0), m(60.0), None), (0.0, 0.0));
        assert_eq!(normalized_profits(m(100.0), m(60.0), Some(m(80.0))), (0.5, 0.5));
        let (b, s) = normalized_profits(m(319.20), m(329.0), Some(m(325.0)));
        // Independent: -5.80 / 9.80 and -4.00 / 9.80.
        assert!((b - (-5.8 / 9.8)).abs() < 1e-12);
        assert!((s - (-4.0 / 9.8)).abs() < 1e-12);
        assert!((b + s + 1.0).abs() < 1e-12);
    }

    #[test]
    fn share_examples() {
        let (sb, ss) = share(-164.52, 440.52).unwrap();
        assert!((sb * 100.0 - (-59.61)).abs() < 0.005);
        assert!((ss * 100.0 - 159.61).abs() < 0.005);
        assert_eq!(share(-1.0, 1.0), None);
        assert_eq!(share(0.0, 0.0), None);
    }

    #[test]
    fn invalid_only_summary_is_empty() {
        let recs = [record(8000, 6000, Some(7000), false), record(5000, 6000, None, false)];
        let s = aggregate(&recs);
        assert_eq!(s.all.count, 0);
        assert_eq!(s.share_b, None);
        assert_eq!(s.avg_fbr, None);
        assert_eq!(s.invalid, 2);
        assert_eq!(s.identity_residual(), 0.0);
    }

    #[test]
    fn two_mi_one_ci() {
        let recs = [
            record(8000, 6000, Some(7000), true),
            record(10000, 2000, Some(3000), true),
            record(5000, 6000, Some(5500), true),
            record(9000, 6000, None, true),
        ];
        let s = aggregate(&recs);
        assert!((s.all.snp_b + s.all.snp_s - 1.0).abs() < 1e-9);
        assert_eq!(s.mi.count, 3);
        assert_eq!(s.mi.deal_rate(), Some(2.0 / 3.0));
        assert_eq!(s.ci.deal_rate(), Some(1.0));
    }

    proptest! {
        #[test]
        fn np_sums_to_sign(b in 1i64..500_000, c in 1i64..500_000, d in 1i64..500_000) {
            prop_assume!(b != c);
            let (nb, ns) = normalized_profits(Money::from_cents(b), Money::from_cents(c), Some(Money::from_cents(d)));
            let sign = if b > c { 1.0 } else { -1.0 };
            prop_assert!((nb + ns - sign).abs() < 1e-9);
        }

        #[test]
        fn scaling_is_neutral(b in 1i64..10_000, c in 1i64..10_000, d in 1i64..10_000, k in 2i64..50) {
            prop_assume!(b != c);
            let base = normalized_profits(Money::from_cents(b), Money::from_cents(c), Some(Money::from_cents(d)));
            let scaled = normalized_profits(Money::from_cents(b * k), Money::from_cents(c * k), Some(Money::from_cents(d * k)));
            prop_assert!((base.0 - scaled.0).abs() < 1e-12 && (base.1 - scaled.1).abs() < 1e-12);
        }

        #[test]
        fn invalid_records_do_not_matter(
            rows in proptest::collection::vec((1i64..100_000, 1i64..100_000, proptest::option::of(1i64..100_000), any::<bool>()), 0..40)
        ) {
            let recs: Vec<_> = rows.iter().filter(|r| r.0 != r.1).map(|&(b, c, d, v)| record(b, c, d, v)).collect();
            let valid: Vec<_> = recs.iter().filter(|r| r.valid).cloned().collect();
            let mut with = aggregate(&recs);
            let without = aggregate(&valid);
            with.invalid = 0;
            prop_assert_eq!(with, without);
        }

        #[test]
        fn merge_matches_concatenation(
            rows in proptest::collection::vec((1i64..100_000, 1i64..100_000, proptest::option::of(1i64..100_000)), 0..40),
            split in 0usize..40
        ) {
            let recs: Vec<_> = rows.iter().filter(|r| r.0 != r.1).map(|&(b, c, d)| record(b, c, d, true)).collect();
            let split = split.min(recs.len());
            let mut left = Accumulator::new();
            recs[..split].iter().for_each(|r| left.add_record(r));
            let mut right = Accumulator::new();
            recs[split..].iter().for_each(|r| right.add_record(r));
            left.merge(&right);
            let merged = left.finish();
            let whole = aggregate(&recs);
            prop_assert_eq!(merged.all.count, whole.all.count);
            prop_assert_eq!(merged.all.deals, whole.all.deals);
            prop_assert!((merged.all.snp_b - whole.all.snp_b).abs() < 1e-9);
            prop_assert!((merged.all.snp_s - whole.all.snp_s).abs() < 1e-9);
        }
    }
}
