//! Benchmark acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Every expected value is computed here,
//! independently of the library code under test.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bargain_core::agents::AgentSpec;
use bargain_core::catalog::{
    configure_session, load_catalog, parse_catalog, scenario_split, synth_catalog, Catalog, Product, Scenario,
};
use bargain_core::harness::{run_on_catalog, RunConfig, LOG_FILE};
use bargain_core::metrics::{aggregate, normalized_profits, share, SessionScore};
use bargain_core::og_narrator::offer_price;
use bargain_core::protocol::{
    parse_action, parse_turn, run_session, Action, LogStatus, Offer, Role, SessionRecord, SessionState, SessionStatus,
};
use bargain_core::Money;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const IDENTITY_TOL: f64 = 1e-9;
const NP_SUM_TOL: f64 = 1e-9;
const SHARE_PCT_TOL: f64 = 0.005;
const SHARE_CROSS_TOL: f64 = 0.5;
const NP_EXACT_TOL: f64 = 1e-12;
const NP_PRINTED_TOL: f64 = 5e-5;

type Outcome = Result<String, String>;

/// `round(num / den)` with halves away from zero, in exact integer arithmetic.
fn round_div(num: i64, den: i64) -> i64 {
    assert!(den > 0);
    if num >= 0 {
        (2 * num + den) / (2 * den)
    } else {
        -((-2 * num + den) / (2 * den))
    }
}

/// Budget for list price `l` at factor 0.8 with the one-cent collision nudge.
fn oracle_budget(list: i64, cost: i64) -> i64 {
    let b = round_div(8 * list, 10);
    if b == cost {
        b - 1
    } else {
        b
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn random_record(rng: &mut ChaCha8Rng, i: usize) -> SessionRecord {
    let cost = rng.random_range(100..500_000_i64);
    let budget = loop {
        let b = rng.random_range(50..600_000_i64);
        if b != cost {
            break b;
        }
    };
    let valid = rng.random_bool(0.9);
    let dealt = rng.random_bool(0.6);
    let deal = rng.random_range(1..700_000_i64);
    let status = match (valid, dealt) {
        (false, _) => LogStatus::Invalid,
        (true, true) => LogStatus::Deal,
        (true, false) if rng.random_bool(0.5) => LogStatus::Quit,
        (true, false) => LogStatus::Exhausted,
    };
    SessionRecord {
        session_id: format!("s{i}"),
        codename: format!("thing_{i}"),
        budget: Money::from_cents(budget),
        cost: Money::from_cents(cost),
        list_price: Money::from_cents(cost.max(budget) + 1),
        f: 0.8,
        t_m: 10,
        scenario: if budget > cost { Scenario::MI } else { Scenario::CI },
        status,
        quit_by: None,
        invalid_reason: (!valid).then(|| "no_action".to_string()),
        // Invalid sessions may still carry a price; it must be ignored.
        deal_price: (dealt || !valid).then(|| Money::from_cents(deal)),
        valid,
        first_buyer_bid: None,
        history: Vec::new(),
        rejected: Vec::new(),
    }
}

fn identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1D);
    let records: Vec<SessionRecord> = (0..10_000).map(|i| random_record(&mut rng, i)).collect();
    let summary = aggregate(&records);
    let (mut mi_deals, mut ci_deals) = (0i64, 0i64);
    for r in records.iter().filter(|r| r.valid && r.status == LogStatus::Deal) {
        if r.budget.cents() > r.cost.cents() {
            mi_deals += 1;
        } else {
            ci_deals += 1;
        }
    }
    let residual = (summary.all.snp_b + summary.all.snp_s) - (mi_deals - ci_deals) as f64;
    let own = summary.identity_residual();
    within(start.elapsed(), Duration::from_secs(5))?;
    if residual.abs() < IDENTITY_TOL && own.abs() < IDENTITY_TOL && summary.mi.deals as i64 == mi_deals {
        Ok(format!("10000 records, {mi_deals} MI / {ci_deals} CI deals, residual {residual:.2e}"))
    } else {
        Err(format!("residual {residual:e} (library {own:e}), MI deals {} vs {mi_deals}", summary.mi.deals))
    }
}

fn np_conservation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x2E);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let c = rng.random_range(1..1_000_000_i64);
        let b = loop {
            let b = rng.random_range(1..1_000_000_i64);
            if b != c {
                break b;
            }
        };
        let d = rng.random_range(1..1_500_000_i64);
        let (np_b, np_s) = normalized_profits(Money::from_cents(b), Money::from_cents(c), Some(Money::from_cents(d)));
        let expected = if b > c { 1.0 } else { -1.0 };
        // Independent evaluation: (B - D)/|B - C| + (D - C)/|B - C|.
        let gap = (b - c).abs() as f64;
        let oracle = ((b - d) as f64 / gap, (d - c) as f64 / gap);
        worst = worst
            .max((np_b + np_s - expected).abs())
            .max((np_b - oracle.0).abs())
            .max((np_s - oracle.1).abs());
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    if worst < NP_SUM_TOL {
        Ok(format!("10000 deals, max error {worst:.2e}"))
    } else {
        Err(format!("max error {worst:e}"))
    }
}

fn share_reproduction() -> Outcome {
    let (b, s) = share(-164.52, 440.52).ok_or("share undefined")?;
    let (pb, ps) = (b * 100.0, s * 100.0);
    let total = 835.0 * 0.3401 - 42.0 * 0.1905;
    let ok = (pb - -59.61).abs() <= SHARE_PCT_TOL
        && (ps - 159.61).abs() <= SHARE_PCT_TOL
        && (total - (-164.52_f64 + 440.52)).abs() <= SHARE_CROSS_TOL
        && share(-1.0, 1.0).is_none();
    let detail = format!("Share_b {pb:.4}%, Share_s {ps:.4}%, deal-count total {total:.3} vs 276.00");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn og_first_bid() -> Outcome {
    let catalog = synth_catalog(20_240_601, 1000);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("og");
    let mut cfg = RunConfig::new(
        "synthetic",
        "og".parse().map_err(|e| format!("{e}"))?,
        "scripted-seller".parse().map_err(|e| format!("{e}"))?,
        &out,
    );
    cfg.parallel = 4;
    let start = Instant::now();
    let run = run_on_catalog(&catalog, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let records = bargain_core::harness::read_log(&run.log_path).map_err(|e| e.to_string())?;
    within(elapsed, Duration::from_secs(10))?;
    if records.len() != 1000 {
        return Err(format!("{} records", records.len()));
    }
    for r in &records {
        let want = round_div(r.budget.cents(), 2);
        if !r.valid || r.first_buyer_bid.map(Money::cents) != Some(want) {
            return Err(format!("{}: first bid {:?}, want {want} cents", r.session_id, r.first_buyer_bid));
        }
    }
    let avg = run.summary.avg_fbr.ok_or("no FBR")?;
    let printed = format!("{avg:.4}");
    if printed == "0.5000" {
        Ok(format!("1000 sessions in {elapsed:.2?}, Avg.FBR {printed} (unrounded {avg:.7})"))
    } else {
        Err(format!("Avg.FBR {printed}"))
    }
}

fn og_endpoints() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x06);
    for _ in 0..10_000 {
        let b = rng.random_range(1..10_000_000_i64);
        let t_m = rng.random_range(1..=60_u32);
        let budget = Money::from_cents(b);
        let first = offer_price(0, t_m, budget).cents();
        let last = offer_price(t_m, t_m, budget).cents();
        if first != round_div(b, 2) || last != b {
            return Err(format!("B={b} t_m={t_m}: got {first}/{last}"));
        }
        let mid = rng.random_range(0..=t_m);
        let want = round_div(b * i64::from(t_m + mid), 2 * i64::from(t_m));
        if offer_price(mid, t_m, budget).cents() != want {
            return Err(format!("B={b} t={mid} t_m={t_m}: want {want}"));
        }
    }
    Ok("10000 random (B, t_m): p(0) = B/2, p(t_m) = B, interior exact".into())
}

fn scenario_partition() -> Outcome {
    if let Ok(path) = std::env::var("BARGAIN_DATASET") {
        let catalog = load_catalog(&path).map_err(|e| e.to_string())?;
        let (mi, ci) = scenario_split(&catalog, 0.8, Money::CENT).map_err(|e| e.to_string())?;
        let detail = format!("dataset {path}: {} products, {mi} MI / {ci} CI", catalog.len());
        return if catalog.len() == 930 && ci == 44 {
            Ok(detail)
        } else {
            Err(detail)
        };
    }
    let catalog = synth_catalog(930, 930);
    let again = synth_catalog(930, 930);
    let (mi, ci) = scenario_split(&catalog, 0.8, Money::CENT).map_err(|e| e.to_string())?;
    let mut oracle_ci = 0;
    for (p, q) in catalog.iter().zip(again.iter()) {
        if p != q {
            return Err(format!("synthetic catalog differs at {}", p.codename));
        }
        let (l, c) = (p.highest_price.cents(), p.lowest_price.cents());
        let b = oracle_budget(l, c);
        let cfg = configure_session(p, 0.8, 10, Money::CENT).map_err(|e| e.to_string())?;
        if cfg.budget.cents() != b {
            return Err(format!("{}: budget {} vs oracle {b}", p.codename, cfg.budget.cents()));
        }
        if b <= c {
            oracle_ci += 1;
        }
    }
    let detail = format!("no dataset; synthetic 930: {mi} MI / {ci} CI, oracle CI {oracle_ci}");
    if mi + ci == 930 && ci == oracle_ci {
        Ok(detail)
    } else {
        Err(detail)
    }
}

#[derive(Debug, PartialEq)]
enum Walk {
    Deal(i64),
    BuyerQuit,
    Exhausted,
}

/// Scripted buyer (0.5 -> 1.0 of B over t_m - 1 steps) against scripted
/// seller (L descending to C over t_m steps), in integer cents.
fn brute_force(list: i64, cost: i64, budget: i64, t_m: i64) -> Walk {
    let bid = |k: i64| {
        if t_m <= 1 {
            round_div(budget, 2)
        } else {
            round_div(budget * (t_m - 1 + k), 2 * (t_m - 1))
        }
    };
    let ask = |k: i64| round_div(list * (t_m - k), t_m).max(cost);
    let mut standing_ask: Option<i64> = None;
    for k in 0..t_m {
        let b = bid(k);
        if let Some(a) = standing_ask {
            if a <= b {
                return Walk::Deal(a);
            }
        }
        if k > 0 && k + 1 >= t_m {
            return Walk::BuyerQuit;
        }
        let a = ask(k);
        if b >= a || (k + 1 >= t_m && b >= cost) {
            return Walk::Deal(b);
        }
        standing_ask = Some(a);
    }
    Walk::Exhausted
}

fn scripted_tournament() -> Outcome {
    let catalog = synth_catalog(50, 50);
    let spec = |s: &str| s.parse::<AgentSpec>().map_err(|e| e.to_string());
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut logs = Vec::new();
    let mut records = Vec::new();
    for (tag, parallel) in [("p1", 1), ("p8", 8), ("p1b", 1)] {
        let out = dir.path().join(tag);
        let mut cfg = RunConfig::new(
            "synthetic",
            spec("scripted-buyer:r0=0.5,r1=1.0")?,
            spec("scripted-seller:m=0,s0=1.0")?,
            &out,
        );
        cfg.parallel = parallel;
        cfg.seed = 7;
        let run = run_on_catalog(&catalog, &cfg).map_err(|e| e.to_string())?;
        logs.push(std::fs::read(out.join(LOG_FILE)).map_err(|e| e.to_string())?);
        records = bargain_core::harness::read_log(&run.log_path).map_err(|e| e.to_string())?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    if logs[0] != logs[1] || logs[0] != logs[2] {
        return Err("logs differ across runs or parallelism".into());
    }
    let mut deals = 0;
    for r in &records {
        let p = catalog.get(&r.codename).ok_or("unknown codename in log")?;
        let (l, c) = (p.highest_price.cents(), p.lowest_price.cents());
        let want = brute_force(l, c, oracle_budget(l, c), i64::from(r.t_m));
        let got = match r.status {
            LogStatus::Deal => Walk::Deal(r.deal_price.ok_or("deal without price")?.cents()),
            LogStatus::Quit if r.quit_by == Some(Role::Buyer) => Walk::BuyerQuit,
            LogStatus::Exhausted => Walk::Exhausted,
            other => return Err(format!("{}: unexpected status {other:?}", r.codename)),
        };
        if got != want {
            return Err(format!("{}: got {got:?}, oracle {want:?}", r.codename));
        }
        deals += usize::from(matches!(got, Walk::Deal(_)));
    }
    Ok(format!(
        "{} sessions, {deals} deals match the oracle; logs byte-identical (widths 1, 8, rerun) in {elapsed:.2?}",
        records.len()
    ))
}

fn random_action(rng: &mut ChaCha8Rng) -> Action {
    const SLUGS: [&str; 5] = ["electronics", "toys-games", "home-kitchen", "video-games", "a"];
    let offer = |rng: &mut ChaCha8Rng| {
        let cents = match rng.random_range(0..3) {
            0 => rng.random_range(1..100_i64),
            1 => rng.random_range(1..100_000_i64) * 100,
            _ => rng.random_range(1..10_000_000_000_i64),
        };
        let slug = SLUGS[rng.random_range(0..SLUGS.len())];
        Offer::new(
            Money::from_cents(cents),
            rng.random_range(1..=12),
            format!("{slug}_{}", rng.random_range(1..2000)),
        )
    };
    match rng.random_range(0..5) {
        0 => Action::Buy(offer(rng)),
        1 => Action::Sell(offer(rng)),
        2 => Action::Deal(offer(rng)),
        3 => Action::Reject,
        _ => Action::Quit,
    }
}

fn grammar_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x08);
    for _ in 0..10_000 {
        let a = random_action(&mut rng);
        let text = a.render();
        match parse_action(&text) {
            Ok(b) if b == a => {}
            other => return Err(format!("`{text}` parsed to {other:?}")),
        }
    }
    let offer = |cents, name: &str| Offer::new(Money::from_cents(cents), 1, name);
    let formats = [
        ("[BUY] $10 (1x product_1)", Action::Buy(offer(1000, "product_1"))),
        ("[SELL] $34.50 (1x electronics_203)", Action::Sell(offer(3450, "electronics_203"))),
        ("[REJECT]", Action::Reject),
        ("[DEAL] $10 (1x product_1)", Action::Deal(offer(1000, "product_1"))),
        ("[QUIT]", Action::Quit),
    ];
    for (text, want) in &formats {
        let got = parse_action(text).map_err(|e| format!("`{text}`: {e}"))?;
        if &got != want || got.render() != *text {
            return Err(format!("`{text}` -> {got:?} -> `{}`", got.render()));
        }
    }
    within(start.elapsed(), Duration::from_secs(2))?;
    Ok("10000 fuzzed actions and 5 format strings".into())
}

const MICRO_SD_EXCHANGE: [(Role, &str); 5] = [
    (
        Role::Buyer,
        "Thought: I want to buy the micro SD card, but the listing price is too high for my budget. I'll try to bargain and see if the seller is willing to lower the price.\n\nTalk: Hi there! I'm interested in the micro SD card, but my budget is tight. Would you be willing to sell it for $30?\n\nAction: [BUY] $30 (1x electronics_203)",
    ),
    (
        Role::Seller,
        "Thought: The buyer's offer is lower than the list price, but I have some room to negotiate.\n\nTalk: I understand your budget constraints, but the quality and features of this micro SD card justify the list price. I can offer it to you for $35.\n\nAction: [REJECT]",
    ),
    (
        Role::Buyer,
        "Thought: That's still a bit too expensive for my budget. I'll try to negotiate further.\n\nTalk: I appreciate your offer, but I'm really looking for a better deal. Can you do any better than $35? Maybe we can meet in the middle at $32?\n\nAction: [BUY] $32 (1x electronics_203)",
    ),
    (
        Role::Seller,
        "Thought: The buyer is trying to meet in the middle, but I still have some margin to work with.\n\nTalk: I understand your position, but considering the quality and features of this micro SD card, I can go down to $34.50. That's the best I can offer.\n\nAction: [SELL] $34.50 (1x electronics_203)",
    ),
    (
        Role::Buyer,
        "Thought: Great, that's a good compromise. I'll accept the offer.\n\nTalk: Alright, deal! I'll take the micro SD card for $34.50. Thank you for your help.\n\nAction: [DEAL] $34.50 (1x electronics_203)",
    ),
];

fn transcript_replay() -> Outcome {
    let product = Product {
        title: "SanDisk 128GB Extreme microSDXC".into(),
        description: "UHS-I memory card with adapter.".into(),
        features: Vec::new(),
        category: "Electronics".into(),
        highest_price: Money::from_cents(3999),
        lowest_price: Money::from_cents(1499),
        current_price: None,
        image_url: None,
        codename: "electronics_203".into(),
    };
    let config = configure_session(&product, 0.8, 10, Money::CENT).map_err(|e| e.to_string())?;
    if config.budget.cents() != 3199 {
        return Err(format!("budget {}", config.budget));
    }
    let mut state = SessionState::new(config);
    let mut raws = Vec::new();
    for (role, raw) in MICRO_SD_EXCHANGE {
        let turn = parse_turn(raw, role).map_err(|e| e.to_string())?;
        state.check_legality(&turn).map_err(|e| e.to_string())?;
        state.advance(turn).map_err(|e| e.to_string())?;
        raws.push(raw.to_string());
    }
    if *state.status() != (SessionStatus::Deal { price: Money::from_cents(3450) }) {
        return Err(format!("status {:?}", state.status()));
    }
    let record = SessionRecord::from_state("micro-sd", &state, raws, Vec::new());
    let score = SessionScore::from_record(&record);
    let np_b = (3199.0 - 3450.0) / (3199.0_f64 - 1499.0).abs();
    let ok = record.valid
        && score.p_b == Some(Money::from_cents(-251))
        && (score.np_b - np_b).abs() < NP_EXACT_TOL
        && (score.np_b - -0.1476).abs() < NP_PRINTED_TOL;
    let detail = format!("Deal $34.50, P_b {:?}, NP_b {:.6}", score.p_b.map(|p| p.to_string()), score.np_b);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn llm_replay_fixture() -> Outcome {
    let catalog: Catalog = std::fs::read_to_string(fixture("drone_catalog.json"))
        .map_err(|e| e.to_string())
        .and_then(|t| parse_catalog(&t).map_err(|e| e.to_string()))?;
    let config = configure_session(&catalog.products()[0], 0.8, 10, Money::CENT).map_err(|e| e.to_string())?;
    let play = || -> Result<SessionRecord, String> {
        let spec = |file: &str| -> Result<AgentSpec, String> {
            format!("llm:model=gpt-3.5-turbo,replay={}", fixture(file).display())
                .parse()
                .map_err(|e: bargain_core::Error| e.to_string())
        };
        let mut buyer = spec("llm_buyer.jsonl")?.build(Role::Buyer, &config, 1).map_err(|e| e.to_string())?;
        let mut seller = spec("llm_seller.jsonl")?.build(Role::Seller, &config, 1).map_err(|e| e.to_string())?;
        Ok(run_session("drone", &config, buyer.as_mut(), seller.as_mut(), 2))
    };
    let first = play()?;
    let second = play()?;
    let same = serde_json::to_string(&first).map_err(|e| e.to_string())?
        == serde_json::to_string(&second).map_err(|e| e.to_string())?;
    let ok = same
        && first.valid
        && first.status == LogStatus::Deal
        && first.deal_price == Some(Money::from_cents(99_000))
        && first.history.len() == 5
        && first.rejected.len() == 1
        && first.rejected[0].role == Role::Seller
        && first.is_self_consistent();
    let detail = format!(
        "status {:?}, deal {:?}, {} turns, {} re-prompt(s), repeat identical: {same}",
        first.status,
        first.deal_price.map(|p| p.to_string()),
        first.history.len(),
        first.rejected.len()
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("profit identity over 10k sessions", identity),
        ("per-deal NP conservation", np_conservation),
        ("share reproduction", share_reproduction),
        ("OG first-bid law (Avg.FBR 0.5000)", og_first_bid),
        ("OG schedule endpoints", og_endpoints),
        ("MI/CI partition at f = 0.8", scenario_partition),
        ("scripted tournament vs brute-force oracle", scripted_tournament),
        ("action grammar round trip", grammar_round_trip),
        ("micro-SD transcript replay", transcript_replay),
        ("LLM adapter via replay fixture", llm_replay_fixture),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
