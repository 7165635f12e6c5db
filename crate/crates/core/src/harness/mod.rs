//! Benchmark runs over a catalog: per-session seeding, a bounded worker pool,
//! an order-preserving log writer, and summary files.

pub mod log;
pub mod summary;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use sha2::{Digest, Sha256};

pub use self::log::{parse_log, read_log, recover_log, LogWriter};
pub use self::summary::{
    parse_summary_csv, read_summary, render_report, summary_csv, summary_label, summary_rows, SummaryRow,
};

use crate::agents::{AgentSpec, DEFAULT_RETRY_BUDGET};
use crate::catalog::{configure_session, load_catalog, Catalog, SessionConfig, DEFAULT_BUDGET_FACTOR, DEFAULT_MAX_TURNS, DEFAULT_SIGMA};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, BenchmarkSummary};
use crate::money::Money;
use crate::protocol::{run_session, Role, SessionRecord, SessionState};

pub const LOG_FILE: &str = "sessions.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub catalog: PathBuf,
    pub budget_factor: f64,
    pub max_turns: u32,
    pub sigma: Money,
    pub buyer: AgentSpec,
    pub seller: AgentSpec,
    pub seed: u64,
    pub parallel: usize,
    pub out_dir: PathBuf,
    pub resume: bool,
    /// Sessions per product.
    pub repetitions: u32,
    pub retry_budget: u32,
}

impl RunConfig {
    pub fn new(catalog: impl Into<PathBuf>, buyer: AgentSpec, seller: AgentSpec, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            catalog: catalog.into(),
            budget_factor: DEFAULT_BUDGET_FACTOR,
            max_turns: DEFAULT_MAX_TURNS,
            sigma: DEFAULT_SIGMA,
            buyer,
            seller,
            seed: 0,
            parallel: 1,
            out_dir: out_dir.into(),
            resume: false,
            repetitions: 1,
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }

    pub fn log_path(&self) -> PathBuf {
        self.out_dir.join(LOG_FILE)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: BenchmarkSummary,
    pub log_path: PathBuf,
    pub summary_path: PathBuf,
    pub report_path: PathBuf,
    /// Sessions played by this invocation.
    pub played: usize,
    /// Sessions found complete in the log and skipped.
    pub skipped: usize,
}

/// Seed for one session, independent of dispatch order:
/// the first eight bytes of SHA-256 over run seed, codename, and repetition.
pub fn session_seed(run_seed: u64, codename: &str, repetition: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    h.update(codename.as_bytes());
    h.update([0]);
    h.update(repetition.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn session_id(codename: &str, repetition: u32, repetitions: u32) -> String {
    if repetitions <= 1 {
        codename.to_string()
    } else {
        format!("{codename}#{repetition}")
    }
}

struct Job {
    id: String,
    config: SessionConfig,
    seed: u64,
}

fn check_spec(spec: &AgentSpec, role: Role) -> Result<()> {
    if !spec.supports(role) || *spec == AgentSpec::Human {
        return Err(Error::AgentSpec {
            spec: spec.to_string(),
            message: format!("cannot play the {role} role in a batch run"),
        });
    }
    Ok(())
}

/// Plays one session, turning agent construction failures into an invalid
/// record.
pub fn play_one(id: &str, config: &SessionConfig, seed: u64, cfg: &RunConfig) -> SessionRecord {
    let agents = cfg
        .buyer
        .build(Role::Buyer, config, seed)
        .and_then(|b| Ok((b, cfg.seller.build(Role::Seller, config, seed)?)));
    match agents {
        Ok((mut buyer, mut seller)) => run_session(id, config, buyer.as_mut(), seller.as_mut(), cfg.retry_budget),
        Err(e) => {
            tracing::warn!(session_id = id, error = %e, "agent construction failed");
            let mut state = SessionState::new(config.clone());
            state.mark_invalid("agent_config");
            SessionRecord::from_state(id, &state, vec![], vec![])
        }
    }
}

/// Loads the catalog named in `cfg` and runs it.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunOutput> {
    let catalog = load_catalog(&cfg.catalog)?;
    run_on_catalog(&catalog, cfg)
}

/// Runs every product (times `repetitions`) and writes the session log,
/// `summary.csv`, and `report.txt` into `cfg.out_dir`. The summary is
/// recomputed from the finished log.
pub fn run_on_catalog(catalog: &Catalog, cfg: &RunConfig) -> Result<RunOutput> {
    if cfg.parallel == 0 {
        return Err(Error::InvalidParameter("parallelism must be at least 1".into()));
    }
    if cfg.repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    check_spec(&cfg.buyer, Role::Buyer)?;
    check_spec(&cfg.seller, Role::Seller)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let log_path = cfg.log_path();
    let done = if cfg.resume { recover_log(&log_path)? } else { Default::default() };

    let mut jobs = Vec::new();
    let mut skipped = 0;
    for product in catalog {
        let config = configure_session(product, cfg.budget_factor, cfg.max_turns, cfg.sigma)?;
        for rep in 0..cfg.repetitions {
            let id = session_id(&product.codename, rep, cfg.repetitions);
            if done.contains(&id) {
                skipped += 1;
                continue;
            }
            jobs.push(Job {
                id,
                seed: session_seed(cfg.seed, &product.codename, rep),
                config: config.clone(),
            });
        }
    }

    let mut writer = LogWriter::create(&log_path, cfg.resume)?;
    let played = jobs.len();
    execute(&jobs, cfg, |record| writer.append(&record))?;
    drop(writer);
    tracing::info!(played, skipped, log = %log_path.display(), "run complete");

    let summary = aggregate(&read_log(&log_path)?);
    let summary_path = cfg.out_dir.join(SUMMARY_FILE);
    let report_path = cfg.out_dir.join(REPORT_FILE);
    std::fs::write(&summary_path, summary_csv(&summary)).map_err(|e| Error::io(&summary_path, e))?;
    let label = summary_label(&summary_path);
    let report = render_report(&[(label, summary_rows(&summary).to_vec())]);
    std::fs::write(&report_path, report).map_err(|e| Error::io(&report_path, e))?;

    Ok(RunOutput {
        summary,
        log_path,
        summary_path,
        report_path,
        played,
        skipped,
    })
}

/// Plays `jobs` on up to `cfg.parallel` threads and hands records to `sink`
/// in job order, buffering any that finish early.
fn execute(jobs: &[Job], cfg: &RunConfig, mut sink: impl FnMut(SessionRecord) -> Result<()>) -> Result<()> {
    let next = AtomicUsize::new(0);
    let workers = cfg.parallel.min(jobs.len()).max(1);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, SessionRecord)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let record = play_one(&job.id, &job.config, job.seed, cfg);
                if tx.send((i, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut expected = 0;
        for (i, record) in rx {
            pending.insert(i, record);
            while let Some(record) = pending.remove(&expected) {
                if let Err(e) = sink(record) {
                    // Stop handing out work; in-flight sessions finish and are dropped.
                    next.store(jobs.len(), Ordering::Relaxed);
                    return Err(e);
                }
                expected += 1;
            }
        }
        Ok(())
    })
}

/// Reads a session log and aggregates it.
pub fn score_log(path: impl AsRef<Path>) -> Result<(Vec<SessionRecord>, BenchmarkSummary)> {
    let records = read_log(path)?;
    let summary = aggregate(&records);
    Ok((records, summary))
}
