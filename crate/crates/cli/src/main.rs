use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use bargain_core::agents::AgentSpec;
use bargain_core::catalog::{load_catalog, synth_catalog, DEFAULT_BUDGET_FACTOR, DEFAULT_MAX_TURNS};
use bargain_core::harness::{
    read_summary, render_report, run_benchmark, score_log, summary_csv, summary_label, summary_rows, RunConfig,
};
use bargain_core::Money;
use bargain_cli::server::{serve, AppState, ServeConfig};
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "bargain", version, about = "Buyer/seller bargaining benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session per catalog product and write log, summary, and report.
    Run {
        #[arg(long)]
        catalog: PathBuf,
        /// Buyer spec, e.g. `scripted-buyer:r0=0.5,r1=1.0`, `og`, `llm:model=...`.
        #[arg(long)]
        buyer: AgentSpec,
        /// Seller spec, e.g. `scripted-seller:m=0.0,s0=1.0`, `llm:model=...`.
        #[arg(long)]
        seller: AgentSpec,
        #[arg(long, default_value_t = DEFAULT_BUDGET_FACTOR)]
        budget_factor: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_TURNS)]
        max_turns: u32,
        #[arg(long, default_value = "0.01")]
        sigma: Money,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Keep sessions already in the log and run only the missing ones.
        #[arg(long)]
        resume: bool,
        /// Sessions per product.
        #[arg(long, default_value_t = 1)]
        repetitions: u32,
        /// Re-prompts allowed per half-move after a bad reply.
        #[arg(long, default_value_t = bargain_core::agents::DEFAULT_RETRY_BUDGET)]
        retries: u32,
    },
    /// Recompute the summary from a session log.
    Score {
        #[arg(long)]
        log: PathBuf,
        /// Write the summary CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print summary files as one table, highest SNP first.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        summaries: Vec<PathBuf>,
    },
    /// Serve the live-session HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long)]
        catalog: PathBuf,
        /// Machine buyer for sessions where the human sells.
        #[arg(long, default_value = "og")]
        buyer_agent: AgentSpec,
        /// Machine seller for sessions where the human buys.
        #[arg(long, default_value = "scripted-seller")]
        seller_agent: AgentSpec,
        #[arg(long, default_value_t = DEFAULT_BUDGET_FACTOR)]
        budget_factor: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_TURNS)]
        max_turns: u32,
        /// Minutes before an idle session is dropped.
        #[arg(long, default_value_t = 30)]
        idle_minutes: u64,
        /// Append finished sessions to this log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Write a reproducible synthetic catalog.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 930)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Run {
            catalog,
            buyer,
            seller,
            budget_factor,
            max_turns,
            sigma,
            seed,
            parallel,
            out,
            resume,
            repetitions,
            retries,
        } => {
            let mut cfg = RunConfig::new(catalog, buyer, seller, out);
            cfg.budget_factor = budget_factor;
            cfg.max_turns = max_turns;
            cfg.sigma = sigma;
            cfg.seed = seed;
            cfg.parallel = parallel;
            cfg.resume = resume;
            cfg.repetitions = repetitions;
            cfg.retry_budget = retries;
            let output = run_benchmark(&cfg)?;
            print!("{}", std::fs::read_to_string(&output.report_path)?);
            eprintln!(
                "{} sessions played, {} resumed; log {}",
                output.played,
                output.skipped,
                output.log_path.display()
            );
        }
        Command::Score { log, out } => {
            let (records, summary) = score_log(&log)?;
            let csv = summary_csv(&summary);
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            eprintln!(
                "{} records, {} invalid, identity residual {:.3e}",
                records.len(),
                summary.invalid,
                summary.identity_residual()
            );
            let label = summary_label(&log);
            eprint!("{}", render_report(&[(label, summary_rows(&summary).to_vec())]));
        }
        Command::Report { summaries } => {
            let entries = summaries
                .iter()
                .map(|p| Ok((summary_label(p), read_summary(p)?)))
                .collect::<bargain_core::Result<Vec<_>>>()?;
            print!("{}", render_report(&entries));
        }
        Command::Serve {
            bind,
            catalog,
            buyer_agent,
            seller_agent,
            budget_factor,
            max_turns,
            idle_minutes,
            log,
        } => {
            let catalog = load_catalog(&catalog)?;
            let config = ServeConfig {
                budget_factor,
                max_turns,
                buyer_agent,
                seller_agent,
                idle_timeout: Duration::from_secs(idle_minutes * 60),
                log,
                ..ServeConfig::default()
            };
            let state = AppState::new(catalog, config)?;
            tokio::runtime::Runtime::new()?.block_on(serve(&bind, state))?;
        }
        Command::Synth { seed, count, out } => {
            let catalog = synth_catalog(seed, count.max(1));
            std::fs::write(&out, catalog.to_json()?)?;
            eprintln!("wrote {} products to {}", catalog.len(), out.display());
        }
    }
    Ok(())
}
