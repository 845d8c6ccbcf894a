//! `sjs`: batch front end for self-journal event logs.
//!
//! Exit codes: 0 success, 1 rule or replay violation, 2 usage or
//! configuration error, 3 I/O or parse error. Standard output carries only
//! the machine payload; diagnostics go to standard error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use selfjournal::anomaly::{anomaly_report, DetectorParams};
use selfjournal::ledger::{
    load_log_with, replay_loaded, save_log, EngineState, ParseMode, ProtocolConfig, ReplayError,
};
use selfjournal::metrics::{
    curation_graph, item_metrics, metrics_to_csv, metrics_to_json, ItemFilter,
};
use selfjournal::model::MIN_ISSUE_SIZE;
use selfjournal::sim::{run_scenario, ScenarioConfig, SimError};
use selfjournal::{ArticleId, ItemUri};

#[derive(Debug, Parser)]
#[command(
    name = "sjs",
    version,
    about = "Validate, measure and simulate self-journal event logs"
)]
struct Cli {
    /// Reject unknown event kinds (default).
    #[arg(long, global = true, conflicts_with = "permissive")]
    strict: bool,
    /// Skip events of unknown kinds instead of failing.
    #[arg(long, global = true)]
    permissive: bool,
    /// Minimum number of entries per issue.
    #[arg(long, global = true, default_value_t = MIN_ISSUE_SIZE, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    min_issue_size: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay a log and print its state digest or first violation.
    Validate { log: PathBuf },
    /// Per-item validity, importance and priority.
    Metrics {
        log: PathBuf,
        /// Only this item URI, normalized before lookup.
        #[arg(long, conflicts_with = "article")]
        item: Option<String>,
        /// Only this platform article id.
        #[arg(long)]
        article: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reciprocal pairs and dense curation groups.
    Detect {
        log: PathBuf,
        /// Reciprocity share a pair needs to be flagged.
        #[arg(long, default_value_t = DetectorParams::default().theta)]
        theta: f64,
        /// Curation density a group needs to be flagged.
        #[arg(long, default_value_t = DetectorParams::default().delta)]
        delta: f64,
        /// Smallest group reported.
        #[arg(long, default_value_t = DetectorParams::default().min_size)]
        min_size: usize,
        /// Share of each member's curation that must stay inside the group.
        #[arg(long, default_value_t = DetectorParams::default().min_share)]
        min_share: f64,
    },
    /// Run a scenario config, write its log and print the report.
    Simulate {
        config: PathBuf,
        out_log: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Curation, authorship, review and co-curation edges as TSV.
    ExportGraph {
        log: PathBuf,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command: exit code, stderr message and optional stdout payload.
struct Failure {
    code: u8,
    message: String,
    payload: Option<serde_json::Value>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
            payload: None,
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
            payload: None,
        }
    }

    fn violation(err: &ReplayError) -> Self {
        Self {
            code: 1,
            message: err.to_string(),
            payload: Some(json!({
                "ok": false,
                "seq": err.seq,
                "rule": err.violation.rule(),
                "message": err.violation.to_string(),
            })),
        }
    }
}

type Outcome = Result<String, Failure>;

impl Cli {
    fn mode(&self) -> ParseMode {
        if self.permissive {
            ParseMode::Permissive
        } else {
            ParseMode::Strict
        }
    }

    fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            min_issue_size: self.min_issue_size,
        }
    }

    fn read(&self, path: &Path) -> Result<selfjournal::ledger::LoadedLog, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        load_log_with(&bytes, self.mode())
            .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
    }

    fn load(&self, path: &Path) -> Result<EngineState, Failure> {
        let log = self.read(path)?;
        replay_loaded(&log, self.protocol()).map_err(|e| Failure::violation(&e))
    }
}

fn validate(cli: &Cli, log: &Path) -> Outcome {
    let loaded = cli.read(log)?;
    let state = replay_loaded(&loaded, cli.protocol()).map_err(|e| Failure::violation(&e))?;
    for s in &loaded.skipped {
        eprintln!(
            "skipped seq {} of unknown kind {:?} (line {})",
            s.seq, s.kind, s.line
        );
    }
    eprintln!("{}: {} events, valid", log.display(), state.last_seq());
    Ok(json!({
        "ok": true,
        "digest": state.digest(),
        "last_seq": state.last_seq(),
        "events": loaded.events.len(),
        "skipped": loaded.skipped.len(),
    })
    .to_string())
}

fn metrics(
    cli: &Cli,
    log: &Path,
    item: Option<&str>,
    article: Option<&str>,
    format: Format,
) -> Outcome {
    let filter = match (item, article) {
        (Some(raw), _) => ItemFilter::Item(
            ItemUri::parse(raw).map_err(|e| Failure::usage(format!("--item: {e}")))?,
        ),
        (None, Some(id)) => ItemFilter::Article(ArticleId::from(id)),
        (None, None) => ItemFilter::All,
    };
    let state = cli.load(log)?;
    if let ItemFilter::Article(id) = &filter {
        if state.article(id).is_none() {
            eprintln!("no article {id} in {}", log.display());
        }
    }
    let rows = item_metrics(&state, &filter);
    eprintln!("{} item(s)", rows.len());
    Ok(match format {
        Format::Json => metrics_to_json(&rows),
        Format::Csv => metrics_to_csv(&rows),
    })
}

fn detect(cli: &Cli, log: &Path, params: DetectorParams) -> Outcome {
    params
        .validate()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let state = cli.load(log)?;
    let report = anomaly_report(&state, &params).map_err(|e| Failure::usage(e.to_string()))?;
    eprintln!(
        "{} pair(s), {} group(s) flagged",
        report.pairs.len(),
        report.groups.len()
    );
    Ok(report.to_json())
}

fn simulate(config: &Path, out_log: &Path, seed: Option<u64>) -> Outcome {
    let text = fs::read_to_string(config)
        .map_err(|e| Failure::io(format!("{}: {e}", config.display())))?;
    let mut scenario = ScenarioConfig::from_json(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let output = run_scenario(&scenario).map_err(|e| match e {
        SimError::Config(e) => Failure::usage(e.to_string()),
        SimError::Evaluate(e) => Failure {
            code: 1,
            message: e.to_string(),
            payload: None,
        },
    })?;
    fs::write(out_log, save_log(&output.events))
        .map_err(|e| Failure::io(format!("{}: {e}", out_log.display())))?;
    eprintln!(
        "{} events written to {} ({} intentions dropped)",
        output.events.len(),
        out_log.display(),
        output.report.dropped_intentions
    );
    Ok(output.report.to_json())
}

fn export_graph(cli: &Cli, log: &Path, out: Option<&Path>) -> Outcome {
    let state = cli.load(log)?;
    let edges = curation_graph(&state).to_edge_list();
    match out {
        Some(path) => {
            fs::write(path, &edges).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            eprintln!(
                "{} edge(s) written to {}",
                edges.lines().count() - 1,
                path.display()
            );
            Ok(String::new())
        }
        None => Ok(edges),
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { log } => validate(cli, log),
        Command::Metrics {
            log,
            item,
            article,
            format,
        } => metrics(cli, log, item.as_deref(), article.as_deref(), *format),
        Command::Detect {
            log,
            theta,
            delta,
            min_size,
            min_share,
        } => detect(
            cli,
            log,
            DetectorParams {
                theta: *theta,
                delta: *delta,
                min_size: *min_size,
                min_share: *min_share,
            },
        ),
        Command::Simulate {
            config,
            out_log,
            seed,
        } => simulate(config, out_log, *seed),
        Command::ExportGraph { log, out } => export_graph(cli, log, out.as_deref()),
    }
}

/// Writes the payload to stdout. A closed pipe (`sjs ... | head`) is not an
/// error worth reporting.
fn emit(payload: &str) {
    if payload.is_empty() {
        return;
    }
    let mut out = io::stdout().lock();
    let newline = if payload.ends_with('\n') { "" } else { "\n" };
    let _ = write!(out, "{payload}{newline}").and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(payload) => {
            emit(&payload);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            if let Some(payload) = &failure.payload {
                emit(&payload.to_string());
            }
            eprintln!("sjs: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
