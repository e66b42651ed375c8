//! `stp`: serve the API, ingest feeds, seed demo data, compute feeds
//! offline, run the evaluation, export reports and tabulate surveys.
//!
//! Exit status is 0 on success, 1 for domain or validation errors and 2
//! for I/O or environment errors.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use chrono::{NaiveDate, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use stp_core::eval::synth::{generate_population, SyntheticSpec};
use stp_core::eval::leave_one_out;
use stp_core::ingest::{ingest_feed, FeedFormat, IngestError, TagVocabulary};
use stp_core::recommend::Feed;
use stp_core::report::{attendance_report, ReportFilter};
use stp_core::store::{load_state, save_state};
use stp_core::survey::{read_survey_csv, tabulate, InterpretationScale, ScaleName};
use stp_core::{Exec, FacultyId, RecommendParams, Recommender, StateSnapshot, Store, StoreError, Token};
use stp_service::{AppState, Config};

#[derive(Parser)]
#[command(name = "stp", version, about = "Seminar and training program recommender")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API over a state file.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "STP_DATA")]
        data: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Add the records of a feed file to the catalog.
    Ingest {
        feed: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, env = "STP_DATA")]
        data: PathBuf,
        /// json-array or json-lines; detected from the content when omitted.
        #[arg(long)]
        format: Option<FeedFormat>,
        #[arg(long, default_value = "cli")]
        source: String,
    },
    /// Print one faculty member's ranked feed.
    Recommend {
        #[arg(long)]
        faculty: String,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, env = "STP_DATA")]
        data: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        include_past: bool,
        /// Date the feed is computed for; defaults to today (UTC).
        #[arg(long)]
        today: Option<NaiveDate>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Write a synthetic clustered population.
    Seed {
        #[arg(long)]
        faculty: usize,
        #[arg(long)]
        items: usize,
        #[arg(long)]
        clusters: usize,
        #[arg(long)]
        like_prob: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, env = "STP_DATA")]
        data: PathBuf,
    },
    /// Leave-one-out hit rate against a random baseline.
    Eval {
        #[arg(long)]
        k: usize,
        #[arg(long, env = "STP_DATA")]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Consolidated attendance report.
    Report {
        #[arg(long, env = "STP_DATA")]
        data: PathBuf,
        #[arg(long)]
        college: Option<String>,
        #[arg(long)]
        from: Option<NaiveDate>,
        #[arg(long)]
        to: Option<NaiveDate>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Weighted means, interpretations and ranks of Likert frequency rows.
    Survey {
        csv: PathBuf,
        #[arg(long)]
        scale: ScaleName,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn env(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } | StoreError::Parse(_) | StoreError::UnsupportedVersion(_) | StoreError::Invalid(_) => {
                Failure::env(e)
            }
            _ => Failure::domain(e),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("stp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Serve { port, host, data, config } => serve(port, &host, data, config.as_deref()),
        Command::Ingest { feed, vocab, data, format, source } => ingest(&feed, &vocab, &data, format, &source),
        Command::Recommend { faculty, limit, data, alpha, include_past, today, config, format } => {
            let mut params = base_params(config.as_deref())?;
            if let Some(limit) = limit {
                params.limit = limit;
            }
            if let Some(alpha) = alpha {
                params.alpha = alpha;
            }
            params.include_past_items |= include_past;
            params.validate().map_err(Failure::domain)?;
            let today = today.unwrap_or_else(|| Utc::now().date_naive());
            recommend(&FacultyId(faculty), &data, &params, today, format)
        }
        Command::Seed { faculty, items, clusters, like_prob, seed, data } => {
            let spec = SyntheticSpec::new(seed, faculty, items, clusters, like_prob);
            let state = generate_population(&spec).map_err(Failure::domain)?;
            save_state(&state, &data)?;
            output::print_json(&serde_json::json!({
                "faculty": state.faculty.len(),
                "items": state.items.len(),
                "likes": state.likes.len(),
                "data": data,
            }));
            Ok(())
        }
        Command::Eval { k, data, config, format } => {
            let params = base_params(config.as_deref())?;
            let state = read_state(&data)?;
            let result = leave_one_out(&state, &params, k, Exec::default()).map_err(Failure::domain)?;
            match format {
                Format::Json => output::print_json(&result),
                Format::Table | Format::Csv => output::eval_table(&result, format),
            }
            Ok(())
        }
        Command::Report { data, college, from, to, format } => {
            let college = match college {
                Some(c) => Some(Token::new(&c).map_err(Failure::domain)?),
                None => None,
            };
            let filter = ReportFilter { college, from, to };
            let state = read_state(&data)?;
            let rows = attendance_report(&state, &filter).map_err(Failure::domain)?;
            match format {
                Format::Json => output::print_json(&rows),
                Format::Csv => print!("{}", stp_core::report::to_csv(&rows)),
                Format::Table => output::report_table(&rows),
            }
            Ok(())
        }
        Command::Survey { csv, scale, format } => {
            let bytes = std::fs::read(&csv).map_err(|e| Failure::env(format!("cannot read {}: {e}", csv.display())))?;
            let sets = read_survey_csv(&bytes).map_err(Failure::domain)?;
            let table = tabulate(&sets, &InterpretationScale::new(scale)).map_err(Failure::domain)?;
            match format {
                Format::Json => output::print_json(&table),
                Format::Table | Format::Csv => output::survey_table(&table, format),
            }
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        Some(p) => Config::load(p).map_err(Failure::env),
        None => Ok(Config::default()),
    }
}

fn base_params(config: Option<&Path>) -> Result<RecommendParams, Failure> {
    load_config(config)?.recommend_params().map_err(Failure::env)
}

/// Loads a state file that must already exist.
fn read_state(path: &Path) -> Result<StateSnapshot, Failure> {
    load_state(path)?.ok_or_else(|| Failure::env(format!("state file {} does not exist", path.display())))
}

fn serve(port: Option<u16>, host: &str, data: Option<PathBuf>, config: Option<&Path>) -> Outcome {
    let config = load_config(config)?;
    let defaults = config.recommend_params().map_err(Failure::env)?;
    let data = data.unwrap_or_else(|| config.data_path.clone());
    let store = Store::open(&data)?;
    let vocab = match &config.vocab_path {
        Some(p) => read_vocab(p)?,
        None => TagVocabulary::default(),
    };
    let port = port.unwrap_or(config.port);
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();

    let runtime = tokio::runtime::Runtime::new().map_err(Failure::env)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure::env(format!("cannot bind {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(Failure::env)?;
        eprintln!("listening on http://{addr} (state {})", data.display());
        let app = Arc::new(AppState::new(store, vocab, defaults));
        stp_service::serve(listener, app).await.map_err(Failure::env)
    })
}

fn read_vocab(path: &Path) -> Result<TagVocabulary, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::env(format!("cannot read {}: {e}", path.display())))?;
    TagVocabulary::from_json(&bytes).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn ingest(feed: &Path, vocab: &Path, data: &Path, format: Option<FeedFormat>, source: &str) -> Outcome {
    let vocab = read_vocab(vocab)?;
    let bytes = std::fs::read(feed).map_err(|e| Failure::env(format!("cannot read {}: {e}", feed.display())))?;
    let format = format.unwrap_or_else(|| FeedFormat::detect(&bytes));
    let mut store = Store::open(data)?;
    let report = ingest_feed(&bytes, format, &vocab, &mut store, source, Utc::now()).map_err(|e| match e {
        IngestError::Store(s) => Failure::from(s),
        other => Failure::domain(format!("{}: {other}", feed.display())),
    })?;
    output::print_json(&report);
    Ok(())
}

fn recommend(faculty: &FacultyId, data: &Path, params: &RecommendParams, today: NaiveDate, format: Format) -> Outcome {
    let state = read_state(data)?;
    let user = state
        .faculty(faculty)
        .ok_or_else(|| Failure::domain(StoreError::UnknownFaculty(faculty.clone())))?;
    let recs = Recommender::from_snapshot(&state).recommend(user, params, today);
    let feed = Feed::build(user.faculty_id.clone(), today, recs, &state.items);
    match format {
        Format::Json => output::print_json(&feed),
        Format::Table | Format::Csv => output::feed_table(&feed, format),
    }
    Ok(())
}
