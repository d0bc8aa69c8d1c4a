//! `histgraph`: ingest search logs, build the co-occurrence index, recompute
//! session graphs and serve them over HTTP.
//!
//! Exit status is 0 on success, 1 when an operation fails and 2 for usage
//! or configuration errors.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use histgraph_core::api::{self, ApiState};
use histgraph_core::index::{build_index, read_corpus_dir, PositionalIndex};
use histgraph_core::linker::LinkerDictionary;
use histgraph_core::log::{parse_log, Timestamp};
use histgraph_core::store::{BatchContext, Store, StoreError};

use config::{CliConfig, FileConfig};

#[derive(Debug, Parser)]
#[command(name = "histgraph", version, about = "Search-history knowledge graphs")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Key-value config file.
    #[arg(long, env = "HISTGRAPH_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Store database file.
    #[arg(long, env = "HISTGRAPH_STORE", global = true)]
    store: Option<PathBuf>,
    /// Co-occurrence index file.
    #[arg(long, env = "HISTGRAPH_INDEX", global = true)]
    index: Option<PathBuf>,
    /// Entity dictionary (tab-separated alias, entity id, label, score).
    #[arg(long, env = "HISTGRAPH_DICTIONARY", global = true)]
    dictionary: Option<PathBuf>,
    #[arg(long, env = "HISTGRAPH_SESSION_GAP_MINUTES", global = true)]
    session_gap_minutes: Option<u64>,
    #[arg(long, env = "HISTGRAPH_LAMBDA", global = true)]
    lambda: Option<f64>,
    #[arg(long, env = "HISTGRAPH_SATURATION_THRESHOLD", global = true)]
    saturation_threshold: Option<u64>,
    /// per_pair or literal_max.
    #[arg(long, env = "HISTGRAPH_BRANCH_MODE", global = true)]
    branch_mode: Option<String>,
    /// query or session.
    #[arg(long, env = "HISTGRAPH_SCORING_SCOPE", global = true)]
    scoring_scope: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Store the records of a log file and re-segment their users.
    Ingest {
        #[arg(long)]
        log: PathBuf,
    },
    /// Co-occurrence index commands.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Graph recompute commands.
    #[command(subcommand)]
    Batch(BatchCommand),
    /// Write the stored graph document of one session.
    ExportGraph {
        #[arg(long)]
        session: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collaborative group commands.
    #[command(subcommand)]
    Group(GroupCommand),
    /// Run the HTTP API.
    Serve {
        /// HOST:PORT to listen on.
        #[arg(long, env = "HISTGRAPH_BIND")]
        bind: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum IndexCommand {
    /// Index every `.txt` file of a directory.
    Build {
        #[arg(long, env = "HISTGRAPH_CORPUS")]
        corpus: Option<PathBuf>,
        /// Defaults to the configured index path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum BatchCommand {
    /// Rebuild graphs of sessions with activity at or after a date.
    Run {
        /// YYYY-MM-DD (midnight UTC) or an RFC 3339 timestamp.
        #[arg(long, value_parser = parse_since)]
        since: Timestamp,
    },
}

#[derive(Debug, Subcommand)]
enum GroupCommand {
    Create {
        #[arg(long)]
        id: String,
        #[arg(long)]
        name: String,
        #[arg(long = "member", required = true)]
        members: Vec<String>,
    },
    /// Tag a snippet as useful to a group.
    Tag {
        #[arg(long)]
        group: String,
        #[arg(long)]
        snippet: String,
        #[arg(long)]
        user: String,
    },
}

fn parse_since(s: &str) -> Result<Timestamp, String> {
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        let dt = d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc();
        return Ok(Timestamp::from(dt));
    }
    s.parse::<Timestamp>()
        .map_err(|_| format!("`{s}` is neither YYYY-MM-DD nor an RFC 3339 timestamp"))
}

enum Failure {
    Usage(String),
    Op(String),
}

fn op<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Op(e.to_string())
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("histgraph: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(Failure::Op(msg)) => {
            eprintln!("histgraph: error: {}", one_line(&msg));
            ExitCode::from(1)
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn settings(g: &GlobalOpts, corpus: Option<PathBuf>, bind: Option<String>) -> Result<CliConfig, Failure> {
    let from_flags = FileConfig {
        store: g.store.clone(),
        index: g.index.clone(),
        corpus,
        dictionary: g.dictionary.clone(),
        session_gap_minutes: g.session_gap_minutes,
        lambda: g.lambda,
        saturation_threshold: g.saturation_threshold,
        branch_mode: g.branch_mode.clone(),
        scoring_scope: g.scoring_scope.clone(),
        bind,
    };
    let from_file = match &g.config {
        Some(p) => FileConfig::load(p).map_err(Failure::Usage)?,
        None => FileConfig::default(),
    };
    CliConfig::resolve(from_flags.or(from_file)).map_err(Failure::Usage)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Ingest { log } => ingest(&settings(&cli.global, None, None)?, &log),
        Command::Index(IndexCommand::Build { corpus, out }) => {
            let cfg = settings(&cli.global, corpus, None)?;
            index_build(&cfg, out.as_deref())
        }
        Command::Batch(BatchCommand::Run { since }) => batch_run(&settings(&cli.global, None, None)?, since),
        Command::ExportGraph { session, out } => {
            export_graph(&settings(&cli.global, None, None)?, &session, out.as_deref())
        }
        Command::Group(cmd) => group(&settings(&cli.global, None, None)?, cmd),
        Command::Serve { bind } => serve(&settings(&cli.global, None, bind)?),
    }
}

fn open_store(cfg: &CliConfig) -> Result<Store, Failure> {
    Store::open(&cfg.store).map_err(|e| Failure::Op(format!("cannot open store {}: {e}", cfg.store.display())))
}

fn ingest(cfg: &CliConfig, log: &Path) -> Outcome {
    let text = std::fs::read_to_string(log).map_err(|e| Failure::Op(format!("{}: {e}", log.display())))?;
    let entries = parse_log(&text).map_err(|e| Failure::Op(format!("{}: {e}", log.display())))?;
    let mut store = open_store(cfg)?;
    let report = store.ingest(&entries, &cfg.segmentation).map_err(op)?;
    if report.unchanged > 0 {
        println!("ingested {} ({} already stored)", report.ingested, report.unchanged);
    } else {
        println!("ingested {}", report.ingested);
    }
    Ok(())
}

fn index_build(cfg: &CliConfig, out: Option<&Path>) -> Outcome {
    let corpus = cfg
        .corpus
        .as_deref()
        .ok_or_else(|| Failure::Usage("no corpus directory given (--corpus or `corpus` key)".into()))?;
    let out = out.unwrap_or(&cfg.index);
    let docs = read_corpus_dir(corpus).map_err(op)?;
    let index = build_index(docs).map_err(op)?;
    index.save(out).map_err(op)?;
    println!("indexed {} documents, {} terms", index.doc_count(), index.term_count());
    Ok(())
}

fn batch_run(cfg: &CliConfig, since: Timestamp) -> Outcome {
    let dict_path = cfg
        .dictionary
        .as_deref()
        .ok_or_else(|| Failure::Usage("no dictionary given (--dictionary or `dictionary` key)".into()))?;
    let dict = LinkerDictionary::load(dict_path).map_err(|e| Failure::Op(format!("{}: {e}", dict_path.display())))?;
    let index =
        PositionalIndex::load(&cfg.index).map_err(|e| Failure::Op(format!("{}: {e}", cfg.index.display())))?;
    let ctx = BatchContext {
        linker: &dict,
        source: &index,
        segmentation: cfg.segmentation,
        extraction: cfg.extraction,
        edges: cfg.edges,
    };
    let mut store = open_store(cfg)?;
    match store.batch_recompute(since, &ctx) {
        Ok(report) => {
            println!("{} graphs written", report.graphs_written);
            Ok(())
        }
        Err(StoreError::PartialBatch { failed, report }) => {
            println!("{} graphs written", report.graphs_written);
            for (session, reason) in &failed {
                eprintln!("histgraph: session {session}: {}", one_line(reason));
            }
            Err(Failure::Op(format!("{} of {} sessions failed", failed.len(), report.sessions_rebuilt)))
        }
        Err(e) => Err(op(e)),
    }
}

fn export_graph(cfg: &CliConfig, session: &str, out: Option<&Path>) -> Outcome {
    let store = open_store(cfg)?;
    let doc = store
        .graph_document(session)
        .map_err(op)?
        .ok_or_else(|| Failure::Op(format!("graph for session `{session}` has not been computed; run `batch run`")))?;
    match out {
        Some(path) => std::fs::write(path, doc).map_err(|e| Failure::Op(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(doc.as_bytes()).map_err(op),
    }
}

fn group(cfg: &CliConfig, cmd: GroupCommand) -> Outcome {
    let mut store = open_store(cfg)?;
    match cmd {
        GroupCommand::Create { id, name, members } => {
            let members: Vec<&str> = members.iter().map(String::as_str).collect();
            let g = store.create_group(&id, &name, &members).map_err(op)?;
            println!("created group {} with {} members", g.group_id, g.members.len());
        }
        GroupCommand::Tag { group, snippet, user } => {
            let now = Timestamp::from(chrono::Utc::now());
            let t = store.tag_result(&snippet, &group, &user, now).map_err(op)?;
            println!("tagged {} for {}", t.snippet_id, t.group_id);
        }
    }
    Ok(())
}

fn serve(cfg: &CliConfig) -> Outcome {
    let store = open_store(cfg)?;
    let state = ApiState::new(store, cfg.segmentation);
    let rt = tokio::runtime::Runtime::new().map_err(op)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(cfg.bind)
            .await
            .map_err(|e| Failure::Op(format!("cannot bind {}: {e}", cfg.bind)))?;
        let addr = listener.local_addr().map_err(op)?;
        eprintln!("histgraph: listening on http://{addr}");
        api::serve(listener, api::router(state)).await.map_err(op)
    })
}
