use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use committee::config::{today, ApiConfig, CONFIG_ENV};
use committee::corpus_file::{load_corpus, save_records};
use committee::report::{read_folder_spec, recommend, ReportError};
use committee::service;
use committee::sim::agent::{write_csv, AgentParams};
use committee::sim::{generate_corpus, run_agent, Policy, SimParams};
use committee_core::{CorpusIndex, Engine};
use serde_json::json;

#[derive(Parser)]
#[command(name = "committee", version, about = "Author recommendation from a curated committee of authors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a corpus file and print its statistics.
    Ingest {
        corpus: PathBuf,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Print successive batches for a folder file as JSON.
    Recommend {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        folder: PathBuf,
        #[arg(long, default_value_t = 1)]
        batches: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Days since the Unix epoch; defaults to the folder file, then today.
        #[arg(long)]
        now: Option<i64>,
        /// Config file for scorer and strategy settings.
        #[arg(long, env = CONFIG_ENV)]
        config: Option<PathBuf>,
    },
    /// Generate a planted-community corpus and run a scripted agent on it.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    now: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    per_strategy: Option<usize>,
    #[arg(long)]
    recency_window_days: Option<i64>,
    #[arg(long)]
    pool_size: Option<usize>,
}

impl ServeArgs {
    fn into_config(self) -> anyhow::Result<ApiConfig> {
        let mut c = ApiConfig::resolve(self.config.as_deref())?;
        if let Some(v) = self.corpus {
            c.corpus_path = v;
        }
        if let Some(v) = self.port {
            c.port = v;
        }
        if self.now.is_some() {
            c.now_override = self.now;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.snapshot_dir.is_some() {
            c.snapshot_dir = self.snapshot_dir;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.per_strategy {
            c.per_strategy = v;
        }
        if let Some(v) = self.recency_window_days {
            c.recency_window_days = v;
        }
        if let Some(v) = self.pool_size {
            c.pool_size = v;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Directory for corpus.jsonl and metrics.csv.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "greedy-community-0")]
    policy: Policy,
    #[arg(long, default_value_t = 3)]
    steps: usize,
    /// Independent agent runs, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n_communities: Option<usize>,
    #[arg(long)]
    authors_per_community: Option<usize>,
    #[arg(long)]
    papers_per_author: Option<usize>,
    #[arg(long)]
    intra_coauthor_prob: Option<f64>,
    #[arg(long)]
    intra_cite_prob: Option<f64>,
    #[arg(long)]
    cross_cite_prob: Option<f64>,
    #[arg(long)]
    embedding_dim: Option<usize>,
}

fn load(path: &PathBuf) -> Result<CorpusIndex, ExitCode> {
    load_corpus(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(1)
    })
}

fn print_json(v: &impl serde::Serialize) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    let fail = |code: u8| {
        move |e: &dyn std::fmt::Display| {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    };
    match cli.command {
        Command::Ingest { corpus } => {
            let c = load(&corpus)?;
            print_json(&json!({
                "papers": c.num_papers(),
                "authors": c.num_authors(),
                "embedding_dim": c.embedding_dim(),
                "dangling_ref_count": c.dangling_ref_count(),
            }))
            .map_err(|e| fail(1)(&e))
        }
        Command::Serve(args) => {
            let config = args.into_config().map_err(|e| fail(2)(&e))?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| fail(1)(&e))?;
            rt.block_on(service::serve(config)).map_err(|e| fail(1)(&e))
        }
        Command::Recommend {
            corpus,
            folder,
            batches,
            seed,
            now,
            config,
        } => {
            let config = ApiConfig::resolve(config.as_deref()).map_err(|e| fail(2)(&e))?;
            let spec = read_folder_spec(&folder).map_err(|e| match e {
                ReportError::Io(_) => fail(1)(&e),
                e => fail(2)(&e),
            })?;
            let engine = Engine::new(load(&corpus)?, config.engine_config());
            let now_day = now.or(spec.now_day).or(config.now_override).unwrap_or_else(today);
            let report = recommend(&engine, &spec, batches, seed, now_day).map_err(|e| match e {
                ReportError::Io(e) => fail(1)(&e),
                e => fail(2)(&e),
            })?;
            print_json(&report).map_err(|e| fail(1)(&e))
        }
        Command::Simulate(a) => simulate(a),
    }
}

fn simulate(a: SimulateArgs) -> Result<(), ExitCode> {
    let fail = |e: &dyn std::fmt::Display| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    };
    let d = SimParams::default();
    let params = SimParams {
        n_communities: a.n_communities.unwrap_or(d.n_communities),
        authors_per_community: a.authors_per_community.unwrap_or(d.authors_per_community),
        papers_per_author: a.papers_per_author.unwrap_or(d.papers_per_author),
        intra_coauthor_prob: a.intra_coauthor_prob.unwrap_or(d.intra_coauthor_prob),
        intra_cite_prob: a.intra_cite_prob.unwrap_or(d.intra_cite_prob),
        cross_cite_prob: a.cross_cite_prob.unwrap_or(d.cross_cite_prob),
        embedding_dim: a.embedding_dim.unwrap_or(d.embedding_dim),
        seed: a.seed,
        ..d
    };
    let synthetic = generate_corpus(&params).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })?;
    fs::create_dir_all(&a.out_dir).map_err(|e| fail(&e))?;
    let corpus_path = a.out_dir.join("corpus.jsonl");
    save_records(&corpus_path, &synthetic.records).map_err(|e| fail(&e))?;
    let corpus = CorpusIndex::from_records(synthetic.records.clone()).map_err(|e| fail(&e))?;
    let engine = Engine::new(corpus, Default::default());
    let now_day = params.start_day + params.span_days;
    let mut rows = Vec::new();
    for run in 0..a.runs {
        let p = AgentParams::new(a.policy, a.steps, a.seed + run, now_day);
        let m = run_agent(&engine, &synthetic.author_community, &synthetic.paper_community, &p)
            .map_err(|e| fail(&e))?;
        rows.extend(m.batches);
    }
    let metrics_path = a.out_dir.join("metrics.csv");
    let file = fs::File::create(&metrics_path).map_err(|e| fail(&e))?;
    write_csv(file, &rows).map_err(|e| fail(&e))?;
    print_json(&json!({
        "corpus": corpus_path,
        "metrics": metrics_path,
        "papers": synthetic.records.len(),
        "batches": rows.len(),
    }))
    .map_err(|e| fail(&e))
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(io::stderr).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
