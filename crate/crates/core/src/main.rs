use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand};
use so_insight::ingest::CorpusFormat;
use so_insight::pipeline::{self, PipelineConfig, PipelineError};
use so_insight::se_client::FetchSpec;

/// Topic modeling and extractive summarization for Stack Exchange Q&A.
///
/// Settings are taken from built-in defaults, then the `--config` file, then
/// flags, each overriding the one before.
#[derive(Debug, Parser)]
#[command(name = "so-insight", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// JSON pipeline configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of topics to report and summarize.
    #[arg(long, global = true, value_name = "N")]
    top_n: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct CorpusOpts {
    /// Corpus file (JSONL posts or a Posts.xml dump).
    #[arg(long, value_name = "PATH")]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<CorpusFormat>,
}

#[derive(Debug, Args)]
struct FetchOpts {
    /// Site name, e.g. `stackoverflow`.
    #[arg(long)]
    site: Option<String>,
    /// Question tag to crawl.
    #[arg(long)]
    tag: Option<String>,
    /// Start date, `YYYY-MM-DD` or RFC 3339.
    #[arg(long, value_parser = parse_date)]
    from: Option<DateTime<Utc>>,
    /// End date, `YYYY-MM-DD` or RFC 3339.
    #[arg(long, value_parser = parse_date)]
    to: Option<DateTime<Utc>>,
    /// Items per API page, at most 100.
    #[arg(long, value_name = "N")]
    page_size: Option<usize>,
    /// Stop after this many question pages.
    #[arg(long, value_name = "N")]
    max_pages: Option<usize>,
    /// Directory for cached API responses.
    #[arg(long, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Where to write the JSONL corpus.
    #[arg(long, value_name = "PATH")]
    corpus: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Download tagged questions and their answers from the Stack Exchange API.
    Fetch(FetchOpts),
    /// Strip and normalize a corpus into documents.jsonl.
    Ingest(CorpusOpts),
    /// Embed, cluster and rank topics.
    Topics,
    /// Summarize the top topics' problems and solutions.
    Summarize,
    /// Render the intertopic distance map.
    Map,
    /// Run every stage.
    Run(CorpusOpts),
}

fn parse_date(s: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(d) = DateTime::parse_from_rfc3339(s) {
        return Ok(d.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc())
        .map_err(|_| format!("expected YYYY-MM-DD or RFC 3339, got `{s}`"))
}

fn load_config(
    g: &GlobalOpts,
    corpus: Option<&CorpusOpts>,
) -> Result<PipelineConfig, PipelineError> {
    let mut config = match &g.config {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = g.seed {
        config.seed = Some(s);
    }
    if let Some(n) = g.top_n {
        config.top_n = n;
    }
    if let Some(o) = &g.out {
        config.out_dir = o.clone();
    }
    if let Some(c) = corpus {
        if let Some(p) = &c.corpus {
            config.corpus_path = Some(p.clone());
        }
        if let Some(f) = c.format {
            config.format = Some(f);
        }
    }
    Ok(config)
}

fn apply_fetch(config: &mut PipelineConfig, f: &FetchOpts) -> Result<(), PipelineError> {
    if let Some(p) = &f.corpus {
        config.corpus_path = Some(p.clone());
    }
    let base = config.fetch.clone();
    let pick = |flag: Option<String>, cfg: Option<String>, name: &str| {
        flag.or(cfg).ok_or_else(|| {
            PipelineError::Usage(format!(
                "fetch needs --{name} or `fetch.{name}` in the config"
            ))
        })
    };
    let spec = FetchSpec {
        site: pick(
            f.site.clone(),
            base.as_ref().map(|b| b.site.clone()),
            "site",
        )?,
        tag: pick(f.tag.clone(), base.as_ref().map(|b| b.tag.clone()), "tag")?,
        from_date: f
            .from
            .or(base.as_ref().map(|b| b.from_date))
            .ok_or_else(|| {
                PipelineError::Usage("fetch needs --from or `fetch.from_date`".into())
            })?,
        to_date: f
            .to
            .or(base.as_ref().map(|b| b.to_date))
            .ok_or_else(|| PipelineError::Usage("fetch needs --to or `fetch.to_date`".into()))?,
        page_size: f
            .page_size
            .or(base.as_ref().map(|b| b.page_size))
            .unwrap_or(100),
        api_key: base.as_ref().and_then(|b| b.api_key.clone()),
        max_pages: f.max_pages.or(base.as_ref().and_then(|b| b.max_pages)),
    };
    config.fetch = Some(spec);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    if let Some(n) = cli.global.jobs {
        if n == 0 {
            return Err(PipelineError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PipelineError::Usage(format!("cannot size worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Fetch(f) => {
            let mut config = load_config(&cli.global, None)?;
            apply_fetch(&mut config, f)?;
            let path = pipeline::fetch_stage(&config, f.cache_dir.clone())?;
            eprintln!("corpus written to {}", path.display());
        }
        Command::Ingest(c) => {
            let config = load_config(&cli.global, Some(c))?;
            config.validate()?;
            let out = pipeline::ingest_stage(&config)?;
            report_warnings(&out.warnings);
            eprintln!(
                "ingested {} posts ({} questions, {} answers)",
                out.stats.total_posts, out.stats.questions, out.stats.answers
            );
        }
        Command::Topics => {
            let config = load_config(&cli.global, None)?;
            config.validate()?;
            let out = pipeline::topics_stage(&config)?;
            report_warnings(&out.warnings);
            eprintln!(
                "{} topics; top {} cover {:.1}% of clustered questions",
                out.topics.len(),
                out.report.rows.len(),
                out.report.coverage * 100.0
            );
        }
        Command::Summarize => {
            let config = load_config(&cli.global, None)?;
            config.validate()?;
            let out = pipeline::summarize_stage(&config)?;
            report_warnings(&out.warnings);
            eprintln!("summarized {} topics", out.questions.len());
        }
        Command::Map => {
            let config = load_config(&cli.global, None)?;
            config.validate()?;
            let map = pipeline::map_stage(&config)?;
            eprintln!("mapped {} topics", map.points.len());
        }
        Command::Run(c) => {
            let config = load_config(&cli.global, Some(c))?;
            let manifest = pipeline::run_all(&config)?;
            eprintln!(
                "{} posts, {} topics, {} outliers; artifacts in {}",
                manifest.corpus.total_posts,
                manifest.topics.topic_count,
                manifest.topics.outlier_count,
                config.out_dir.display()
            );
        }
    }
    Ok(())
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        log::warn!("{w}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
