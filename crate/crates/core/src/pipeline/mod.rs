//! End-to-end orchestration: each stage reads the artifacts of the stage
//! before it from the output directory and writes its own.

mod artifacts;
mod config;

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use artifacts::*;
pub use config::{PipelineConfig, DEFAULT_REDUCE_DIM, DEFAULT_TOP_N};

use crate::cluster::cluster_documents;
use crate::ingest::{document_text, load_corpus, strip_code, IngestError, PostMeta};
use crate::prep::{normalize, CleanDocument, StopWords};
use crate::summarize::{
    problems_and_solutions, summarize_topic_questions, AnswerFilterPolicy, SentenceEmbedder,
    SummarizeError, SummaryCorpus, SummaryParams,
};
use crate::topic_model::{
    build_topics, intertopic_map, topic_report, Topic, TopicMap, TopicReport,
};
use crate::vector_space::{embed_corpus, reduce, write_embd, EmbedderKind, DEFAULT_DIMENSION};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    /// Bad flags, bad config or an unreadable corpus.
    #[error("{0}")]
    Usage(String),
    #[error("{stage}: {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
    #[error("{stage}: missing {}; run `{producer}` first", file.display())]
    MissingInput {
        stage: &'static str,
        file: PathBuf,
        producer: &'static str,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 2,
            _ => 1,
        }
    }

    fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: e.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

fn write_file(stage: &'static str, path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| PipelineError::stage(stage, format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes)
        .map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("artifact types serialize");
    out.push(b'\n');
    out
}

fn read_input(
    stage: &'static str,
    dir: &Path,
    file: &str,
    producer: &'static str,
) -> Result<Vec<u8>> {
    let path = dir.join(file);
    match std::fs::read(&path) {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(PipelineError::MissingInput {
            stage,
            file: path,
            producer,
        }),
        Err(e) => Err(PipelineError::stage(
            stage,
            format!("{}: {e}", path.display()),
        )),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(
    stage: &'static str,
    file: &str,
    bytes: &[u8],
) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| PipelineError::stage(stage, format!("{file}: {e}")))
}

fn stop_words(config: &PipelineConfig) -> Result<StopWords> {
    match &config.stopwords_path {
        None => Ok(StopWords::english()),
        Some(p) => StopWords::from_file(p).map_err(|e| {
            PipelineError::Usage(format!("cannot read stop-word list {}: {e}", p.display()))
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutput {
    pub stats: CorpusStats,
    pub warnings: Vec<String>,
}

pub fn write_documents(out: impl Write, records: &[DocumentRecord]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(out);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_documents(bytes: &[u8]) -> std::result::Result<Vec<DocumentRecord>, String> {
    BufReader::new(bytes)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line.map_err(|e| e.to_string())?;
            serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))
        })
        .collect()
}

pub fn corpus_stats(records: &[DocumentRecord]) -> CorpusStats {
    let questions: HashSet<u64> = records
        .iter()
        .filter(|r| r.meta().is_question())
        .map(|r| r.id)
        .collect();
    let answers = records.iter().filter(|r| r.meta().is_answer());
    CorpusStats {
        total_posts: records.len(),
        questions: questions.len(),
        answers: answers.clone().count(),
        orphan_answers: answers
            .filter(|r| !r.parent_id.is_some_and(|p| questions.contains(&p)))
            .count(),
        empty_after_strip: records.iter().filter(|r| r.empty).count(),
        removed_code_blocks: records.iter().map(|r| r.removed_code_blocks).sum(),
    }
}

/// Loads, strips and normalizes the corpus into `documents.jsonl`.
pub fn ingest_stage(config: &PipelineConfig) -> Result<IngestOutput> {
    const STAGE: &str = "ingest";
    let path = config.corpus_path.as_ref().ok_or_else(|| {
        PipelineError::Usage("no corpus given: set `corpus_path` or pass --corpus".into())
    })?;
    let format = config.corpus_format().expect("corpus path is set");
    let posts = load_corpus(path, format).map_err(|e| match e {
        IngestError::Io { .. } => PipelineError::Usage(e.to_string()),
        other => PipelineError::stage(STAGE, format!("{}: {other}", path.display())),
    })?;
    let stop = stop_words(config)?;
    let mut warnings = Vec::new();
    let records: Vec<DocumentRecord> = posts
        .par_iter()
        .map(|p| {
            let stripped = strip_code(p);
            let doc = normalize(
                p.id,
                &document_text(p, &stripped, config.include_titles),
                &stop,
            );
            let w: Vec<String> = stripped
                .warnings
                .iter()
                .map(|w| format!("post {}: {w}", p.id))
                .collect();
            (
                DocumentRecord::new(PostMeta::from(p), doc, stripped.removed_code_blocks),
                w,
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(r, w)| {
            warnings.extend(w);
            r
        })
        .collect();
    let stats = corpus_stats(&records);
    if stats.orphan_answers > 0 {
        warnings.push(format!(
            "{} answers reference questions missing from the corpus",
            stats.orphan_answers
        ));
    }
    if stats.empty_after_strip > 0 {
        warnings.push(format!(
            "{} posts have no tokens after preprocessing",
            stats.empty_after_strip
        ));
    }
    let mut buf = Vec::new();
    write_documents(&mut buf, &records).map_err(|e| PipelineError::stage(STAGE, e))?;
    write_file(STAGE, &config.out_dir.join(DOCUMENTS), &buf)?;
    Ok(IngestOutput { stats, warnings })
}

fn load_documents(stage: &'static str, config: &PipelineConfig) -> Result<Vec<DocumentRecord>> {
    let bytes = read_input(stage, &config.out_dir, DOCUMENTS, "ingest")?;
    read_documents(&bytes).map_err(|e| PipelineError::stage(stage, format!("{DOCUMENTS}: {e}")))
}

fn load_topics(stage: &'static str, config: &PipelineConfig) -> Result<Vec<Topic>> {
    let bytes = read_input(stage, &config.out_dir, TOPICS_JSON, "topics")?;
    parse_json(stage, TOPICS_JSON, &bytes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicsOutput {
    pub topics: Vec<Topic>,
    pub report: TopicReport,
    pub outlier_count: usize,
    pub warnings: Vec<String>,
}

/// Embeds, reduces and clusters the questions, then writes the vectors,
/// the clustering and the topic tables.
pub fn topics_stage(config: &PipelineConfig) -> Result<TopicsOutput> {
    const STAGE: &str = "topics";
    let seed = config.seed()?;
    let records = load_documents(STAGE, config)?;
    let questions: Vec<CleanDocument> = records
        .iter()
        .filter(|r| r.meta().is_question())
        .map(DocumentRecord::document)
        .collect();
    if questions.is_empty() {
        return Err(PipelineError::stage(
            STAGE,
            "corpus has no questions to model",
        ));
    }
    let mut warnings = Vec::new();
    let mut vectors =
        embed_corpus(&questions, &config.embedder).map_err(|e| PipelineError::stage(STAGE, e))?;
    let dim = vectors[0].full.len();

    let mut reduced_dim = None;
    if config.reduce_dim > 0 && config.reduce_dim < dim && vectors.len() >= 2 {
        vectors = reduce(&vectors, config.reduce_dim, seed)
            .map_err(|e| PipelineError::stage(STAGE, e))?;
        reduced_dim = Some(config.reduce_dim);
    } else if config.reduce_dim > 0 {
        warnings.push(format!(
            "reduction to {} dimensions skipped; clustering full vectors",
            config.reduce_dim
        ));
    }

    let clustering =
        cluster_documents(&vectors, &config.cluster).map_err(|e| PipelineError::stage(STAGE, e))?;
    warnings.extend(clustering.warnings.iter().cloned());
    let (mut topics, w) = build_topics(&clustering, &questions, &vectors);
    warnings.extend(w);
    if !topics.is_empty() {
        let map = intertopic_map(&topics, seed).map_err(|e| PipelineError::stage(STAGE, e))?;
        for (t, p) in topics.iter_mut().zip(&map.points) {
            t.map_xy = Some([p.x, p.y]);
        }
    }
    let report = topic_report(&topics, config.top_n);

    let mut embd = Vec::new();
    let rows: Vec<(u64, &[f32])> = vectors
        .iter()
        .map(|v| (v.post_id, v.full.as_slice()))
        .collect();
    write_embd(&mut embd, dim, &rows).map_err(|e| PipelineError::stage(STAGE, e))?;
    write_file(STAGE, &config.out_dir.join(VECTORS), &embd)?;
    let outlier_count = clustering.outlier_count();
    let artifact = ClusteringArtifact {
        post_ids: questions.iter().map(|d| d.post_id).collect(),
        reduced_dim,
        clustering,
    };
    write_file(
        STAGE,
        &config.out_dir.join(CLUSTERING),
        &json_bytes(&artifact),
    )?;
    write_file(
        STAGE,
        &config.out_dir.join(TOPICS_JSON),
        &json_bytes(&topics),
    )?;
    write_file(
        STAGE,
        &config.out_dir.join(TOPICS_CSV),
        report.to_csv().as_bytes(),
    )?;
    Ok(TopicsOutput {
        topics,
        report,
        outlier_count,
        warnings,
    })
}

/// Rewrites `map.json` and `map.svg` from `topics.json`.
pub fn map_stage(config: &PipelineConfig) -> Result<TopicMap> {
    const STAGE: &str = "map";
    let seed = config.seed()?;
    let topics = load_topics(STAGE, config)?;
    let map = if topics.is_empty() {
        TopicMap { points: Vec::new() }
    } else {
        intertopic_map(&topics, seed).map_err(|e| PipelineError::stage(STAGE, e))?
    };
    write_file(STAGE, &config.out_dir.join(MAP_JSON), &json_bytes(&map))?;
    write_file(
        STAGE,
        &config.out_dir.join(MAP_SVG),
        map.to_svg().as_bytes(),
    )?;
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummarizeOutput {
    pub questions: Vec<QuestionSummaryEntry>,
    pub answers: Vec<AnswerSummaryEntry>,
    pub answer_threshold: Option<f64>,
    pub warnings: Vec<String>,
}

/// Problem and solution summaries for the top `top_n` topics.
pub fn summarize_stage(config: &PipelineConfig) -> Result<SummarizeOutput> {
    const STAGE: &str = "summarize";
    let seed = config.seed()?;
    let records = load_documents(STAGE, config)?;
    let topics = load_topics(STAGE, config)?;
    let stop = stop_words(config)?;
    let metas: Vec<PostMeta> = records.iter().map(DocumentRecord::meta).collect();
    let docs: Vec<CleanDocument> = records.iter().map(DocumentRecord::document).collect();
    let corpus = SummaryCorpus::new(&metas, &docs);
    let mut warnings = Vec::new();
    let policy = match AnswerFilterPolicy::for_corpus(&metas, config.answer_threshold) {
        Ok(p) => Some(p),
        Err(SummarizeError::NoAnswers) => {
            warnings.push("corpus has no answers; solution lists are empty".to_string());
            None
        }
        Err(e) => return Err(PipelineError::Usage(e.to_string())),
    };
    let dimension = match config.embedder.kind {
        EmbedderKind::HashedTfidf => config.embedder.dimension,
        EmbedderKind::ExternalFile => DEFAULT_DIMENSION,
    };
    let embedder = SentenceEmbedder::fit(&docs, dimension, config.embedder.seed, stop);
    let params = SummaryParams {
        k_questions: config.k_questions,
        k_answers: config.k_answers,
        redundancy_cos: config.redundancy_cos,
        max_pool: config.max_pool,
        seed,
    };
    let results: Vec<_> = topics
        .par_iter()
        .take(config.top_n)
        .map(|t| {
            let summary = summarize_topic_questions(t, &corpus, &embedder, &params);
            let paired =
                problems_and_solutions(&summary, &corpus, policy.as_ref(), &embedder, &params);
            (summary, paired)
        })
        .collect();
    let mut questions = Vec::with_capacity(results.len());
    let mut answers = Vec::with_capacity(results.len());
    for (summary, paired) in results {
        warnings.extend(summary.warnings.iter().cloned());
        warnings.extend(paired.warnings.iter().cloned());
        questions.push(QuestionSummaryEntry {
            topic_id: summary.subject_id as usize,
            items: summary
                .items
                .into_iter()
                .map(|i| QuestionItem {
                    text: i.text,
                    question_id: i.source_id,
                    score: i.score,
                })
                .collect(),
        });
        answers.push(AnswerSummaryEntry {
            topic_id: paired.topic_id,
            problems: paired
                .problems
                .into_iter()
                .map(|p| ProblemItem {
                    text: p.text,
                    question_id: p.question_id,
                    solutions: p
                        .solutions
                        .into_iter()
                        .map(|s| SolutionItem {
                            text: s.text,
                            answer_id: s.answer_id,
                            score: s.score,
                        })
                        .collect(),
                })
                .collect(),
        });
    }
    write_file(
        STAGE,
        &config.out_dir.join(QUESTION_SUMMARIES),
        &json_bytes(&questions),
    )?;
    write_file(
        STAGE,
        &config.out_dir.join(ANSWER_SUMMARIES),
        &json_bytes(&answers),
    )?;
    Ok(SummarizeOutput {
        questions,
        answers,
        answer_threshold: policy.map(|p| p.global_mean),
        warnings,
    })
}

pub fn digest(path: &Path) -> std::io::Result<ArtifactDigest> {
    let bytes = std::fs::read(path)?;
    Ok(ArtifactDigest {
        file: path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn config_echo(config: &PipelineConfig) -> serde_json::Value {
    let mut v = serde_json::to_value(config).expect("config serializes");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("out_dir");
    }
    v
}

/// Runs every stage in order and writes `run_manifest.json`.
pub fn run_all(config: &PipelineConfig) -> Result<RunManifest> {
    config.validate()?;
    let ingest = ingest_stage(config)?;
    let topics = topics_stage(config)?;
    map_stage(config)?;
    let summaries = summarize_stage(config)?;

    let mut artifacts = Vec::new();
    for file in &ALL_ARTIFACTS[..ALL_ARTIFACTS.len() - 1] {
        artifacts
            .push(digest(&config.out_dir.join(file)).map_err(|e| PipelineError::stage("run", e))?);
    }
    let mut warnings = ingest.warnings;
    warnings.extend(topics.warnings);
    warnings.extend(summaries.warnings);
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config_echo(config),
        corpus: ingest.stats,
        topics: TopicStats {
            topic_count: topics.topics.len(),
            clustered_docs: topics.report.clustered_docs,
            outlier_count: topics.outlier_count,
            top_n: config.top_n,
            coverage: topics.report.coverage,
        },
        answer_threshold: summaries.answer_threshold,
        artifacts,
        warnings,
    };
    write_file(
        "run",
        &config.out_dir.join(MANIFEST),
        &json_bytes(&manifest),
    )?;
    Ok(manifest)
}

/// Downloads questions and their answers into a JSONL corpus at
/// `corpus_path` (or `out_dir/corpus.jsonl`). Returns the path written.
pub fn fetch_stage(config: &PipelineConfig, cache_dir: Option<PathBuf>) -> Result<PathBuf> {
    use crate::se_client::Client;
    const STAGE: &str = "fetch";
    let spec = config
        .fetch
        .clone()
        .ok_or_else(|| {
            PipelineError::Usage(
                "fetch needs a `fetch` section in the config or --site/--tag/--from/--to".into(),
            )
        })?
        .with_env_key();
    spec.validate()
        .map_err(|e| PipelineError::Usage(e.to_string()))?;
    let mut client = Client::live(cache_dir).map_err(|e| PipelineError::stage(STAGE, e))?;
    let mut posts: Vec<crate::ingest::Post> = client
        .fetch_questions(&spec)
        .map_err(|e| PipelineError::stage(STAGE, e))?
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| PipelineError::stage(STAGE, e))?;
    let ids: Vec<u64> = posts.iter().map(|p| p.id).collect();
    if !ids.is_empty() {
        let answer_spec = crate::se_client::FetchSpec {
            max_pages: None,
            ..spec
        };
        let answers: Vec<_> = client
            .fetch_answers(&ids, &answer_spec)
            .map_err(|e| PipelineError::stage(STAGE, e))?
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| PipelineError::stage(STAGE, e))?;
        posts.extend(answers);
    }
    let path = config
        .corpus_path
        .clone()
        .unwrap_or_else(|| config.out_dir.join("corpus.jsonl"));
    let mut buf = Vec::new();
    crate::ingest::write_jsonl(&mut buf, &posts).map_err(|e| PipelineError::stage(STAGE, e))?;
    write_file(STAGE, &path, &buf)?;
    log::info!("wrote {} posts to {}", posts.len(), path.display());
    Ok(path)
}
