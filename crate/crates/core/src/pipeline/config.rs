use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::cluster::ClusterParams;
use crate::ingest::CorpusFormat;
use crate::se_client::FetchSpec;
use crate::summarize::{
    DEFAULT_K_ANSWERS, DEFAULT_K_QUESTIONS, DEFAULT_MAX_POOL, DEFAULT_REDUNDANCY,
};
use crate::vector_space::EmbedderSpec;

pub const DEFAULT_REDUCE_DIM: usize = 5;
pub const DEFAULT_TOP_N: usize = 80;

/// Every knob of a run. Values come from, in increasing precedence: these
/// defaults, the JSON config file, then command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus_path: Option<PathBuf>,
    /// Inferred from the corpus extension when absent (`.xml` is a dump).
    pub format: Option<CorpusFormat>,
    pub include_titles: bool,
    pub stopwords_path: Option<PathBuf>,
    pub embedder: EmbedderSpec,
    /// Target dimension of the random projection; 0 clusters full vectors.
    pub reduce_dim: usize,
    pub cluster: ClusterParams,
    pub top_n: usize,
    pub k_questions: usize,
    pub k_answers: usize,
    pub redundancy_cos: f64,
    pub max_pool: usize,
    /// Replaces the corpus-mean answer score threshold when set.
    pub answer_threshold: Option<i64>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub fetch: Option<FetchSpec>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_path: None,
            format: None,
            include_titles: true,
            stopwords_path: None,
            embedder: EmbedderSpec::default(),
            reduce_dim: DEFAULT_REDUCE_DIM,
            cluster: ClusterParams::default(),
            top_n: DEFAULT_TOP_N,
            k_questions: DEFAULT_K_QUESTIONS,
            k_answers: DEFAULT_K_ANSWERS,
            redundancy_cos: DEFAULT_REDUNDANCY,
            max_pool: DEFAULT_MAX_POOL,
            answer_threshold: None,
            seed: None,
            out_dir: PathBuf::from("out"),
            fetch: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Usage(format!("invalid config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text).map_err(|e| PipelineError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> Result<u64, PipelineError> {
        self.seed.ok_or_else(|| {
            PipelineError::Usage(
                "a seed is required: set `seed` in the config or pass --seed".into(),
            )
        })
    }

    pub fn corpus_format(&self) -> Option<CorpusFormat> {
        self.format.or_else(|| {
            self.corpus_path
                .as_ref()
                .map(|p| match p.extension().and_then(|e| e.to_str()) {
                    Some(e) if e.eq_ignore_ascii_case("xml") => CorpusFormat::SedumpXml,
                    _ => CorpusFormat::Jsonl,
                })
        })
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let usage = |m: String| Err(PipelineError::Usage(m));
        self.seed()?;
        self.embedder
            .validate()
            .map_err(|e| PipelineError::Usage(e.to_string()))?;
        self.cluster
            .validate()
            .map_err(|e| PipelineError::Usage(e.to_string()))?;
        if self.top_n == 0 {
            return usage("top_n must be at least 1".into());
        }
        if self.k_questions == 0 || self.k_answers == 0 {
            return usage("k_questions and k_answers must be at least 1".into());
        }
        if !(-1.0..=1.0).contains(&self.redundancy_cos) {
            return usage(format!(
                "redundancy_cos must lie in [-1, 1], got {}",
                self.redundancy_cos
            ));
        }
        if self.max_pool == 0 {
            return usage("max_pool must be at least 1".into());
        }
        if let Some(t) = self.answer_threshold.filter(|t| *t < 0) {
            return usage(format!("answer_threshold must be non-negative, got {t}"));
        }
        Ok(())
    }
}
