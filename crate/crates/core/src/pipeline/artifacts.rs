use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::ingest::{PostMeta, PostType};
use crate::prep::CleanDocument;

pub const DOCUMENTS: &str = "documents.jsonl";
pub const VECTORS: &str = "vectors.embd";
pub const CLUSTERING: &str = "clustering.json";
pub const TOPICS_JSON: &str = "topics.json";
pub const TOPICS_CSV: &str = "topics.csv";
pub const MAP_JSON: &str = "map.json";
pub const MAP_SVG: &str = "map.svg";
pub const QUESTION_SUMMARIES: &str = "question_summaries.json";
pub const ANSWER_SUMMARIES: &str = "answer_summaries.json";
pub const MANIFEST: &str = "run_manifest.json";

/// Every artifact a full run produces, manifest last.
pub const ALL_ARTIFACTS: [&str; 10] = [
    DOCUMENTS,
    VECTORS,
    CLUSTERING,
    TOPICS_JSON,
    TOPICS_CSV,
    MAP_JSON,
    MAP_SVG,
    QUESTION_SUMMARIES,
    ANSWER_SUMMARIES,
    MANIFEST,
];

/// One line of `documents.jsonl`: post metadata plus its cleaned text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub id: u64,
    pub post_type: PostType,
    pub parent_id: Option<u64>,
    pub accepted: bool,
    pub score: i64,
    pub removed_code_blocks: usize,
    pub text: String,
    pub tokens: Vec<String>,
    pub sentence_spans: Vec<(usize, usize)>,
    pub empty: bool,
}

impl DocumentRecord {
    pub fn new(meta: PostMeta, doc: CleanDocument, removed_code_blocks: usize) -> Self {
        DocumentRecord {
            id: meta.id,
            post_type: meta.post_type,
            parent_id: meta.parent_id,
            accepted: meta.accepted,
            score: meta.score,
            removed_code_blocks,
            text: doc.text,
            tokens: doc.tokens,
            sentence_spans: doc.sentence_spans,
            empty: doc.empty,
        }
    }

    pub fn meta(&self) -> PostMeta {
        PostMeta {
            id: self.id,
            post_type: self.post_type,
            parent_id: self.parent_id,
            accepted: self.accepted,
            score: self.score,
        }
    }

    pub fn document(&self) -> CleanDocument {
        CleanDocument {
            post_id: self.id,
            text: self.text.clone(),
            tokens: self.tokens.clone(),
            sentence_spans: self.sentence_spans.clone(),
            empty: self.empty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringArtifact {
    /// Clustered post ids; `clustering.labels` is aligned with this list.
    pub post_ids: Vec<u64>,
    pub reduced_dim: Option<usize>,
    pub clustering: Clustering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionItem {
    pub text: String,
    pub question_id: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionSummaryEntry {
    pub topic_id: usize,
    pub items: Vec<QuestionItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionItem {
    pub text: String,
    pub answer_id: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemItem {
    pub text: String,
    pub question_id: u64,
    pub solutions: Vec<SolutionItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerSummaryEntry {
    pub topic_id: usize,
    pub problems: Vec<ProblemItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusStats {
    pub total_posts: usize,
    pub questions: usize,
    pub answers: usize,
    pub orphan_answers: usize,
    pub empty_after_strip: usize,
    pub removed_code_blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicStats {
    pub topic_count: usize,
    pub clustered_docs: usize,
    pub outlier_count: usize,
    pub top_n: usize,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactDigest {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Effective configuration, without `out_dir`.
    pub config: serde_json::Value,
    pub corpus: CorpusStats,
    pub topics: TopicStats,
    pub answer_threshold: Option<f64>,
    pub artifacts: Vec<ArtifactDigest>,
    pub warnings: Vec<String>,
}
