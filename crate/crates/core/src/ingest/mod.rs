//! Corpus loading and code-block stripping.

mod html;
mod jsonl;
mod post;
mod sedump;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use html::{decode_entities, strip_code, strip_html, Stripped, StrippedText};
pub use jsonl::{parse_jsonl, write_jsonl};
pub use post::{Post, PostMeta, PostType};
pub use sedump::parse_posts_xml;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at {location}{}: {message}", field.as_ref().map(|f| format!(", field `{f}`")).unwrap_or_default())]
    Malformed {
        location: String,
        field: Option<String>,
        message: String,
    },
    #[error("duplicate post id {0}")]
    DuplicateId(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    Jsonl,
    SedumpXml,
}

/// Reads every post from a corpus file, in file order.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Post>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    match format {
        CorpusFormat::Jsonl => parse_jsonl(reader),
        CorpusFormat::SedumpXml => parse_posts_xml(reader),
    }
}

/// Answers grouped under their question, plus answers whose question is not
/// part of the corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuestionIndex<'a> {
    pub answers: BTreeMap<u64, Vec<&'a Post>>,
    pub orphans: Vec<&'a Post>,
}

impl QuestionIndex<'_> {
    pub fn orphan_ids(&self) -> Vec<u64> {
        self.orphans.iter().map(|p| p.id).collect()
    }
}

pub fn questions_of(corpus: &[Post]) -> QuestionIndex<'_> {
    let mut index = QuestionIndex::default();
    for q in corpus.iter().filter(|p| p.is_question()) {
        index.answers.insert(q.id, Vec::new());
    }
    for a in corpus.iter().filter(|p| p.is_answer()) {
        match a.parent_id.and_then(|pid| index.answers.get_mut(&pid)) {
            Some(list) => list.push(a),
            None => index.orphans.push(a),
        }
    }
    index
}

/// The natural-language text of a post: the decoded title (questions only,
/// when enabled) joined to the stripped body with `". "`.
pub fn document_text(post: &Post, stripped: &StrippedText, include_titles: bool) -> String {
    let title = post
        .title
        .as_deref()
        .filter(|_| include_titles)
        .map(|t| strip_html(t).text)
        .filter(|t| !t.is_empty());
    match title {
        Some(t) if stripped.text.is_empty() => t,
        Some(t) => format!("{t}. {}", stripped.text),
        None => stripped.text.clone(),
    }
}
