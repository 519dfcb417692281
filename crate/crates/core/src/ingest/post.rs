use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostType {
    Question,
    Answer,
}

impl fmt::Display for PostType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostType::Question => f.write_str("question"),
            PostType::Answer => f.write_str("answer"),
        }
    }
}

/// One Stack Exchange item, either a question or an answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: u64,
    pub post_type: PostType,
    pub parent_id: Option<u64>,
    #[serde(default)]
    pub accepted: bool,
    pub score: i64,
    pub title: Option<String>,
    pub body_html: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub creation_date: DateTime<Utc>,
}

/// The fields of a post that survive past ingestion: identity, thread link
/// and vote state, without the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostMeta {
    pub id: u64,
    pub post_type: PostType,
    pub parent_id: Option<u64>,
    #[serde(default)]
    pub accepted: bool,
    pub score: i64,
}

impl PostMeta {
    pub fn is_question(&self) -> bool {
        self.post_type == PostType::Question
    }

    pub fn is_answer(&self) -> bool {
        self.post_type == PostType::Answer
    }
}

impl From<&Post> for PostMeta {
    fn from(p: &Post) -> Self {
        PostMeta {
            id: p.id,
            post_type: p.post_type,
            parent_id: p.parent_id,
            accepted: p.accepted,
            score: p.score,
        }
    }
}

impl Post {
    pub fn is_question(&self) -> bool {
        self.post_type == PostType::Question
    }

    pub fn is_answer(&self) -> bool {
        self.post_type == PostType::Answer
    }

    /// Checks the structural invariants every post must satisfy, returning
    /// the offending field name and a message on failure.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.id == 0 {
            return Err(("id", "post id must be positive".into()));
        }
        match (self.post_type, self.parent_id) {
            (PostType::Answer, None) => {
                return Err(("parent_id", "answer is missing parent_id".into()));
            }
            (PostType::Answer, Some(0)) => {
                return Err(("parent_id", "parent_id must be positive".into()));
            }
            (PostType::Question, Some(_)) => {
                return Err(("parent_id", "question must not carry a parent_id".into()));
            }
            _ => {}
        }
        if self.accepted && self.post_type == PostType::Question {
            return Err(("accepted", "only answers can be accepted".into()));
        }
        if self.title.is_some() && self.post_type == PostType::Answer {
            return Err(("title", "answers do not carry a title".into()));
        }
        Ok(())
    }
}
