use std::collections::HashSet;
use std::io::BufRead;

use chrono::{DateTime, Utc};
use serde_json::{Map, Value};

use super::{IngestError, Post, PostType};

/// Parses a JSONL corpus, one post object per line. Blank lines are skipped.
pub fn parse_jsonl<R: BufRead>(reader: R) -> Result<Vec<Post>, IngestError> {
    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| IngestError::Malformed {
            location: format!("line {line_no}"),
            field: None,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let post = parse_line(&line).map_err(|(field, message)| IngestError::Malformed {
            location: format!("line {line_no}"),
            field,
            message,
        })?;
        if !seen.insert(post.id) {
            return Err(IngestError::DuplicateId(post.id));
        }
        posts.push(post);
    }
    Ok(posts)
}

type FieldError = (Option<String>, String);

fn field_err(field: &str, message: impl Into<String>) -> FieldError {
    (Some(field.to_string()), message.into())
}

fn parse_line(line: &str) -> Result<Post, FieldError> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| (None, format!("invalid JSON: {e}")))?;
    let Value::Object(obj) = value else {
        return Err((None, "expected a JSON object".into()));
    };
    post_from_object(&obj)
}

fn post_from_object(obj: &Map<String, Value>) -> Result<Post, FieldError> {
    let id = required_u64(obj, "id")?;
    let post_type = match obj.get("post_type") {
        Some(Value::String(s)) if s == "question" => PostType::Question,
        Some(Value::String(s)) if s == "answer" => PostType::Answer,
        Some(other) => {
            return Err(field_err(
                "post_type",
                format!("expected \"question\" or \"answer\", got {other}"),
            ))
        }
        None => return Err(field_err("post_type", "missing field")),
    };
    let parent_id = optional_u64(obj, "parent_id")?;
    let accepted = match obj.get("accepted") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(other) => return Err(field_err("accepted", format!("expected bool, got {other}"))),
    };
    let score = match obj.get("score") {
        Some(v) => v
            .as_i64()
            .ok_or_else(|| field_err("score", format!("expected integer, got {v}")))?,
        None => return Err(field_err("score", "missing field")),
    };
    let title = optional_string(obj, "title")?;
    let body_html = match obj.get("body_html") {
        Some(Value::String(s)) => s.clone(),
        Some(other) => {
            return Err(field_err(
                "body_html",
                format!("expected string, got {other}"),
            ))
        }
        None => return Err(field_err("body_html", "missing field")),
    };
    let tags = match obj.get("tags") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|t| {
                t.as_str()
                    .map(|s| s.to_lowercase())
                    .ok_or_else(|| field_err("tags", format!("expected string tag, got {t}")))
            })
            .collect::<Result<_, _>>()?,
        Some(other) => return Err(field_err("tags", format!("expected array, got {other}"))),
    };
    let creation_date = match obj.get("creation_date") {
        Some(Value::String(s)) => DateTime::parse_from_rfc3339(s)
            .map(|d| d.with_timezone(&Utc))
            .map_err(|e| field_err("creation_date", format!("not RFC 3339 ({e}): {s}")))?,
        Some(other) => {
            return Err(field_err(
                "creation_date",
                format!("expected string, got {other}"),
            ))
        }
        None => return Err(field_err("creation_date", "missing field")),
    };
    let post = Post {
        id,
        post_type,
        parent_id,
        accepted,
        score,
        title,
        body_html,
        tags,
        creation_date,
    };
    post.validate().map_err(|(f, m)| field_err(f, m))?;
    Ok(post)
}

fn required_u64(obj: &Map<String, Value>, field: &str) -> Result<u64, FieldError> {
    match obj.get(field) {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| field_err(field, format!("expected non-negative integer, got {v}"))),
        None => Err(field_err(field, "missing field")),
    }
}

fn optional_u64(obj: &Map<String, Value>, field: &str) -> Result<Option<u64>, FieldError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| field_err(field, format!("expected non-negative integer, got {v}"))),
    }
}

fn optional_string(obj: &Map<String, Value>, field: &str) -> Result<Option<String>, FieldError> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(field_err(field, format!("expected string, got {other}"))),
    }
}

/// Serializes posts back into the JSONL corpus format.
pub fn write_jsonl<W: std::io::Write>(mut out: W, posts: &[Post]) -> std::io::Result<()> {
    for post in posts {
        serde_json::to_writer(&mut out, post)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
