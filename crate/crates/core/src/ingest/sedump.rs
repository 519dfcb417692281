use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use chrono::{DateTime, NaiveDateTime, Utc};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{IngestError, Post, PostType};

/// Parses a Stack Exchange data-dump `Posts.xml`.
///
/// Only question (`PostTypeId=1`) and answer (`PostTypeId=2`) rows are kept.
/// `AcceptedAnswerId` on a question marks the referenced answer as accepted.
pub fn parse_posts_xml<R: BufRead>(reader: R) -> Result<Vec<Post>, IngestError> {
    let mut xml = Reader::from_reader(reader);
    let mut buf = Vec::new();
    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    let mut accepted_by_question: HashMap<u64, u64> = HashMap::new();
    let mut row_no = 0usize;
    loop {
        let event = xml
            .read_event_into(&mut buf)
            .map_err(|e| IngestError::Malformed {
                location: format!("byte {}", xml.buffer_position()),
                field: None,
                message: format!("invalid XML: {e}"),
            })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) if e.name().as_ref() == b"row" => {
                row_no += 1;
                let parsed = parse_row(e).map_err(|(field, message)| IngestError::Malformed {
                    location: format!("row {row_no}"),
                    field: Some(field.to_string()),
                    message,
                })?;
                if let Some((post, accepted_answer)) = parsed {
                    if !seen.insert(post.id) {
                        return Err(IngestError::DuplicateId(post.id));
                    }
                    if let Some(answer_id) = accepted_answer {
                        accepted_by_question.insert(post.id, answer_id);
                    }
                    posts.push(post);
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    for post in posts.iter_mut().filter(|p| p.is_answer()) {
        if let Some(parent) = post.parent_id {
            if accepted_by_question.get(&parent) == Some(&post.id) {
                post.accepted = true;
            }
        }
    }
    Ok(posts)
}

type RowResult = Result<Option<(Post, Option<u64>)>, (&'static str, String)>;

fn parse_row(row: &BytesStart<'_>) -> RowResult {
    let mut attrs: HashMap<String, String> = HashMap::new();
    for attr in row.attributes() {
        let attr = attr.map_err(|e| ("<attributes>", e.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| ("<attributes>", format!("bad escape in {key}: {e}")))?
            .into_owned();
        attrs.insert(key, value);
    }
    let post_type = match attrs.get("PostTypeId").map(String::as_str) {
        Some("1") => PostType::Question,
        Some("2") => PostType::Answer,
        Some(_) => return Ok(None),
        None => return Err(("PostTypeId", "missing attribute".into())),
    };
    let id = parse_u64(&attrs, "Id")?.ok_or(("Id", "missing attribute".to_string()))?;
    let parent_id = match post_type {
        PostType::Answer => parse_u64(&attrs, "ParentId")?,
        PostType::Question => None,
    };
    let accepted_answer = match post_type {
        PostType::Question => parse_u64(&attrs, "AcceptedAnswerId")?,
        PostType::Answer => None,
    };
    let score = match attrs.get("Score") {
        Some(s) => s
            .trim()
            .parse::<i64>()
            .map_err(|_| ("Score", format!("not an integer: {s}")))?,
        None => 0,
    };
    let creation_date = match attrs.get("CreationDate") {
        Some(s) => {
            parse_dump_date(s).ok_or(("CreationDate", format!("unrecognised timestamp: {s}")))?
        }
        None => return Err(("CreationDate", "missing attribute".into())),
    };
    let title = match post_type {
        PostType::Question => attrs.get("Title").cloned(),
        PostType::Answer => None,
    };
    let body_html = attrs.get("Body").cloned().unwrap_or_default();
    let tags = attrs.get("Tags").map(|t| split_tags(t)).unwrap_or_default();
    let post = Post {
        id,
        post_type,
        parent_id,
        accepted: false,
        score,
        title,
        body_html,
        tags,
        creation_date,
    };
    post.validate()?;
    Ok(Some((post, accepted_answer)))
}

fn parse_u64(
    attrs: &HashMap<String, String>,
    key: &'static str,
) -> Result<Option<u64>, (&'static str, String)> {
    attrs
        .get(key)
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| (key, format!("not a positive integer: {s}")))
        })
        .transpose()
}

// Dumps write naive timestamps that are UTC by convention.
fn parse_dump_date(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(d) = DateTime::parse_from_rfc3339(s) {
        return Some(d.with_timezone(&Utc));
    }
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
        .ok()
        .map(|n| n.and_utc())
}

/// Splits both tag encodings found in dumps: `<a><b>` (older) and `|a|b|` (newer).
pub(crate) fn split_tags(raw: &str) -> Vec<String> {
    raw.split(['<', '>', '|'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_encodings() {
        assert_eq!(split_tags("<android><java>"), vec!["android", "java"]);
        assert_eq!(split_tags("|android|Gradle|"), vec!["android", "gradle"]);
        assert!(split_tags("").is_empty());
    }

    #[test]
    fn dump_dates() {
        let d = parse_dump_date("2008-07-31T21:42:52.667").unwrap();
        assert_eq!(d.to_rfc3339(), "2008-07-31T21:42:52.667+00:00");
        assert!(parse_dump_date("yesterday").is_none());
    }
}
