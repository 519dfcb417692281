use chrono::DateTime;
use serde_json::Value;

use crate::ingest::{Post, PostType};
use crate::se_client::FetchError;

/// The common response wrapper of the Stack Exchange API.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiPage {
    pub items: Vec<Value>,
    pub has_more: bool,
    pub quota_remaining: Option<u64>,
    pub backoff: Option<u64>,
    pub error_id: Option<u64>,
    pub error_message: Option<String>,
}

pub fn decode_page(body: &[u8], page: usize) -> Result<ApiPage, FetchError> {
    let malformed = |message: String| FetchError::Malformed { page, message };
    let v: Value = serde_json::from_slice(body).map_err(|e| malformed(e.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| malformed("response is not a JSON object".into()))?;
    let uint = |name: &str| -> Result<Option<u64>, FetchError> {
        match obj.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(x) => x
                .as_u64()
                .map(Some)
                .ok_or_else(|| malformed(format!("`{name}` is not a non-negative integer"))),
        }
    };
    let error_id = uint("error_id")?;
    let error_message = obj
        .get("error_message")
        .and_then(Value::as_str)
        .map(String::from);
    let items = match obj.get("items") {
        Some(Value::Array(a)) => a.clone(),
        None if error_id.is_some() => Vec::new(),
        Some(_) => return Err(malformed("`items` is not an array".into())),
        None => return Err(malformed("missing `items`".into())),
    };
    let has_more = match obj.get("has_more") {
        Some(Value::Bool(b)) => *b,
        None => false,
        Some(_) => return Err(malformed("`has_more` is not a boolean".into())),
    };
    Ok(ApiPage {
        items,
        has_more,
        quota_remaining: uint("quota_remaining")?,
        backoff: uint("backoff")?,
        error_id,
        error_message,
    })
}

fn field<'a>(item: &'a Value, name: &str) -> Result<&'a Value, String> {
    item.get(name)
        .filter(|v| !v.is_null())
        .ok_or_else(|| format!("item missing `{name}`"))
}

fn uint(item: &Value, name: &str) -> Result<u64, String> {
    field(item, name)?
        .as_u64()
        .ok_or_else(|| format!("`{name}` is not a non-negative integer"))
}

fn int(item: &Value, name: &str) -> Result<i64, String> {
    field(item, name)?
        .as_i64()
        .ok_or_else(|| format!("`{name}` is not an integer"))
}

fn text(item: &Value, name: &str) -> Result<String, String> {
    field(item, name)?
        .as_str()
        .map(String::from)
        .ok_or_else(|| format!("`{name}` is not a string"))
}

fn created(item: &Value) -> Result<chrono::DateTime<chrono::Utc>, String> {
    let secs = int(item, "creation_date")?;
    DateTime::from_timestamp(secs, 0).ok_or_else(|| format!("creation_date {secs} out of range"))
}

fn checked(post: Post) -> Result<Post, String> {
    post.validate().map_err(|(f, m)| format!("{f}: {m}"))?;
    Ok(post)
}

/// Maps an API question item onto a post.
pub fn question_from_item(item: &Value) -> Result<Post, String> {
    let tags = match item.get("tags") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(a)) => a
            .iter()
            .map(|t| {
                t.as_str()
                    .map(str::to_lowercase)
                    .ok_or_else(|| "`tags` holds a non-string".to_string())
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err("`tags` is not an array".into()),
    };
    checked(Post {
        id: uint(item, "question_id")?,
        post_type: PostType::Question,
        parent_id: None,
        accepted: false,
        score: int(item, "score")?,
        title: Some(text(item, "title")?),
        body_html: text(item, "body")?,
        tags,
        creation_date: created(item)?,
    })
}

/// Maps an API answer item onto a post.
pub fn answer_from_item(item: &Value) -> Result<Post, String> {
    checked(Post {
        id: uint(item, "answer_id")?,
        post_type: PostType::Answer,
        parent_id: Some(uint(item, "question_id")?),
        accepted: item
            .get("is_accepted")
            .and_then(Value::as_bool)
            .unwrap_or(false),
        score: int(item, "score")?,
        title: None,
        body_html: text(item, "body")?,
        tags: Vec::new(),
        creation_date: created(item)?,
    })
}
