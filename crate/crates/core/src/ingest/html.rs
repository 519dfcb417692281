//! Code-block removal and tag stripping for Stack Exchange post bodies.
//!
//! Everything inside `<code>` and `<pre>` elements is deleted. Other tags are
//! dropped while their text is kept. Broken markup never fails a corpus: an
//! unclosed code element swallows the rest of the body and leaves a warning.

use serde::{Deserialize, Serialize};

use super::Post;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrippedText {
    pub post_id: u64,
    pub text: String,
    pub removed_code_blocks: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn strip_code(post: &Post) -> StrippedText {
    let stripped = strip_html(&post.body_html);
    StrippedText {
        post_id: post.id,
        text: stripped.text,
        removed_code_blocks: stripped.removed_code_blocks,
        warnings: stripped
            .warnings
            .into_iter()
            .map(|w| format!("post {}: {w}", post.id))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stripped {
    pub text: String,
    pub removed_code_blocks: usize,
    pub warnings: Vec<String>,
}

// Tags whose boundaries do not separate words.
const INLINE_TAGS: &[&str] = &[
    "a", "abbr", "b", "del", "em", "i", "ins", "kbd", "s", "small", "span", "strike", "strong",
    "sub", "sup", "u",
];

#[derive(Debug)]
struct Tag {
    name: String,
    closing: bool,
    self_closing: bool,
    end: usize,
}

fn is_code_tag(name: &str) -> bool {
    name == "code" || name == "pre"
}

/// Strips an HTML fragment down to its natural-language text.
pub fn strip_html(html: &str) -> Stripped {
    let bytes = html.as_bytes();
    let mut raw = String::with_capacity(html.len());
    let mut removed = 0usize;
    let mut warnings = Vec::new();
    let mut open_code: Vec<String> = Vec::new();
    let mut code_open_at = 0usize;
    let mut seg_start = 0usize;
    let mut i = 0usize;

    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        if bytes[i..].starts_with(b"<!--") {
            let end = find(bytes, i + 4, b"-->").map_or(bytes.len(), |p| p + 3);
            if open_code.is_empty() {
                raw.push_str(&html[seg_start..i]);
                seg_start = end;
            }
            i = end;
            continue;
        }
        let Some(tag) = parse_tag(bytes, i) else {
            i += 1;
            continue;
        };
        if !open_code.is_empty() {
            if is_code_tag(&tag.name) {
                if tag.closing {
                    if let Some(pos) = open_code.iter().rposition(|n| *n == tag.name) {
                        open_code.truncate(pos);
                    }
                } else if !tag.self_closing {
                    open_code.push(tag.name);
                }
            }
            i = tag.end;
            if open_code.is_empty() {
                seg_start = i;
            }
            continue;
        }

        raw.push_str(&html[seg_start..i]);
        if is_code_tag(&tag.name) && !tag.closing && !tag.self_closing {
            open_code.push(tag.name);
            code_open_at = i;
            removed += 1;
            raw.push(' ');
        } else if !INLINE_TAGS.contains(&tag.name.as_str()) {
            raw.push(' ');
        }
        i = tag.end;
        seg_start = i;
    }

    if open_code.is_empty() {
        raw.push_str(&html[seg_start..]);
    } else {
        warnings.push(format!(
            "unclosed <{}> at byte {code_open_at}; removed through end of body",
            open_code[0]
        ));
    }

    Stripped {
        text: clean_text(&raw),
        removed_code_blocks: removed,
        warnings,
    }
}

fn clean_text(raw: &str) -> String {
    let decoded = decode_entities_fully(raw);
    let mut out = String::with_capacity(decoded.len());
    for word in decoded
        .split(|c: char| c.is_whitespace() || c == '<' || c == '>')
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn find(haystack: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    if from >= haystack.len() {
        return None;
    }
    haystack[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

fn parse_tag(bytes: &[u8], start: usize) -> Option<Tag> {
    let mut j = start + 1;
    let closing = bytes.get(j) == Some(&b'/');
    if closing {
        j += 1;
    }
    if !bytes.get(j)?.is_ascii_alphabetic() {
        return None;
    }
    let name_start = j;
    while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
        j += 1;
    }
    let name = std::str::from_utf8(&bytes[name_start..j])
        .ok()?
        .to_ascii_lowercase();
    match bytes.get(j) {
        Some(b) if b.is_ascii_whitespace() || *b == b'>' || *b == b'/' => {}
        _ => return None,
    }
    let mut quote: Option<u8> = None;
    while j < bytes.len() {
        let b = bytes[j];
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => {
                let self_closing = j > start + 1 && bytes[j - 1] == b'/';
                return Some(Tag {
                    name,
                    closing,
                    self_closing,
                    end: j + 1,
                });
            }
            None => {}
        }
        j += 1;
    }
    None
}

/// Decodes the HTML entities that appear in Stack Exchange bodies and titles.
/// Unknown entities are left untouched.
pub fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        match tail[1..].find(';').filter(|&p| p <= 10) {
            Some(semi) => {
                let entity = &tail[1..semi + 1];
                match decode_one(entity) {
                    Some(c) => {
                        out.push(c);
                        rest = &tail[semi + 2..];
                    }
                    None => {
                        out.push('&');
                        rest = &tail[1..];
                    }
                }
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

// Double-escaped input (`&amp;lt;`) decodes to a fixed point so that
// stripping the output again changes nothing.
fn decode_entities_fully(s: &str) -> String {
    let mut cur = decode_entities(s);
    for _ in 0..4 {
        if !cur.contains('&') {
            break;
        }
        let next = decode_entities(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn decode_one(entity: &str) -> Option<char> {
    match entity {
        "lt" => Some('<'),
        "gt" => Some('>'),
        "amp" => Some('&'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some('\u{a0}'),
        _ => {
            let num = entity.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse::<u32>().ok()?,
            };
            char::from_u32(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(s: &str) -> (String, usize) {
        let r = strip_html(s);
        (r.text, r.removed_code_blocks)
    }

    #[test]
    fn inline_code_removed() {
        assert_eq!(
            strip("<p>use <code>foo()</code> now</p>"),
            ("use now".into(), 1)
        );
    }

    #[test]
    fn no_code_is_identity_on_text() {
        assert_eq!(strip("<p>no code here</p>"), ("no code here".into(), 0));
    }

    #[test]
    fn pre_code_counts_once() {
        assert_eq!(
            strip("<pre><code>a\nb</code></pre>done"),
            ("done".into(), 1)
        );
    }

    #[test]
    fn entities_decoded() {
        assert_eq!(
            strip("<p>Tom &amp; Jerry &quot;x&quot; it&#39;s</p>").0,
            "Tom & Jerry \"x\" it's"
        );
        assert_eq!(decode_entities("&#x41;&#66;&bogus;"), "AB&bogus;");
    }

    #[test]
    fn angle_brackets_never_survive() {
        let (text, _) = strip("<p>List&lt;String&gt; and a < b</p>");
        assert!(!text.contains('<') && !text.contains('>'));
        assert_eq!(text, "List String and a b");
    }

    #[test]
    fn unclosed_code_truncates_with_warning() {
        let r = strip_html("<p>before <code>secret tail");
        assert_eq!(r.text, "before");
        assert_eq!(r.removed_code_blocks, 1);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn mismatched_close_pops_stack() {
        assert_eq!(strip("<pre><code>x</pre> after"), ("after".into(), 1));
    }

    #[test]
    fn inline_tags_keep_words_joined() {
        assert_eq!(
            strip("<p>foo<b>bar</b> <a href=\"x>y\">link</a></p>").0,
            "foobar link"
        );
        assert_eq!(strip("one<br>two<br/>three").0, "one two three");
    }

    #[test]
    fn comments_dropped() {
        assert_eq!(strip("a <!-- <code>hidden --> b").0, "a b");
    }

    #[test]
    fn uppercase_tags() {
        assert_eq!(strip("<P>x <CODE>y</CODE> z</P>"), ("x z".into(), 1));
    }
}
