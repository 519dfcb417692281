#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::prep::{normalize, split_sentences, StopWords};

fuzz_target!(|raw: &str| {
    let doc = normalize(1, raw, &StopWords::english());
    assert!(doc
        .text
        .bytes()
        .all(|b| b.is_ascii_lowercase() || b" .!?".contains(&b)));
    assert!(doc
        .tokens
        .iter()
        .all(|t| !t.is_empty() && t.bytes().all(|b| b.is_ascii_lowercase())));
    assert_eq!(doc.empty, doc.tokens.is_empty());
    for s in doc.sentences() {
        assert!(!s.is_empty() && doc.text.contains(s));
    }
    let _ = split_sentences(raw);
});
