//! Regenerates the bundled sample corpus.
//!
//! cargo run --example make_sample -- data/sample_corpus.jsonl

use std::fs::File;

use so_insight::ingest::write_jsonl;
use so_insight::synth::sample_corpus;

const POSTS: usize = 400;

fn main() -> std::io::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/sample_corpus.jsonl".into());
    let mut posts = sample_corpus(170, 0..4, 20_230_417);
    posts.truncate(POSTS);
    assert_eq!(posts.len(), POSTS, "generator produced too few posts");
    write_jsonl(File::create(&path)?, &posts)?;
    eprintln!("wrote {POSTS} posts to {path}");
    Ok(())
}
