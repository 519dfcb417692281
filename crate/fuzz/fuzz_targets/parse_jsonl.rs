#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::ingest::{parse_jsonl, write_jsonl};

fuzz_target!(|data: &[u8]| {
    if let Ok(posts) = parse_jsonl(data) {
        let mut out = Vec::new();
        write_jsonl(&mut out, &posts).unwrap();
        assert_eq!(parse_jsonl(out.as_slice()).unwrap(), posts);
    }
});
