#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::ingest::parse_posts_xml;

fuzz_target!(|data: &[u8]| {
    if let Ok(posts) = parse_posts_xml(data) {
        for p in &posts {
            assert_eq!(p.is_answer(), p.parent_id.is_some());
        }
    }
});
