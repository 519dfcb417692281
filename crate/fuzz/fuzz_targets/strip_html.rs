#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::ingest::strip_html;

fuzz_target!(|html: &str| {
    let out = strip_html(html);
    assert!(!out.text.contains('<') && !out.text.contains('>'));
    assert!(!out.text.starts_with(' ') && !out.text.ends_with(' '));
    assert!(!out.text.contains("  "));
});
