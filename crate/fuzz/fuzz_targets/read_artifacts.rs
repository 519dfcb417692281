#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::pipeline::{read_documents, write_documents};
use so_insight::topic_model::TopicReport;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_documents(data) {
        let mut out = Vec::new();
        write_documents(&mut out, &records).unwrap();
        assert_eq!(read_documents(&out).unwrap(), records);
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = TopicReport::from_csv(text);
    }
});
