#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::se_client::{answer_from_item, decode_page, question_from_item};

fuzz_target!(|data: &[u8]| {
    if let Ok(page) = decode_page(data, 1) {
        for item in &page.items {
            let _ = question_from_item(item);
            let _ = answer_from_item(item);
        }
    }
});
