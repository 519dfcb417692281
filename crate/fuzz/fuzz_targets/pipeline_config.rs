#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::pipeline::PipelineConfig;
use so_insight::prep::StopWords;

fuzz_target!(|text: &str| {
    if let Ok(config) = PipelineConfig::from_json(text) {
        let _ = config.validate();
        let _ = config.corpus_format();
    }
    let stop = StopWords::parse(text);
    assert!(stop.len() <= text.lines().count());
});
