#![no_main]

use libfuzzer_sys::fuzz_target;
use so_insight::vector_space::{parse_embeddings, write_embd};

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = parse_embeddings(data) {
        let rows: Vec<(u64, &[f32])> = table
            .rows
            .iter()
            .map(|(id, v)| (*id, v.as_slice()))
            .collect();
        let mut out = Vec::new();
        write_embd(&mut out, table.dim, &rows).unwrap();
        assert_eq!(parse_embeddings(&out).unwrap(), table);
    }
});
