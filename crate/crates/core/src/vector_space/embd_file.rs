//! External embedding files.
//!
//! Binary layout (little-endian): magic `EMBD`, `u32` count, `u32` dim, then
//! `count` records of `u64` post id followed by `dim` `f32` values. A JSONL
//! variant with one `{"id": .., "vec": [..]}` object per line is accepted for
//! hand-made fixtures.

use std::io::{Read, Write};

use serde::Deserialize;

use super::EmbedError;

pub const MAGIC: &[u8; 4] = b"EMBD";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub rows: Vec<(u64, Vec<f32>)>,
}

pub fn write_embd<W: Write>(mut out: W, dim: usize, rows: &[(u64, &[f32])]) -> std::io::Result<()> {
    let count = u32::try_from(rows.len()).map_err(|_| std::io::Error::other("too many vectors"))?;
    let dim32 = u32::try_from(dim).map_err(|_| std::io::Error::other("dimension too large"))?;
    out.write_all(MAGIC)?;
    out.write_all(&count.to_le_bytes())?;
    out.write_all(&dim32.to_le_bytes())?;
    for (id, vec) in rows {
        if vec.len() != dim {
            return Err(std::io::Error::other(format!(
                "vector {id} has dimension {}",
                vec.len()
            )));
        }
        out.write_all(&id.to_le_bytes())?;
        for v in *vec {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Decodes either file variant, sniffing the magic bytes.
pub fn parse_embeddings(bytes: &[u8]) -> Result<EmbeddingTable, EmbedError> {
    if bytes.starts_with(MAGIC) {
        parse_binary(bytes)
    } else {
        parse_jsonl(bytes)
    }
}

fn bad(msg: impl Into<String>) -> EmbedError {
    EmbedError::BadFile(msg.into())
}

fn parse_binary(bytes: &[u8]) -> Result<EmbeddingTable, EmbedError> {
    let mut cur = &bytes[MAGIC.len()..];
    let mut word = [0u8; 4];
    cur.read_exact(&mut word)
        .map_err(|_| bad("truncated header"))?;
    let count = u32::from_le_bytes(word) as usize;
    cur.read_exact(&mut word)
        .map_err(|_| bad("truncated header"))?;
    let dim = u32::from_le_bytes(word) as usize;
    if dim == 0 {
        return Err(bad("dimension is zero"));
    }
    let record = 8usize
        .checked_add(
            dim.checked_mul(4)
                .ok_or_else(|| bad("dimension overflows"))?,
        )
        .ok_or_else(|| bad("dimension overflows"))?;
    let expected = count
        .checked_mul(record)
        .ok_or_else(|| bad("count overflows"))?;
    if cur.len() != expected {
        return Err(bad(format!(
            "expected {expected} bytes of records for {count}x{dim}, found {}",
            cur.len()
        )));
    }
    let mut rows = Vec::with_capacity(count);
    for chunk in cur.chunks_exact(record) {
        let id = u64::from_le_bytes(chunk[..8].try_into().expect("8-byte id"));
        let vec: Vec<f32> = chunk[8..]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4-byte float")))
            .collect();
        if vec.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite(id));
        }
        rows.push((id, vec));
    }
    Ok(EmbeddingTable { dim, rows })
}

#[derive(Deserialize)]
struct JsonRow {
    id: u64,
    vec: Vec<f32>,
}

fn parse_jsonl(bytes: &[u8]) -> Result<EmbeddingTable, EmbedError> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| bad("neither EMBD binary nor UTF-8 JSONL"))?;
    let mut rows = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        // serde_json rejects NaN literals, so non-finite values surface here.
        let row: JsonRow =
            serde_json::from_str(line).map_err(|e| bad(format!("line {}: {e}", i + 1)))?;
        match dim {
            None if row.vec.is_empty() => return Err(bad(format!("line {}: empty vector", i + 1))),
            None => dim = Some(row.vec.len()),
            Some(d) if d != row.vec.len() => {
                return Err(EmbedError::DimensionMismatch {
                    id: row.id,
                    expected: d,
                    found: row.vec.len(),
                })
            }
            Some(_) => {}
        }
        if row.vec.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite(row.id));
        }
        rows.push((row.id, row.vec));
    }
    let dim = dim.ok_or_else(|| bad("no vectors in file"))?;
    Ok(EmbeddingTable { dim, rows })
}
