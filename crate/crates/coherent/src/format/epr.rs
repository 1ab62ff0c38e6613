//! `EPR1` paired-embedding files.
//!
//! Little-endian: magic `EPR1`, `u32` version (1), `u32` record count,
//! `u32` dim, then per record `dim` f32 for `e` followed by `dim` f32 for `¬e`.
//! Event ids live in a sidecar text index, one per line in row order.

use std::collections::HashSet;

use coherent_core::embeddings::{EmbeddingDataset, EmbeddingPair};

use super::{check_magic, Cursor, FormatError};

pub const MAGIC: [u8; 4] = *b"EPR1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

pub fn payload_len(records: usize, dim: usize) -> usize {
    HEADER_LEN + records * 2 * dim * 4
}

pub fn encode(dataset: &EmbeddingDataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload_len(dataset.len(), dataset.dim()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dataset.len() as u32).to_le_bytes());
    out.extend_from_slice(&(dataset.dim() as u32).to_le_bytes());
    for r in dataset.records() {
        for v in r.e.iter().chain(&r.e_neg) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn encode_index(dataset: &EmbeddingDataset) -> String {
    dataset.records().iter().map(|r| format!("{}\n", r.event_id)).collect()
}

pub fn decode_index(text: &str) -> Vec<String> {
    text.lines().map(str::to_owned).collect()
}

/// Parses a payload and its ids. `expected_dim`, when given, must match the header.
pub fn decode(bytes: &[u8], ids: Vec<String>, expected_dim: Option<usize>) -> Result<EmbeddingDataset, FormatError> {
    let mut c = Cursor::new(bytes);
    check_magic(c.take(4).unwrap_or(bytes), &MAGIC)?;
    let short = || FormatError::TruncatedPayload {
        expected: HEADER_LEN,
        found: bytes.len(),
    };
    let version = c.u32().ok_or_else(short)?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let count = c.u32().ok_or_else(short)? as usize;
    let dim = c.u32().ok_or_else(short)? as usize;
    if dim == 0 {
        return Err(FormatError::Header("dimension is zero".into()));
    }
    if let Some(expected) = expected_dim {
        if expected != dim {
            return Err(FormatError::DimensionMismatch { expected, found: dim });
        }
    }
    let expected = payload_len(count, dim);
    if bytes.len() != expected {
        return Err(FormatError::TruncatedPayload {
            expected,
            found: bytes.len(),
        });
    }
    if ids.len() != count {
        return Err(FormatError::IndexLength {
            ids: ids.len(),
            records: count,
        });
    }
    let mut seen = HashSet::with_capacity(count);
    let mut records = Vec::with_capacity(count);
    for (row, id) in ids.into_iter().enumerate() {
        if !seen.insert(id.clone()) {
            return Err(FormatError::DuplicateId(id));
        }
        let mut read = || -> Result<Vec<f32>, FormatError> {
            let raw = c.take(4 * dim).expect("length checked above");
            let v: Vec<f32> = raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
            if v.iter().all(|x| x.is_finite()) {
                Ok(v)
            } else {
                Err(FormatError::NonFinite(row))
            }
        };
        let e = read()?;
        let e_neg = read()?;
        records.push(EmbeddingPair { event_id: id, e, e_neg });
    }
    debug_assert_eq!(c.remaining(), 0);
    EmbeddingDataset::new(dim, records).map_err(|e| FormatError::Header(e.to_string()))
}
