//! Binary formats: paired embeddings (`EPR1`) and network checkpoints (`NNCK`).

pub mod epr;
pub mod nnck;

/// Why a binary file was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("truncated payload: header implies {expected} bytes, file holds {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("duplicate event id {0}")]
    DuplicateId(String),
    #[error("id index lists {ids} ids for {records} records")]
    IndexLength { ids: usize, records: usize },
    #[error("non-finite value in row {0}")]
    NonFinite(usize),
    #[error("payload digest {found} does not match manifest {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error("invalid header: {0}")]
    Header(String),
}

pub(crate) struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }

    pub(crate) fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub(crate) fn check_magic(found: &[u8], expected: &[u8; 4]) -> Result<(), FormatError> {
    let mut m = [0u8; 4];
    let n = found.len().min(4);
    m[..n].copy_from_slice(&found[..n]);
    if n < 4 || &m != expected {
        return Err(FormatError::BadMagic {
            expected: *expected,
            found: m,
        });
    }
    Ok(())
}
