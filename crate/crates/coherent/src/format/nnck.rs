//! `NNCK` dense-network checkpoints.
//!
//! Little-endian: magic `NNCK`, `u32` version (1), `u32` layer count, then per
//! layer `u32` inputs, `u32` outputs, `u32` activation code, then `u64`
//! parameter count and the parameters as f64 in the network's flat order.

use coherent_core::nn::{Activation, DenseNet, LayerShape};

use super::{check_magic, Cursor, FormatError};

pub const MAGIC: [u8; 4] = *b"NNCK";
pub const VERSION: u32 = 1;

pub fn encode(net: &DenseNet) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 12 * net.layers().len() + 8 * net.param_count());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    for l in net.layers() {
        out.extend_from_slice(&(l.inputs as u32).to_le_bytes());
        out.extend_from_slice(&(l.outputs as u32).to_le_bytes());
        out.extend_from_slice(&l.activation.code().to_le_bytes());
    }
    out.extend_from_slice(&(net.param_count() as u64).to_le_bytes());
    for p in net.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DenseNet, FormatError> {
    let mut c = Cursor::new(bytes);
    check_magic(c.take(4).unwrap_or(bytes), &MAGIC)?;
    let truncated = |expected| FormatError::TruncatedPayload {
        expected,
        found: bytes.len(),
    };
    let version = c.u32().ok_or_else(|| truncated(8))?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let n_layers = c.u32().ok_or_else(|| truncated(12))? as usize;
    let header = 12 + 12 * n_layers + 8;
    let mut layers = Vec::with_capacity(n_layers.min(1024));
    for _ in 0..n_layers {
        let (Some(i), Some(o), Some(a)) = (c.u32(), c.u32(), c.u32()) else {
            return Err(truncated(header));
        };
        let activation = Activation::from_code(a).ok_or_else(|| FormatError::Header(format!("unknown activation code {a}")))?;
        layers.push(LayerShape::new(i as usize, o as usize, activation));
    }
    let count = c.u64().ok_or_else(|| truncated(header))? as usize;
    let expected = header + 8 * count;
    if bytes.len() != expected {
        return Err(truncated(expected));
    }
    let params: Vec<f64> = c
        .take(8 * count)
        .expect("length checked above")
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    if let Some(row) = params.iter().position(|p| !p.is_finite()) {
        return Err(FormatError::NonFinite(row));
    }
    DenseNet::from_parts(layers, params).map_err(|e| match e {
        coherent_core::Error::DimensionMismatch { expected, found, .. } => {
            FormatError::DimensionMismatch { expected, found }
        }
        other => FormatError::Header(other.to_string()),
    })
}
