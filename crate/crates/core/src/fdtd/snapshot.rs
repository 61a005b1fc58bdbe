//! Binary field-snapshot format for debugging dumps.
//!
//! Layout (little-endian):
//!   magic   4 bytes  "NCFS"
//!   version u32      1
//!   nx, ny, nz u32
//!   dx      f32      nm
//!   comp    u8       0..=5 for Ex, Ey, Ez, Hx, Hy, Hz
//!   pad     3 bytes  zero
//!   data    nx*ny*nz f32, x fastest then y then z

use super::{FdtdError, Field};
use std::io::{Read, Write};
use std::path::Path;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"NCFS";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dims: [usize; 3],
    pub dx_nm: f32,
    pub component: u8,
    pub data: Vec<f32>,
}

pub fn write_snapshot<T: Field>(
    path: &Path,
    dims: [usize; 3],
    dx_nm: f64,
    component: u8,
    field: &[T],
) -> Result<(), FdtdError> {
    let mut buf = Vec::with_capacity(20 + field.len() * 4);
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    for d in dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    buf.extend_from_slice(&(dx_nm as f32).to_le_bytes());
    buf.push(component);
    buf.extend_from_slice(&[0u8; 3]);
    for v in field {
        buf.extend_from_slice(&(v.to_f64() as f32).to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| FdtdError::SnapshotIo(e.to_string()))?;
    f.write_all(&buf).map_err(|e| FdtdError::SnapshotIo(e.to_string()))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, FdtdError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| FdtdError::SnapshotIo(e.to_string()))?;
    parse_snapshot(&bytes)
}

/// Decode a snapshot from raw bytes; all lengths and the header are
/// validated before any allocation sized from the input.
pub fn parse_snapshot(bytes: &[u8]) -> Result<Snapshot, FdtdError> {
    let err = |m: &str| FdtdError::SnapshotIo(m.to_string());
    if bytes.len() < 28 {
        return Err(err("snapshot shorter than header"));
    }
    if &bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(err("bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    if u32_at(4) != SNAPSHOT_VERSION {
        return Err(err("unsupported version"));
    }
    let dims = [u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize];
    let n = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| err("dimension overflow"))?;
    let dx_nm = f32::from_le_bytes(bytes[20..24].try_into().unwrap());
    let component = bytes[24];
    if component > 5 {
        return Err(err("component id out of range"));
    }
    let payload = &bytes[28..];
    if payload.len() != n.checked_mul(4).ok_or_else(|| err("payload overflow"))? {
        return Err(err("payload length does not match dims"));
    }
    if !(dx_nm.is_finite() && dx_nm > 0.0) {
        return Err(err("non-positive dx"));
    }
    let mut data = Vec::with_capacity(n);
    for c in payload.chunks_exact(4) {
        data.push(f32::from_le_bytes(c.try_into().unwrap()));
    }
    Ok(Snapshot { dims, dx_nm, component, data })
}
