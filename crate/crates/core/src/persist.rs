//! Binary blobs of complex numbers behind a JSON header.
//!
//! Layout: header length as little-endian `u64`, the header JSON, then `re, im`
//! pairs as little-endian `f64`.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Invalid(e.to_string())
}

pub fn write_blob(path: &Path, header: &impl Serialize, data: impl Iterator<Item = Complex64>) -> Result<()> {
    let head = serde_json::to_vec(header).map_err(io_err)?;
    let mut out = Vec::with_capacity(8 + head.len());
    out.extend_from_slice(&(head.len() as u64).to_le_bytes());
    out.extend_from_slice(&head);
    for v in data {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    std::fs::write(path, out).map_err(io_err)
}

pub fn read_blob<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<Complex64>)> {
    let buf = std::fs::read(path).map_err(io_err)?;
    let bad = || Error::Invalid(format!("corrupt blob {}", path.display()));
    let hl = u64::from_le_bytes(buf.get(..8).ok_or_else(bad)?.try_into().unwrap()) as usize;
    let head = serde_json::from_slice(buf.get(8..8 + hl).ok_or_else(bad)?).map_err(io_err)?;
    let body = &buf[8 + hl..];
    if body.len() % 16 != 0 {
        return Err(bad());
    }
    let data = body
        .chunks_exact(16)
        .map(|c| Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
        .collect();
    Ok((head, data))
}
