//! Binary container shared by instance and solution files: a fixed-size header
//! made of four magic bytes followed by space-padded JSON, then raw
//! little-endian f64 values.

use crate::error::{Error, Result};
use serde::{de::DeserializeOwned, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub(crate) fn write_container<H: Serialize>(
    path: &Path,
    magic: &[u8; 4],
    header_len: usize,
    header: &H,
    payload: &[&[f64]],
) -> Result<()> {
    let json = serde_json::to_vec(header).map_err(|e| Error::Internal(e.to_string()))?;
    if json.len() + 4 > header_len {
        return Err(Error::Internal(format!(
            "header of {} bytes does not fit in {header_len}",
            json.len() + 4
        )));
    }
    let mut head = Vec::with_capacity(header_len);
    head.extend_from_slice(magic);
    head.extend_from_slice(&json);
    head.resize(header_len, b' ');
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(&head)?;
    for block in payload {
        for v in block.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub(crate) struct Container<H> {
    pub header: H,
    pub payload: Vec<f64>,
}

/// Reads a container. `expected_len` maps the parsed header to the payload length
/// in f64 values.
pub(crate) fn read_container<H: DeserializeOwned>(
    path: &Path,
    magic: &[u8; 4],
    header_len: usize,
    version_of: impl Fn(&H) -> u32,
    version: u32,
    expected_len: impl Fn(&H) -> usize,
) -> Result<Container<H>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(Error::BadMagic { path: path.to_path_buf() });
    }
    if bytes.len() < header_len {
        return Err(Error::CorruptHeader {
            path: path.to_path_buf(),
            reason: format!("file shorter than the {header_len}-byte header"),
        });
    }
    let text = std::str::from_utf8(&bytes[4..header_len]).map_err(|e| Error::CorruptHeader {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let header: H = serde_json::from_str(text.trim_end()).map_err(|e| Error::CorruptHeader {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let found = version_of(&header);
    if found != version {
        return Err(Error::VersionMismatch { path: path.to_path_buf(), found, expected: version });
    }
    let count = expected_len(&header);
    let body = &bytes[header_len..];
    if body.len() < count * 8 {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: count * 8,
            found: body.len(),
        });
    }
    let payload = body[..count * 8]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Container { header, payload })
}
