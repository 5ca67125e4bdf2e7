//! Binary ciphertext container: `MPGC`, then little-endian `u32` width,
//! height and padding, then `f64` real/imaginary pairs in storage order.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::cipher::Ciphertext;
use crate::error::{Error, Result};
use crate::linalg::CVec;

pub const MAGIC: &[u8; 4] = b"MPGC";
const HEADER_LEN: usize = 16;

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedCiphertext(msg.into())
}

pub fn write_ciphertext<W: Write>(ct: &Ciphertext, mut out: W) -> Result<()> {
    let dim = |v: usize, what: &str| u32::try_from(v).map_err(|_| malformed(format!("{what} exceeds u32")));
    out.write_all(MAGIC)?;
    out.write_all(&dim(ct.width, "width")?.to_le_bytes())?;
    out.write_all(&dim(ct.height, "height")?.to_le_bytes())?;
    out.write_all(&dim(ct.padding, "padding")?.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * ct.stream_len());
    for c in ct.stream() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Reads a ciphertext; the group size is not stored and comes from the key.
pub fn read_ciphertext<R: Read>(mut input: R, group_size: usize) -> Result<Ciphertext> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(malformed("missing MPGC header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (width, height, padding) = (word(4), word(8), word(12));
    let count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(3))
        .and_then(|p| p.checked_add(padding))
        .ok_or_else(|| malformed("header dimensions overflow"))?;
    if width == 0 || height == 0 {
        return Err(malformed("empty image"));
    }
    if group_size == 0 || count % group_size != 0 {
        return Err(malformed(format!("{count} values do not split into groups of {group_size}")));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * count {
        return Err(malformed(format!("expected {} payload bytes, found {}", 16 * count, body.len())));
    }
    let values: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let groups = values.chunks(group_size).map(|g| CVec::from_column_slice(g)).collect();
    Ok(Ciphertext { width, height, padding, group_size, groups, key_fingerprint: None })
}
