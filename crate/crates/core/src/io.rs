//! BTF grid files and binary PGM import.
//!
//! BTF layout (little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 0..4  | magic `BTF1` |
//! | 4     | dtype: 0 = u8 binary, 1 = f32 |
//! | 5     | ndim: 2 or 3 |
//! | 6..   | `ndim` x u64 extents, `(rows, cols)` or `(z, y, x)` |
//! | ..    | row-major payload |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{AnyGrid, BinaryGrid, Grid, RealGrid, Shape};

pub const BTF_MAGIC: &[u8; 4] = b"BTF1";
pub const DTYPE_BINARY: u8 = 0;
pub const DTYPE_REAL: u8 = 1;

pub fn encode_btf(grid: &AnyGrid) -> Vec<u8> {
    let shape = grid.shape();
    let (dtype, width) = match grid {
        AnyGrid::Binary(_) => (DTYPE_BINARY, 1),
        AnyGrid::Real(_) => (DTYPE_REAL, 4),
    };
    let mut out = Vec::with_capacity(6 + 8 * shape.ndim() + width * shape.len());
    out.extend_from_slice(BTF_MAGIC);
    out.push(dtype);
    out.push(shape.ndim() as u8);
    for &e in shape.extents() {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
    match grid {
        AnyGrid::Binary(g) => out.extend_from_slice(g.data()),
        AnyGrid::Real(g) => {
            for v in g.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

/// Decodes BTF bytes; `path` only labels errors.
pub fn decode_btf(bytes: &[u8], path: &Path) -> Result<AnyGrid> {
    let truncated = |needed: usize| Error::Truncated {
        path: path.to_path_buf(),
        needed,
        found: bytes.len(),
    };
    if bytes.len() < 4 {
        return Err(truncated(6));
    }
    if &bytes[..4] != BTF_MAGIC {
        let mut found = [0; 4];
        found.copy_from_slice(&bytes[..4]);
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found,
        });
    }
    if bytes.len() < 6 {
        return Err(truncated(6));
    }
    let dtype = bytes[4];
    let width = match dtype {
        DTYPE_BINARY => 1,
        DTYPE_REAL => 4,
        code => {
            return Err(Error::UnknownDtype {
                path: path.to_path_buf(),
                code,
            })
        }
    };
    let ndim = bytes[5];
    if !(2..=3).contains(&ndim) {
        return Err(Error::BadNdim {
            path: path.to_path_buf(),
            ndim,
        });
    }
    let header = 6 + 8 * ndim as usize;
    if bytes.len() < header {
        return Err(truncated(header));
    }
    let mut extents = Vec::with_capacity(ndim as usize);
    for chunk in bytes[6..header].chunks_exact(8) {
        let e = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        extents.push(usize::try_from(e).map_err(|_| Error::InvalidShape(vec![usize::MAX]))?);
    }
    let shape = Shape::new(&extents)?;
    let needed = shape
        .len()
        .checked_mul(width)
        .and_then(|n| n.checked_add(header))
        .ok_or_else(|| Error::InvalidShape(extents.clone()))?;
    if bytes.len() < needed {
        return Err(truncated(needed));
    }
    if bytes.len() > needed {
        return Err(Error::TrailingBytes {
            path: path.to_path_buf(),
            extra: bytes.len() - needed,
        });
    }
    let payload = &bytes[header..];
    Ok(match dtype {
        DTYPE_BINARY => AnyGrid::Binary(BinaryGrid::binary(shape, payload.to_vec())?),
        _ => {
            let data = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
                .collect();
            AnyGrid::Real(RealGrid::from_vec(shape, data)?)
        }
    })
}

pub fn read_btf(path: impl AsRef<Path>) -> Result<AnyGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_btf(&bytes, path)
}

pub fn write_btf(grid: &AnyGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_btf(grid)).map_err(|e| Error::io(path, e))
}

/// Reads a binary `P5` PGM as a 2D probability grid (`value / maxval`).
pub fn read_pgm(path: impl AsRef<Path>) -> Result<RealGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<RealGrid> {
    let malformed = |message: &str| Error::MalformedPgm {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments before each header field
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("header field out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(malformed("missing whitespace after maxval"));
    }
    pos += 1;
    let [cols, rows, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::PgmMaxval {
            path: path.to_path_buf(),
            maxval,
        });
    }
    let shape = Shape::d2(rows as usize, cols as usize).map_err(|_| malformed("width and height must be positive"))?;
    let width = if maxval > 255 { 2 } else { 1 };
    let payload = &bytes[pos..];
    if payload.len() < shape.len() * width {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            needed: pos + shape.len() * width,
            found: bytes.len(),
        });
    }
    let scale = f64::from(maxval);
    let data: Vec<f32> = if width == 1 {
        payload[..shape.len()]
            .iter()
            .map(|&v| (f64::from(v) / scale).min(1.0) as f32)
            .collect()
    } else {
        payload[..2 * shape.len()]
            .chunks_exact(2)
            .map(|c| (f64::from(u16::from_be_bytes([c[0], c[1]])) / scale).min(1.0) as f32)
            .collect()
    };
    Grid::from_vec(shape, data)
}
