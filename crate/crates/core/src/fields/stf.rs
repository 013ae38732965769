use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FieldError, Grid, SpaceTimeField};

pub const STF_MAGIC: &str = "STF1";

#[derive(Serialize, Deserialize)]
struct Header {
    magic: String,
    nx: usize,
    ny: usize,
    nz: usize,
    nt: usize,
    extents: [f64; 6],
    components: usize,
    dtype: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    provenance: String,
}

/// JSON header line followed by the little-endian `f64` payload.
pub fn encode_field(field: &SpaceTimeField) -> Vec<u8> {
    let g = field.grid();
    let header = Header {
        magic: STF_MAGIC.into(),
        nx: g.nx,
        ny: g.ny,
        nz: g.nz,
        nt: field.nt(),
        extents: g.extents,
        components: 3,
        dtype: "f64le".into(),
        provenance: field.provenance().into(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.reserve(field.data().len() * 8);
    for v in field.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<SpaceTimeField, FieldError> {
    let bad = |offset: usize, reason: &str| FieldError::FormatError { offset, reason: reason.into() };
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad(bytes.len(), "missing header newline"))?;
    let header: Header = serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(e.column().saturating_sub(1), &e.to_string()))?;
    if header.magic != STF_MAGIC {
        return Err(bad(0, &format!("magic {:?}", header.magic)));
    }
    if header.components != 3 || header.dtype != "f64le" {
        return Err(bad(0, &format!("unsupported layout: {} components of {}", header.components, header.dtype)));
    }
    let grid = Grid { nx: header.nx, ny: header.ny, nz: header.nz, extents: header.extents };
    grid.validate().map_err(|e| bad(0, &e.to_string()))?;
    if header.nt < 2 {
        return Err(bad(0, "nt < 2"));
    }
    let start = nl + 1;
    let payload = &bytes[start..];
    if !payload.len().is_multiple_of(8) {
        return Err(bad(start + payload.len() / 8 * 8, "payload ends inside a value"));
    }
    let expected = grid.len() * header.nt * 3;
    let found = payload.len() / 8;
    if found != expected {
        return Err(FieldError::DimensionMismatch { expected, found });
    }
    let data: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(bad(start + 8 * i, "non-finite value"));
    }
    SpaceTimeField::new(grid, header.nt, data, header.provenance)
}

pub fn write_field<W: Write>(field: &SpaceTimeField, mut w: W) -> Result<(), FieldError> {
    w.write_all(&encode_field(field))?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<SpaceTimeField, FieldError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}

pub fn save_field(field: &SpaceTimeField, path: impl AsRef<Path>) -> Result<(), FieldError> {
    fs::write(path, encode_field(field))?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<SpaceTimeField, FieldError> {
    decode_field(&fs::read(path)?)
}
