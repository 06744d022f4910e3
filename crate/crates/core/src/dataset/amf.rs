//! `AMF1` / `AMF3` binary containers.
//!
//! Layout: 4 ASCII magic bytes, one little-endian `u64` per dimension, then
//! the payload as little-endian IEEE-754 `f32`, row-major (channel fastest
//! for `AMF3`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{check_finite, DatasetError, FeatureMatrix, Result, SpatialActivation};

pub const MATRIX_MAGIC: &[u8; 4] = b"AMF1";
pub const TENSOR_MAGIC: &[u8; 4] = b"AMF3";

struct Container<'a> {
    dims: Vec<u64>,
    payload: &'a [u8],
}

fn decode_container<'a, const N: usize>(bytes: &'a [u8], magic: &[u8; 4]) -> Result<Container<'a>> {
    let header_len = 4 + 8 * N;
    if bytes.len() < 4 || &bytes[..4] != magic {
        let found = &bytes[..bytes.len().min(4)];
        return Err(DatasetError::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        });
    }
    if bytes.len() < header_len {
        return Err(DatasetError::TruncatedPayload {
            expected: header_len as u64,
            found: bytes.len() as u64,
        });
    }
    let dims: Vec<u64> = bytes[4..header_len]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    if dims.contains(&0) {
        return Err(DatasetError::EmptyDimension(dims));
    }
    let payload_len = dims
        .iter()
        .try_fold(4u64, |acc, &d| acc.checked_mul(d))
        .filter(|&len| usize::try_from(len).is_ok())
        .ok_or_else(|| DatasetError::TooLarge(dims.clone()))?;
    let found = (bytes.len() - header_len) as u64;
    if found < payload_len {
        return Err(DatasetError::TruncatedPayload {
            expected: payload_len,
            found,
        });
    }
    if found > payload_len {
        return Err(DatasetError::TrailingBytes(found - payload_len));
    }
    Ok(Container {
        dims,
        payload: &bytes[header_len..],
    })
}

fn decode_floats(payload: &[u8]) -> Vec<f32> {
    payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect()
}

fn encode_container(magic: &[u8; 4], dims: &[usize], values: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 8 * dims.len() + 4 * values.len());
    out.extend_from_slice(magic);
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| DatasetError::io(path, e))
}

/// Decodes an in-memory `AMF1` file.
pub fn decode_feature_matrix(bytes: &[u8], source_tag: &str) -> Result<FeatureMatrix> {
    let c = decode_container::<2>(bytes, MATRIX_MAGIC)?;
    let (n_rows, n_cols) = (c.dims[0] as usize, c.dims[1] as usize);
    let values = decode_floats(c.payload);
    check_finite(&values, n_cols)?;
    FeatureMatrix::new(n_rows, n_cols, values, source_tag)
}

/// Loads an `AMF1` matrix. The source tag is taken from the file stem.
pub fn load_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let bytes = std::fs::read(path).map_err(|e| DatasetError::io(path, e))?;
    let tag = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_feature_matrix(&bytes, &tag)
}

pub fn encode_feature_matrix(m: &FeatureMatrix) -> Result<Vec<u8>> {
    check_finite(m.values(), m.n_cols())?;
    Ok(encode_container(MATRIX_MAGIC, &[m.n_rows(), m.n_cols()], m.values()))
}

pub fn write_feature_matrix(m: &FeatureMatrix, path: &Path) -> Result<()> {
    let bytes = encode_feature_matrix(m)?;
    write_bytes(path, &bytes)
}

pub fn decode_spatial_activation(bytes: &[u8], image_id: &str) -> Result<SpatialActivation> {
    let c = decode_container::<3>(bytes, TENSOR_MAGIC)?;
    SpatialActivation::new(
        image_id,
        c.dims[0] as usize,
        c.dims[1] as usize,
        c.dims[2] as usize,
        decode_floats(c.payload),
    )
}

/// Loads an `AMF3` tensor; the image id is the file stem.
pub fn load_spatial_activation(path: &Path) -> Result<SpatialActivation> {
    let bytes = std::fs::read(path).map_err(|e| DatasetError::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_spatial_activation(&bytes, &id)
}

pub fn encode_spatial_activation(t: &SpatialActivation) -> Vec<u8> {
    encode_container(
        TENSOR_MAGIC,
        &[t.height(), t.width(), t.channels()],
        t.values(),
    )
}

pub fn write_spatial_activation(t: &SpatialActivation, path: &Path) -> Result<()> {
    write_bytes(path, &encode_spatial_activation(t))
}
