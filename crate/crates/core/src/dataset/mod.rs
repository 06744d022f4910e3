//! Feature matrices, per-image metadata and spatial activation tensors.
//!
//! Matrices live in the `AMF1` container, spatial tensors in `AMF3`, and
//! metadata in JSON lines. Row `i` of a matrix belongs to metadata record
//! `i`; `image_id` is only a secondary key.

mod amf;
mod metadata;
mod synth;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use amf::{
    decode_feature_matrix, decode_spatial_activation, encode_feature_matrix,
    encode_spatial_activation, load_feature_matrix, load_spatial_activation, write_feature_matrix,
    write_spatial_activation, MATRIX_MAGIC, TENSOR_MAGIC,
};
pub use metadata::{load_metadata, parse_metadata, write_metadata, ImageRecord, Prediction};
pub use synth::{class_label, sample_cluster_points, synth_dataset, SynthOutput, SynthParams};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(u64),
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("dimensions must be at least 1 (got {0:?})")]
    EmptyDimension(Vec<u64>),
    #[error("payload of {0:?} elements does not fit in memory")]
    TooLarge(Vec<u64>),
    #[error("malformed metadata at line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("duplicate image id {0:?}")]
    DuplicateImageId(String),
    #[error("predictions at line {0} are not sorted by descending confidence")]
    UnsortedPredictions(usize),
    #[error("matrix has {rows} rows but metadata has {records} records")]
    RowCountMismatch { rows: usize, records: usize },
    #[error("bad synthetic dataset parameters: {0}")]
    BadParams(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = DatasetError> = std::result::Result<T, E>;

/// Dense `n_rows × n_cols` matrix of per-image features, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f32>,
    source_tag: String,
}

impl FeatureMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        values: Vec<f32>,
        source_tag: impl Into<String>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(DatasetError::EmptyDimension(vec![n_rows as u64, n_cols as u64]));
        }
        let expected = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| DatasetError::TooLarge(vec![n_rows as u64, n_cols as u64]))?;
        if values.len() != expected {
            return Err(DatasetError::TruncatedPayload {
                expected: expected as u64 * 4,
                found: values.len() as u64 * 4,
            });
        }
        check_finite(&values, n_cols)?;
        Ok(FeatureMatrix {
            n_rows,
            n_cols,
            values,
            source_tag: source_tag.into(),
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f32>], source_tag: impl Into<String>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(DatasetError::MalformedLine {
                line_no: bad + 1,
                reason: format!("row has {} values, expected {n_cols}", rows[bad].len()),
            });
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), n_cols, values, source_tag)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn source_tag(&self) -> &str {
        &self.source_tag
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.n_cols + col]
    }
}

fn check_finite(values: &[f32], n_cols: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(idx) => Err(DatasetError::NonFiniteValue {
            row: idx / n_cols,
            col: idx % n_cols,
        }),
        None => Ok(()),
    }
}

/// A feature matrix with its positionally aligned metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    matrix: FeatureMatrix,
    records: Vec<ImageRecord>,
}

impl Dataset {
    pub fn new(matrix: FeatureMatrix, records: Vec<ImageRecord>) -> Result<Self> {
        if matrix.n_rows() != records.len() {
            return Err(DatasetError::RowCountMismatch {
                rows: matrix.n_rows(),
                records: records.len(),
            });
        }
        check_unique_ids(&records)?;
        Ok(Dataset { matrix, records })
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_parts(self) -> (FeatureMatrix, Vec<ImageRecord>) {
        (self.matrix, self.records)
    }
}

pub(crate) fn check_unique_ids(records: &[ImageRecord]) -> Result<()> {
    let mut seen = HashSet::with_capacity(records.len());
    for r in records {
        if !seen.insert(r.image_id.as_str()) {
            return Err(DatasetError::DuplicateImageId(r.image_id.clone()));
        }
    }
    Ok(())
}

/// Path of the matrix file for a dataset prefix (`P.amf`).
pub fn matrix_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".amf")
}

/// Path of the metadata file for a dataset prefix (`P.jsonl`).
pub fn metadata_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".jsonl")
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Loads `P.amf` and `P.jsonl` and checks that they line up.
pub fn load_dataset(prefix: &Path) -> Result<Dataset> {
    let matrix = load_feature_matrix(&matrix_path(prefix))?;
    let records = load_metadata(&metadata_path(prefix))?;
    Dataset::new(matrix, records)
}

pub fn write_dataset(ds: &Dataset, prefix: &Path) -> Result<()> {
    write_feature_matrix(ds.matrix(), &matrix_path(prefix))?;
    write_metadata(ds.records(), &metadata_path(prefix))
}

/// `H × W × C` activations of one image, channel index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialActivation {
    pub image_id: String,
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f32>,
}

impl SpatialActivation {
    pub fn new(
        image_id: impl Into<String>,
        height: usize,
        width: usize,
        channels: usize,
        values: Vec<f32>,
    ) -> Result<Self> {
        let dims = vec![height as u64, width as u64, channels as u64];
        if height == 0 || width == 0 || channels == 0 {
            return Err(DatasetError::EmptyDimension(dims));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|v| v.checked_mul(channels))
            .ok_or(DatasetError::TooLarge(dims))?;
        if values.len() != expected {
            return Err(DatasetError::TruncatedPayload {
                expected: expected as u64 * 4,
                found: values.len() as u64 * 4,
            });
        }
        // Report the flattened (row, col) of the spatial location.
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            let cell = idx / channels;
            return Err(DatasetError::NonFiniteValue {
                row: cell / width,
                col: cell % width,
            });
        }
        Ok(SpatialActivation {
            image_id: image_id.into(),
            height,
            width,
            channels,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Channel vector at spatial location `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> &[f32] {
        let start = (i * self.width + j) * self.channels;
        &self.values[start..start + self.channels]
    }
}
