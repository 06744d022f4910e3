//! Variance-normalized Euclidean distance and PCA lenses.

mod distance;
mod pca;

use thiserror::Error;

pub use distance::{
    column_stats, pairwise_distances, vne_distance, vne_distance_f64, ColumnStats, CondensedDistances,
};
pub use pca::{fit_pca, pca_lens, LensValues, PcaFit, PcaMethod};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("row index {index} out of range for {n_rows} rows")]
    IndexOutOfRange { index: usize, n_rows: usize },
    #[error("all rows are identical; principal components are undefined")]
    DegenerateData,
    #[error("lens dimension {k} invalid for {n_rows} rows and {n_cols} columns")]
    BadK {
        k: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("lens values malformed: {0}")]
    BadLens(String),
    #[error("symmetric eigensolver did not converge")]
    EigenNotConverged,
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
