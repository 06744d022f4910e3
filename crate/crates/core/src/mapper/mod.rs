//! The Mapper construction: an overlapping cover of lens space, partial
//! clustering inside every cover cell, and the nerve of the clusters.

mod cluster;
mod cover;
mod export;
mod graph;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use cluster::{cluster_cell, histogram_threshold};
pub use cover::{build_cover, AxisCover, Cover, CoverCell, CoverSpec};
pub use export::{EdgeExport, GraphExport, NodeExport};
pub use graph::{
    build_mapper, nerve_edges, Edge, GraphParams, MapperGraph, MapperNode, MapperParams,
    DEFAULT_BINS, DEFAULT_GAIN, DEFAULT_RESOLUTION,
};

#[derive(Debug, Error)]
pub enum MapperError {
    #[error("resolution must be at least 1 (got {0})")]
    BadResolution(usize),
    #[error("gain must be a finite value >= 1 (got {0})")]
    BadGain(f64),
    #[error("histogram bins must be at least 2 (got {0})")]
    BadBins(usize),
    #[error("lens has {lens_rows} rows but the matrix has {matrix_rows}")]
    LensMismatch { lens_rows: usize, matrix_rows: usize },
    #[error("invalid graph export: {0}")]
    BadExport(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T, E = MapperError> = std::result::Result<T, E>;
