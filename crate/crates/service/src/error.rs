use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use mapperscope_core::analysis::AnalysisError;
use mapperscope_core::coloring::ColoringError;
use mapperscope_core::dataset::{matrix_path, metadata_path, DatasetError};
use mapperscope_core::geometry::GeometryError;
use mapperscope_core::heatmap::HeatmapError;
use mapperscope_core::mapper::MapperError;
use serde_json::json;

/// A failure with a stable machine-readable code, printed as
/// `{"error": {"code", "message"}}`.
#[derive(Debug, thiserror::Error)]
#[error("{code}: {message}")]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"error": {"code": self.code, "message": self.message}})
    }

    /// Dataset failures, with missing files named by their role.
    pub fn from_dataset(err: DatasetError, prefix: Option<&Path>) -> Self {
        if let DatasetError::Io { path, source } = &err {
            if source.kind() == ErrorKind::NotFound {
                if let Some(p) = prefix {
                    if *path == metadata_path(p) {
                        return CliError::new("MetadataMissing", err.to_string());
                    }
                    if *path == matrix_path(p) {
                        return CliError::new("MatrixMissing", err.to_string());
                    }
                }
                return CliError::new("FileMissing", err.to_string());
            }
        }
        let code = match &err {
            DatasetError::BadMagic { .. } => "BadMagic",
            DatasetError::TruncatedPayload { .. } => "TruncatedPayload",
            DatasetError::TrailingBytes(_) => "TrailingBytes",
            DatasetError::NonFiniteValue { .. } => "NonFiniteValue",
            DatasetError::EmptyDimension(_) => "EmptyDimension",
            DatasetError::TooLarge(_) => "TooLarge",
            DatasetError::MalformedLine { .. } => "MalformedLine",
            DatasetError::DuplicateImageId(_) => "DuplicateImageId",
            DatasetError::UnsortedPredictions(_) => "UnsortedPredictions",
            DatasetError::RowCountMismatch { .. } => "RowCountMismatch",
            DatasetError::BadParams(_) => "BadParams",
            DatasetError::Io { .. } => "IoFailure",
        };
        CliError::new(code, err.to_string())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        let code = if err.kind() == ErrorKind::NotFound {
            "FileMissing"
        } else {
            "IoFailure"
        };
        CliError::new(code, format!("{}: {err}", path.display()))
    }

    pub fn missing(what: &'static str, path: PathBuf) -> Self {
        CliError::new(what, format!("{} does not exist", path.display()))
    }
}

impl From<DatasetError> for CliError {
    fn from(err: DatasetError) -> Self {
        CliError::from_dataset(err, None)
    }
}

fn geometry_code(err: &GeometryError) -> &'static str {
    match err {
        GeometryError::DimensionMismatch { .. } => "DimensionMismatch",
        GeometryError::IndexOutOfRange { .. } => "IndexOutOfRange",
        GeometryError::DegenerateData => "DegenerateData",
        GeometryError::BadK { .. } => "BadK",
        GeometryError::BadLens(_) => "BadLens",
        GeometryError::EigenNotConverged => "EigenNotConverged",
    }
}

impl From<GeometryError> for CliError {
    fn from(err: GeometryError) -> Self {
        CliError::new(geometry_code(&err), err.to_string())
    }
}

impl From<MapperError> for CliError {
    fn from(err: MapperError) -> Self {
        let code = match &err {
            MapperError::BadResolution(_) => "BadResolution",
            MapperError::BadGain(_) => "BadGain",
            MapperError::BadBins(_) => "BadBins",
            MapperError::LensMismatch { .. } => "LensMismatch",
            MapperError::BadExport(_) => "BadModel",
            MapperError::Geometry(g) => geometry_code(g),
        };
        CliError::new(code, err.to_string())
    }
}

impl From<ColoringError> for CliError {
    fn from(err: ColoringError) -> Self {
        CliError::new("LengthMismatch", err.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(err: AnalysisError) -> Self {
        let code = match &err {
            AnalysisError::LengthMismatch { .. } => "LengthMismatch",
            AnalysisError::EmptyCluster(_) => "EmptyCluster",
            AnalysisError::PointOutOfRange(_) => "PointOutOfRange",
            AnalysisError::DimensionMismatch { .. } => "DimensionMismatch",
            AnalysisError::BadSlack(_) => "BadSlack",
            AnalysisError::Geometry(g) => geometry_code(g),
        };
        CliError::new(code, err.to_string())
    }
}

impl From<HeatmapError> for CliError {
    fn from(err: HeatmapError) -> Self {
        let code = match &err {
            HeatmapError::DimensionMismatch { .. } => "DimensionMismatch",
            HeatmapError::BadAlpha(_) => "BadAlpha",
            HeatmapError::BadMode(_) => "BadMode",
            HeatmapError::EmptyTarget => "EmptyTarget",
            HeatmapError::Codec(_) => "ImageCodec",
        };
        CliError::new(code, err.to_string())
    }
}
