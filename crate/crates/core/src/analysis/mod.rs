//! Mining a colored Mapper graph: problematic labels, contiguous problem
//! clusters, and routing of new points to those clusters.

mod clusters;
mod problematic;
mod routing;
mod summary;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use clusters::{extract_problem_clusters, ClusterReport, DEFAULT_MIN_NODES, DEFAULT_THRESHOLD};
pub use problematic::{problematic_labels, LabelStats, ProblematicLabels, ProblematicRule};
pub use routing::{
    build_routing, place_by_lens, route_point, Route, RouteCluster, RouteDecision, RoutingModel,
};
pub use summary::{cluster_summary, ClusterSummary};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("cluster {0} has no points")]
    EmptyCluster(usize),
    #[error("point {0} is outside the feature matrix")]
    PointOutOfRange(usize),
    #[error("feature vector has {got} values, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("slack must be >= 1 (got {0})")]
    BadSlack(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
