//! Per-node colorings: the mean of a per-point flag over each node's members.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::ImageRecord;
use crate::mapper::MapperGraph;

pub const ACCURACY: &str = "accuracy";
pub const PROBLEMATIC_DENSITY: &str = "problematic_density";

#[derive(Debug, Error, PartialEq)]
pub enum ColoringError {
    #[error("{got} per-point values for a graph over {expected} points")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coloring {
    pub name: String,
    /// One value in `[0, 1]` per node, index-aligned with `graph.nodes`.
    pub node_values: Vec<f64>,
    pub aggregation: String,
}

/// `true` where the ground truth is among the first `top_k` predictions.
pub fn correctness_flags(records: &[ImageRecord], top_k: usize) -> Vec<bool> {
    records.iter().map(|r| r.correct_at(top_k.max(1))).collect()
}

/// Fraction of each node's members whose flag is set.
pub fn mean_coloring(
    graph: &MapperGraph,
    flags: &[bool],
    name: &str,
) -> Result<Coloring, ColoringError> {
    if flags.len() != graph.params.n_points {
        return Err(ColoringError::LengthMismatch {
            expected: graph.params.n_points,
            got: flags.len(),
        });
    }
    let node_values = graph
        .nodes
        .iter()
        .map(|n| {
            let hits = n.members.iter().filter(|&&p| flags[p]).count();
            hits as f64 / n.members.len() as f64
        })
        .collect();
    Ok(Coloring {
        name: name.to_string(),
        node_values,
        aggregation: "mean".into(),
    })
}

pub fn accuracy_coloring(graph: &MapperGraph, flags: &[bool]) -> Result<Coloring, ColoringError> {
    mean_coloring(graph, flags, ACCURACY)
}

pub fn density_coloring(graph: &MapperGraph, marked: &[bool]) -> Result<Coloring, ColoringError> {
    mean_coloring(graph, marked, PROBLEMATIC_DENSITY)
}
