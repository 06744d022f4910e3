use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cluster::cluster_cell;
use super::cover::{assign_cells, Cover, CoverSpec};
use super::{MapperError, Result};
use crate::dataset::FeatureMatrix;
use crate::geometry::{ColumnStats, LensValues};

pub const DEFAULT_RESOLUTION: usize = 50;
pub const DEFAULT_GAIN: f64 = 3.0;
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapperParams {
    pub resolution: usize,
    pub gain: f64,
    /// Histogram bins of the clustering cut heuristic.
    pub bins: usize,
}

impl Default for MapperParams {
    fn default() -> Self {
        MapperParams {
            resolution: DEFAULT_RESOLUTION,
            gain: DEFAULT_GAIN,
            bins: DEFAULT_BINS,
        }
    }
}

/// What a graph was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub resolution: usize,
    pub gain: f64,
    pub bins: usize,
    pub lens: String,
    pub lens_dims: usize,
    pub lens_ranges: Vec<(f64, f64)>,
    pub metric: String,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapperNode {
    pub id: usize,
    /// Grid indices of the cover cell; empty when loaded from an export.
    pub cell: Vec<usize>,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapperGraph {
    pub nodes: Vec<MapperNode>,
    pub edges: Vec<Edge>,
    pub params: GraphParams,
}

impl MapperGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Neighbor lists, ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// For every data point, the ids of the nodes containing it.
    pub fn point_memberships(&self) -> Vec<Vec<usize>> {
        point_memberships(&self.nodes, self.params.n_points)
    }
}

fn point_memberships(nodes: &[MapperNode], n_points: usize) -> Vec<Vec<usize>> {
    let mut of_point = vec![Vec::new(); n_points];
    for node in nodes {
        for &p in &node.members {
            of_point[p].push(node.id);
        }
    }
    of_point
}

/// Edges of the nerve: one per pair of nodes sharing at least one point,
/// sorted by `(a, b)`.
pub fn nerve_edges(nodes: &[MapperNode], n_points: usize) -> Vec<Edge> {
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for ids in point_memberships(nodes, n_points) {
        for (x, &a) in ids.iter().enumerate() {
            for &b in &ids[x + 1..] {
                *shared.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
    }
    shared
        .into_iter()
        .map(|((a, b), shared)| Edge { a, b, shared })
        .collect()
}

/// Builds the Mapper graph: cover the lens, cluster each cell in parallel,
/// then join clusters that share points.
///
/// Node ids follow cell order (lexicographic), then cluster size
/// descending, then smallest member, so the output is identical for
/// identical input whatever the thread count.
pub fn build_mapper(
    m: &FeatureMatrix,
    stats: &ColumnStats,
    lens: &LensValues,
    params: &MapperParams,
) -> Result<MapperGraph> {
    if lens.n_rows != m.n_rows() {
        return Err(MapperError::LensMismatch {
            lens_rows: lens.n_rows,
            matrix_rows: m.n_rows(),
        });
    }
    if params.bins < 2 {
        return Err(MapperError::BadBins(params.bins));
    }
    let spec = CoverSpec::for_lens(lens, params.resolution, params.gain)?;
    let cells = assign_cells(lens, &Cover::new(&spec));

    let clustered: Vec<Vec<Vec<usize>>> = cells
        .par_iter()
        .map(|cell| cluster_cell(&cell.member_points, m, stats, params.bins))
        .collect::<Result<_>>()?;

    let mut nodes = Vec::new();
    for (cell, clusters) in cells.iter().zip(clustered) {
        for members in clusters {
            nodes.push(MapperNode {
                id: nodes.len(),
                cell: cell.axis_indices.clone(),
                members,
            });
        }
    }
    let edges = nerve_edges(&nodes, m.n_rows());
    Ok(MapperGraph {
        nodes,
        edges,
        params: GraphParams {
            resolution: params.resolution,
            gain: params.gain,
            bins: params.bins,
            lens: "pca".into(),
            lens_dims: lens.k,
            lens_ranges: spec.ranges,
            metric: "vne".into(),
            n_points: m.n_rows(),
        },
    })
}
