//! Gating new points to problem clusters by centroid distance.

use serde::{Deserialize, Serialize};

use super::{AnalysisError, ClusterReport};
use crate::dataset::FeatureMatrix;
use crate::geometry::{vne_distance_f64, ColumnStats, PcaFit};
use crate::mapper::{Cover, MapperGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteCluster {
    pub cluster_id: usize,
    pub centroid: Vec<f64>,
    /// Largest VNE distance from the centroid to a member.
    pub radius: f64,
}

/// Centroids and radii of the problem clusters plus the column statistics
/// that define the distance. Points outside every gate take the default
/// route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingModel {
    pub clusters: Vec<RouteCluster>,
    pub stats: ColumnStats,
}

impl RoutingModel {
    pub fn dims(&self) -> usize {
        self.stats.dims()
    }
}

pub fn build_routing(
    m: &FeatureMatrix,
    reports: &[ClusterReport],
    stats: &ColumnStats,
) -> Result<RoutingModel, AnalysisError> {
    let d = m.n_cols();
    let mut clusters = Vec::with_capacity(reports.len());
    for r in reports {
        if r.point_ids.is_empty() {
            return Err(AnalysisError::EmptyCluster(r.cluster_id));
        }
        if let Some(&p) = r.point_ids.iter().find(|&&p| p >= m.n_rows()) {
            return Err(AnalysisError::PointOutOfRange(p));
        }
        let mut centroid = vec![0.0; d];
        for &p in &r.point_ids {
            for (c, &v) in centroid.iter_mut().zip(m.row(p)) {
                *c += v as f64;
            }
        }
        let n = r.point_ids.len() as f64;
        centroid.iter_mut().for_each(|c| *c /= n);
        let mut radius = 0.0f64;
        let mut row = vec![0.0; d];
        for &p in &r.point_ids {
            for (x, &v) in row.iter_mut().zip(m.row(p)) {
                *x = v as f64;
            }
            radius = radius.max(vne_distance_f64(&row, &centroid, stats)?);
        }
        clusters.push(RouteCluster {
            cluster_id: r.cluster_id,
            centroid,
            radius,
        });
    }
    Ok(RoutingModel {
        clusters,
        stats: stats.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Cluster,
    Default,
}

/// Routing outcome with the distances that decided it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteDecision {
    pub route: Route,
    pub cluster_id: Option<usize>,
    /// Closest centroid, whether or not its gate admitted the point.
    pub nearest_cluster: Option<usize>,
    pub distance: Option<f64>,
    pub radius: Option<f64>,
    pub slack: f64,
    /// Distance to every centroid, in model order.
    pub distances: Vec<f64>,
}

/// Routes `x` to its nearest centroid if it lies within `slack · radius`
/// of it; otherwise to the default learner. Ties go to the smallest
/// cluster id.
pub fn route_point(
    x: &[f64],
    model: &RoutingModel,
    slack: f64,
) -> Result<RouteDecision, AnalysisError> {
    if !(slack.is_finite() && slack >= 1.0) {
        return Err(AnalysisError::BadSlack(slack));
    }
    if x.len() != model.dims() || x.is_empty() {
        return Err(AnalysisError::DimensionMismatch {
            expected: model.dims(),
            got: x.len(),
        });
    }
    let distances: Vec<f64> = model
        .clusters
        .iter()
        .map(|c| vne_distance_f64(x, &c.centroid, &model.stats))
        .collect::<Result<_, _>>()?;
    let best = (0..distances.len()).min_by(|&i, &j| {
        distances[i]
            .total_cmp(&distances[j])
            .then(model.clusters[i].cluster_id.cmp(&model.clusters[j].cluster_id))
    });
    let Some(b) = best else {
        return Ok(RouteDecision {
            route: Route::Default,
            cluster_id: None,
            nearest_cluster: None,
            distance: None,
            radius: None,
            slack,
            distances,
        });
    };
    let c = &model.clusters[b];
    let admitted = distances[b] <= slack * c.radius;
    Ok(RouteDecision {
        route: if admitted { Route::Cluster } else { Route::Default },
        cluster_id: admitted.then_some(c.cluster_id),
        nearest_cluster: Some(c.cluster_id),
        distance: Some(distances[b]),
        radius: Some(c.radius),
        slack,
        distances,
    })
}

/// Places an unseen point into an existing graph by projecting it onto the
/// lens and, in every cover cell containing the projection, picking the node
/// with the nearest member. Returns node ids, ascending.
pub fn place_by_lens(
    x: &[f32],
    fit: &PcaFit,
    cover: &Cover,
    graph: &MapperGraph,
    m: &FeatureMatrix,
    stats: &ColumnStats,
) -> Result<Vec<usize>, AnalysisError> {
    let lens_value = fit.project(x)?;
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let mut placed = Vec::new();
    for cell in cover.cells_containing(&lens_value) {
        let mut best: Option<(f64, usize)> = None;
        for node in graph.nodes.iter().filter(|n| n.cell == cell) {
            for &p in &node.members {
                let row: Vec<f64> = m.row(p).iter().map(|&v| v as f64).collect();
                let d = vne_distance_f64(&xf, &row, stats)?;
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, node.id));
                }
            }
        }
        if let Some((_, id)) = best {
            placed.push(id);
        }
    }
    placed.sort_unstable();
    placed.dedup();
    Ok(placed)
}
