use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::coloring::Coloring;
use crate::dataset::ImageRecord;
use crate::mapper::MapperGraph;

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_MIN_NODES: usize = 2;

/// A connected group of high-valued nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster_id: usize,
    pub node_ids: Vec<usize>,
    pub point_ids: Vec<usize>,
    /// Mean of the coloring over the component's nodes.
    pub mean_coloring_value: f64,
    /// `(label, count)` over `point_ids`, most frequent first.
    pub dominant_true_labels: Vec<(String, usize)>,
}

pub(crate) fn ranked_counts<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut ranked: Vec<(String, usize)> =
        counts.into_iter().map(|(l, c)| (l.to_string(), c)).collect();
    // stable sort keeps label order on equal counts
    ranked.sort_by_key(|r| std::cmp::Reverse(r.1));
    ranked
}

/// Connected components of the subgraph induced by nodes whose coloring
/// value is `>= threshold`, dropping components with fewer than
/// `min_nodes` nodes. Reports are sorted by point count (descending, ties by
/// smallest node id) and numbered in that order.
pub fn extract_problem_clusters(
    graph: &MapperGraph,
    coloring: &Coloring,
    records: &[ImageRecord],
    threshold: f64,
    min_nodes: usize,
) -> Result<Vec<ClusterReport>, AnalysisError> {
    if coloring.node_values.len() != graph.nodes.len() {
        return Err(AnalysisError::LengthMismatch {
            what: "coloring",
            expected: graph.nodes.len(),
            got: coloring.node_values.len(),
        });
    }
    if records.len() != graph.params.n_points {
        return Err(AnalysisError::LengthMismatch {
            what: "records",
            expected: graph.params.n_points,
            got: records.len(),
        });
    }
    let hot: Vec<bool> = coloring.node_values.iter().map(|&v| v >= threshold).collect();
    let adj = graph.adjacency();
    let mut seen = vec![false; graph.nodes.len()];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..graph.nodes.len() {
        if !hot[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if hot[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        if comp.len() >= min_nodes.max(1) {
            components.push(comp);
        }
    }

    let mut reports: Vec<ClusterReport> = components
        .into_iter()
        .map(|node_ids| {
            let points: BTreeSet<usize> = node_ids
                .iter()
                .flat_map(|&n| graph.nodes[n].members.iter().copied())
                .collect();
            let point_ids: Vec<usize> = points.into_iter().collect();
            let mean_coloring_value = node_ids
                .iter()
                .map(|&n| coloring.node_values[n])
                .sum::<f64>()
                / node_ids.len() as f64;
            let dominant_true_labels =
                ranked_counts(point_ids.iter().map(|&p| records[p].true_label.as_str()));
            ClusterReport {
                cluster_id: 0,
                node_ids,
                point_ids,
                mean_coloring_value,
                dominant_true_labels,
            }
        })
        .collect();
    reports.sort_by(|a, b| {
        b.point_ids
            .len()
            .cmp(&a.point_ids.len())
            .then(a.node_ids[0].cmp(&b.node_ids[0]))
    });
    for (id, r) in reports.iter_mut().enumerate() {
        r.cluster_id = id;
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Prediction;
    use crate::mapper::{nerve_edges, GraphParams, MapperNode};

    /// Path A–B–C (A∩B = {1}, B∩C = {3}) plus an isolated node D.
    fn path_graph() -> MapperGraph {
        let members: [&[usize]; 4] = [&[0, 1], &[1, 2, 3], &[3, 4], &[5]];
        let nodes: Vec<MapperNode> = members
            .iter()
            .enumerate()
            .map(|(id, m)| MapperNode {
                id,
                cell: vec![],
                members: m.to_vec(),
            })
            .collect();
        MapperGraph {
            edges: nerve_edges(&nodes, 6),
            nodes,
            params: GraphParams {
                resolution: 1,
                gain: 1.0,
                bins: 10,
                lens: "pca".into(),
                lens_dims: 1,
                lens_ranges: vec![],
                metric: "vne".into(),
                n_points: 6,
            },
        }
    }

    fn recs(n: usize) -> Vec<ImageRecord> {
        (0..n)
            .map(|i| {
                ImageRecord::new(
                    format!("r{i}"),
                    if i < 2 { "cat" } else { "dog" },
                    vec![Prediction::new("x", 1.0)],
                )
            })
            .collect()
    }

    fn coloring(values: &[f64]) -> Coloring {
        Coloring {
            name: "d".into(),
            node_values: values.to_vec(),
            aggregation: "mean".into(),
        }
    }

    #[test]
    fn all_cold_gives_nothing() {
        let g = path_graph();
        let r = extract_problem_clusters(&g, &coloring(&[0.0; 4]), &recs(6), 0.5, 1).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn cold_middle_node_splits_path() {
        let g = path_graph();
        let r =
            extract_problem_clusters(&g, &coloring(&[0.9, 0.1, 0.9, 0.0]), &recs(6), 0.5, 1).unwrap();
        assert_eq!(r.len(), 2);
        // equal point counts: smallest node id first
        assert_eq!(r[0].node_ids, vec![0]);
        assert_eq!(r[1].node_ids, vec![2]);
        assert_eq!(r[0].point_ids, vec![0, 1]);
        assert_eq!(r[0].dominant_true_labels, vec![("cat".to_string(), 2)]);
        assert_eq!((r[0].cluster_id, r[1].cluster_id), (0, 1));
    }

    #[test]
    fn min_nodes_filters_and_union_dedupes() {
        let g = path_graph();
        let c = coloring(&[0.9, 0.6, 0.9, 0.7]);
        let r = extract_problem_clusters(&g, &c, &recs(6), 0.5, 2).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].node_ids, vec![0, 1, 2]);
        assert_eq!(r[0].point_ids, vec![0, 1, 2, 3, 4]);
        assert!((r[0].mean_coloring_value - 0.8).abs() < 1e-12);
        assert_eq!(
            r[0].dominant_true_labels,
            vec![("dog".to_string(), 3), ("cat".to_string(), 2)]
        );
    }

    #[test]
    fn threshold_is_inclusive() {
        let g = path_graph();
        let r = extract_problem_clusters(&g, &coloring(&[0.0, 0.0, 0.0, 0.5]), &recs(6), 0.5, 1)
            .unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].node_ids, vec![3]);
    }

    #[test]
    fn misaligned_inputs() {
        let g = path_graph();
        assert!(extract_problem_clusters(&g, &coloring(&[0.0]), &recs(6), 0.5, 1).is_err());
        assert!(extract_problem_clusters(&g, &coloring(&[0.0; 4]), &recs(2), 0.5, 1).is_err());
    }
}
