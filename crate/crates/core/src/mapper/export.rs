//! Graph export JSON shared by the CLI, the HTTP API and the dashboard.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::graph::{nerve_edges, Edge, GraphParams, MapperGraph, MapperNode};
use super::{MapperError, Result};
use crate::coloring::Coloring;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeExport {
    pub id: usize,
    pub members: Vec<usize>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeExport {
    pub a: usize,
    pub b: usize,
    pub shared: usize,
}

/// `{"params", "nodes", "edges", "colorings"}`; coloring arrays are
/// index-aligned with `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphExport {
    pub params: Map<String, Value>,
    pub nodes: Vec<NodeExport>,
    pub edges: Vec<EdgeExport>,
    pub colorings: BTreeMap<String, Vec<f64>>,
}

impl GraphExport {
    /// Export of `graph` with its build parameters plus `extra_params`
    /// merged into `params`.
    pub fn new(graph: &MapperGraph, colorings: &[Coloring], extra_params: Map<String, Value>) -> Self {
        let mut params = match serde_json::to_value(&graph.params) {
            Ok(Value::Object(map)) => map,
            _ => unreachable!("GraphParams serializes to an object"),
        };
        params.extend(extra_params);
        GraphExport {
            params,
            nodes: graph
                .nodes
                .iter()
                .map(|n| NodeExport {
                    id: n.id,
                    members: n.members.clone(),
                    size: n.members.len(),
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|e| EdgeExport {
                    a: e.a,
                    b: e.b,
                    shared: e.shared,
                })
                .collect(),
            colorings: colorings
                .iter()
                .map(|c| (c.name.clone(), c.node_values.clone()))
                .collect(),
        }
    }

    /// Compact JSON followed by a newline; stable for identical input.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("export always serializes");
        out.push(b'\n');
        out
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| MapperError::BadExport(e.to_string()))
    }

    /// Rebuilds the graph and checks every cross-reference: sequential node
    /// ids, sorted non-empty member lists within `n_points`, consistent
    /// sizes, edges equal to the recomputed nerve, and coloring lengths.
    pub fn to_graph(&self) -> Result<MapperGraph> {
        let bad = |msg: String| Err(MapperError::BadExport(msg));
        let params: GraphParams = serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| MapperError::BadExport(format!("params: {e}")))?;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (pos, n) in self.nodes.iter().enumerate() {
            if n.id != pos {
                return bad(format!("node at position {pos} has id {}", n.id));
            }
            if n.members.is_empty() || n.size != n.members.len() {
                return bad(format!("node {pos} has inconsistent members/size"));
            }
            if n.members.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("node {pos} members are not strictly ascending"));
            }
            if n.members.last().is_some_and(|&p| p >= params.n_points) {
                return bad(format!("node {pos} references a point beyond {}", params.n_points));
            }
            nodes.push(MapperNode {
                id: n.id,
                cell: Vec::new(),
                members: n.members.clone(),
            });
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                a: e.a,
                b: e.b,
                shared: e.shared,
            })
            .collect();
        if edges != nerve_edges(&nodes, params.n_points) {
            return bad("edges do not match the nodes' shared points".into());
        }
        if let Some((name, _)) = self.colorings.iter().find(|(_, v)| v.len() != nodes.len()) {
            return bad(format!("coloring {name:?} is not aligned with the nodes"));
        }
        Ok(MapperGraph {
            nodes,
            edges,
            params,
        })
    }

    pub fn coloring(&self, name: &str) -> Option<Coloring> {
        self.colorings.get(name).map(|values| Coloring {
            name: name.to_string(),
            node_values: values.clone(),
            aggregation: "mean".into(),
        })
    }
}
