use std::collections::HashMap;
use std::path::{Component, Path, PathBuf};

use mapperscope_core::analysis::{build_routing, RoutingModel};
use mapperscope_core::dataset::{load_feature_matrix, matrix_path, ImageRecord};
use mapperscope_core::geometry::column_stats;
use mapperscope_core::mapper::MapperGraph;

use crate::cli::ServeArgs;
use crate::commands::{load_model, load_records, ClustersFile, Result};
use crate::error::CliError;

/// Everything the server reads, loaded once at startup and never mutated.
#[derive(Debug)]
pub struct ModelBundle {
    /// model.json exactly as built.
    pub graph_bytes: Vec<u8>,
    pub graph: MapperGraph,
    pub records: Vec<ImageRecord>,
    pub clusters_bytes: Option<Vec<u8>>,
    pub routing: Option<RoutingModel>,
    pub slack: f64,
    pub images_root: PathBuf,
    pub tensors_root: Option<PathBuf>,
    by_image_id: HashMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct BundleConfig {
    pub model: PathBuf,
    pub dataset: PathBuf,
    pub clusters: Option<PathBuf>,
    pub images_root: PathBuf,
    pub tensors_root: Option<PathBuf>,
    pub routing: bool,
    pub slack: f64,
}

impl From<&ServeArgs> for BundleConfig {
    fn from(a: &ServeArgs) -> Self {
        BundleConfig {
            model: a.model.clone(),
            dataset: a.dataset.clone(),
            clusters: a.clusters.clone(),
            images_root: a.images_root.clone(),
            tensors_root: a.tensors_root.clone(),
            routing: a.routing,
            slack: a.slack,
        }
    }
}

impl ModelBundle {
    pub fn load(cfg: &BundleConfig) -> Result<Self> {
        let model = load_model(&cfg.model)?;
        let records = load_records(&cfg.dataset, model.graph.params.n_points)?;
        if !(cfg.slack.is_finite() && cfg.slack >= 1.0) {
            return Err(CliError::new("BadSlack", format!("slack must be >= 1 (got {})", cfg.slack)));
        }

        let clusters = match &cfg.clusters {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
                let file: ClustersFile = serde_json::from_slice(&bytes)
                    .map_err(|e| CliError::new("BadClusters", format!("{}: {e}", path.display())))?;
                check_clusters(&file, &model.graph)?;
                Some((bytes, file))
            }
            None => None,
        };

        let routing = if cfg.routing {
            let Some((_, file)) = &clusters else {
                return Err(CliError::new("ClustersMissing", "--routing needs --clusters"));
            };
            let m = load_feature_matrix(&matrix_path(&cfg.dataset))
                .map_err(|e| CliError::from_dataset(e, Some(&cfg.dataset)))?;
            if m.n_rows() != records.len() {
                return Err(CliError::new(
                    "RowCountMismatch",
                    format!("matrix has {} rows, metadata {}", m.n_rows(), records.len()),
                ));
            }
            // the matrix itself is dropped once centroids are computed
            Some(build_routing(&m, &file.clusters, &column_stats(&m))?)
        } else {
            None
        };

        let by_image_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.image_id.clone(), i))
            .collect();
        Ok(ModelBundle {
            graph_bytes: model.bytes,
            graph: model.graph,
            records,
            clusters_bytes: clusters.map(|(b, _)| b),
            routing,
            slack: cfg.slack,
            images_root: cfg.images_root.clone(),
            tensors_root: cfg.tensors_root.clone(),
            by_image_id,
        })
    }

    pub fn record(&self, image_id: &str) -> Option<&ImageRecord> {
        self.by_image_id.get(image_id).map(|&i| &self.records[i])
    }

    /// File of an image under the images root. Records without a path use
    /// `<image_id>.png`; paths that would leave the root are refused.
    pub fn image_file(&self, image_id: &str) -> Option<PathBuf> {
        let rec = self.record(image_id)?;
        let rel = if rec.image_path.is_empty() {
            PathBuf::from(format!("{}.png", rec.image_id))
        } else {
            PathBuf::from(&rec.image_path)
        };
        contained(&rel).then(|| self.images_root.join(rel))
    }

    pub fn tensor_file(&self, image_id: &str) -> Option<PathBuf> {
        let root = self.tensors_root.as_ref()?;
        self.record(image_id)?;
        let rel = PathBuf::from(format!("{image_id}.amf3"));
        contained(&rel).then(|| root.join(rel))
    }
}

fn contained(rel: &Path) -> bool {
    rel.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

fn check_clusters(file: &ClustersFile, graph: &MapperGraph) -> Result<()> {
    for c in &file.clusters {
        let bad_node = c.node_ids.iter().find(|&&n| n >= graph.nodes.len());
        let bad_point = c.point_ids.iter().find(|&&p| p >= graph.params.n_points);
        if let Some(n) = bad_node {
            return Err(CliError::new(
                "BadClusters",
                format!("cluster {} references node {n} of {}", c.cluster_id, graph.nodes.len()),
            ));
        }
        if let Some(p) = bad_point {
            return Err(CliError::new(
                "BadClusters",
                format!("cluster {} references point {p}", c.cluster_id),
            ));
        }
        if c.point_ids.is_empty() {
            return Err(CliError::new("BadClusters", format!("cluster {} is empty", c.cluster_id)));
        }
    }
    Ok(())
}
