use std::fmt;

use serde::{Deserialize, Serialize};

use super::clusters::{ranked_counts, ClusterReport};
use crate::dataset::ImageRecord;

const TOP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    pub size: usize,
    pub mean_accuracy: f64,
    /// Five most frequent true labels; `other_true_labels` counts the rest.
    pub top_true_labels: Vec<(String, usize)>,
    pub other_true_labels: usize,
    /// Five most frequent top-1 predictions among misclassified members.
    pub top_mispredictions: Vec<(String, usize)>,
}

/// Per-cluster table of size, accuracy and dominant labels. `flags` are the
/// per-point correctness flags used for the accuracy coloring.
pub fn cluster_summary(
    reports: &[ClusterReport],
    records: &[ImageRecord],
    flags: &[bool],
) -> Vec<ClusterSummary> {
    reports
        .iter()
        .map(|r| {
            let size = r.point_ids.len();
            let correct = r.point_ids.iter().filter(|&&p| flags[p]).count();
            let mut top_true_labels =
                ranked_counts(r.point_ids.iter().map(|&p| records[p].true_label.as_str()));
            let other_true_labels = top_true_labels.iter().skip(TOP).map(|(_, c)| c).sum();
            top_true_labels.truncate(TOP);
            let mut top_mispredictions = ranked_counts(
                r.point_ids
                    .iter()
                    .filter(|&&p| !flags[p])
                    .map(|&p| records[p].top1()),
            );
            top_mispredictions.truncate(TOP);
            ClusterSummary {
                cluster_id: r.cluster_id,
                size,
                mean_accuracy: correct as f64 / size as f64,
                top_true_labels,
                other_true_labels,
                top_mispredictions,
            }
        })
        .collect()
}

fn join(counts: &[(String, usize)]) -> String {
    counts
        .iter()
        .map(|(l, c)| format!("{l} ({c})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for ClusterSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "cluster {}: {} points, accuracy {:.3}",
            self.cluster_id, self.size, self.mean_accuracy
        )?;
        writeln!(f, "  true labels:   {}", join(&self.top_true_labels))?;
        write!(f, "  mispredicted:  {}", join(&self.top_mispredictions))
    }
}
