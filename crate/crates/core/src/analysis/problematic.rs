use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dataset::ImageRecord;

/// A label is problematic when it occurs at least `min_count` times and its
/// accuracy is strictly below `max_accuracy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblematicRule {
    pub min_count: usize,
    pub max_accuracy: f64,
    /// Predictions considered when scoring accuracy (1 = top-1).
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

fn default_top_k() -> usize {
    1
}

impl Default for ProblematicRule {
    fn default() -> Self {
        ProblematicRule {
            min_count: 3,
            max_accuracy: 0.40,
            top_k: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub count: usize,
    pub correct: usize,
}

impl LabelStats {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.count as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblematicLabels {
    pub labels: BTreeSet<String>,
    /// `marks[i]` is set when record `i`'s true label is problematic.
    pub marks: Vec<bool>,
    pub per_label: BTreeMap<String, LabelStats>,
}

pub fn problematic_labels(records: &[ImageRecord], rule: &ProblematicRule) -> ProblematicLabels {
    let mut per_label: BTreeMap<String, LabelStats> = BTreeMap::new();
    for r in records {
        let s = per_label
            .entry(r.true_label.clone())
            .or_insert(LabelStats { count: 0, correct: 0 });
        s.count += 1;
        s.correct += r.correct_at(rule.top_k.max(1)) as usize;
    }
    // Strict: a label at exactly max_accuracy is not problematic.
    let labels: BTreeSet<String> = per_label
        .iter()
        .filter(|(_, s)| s.count >= rule.min_count.max(1) && s.accuracy() < rule.max_accuracy)
        .map(|(l, _)| l.clone())
        .collect();
    let marks = records
        .iter()
        .map(|r| labels.contains(&r.true_label))
        .collect();
    ProblematicLabels {
        labels,
        marks,
        per_label,
    }
}
