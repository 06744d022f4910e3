use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_unique_ids, DatasetError, Result};

/// One ranked prediction. Serialized as a `[label, confidence]` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "(String, f64)", into = "(String, f64)")]
pub struct Prediction {
    pub label: String,
    pub confidence: f64,
}

impl Prediction {
    pub fn new(label: impl Into<String>, confidence: f64) -> Self {
        Prediction {
            label: label.into(),
            confidence,
        }
    }
}

impl From<(String, f64)> for Prediction {
    fn from((label, confidence): (String, f64)) -> Self {
        Prediction { label, confidence }
    }
}

impl From<Prediction> for (String, f64) {
    fn from(p: Prediction) -> Self {
        (p.label, p.confidence)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub image_id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub image_path: String,
    pub true_label: String,
    pub predictions: Vec<Prediction>,
}

impl ImageRecord {
    pub fn new(
        image_id: impl Into<String>,
        true_label: impl Into<String>,
        predictions: Vec<Prediction>,
    ) -> Self {
        ImageRecord {
            image_id: image_id.into(),
            image_path: String::new(),
            true_label: true_label.into(),
            predictions,
        }
    }

    pub fn top1(&self) -> &str {
        &self.predictions[0].label
    }

    /// True when the ground-truth label is among the first `k` predictions.
    pub fn correct_at(&self, k: usize) -> bool {
        self.predictions
            .iter()
            .take(k)
            .any(|p| p.label == self.true_label)
    }
}

fn validate(rec: &ImageRecord, line_no: usize) -> Result<()> {
    let malformed = |reason: &str| DatasetError::MalformedLine {
        line_no,
        reason: reason.to_string(),
    };
    if rec.predictions.is_empty() {
        return Err(malformed("predictions must not be empty"));
    }
    if rec
        .predictions
        .iter()
        .any(|p| !(0.0..=1.0).contains(&p.confidence))
    {
        return Err(malformed("confidence outside [0, 1]"));
    }
    if rec
        .predictions
        .windows(2)
        .any(|w| w[1].confidence > w[0].confidence)
    {
        return Err(DatasetError::UnsortedPredictions(line_no));
    }
    Ok(())
}

/// Parses JSON-lines metadata. Line numbers in errors are 1-based.
pub fn parse_metadata(text: &str) -> Result<Vec<ImageRecord>> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let rec: ImageRecord =
            serde_json::from_str(line).map_err(|e| DatasetError::MalformedLine {
                line_no,
                reason: e.to_string(),
            })?;
        validate(&rec, line_no)?;
        records.push(rec);
    }
    check_unique_ids(&records)?;
    Ok(records)
}

pub fn load_metadata(path: &Path) -> Result<Vec<ImageRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    parse_metadata(&text)
}

pub fn write_metadata(records: &[ImageRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for rec in records {
        let line = serde_json::to_string(rec).expect("records always serialize");
        writeln!(w, "{line}").map_err(|e| DatasetError::io(path, e))?;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_record() {
        let recs =
            parse_metadata(r#"{"image_id":"a","true_label":"tabby","predictions":[["tabby",0.9]]}"#)
                .unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].image_path, "");
        assert_eq!(recs[0].predictions[0], Prediction::new("tabby", 0.9));
        assert!(recs[0].correct_at(1));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let line = r#"{"image_id":"a","true_label":"t","predictions":[["t",0.5]]}"#;
        let err = parse_metadata(&format!("{line}\n{line}\n")).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateImageId(id) if id == "a"));
    }

    #[test]
    fn unsorted_predictions_rejected_not_sorted() {
        let text = concat!(
            r#"{"image_id":"a","true_label":"x","predictions":[["x",0.9]]}"#,
            "\n",
            r#"{"image_id":"b","true_label":"x","predictions":[["x",0.2],["y",0.8]]}"#
        );
        assert!(matches!(
            parse_metadata(text),
            Err(DatasetError::UnsortedPredictions(2))
        ));
    }

    #[test]
    fn ties_keep_input_order() {
        let recs = parse_metadata(
            r#"{"image_id":"a","true_label":"x","predictions":[["y",0.5],["x",0.5]]}"#,
        )
        .unwrap();
        assert_eq!(recs[0].top1(), "y");
    }

    #[test]
    fn malformed_lines_report_position() {
        let text = concat!(
            r#"{"image_id":"a","true_label":"x","predictions":[["x",0.9]]}"#,
            "\n",
            "not json"
        );
        assert!(matches!(
            parse_metadata(text),
            Err(DatasetError::MalformedLine { line_no: 2, .. })
        ));
        // unknown keys, empty predictions and out-of-range confidences
        for bad in [
            r#"{"image_id":"a","true_label":"x","predictions":[["x",0.9]],"extra":1}"#,
            r#"{"image_id":"a","true_label":"x","predictions":[]}"#,
            r#"{"image_id":"a","true_label":"x","predictions":[["x",1.5]]}"#,
            r#"{"image_id":"a","predictions":[["x",0.5]]}"#,
        ] {
            assert!(
                matches!(parse_metadata(bad), Err(DatasetError::MalformedLine { line_no: 1, .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn blank_line_in_middle_rejected() {
        let line = r#"{"image_id":"a","true_label":"t","predictions":[["t",0.5]]}"#;
        assert!(matches!(
            parse_metadata(&format!("{line}\n\n")),
            Err(DatasetError::MalformedLine { line_no: 2, .. })
        ));
    }

    #[test]
    fn serialized_keys() {
        let mut rec = ImageRecord::new("a", "t", vec![Prediction::new("t", 0.25)]);
        assert_eq!(
            serde_json::to_string(&rec).unwrap(),
            r#"{"image_id":"a","true_label":"t","predictions":[["t",0.25]]}"#
        );
        rec.image_path = "img/a.png".into();
        assert!(serde_json::to_string(&rec).unwrap().contains(r#""image_path":"img/a.png""#));
    }
}
