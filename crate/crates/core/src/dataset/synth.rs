//! Synthetic Gaussian-blob datasets with planted per-cluster error rates.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, FeatureMatrix, ImageRecord, Prediction, Result};

const N_PREDICTIONS: usize = 5;
const N_DECOYS: usize = 8;
const CENTER_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_per_cluster: usize,
    pub n_clusters: usize,
    pub dims: usize,
    pub separation: f64,
    pub error_rate_per_cluster: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: Dataset,
    /// Generating cluster of every row.
    pub assignments: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DatasetError::BadParams(msg));
        if self.n_per_cluster == 0 || self.n_clusters == 0 || self.dims == 0 {
            return bad("n_per_cluster, n_clusters and dims must be positive".into());
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return bad(format!("separation must be > 0, got {}", self.separation));
        }
        if self.error_rate_per_cluster.len() != self.n_clusters {
            return bad(format!(
                "{} error rates for {} clusters",
                self.error_rate_per_cluster.len(),
                self.n_clusters
            ));
        }
        if let Some(r) = self
            .error_rate_per_cluster
            .iter()
            .find(|r| !(0.0..=1.0).contains(*r))
        {
            return bad(format!("error rate {r} outside [0, 1]"));
        }
        Ok(())
    }

    /// Cluster centers with pairwise distance at least `separation`.
    ///
    /// With `dims >= n_clusters` the centers are `separation / √2` along
    /// random orthonormal directions (a rotated regular simplex, every pair
    /// exactly `separation` apart), so the separation is spread over all
    /// columns instead of concentrating in a few. With fewer dimensions they
    /// are spaced `separation` apart along one random unit direction.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(CENTER_STREAM);
        let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..self.dims).map(|_| rng.sample(StandardNormal)).collect()
        };
        if self.dims < self.n_clusters {
            let dir = normalized(gaussian(&mut rng));
            return (0..self.n_clusters)
                .map(|k| dir.iter().map(|v| v * k as f64 * self.separation).collect())
                .collect();
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.n_clusters);
        while basis.len() < self.n_clusters {
            let mut v = gaussian(&mut rng);
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            // Redraw on a (practically impossible) near-dependent vector.
            if norm > 1e-6 {
                basis.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        let scale = self.separation / std::f64::consts::SQRT_2;
        basis
            .into_iter()
            .map(|b| b.into_iter().map(|x| x * scale).collect())
            .collect()
    }
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub fn class_label(cluster: usize) -> String {
    format!("class_{cluster}")
}

fn draw_point(rng: &mut ChaCha8Rng, center: &[f64]) -> Vec<f32> {
    center
        .iter()
        .map(|c| (c + rng.sample::<f64, _>(StandardNormal)) as f32)
        .collect()
}

fn draw_predictions(rng: &mut ChaCha8Rng, true_label: &str, correct: bool) -> Vec<Prediction> {
    let mut conf: Vec<f64> = (0..N_PREDICTIONS).map(|_| rng.gen::<f64>() + 1e-3).collect();
    conf.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let total: f64 = conf.iter().sum();

    let decoys = sample(rng, N_DECOYS, N_PREDICTIONS);
    let mut labels: Vec<String> = decoys.iter().map(|d| format!("decoy_{d}")).collect();
    if correct {
        labels[0] = true_label.to_string();
    } else {
        // Slot N_PREDICTIONS means the true label is absent from the list.
        let slot = rng.gen_range(1..=N_PREDICTIONS);
        if slot < N_PREDICTIONS {
            labels[slot] = true_label.to_string();
        }
    }
    labels
        .into_iter()
        .zip(conf)
        .map(|(l, c)| Prediction::new(l, c / total))
        .collect()
}

/// Generates Gaussian blobs (unit variance per coordinate) around
/// [`SynthParams::centers`]. In cluster `k` exactly
/// `round(error_rate[k] * n_per_cluster)` records get a wrong top-1 label.
/// Rows are ordered cluster by cluster; the output is a pure function of the
/// parameters.
pub fn synth_dataset(params: &SynthParams) -> Result<SynthOutput> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let centers = params.centers();
    let n = params.n_per_cluster * params.n_clusters;
    let mut values = Vec::with_capacity(n * params.dims);
    let mut records = Vec::with_capacity(n);
    let mut assignments = Vec::with_capacity(n);

    for (k, center) in centers.iter().enumerate() {
        let rate = params.error_rate_per_cluster[k];
        let n_wrong = (rate * params.n_per_cluster as f64).round() as usize;
        let mut wrong = vec![false; params.n_per_cluster];
        for idx in sample(&mut rng, params.n_per_cluster, n_wrong) {
            wrong[idx] = true;
        }
        let label = class_label(k);
        for is_wrong in wrong {
            let row = records.len();
            values.extend(draw_point(&mut rng, center));
            let mut rec = ImageRecord::new(
                format!("img_{row:05}"),
                label.clone(),
                draw_predictions(&mut rng, &label, !is_wrong),
            );
            rec.image_path = format!("images/img_{row:05}.png");
            records.push(rec);
            assignments.push(k);
        }
    }

    let matrix = FeatureMatrix::new(n, params.dims, values, "synth")?;
    Ok(SynthOutput {
        dataset: Dataset::new(matrix, records)?,
        assignments,
        centers,
    })
}

/// Fresh points from cluster `cluster`'s distribution, independent of the
/// training draw (use a different `seed` than the dataset's).
pub fn sample_cluster_points(
    params: &SynthParams,
    cluster: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f32>>> {
    params.validate()?;
    if cluster >= params.n_clusters {
        return Err(DatasetError::BadParams(format!(
            "cluster {cluster} out of range for {} clusters",
            params.n_clusters
        )));
    }
    let center = &params.centers()[cluster];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cluster as u64 + 1);
    Ok((0..count)
        .map(|_| draw_point(&mut rng, center))
        .collect())
}
