use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GeometryError, Result};
use crate::dataset::FeatureMatrix;

/// Per-column means and population variances. Constant columns are
/// inactive and take no part in distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub active_mask: Vec<bool>,
}

impl ColumnStats {
    /// Two-pass mean/variance in `f64`. A column whose values are all equal
    /// gets variance exactly 0 regardless of rounding in the mean.
    pub fn from_matrix(m: &FeatureMatrix) -> Self {
        let (n, d) = (m.n_rows(), m.n_cols());
        let mut sums = vec![0.0f64; d];
        for row in m.rows() {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v as f64;
            }
        }
        let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();

        let mut sq = vec![0.0f64; d];
        let mut constant = vec![true; d];
        let first = m.row(0);
        for row in m.rows() {
            for j in 0..d {
                let v = row[j];
                let dev = v as f64 - means[j];
                sq[j] += dev * dev;
                constant[j] &= v == first[j];
            }
        }
        let variances: Vec<f64> = sq
            .iter()
            .zip(&constant)
            .map(|(&s, &c)| if c { 0.0 } else { s / n as f64 })
            .collect();
        let active_mask = variances.iter().map(|&v| v > 0.0).collect();
        ColumnStats {
            means,
            variances,
            active_mask,
        }
    }

    pub fn dims(&self) -> usize {
        self.variances.len()
    }

    pub fn n_active(&self) -> usize {
        self.active_mask.iter().filter(|&&a| a).count()
    }
}

pub fn column_stats(m: &FeatureMatrix) -> ColumnStats {
    ColumnStats::from_matrix(m)
}

fn check_len(len: usize, stats: &ColumnStats) -> Result<()> {
    if len != stats.dims() {
        return Err(GeometryError::DimensionMismatch {
            expected: stats.dims(),
            got: len,
        });
    }
    Ok(())
}

#[inline]
fn vne_iter(pairs: impl Iterator<Item = (f64, f64)>, stats: &ColumnStats) -> f64 {
    let mut acc = 0.0f64;
    for (j, (a, b)) in pairs.enumerate() {
        if stats.active_mask[j] {
            let diff = a - b;
            acc += diff * diff / stats.variances[j];
        }
    }
    acc.sqrt()
}

/// `sqrt(Σ_active (x_j − y_j)² / var_j)`.
pub fn vne_distance(x: &[f32], y: &[f32], stats: &ColumnStats) -> Result<f64> {
    check_len(x.len(), stats)?;
    check_len(y.len(), stats)?;
    Ok(vne_iter(
        x.iter().zip(y).map(|(&a, &b)| (a as f64, b as f64)),
        stats,
    ))
}

/// [`vne_distance`] for `f64` vectors such as centroids.
pub fn vne_distance_f64(x: &[f64], y: &[f64], stats: &ColumnStats) -> Result<f64> {
    check_len(x.len(), stats)?;
    check_len(y.len(), stats)?;
    Ok(vne_iter(x.iter().copied().zip(y.iter().copied()), stats))
}

pub(crate) fn vne_rows(m: &FeatureMatrix, i: usize, j: usize, stats: &ColumnStats) -> f64 {
    vne_iter(
        m.row(i)
            .iter()
            .zip(m.row(j))
            .map(|(&a, &b)| (a as f64, b as f64)),
        stats,
    )
}

/// Upper triangle (`i < j`) of a symmetric distance matrix, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDistances {
    n: usize,
    values: Vec<f64>,
}

impl CondensedDistances {
    /// Number of points, not of stored pairs.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Distance between the `i`-th and `j`-th listed points.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[self.offset(i, j)],
            std::cmp::Ordering::Greater => self.values[self.offset(j, i)],
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// VNE distances between all pairs of the listed rows. Rows are computed in
/// parallel; each entry is an independent sequential sum, so the result does
/// not depend on the thread count.
pub fn pairwise_distances(
    points: &[usize],
    m: &FeatureMatrix,
    stats: &ColumnStats,
) -> Result<CondensedDistances> {
    check_len(m.n_cols(), stats)?;
    if let Some(&bad) = points.iter().find(|&&p| p >= m.n_rows()) {
        return Err(GeometryError::IndexOutOfRange {
            index: bad,
            n_rows: m.n_rows(),
        });
    }
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            ((a + 1)..n)
                .map(|b| vne_rows(m, points[a], points[b], stats))
                .collect()
        })
        .collect();
    Ok(CondensedDistances {
        n,
        values: rows.into_iter().flatten().collect(),
    })
}
