//! PCA lenses.
//!
//! With few samples and many features (`n ≤ d`) the principal directions
//! are recovered from the `n × n` Gram matrix of centered rows: if
//! `X Xᵀ u = λ u` then `Xᵀ u / √λ` is a unit principal direction with
//! covariance eigenvalue `λ / n`. Otherwise the `d × d` covariance is
//! decomposed directly. Both routes give the same components up to rounding.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GeometryError, Result};
use crate::dataset::FeatureMatrix;

const MAX_EIGEN_ITERATIONS: usize = 10_000;
/// Eigenvalues below this fraction of the largest are treated as exact zeros.
const NULL_EIGEN_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaMethod {
    /// Gram route when `n ≤ d`, covariance route otherwise.
    #[default]
    Auto,
    Gram,
    Covariance,
}

/// Lens coordinates of every row (`n_rows × k`, row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensValues {
    pub n_rows: usize,
    pub k: usize,
    pub values: Vec<f64>,
    /// Covariance eigenvalue per lens axis; empty for lenses not produced by PCA.
    pub explained_variance: Vec<f64>,
}

impl LensValues {
    /// Wraps precomputed lens coordinates.
    pub fn new(n_rows: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || n_rows == 0 || values.len() != n_rows * k {
            return Err(GeometryError::BadLens(format!(
                "{} values for {n_rows} rows of dimension {k}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::BadLens("non-finite lens value".into()));
        }
        Ok(LensValues {
            n_rows,
            k,
            values,
            explained_variance: Vec::new(),
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn get(&self, i: usize, axis: usize) -> f64 {
        self.values[i * self.k + axis]
    }

    pub fn column(&self, axis: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, axis)).collect()
    }

    /// `(min, max)` of one axis.
    pub fn range(&self, axis: usize) -> (f64, f64) {
        (0..self.n_rows)
            .map(|i| self.get(i, axis))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Fitted PCA: the lens plus what is needed to project new points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaFit {
    pub lens: LensValues,
    pub mean: Vec<f64>,
    /// `k` unit directions of length `d`; all zeros for null components.
    pub components: Vec<Vec<f64>>,
    pub method: PcaMethod,
}

impl PcaFit {
    /// Lens coordinates of an unseen point: `(x − mean) · components`.
    pub fn project(&self, x: &[f32]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|v| project_centered(x, &self.mean, v))
            .collect())
    }
}

fn project_centered(x: &[f32], mean: &[f64], direction: &[f64]) -> f64 {
    x.iter()
        .zip(mean)
        .zip(direction)
        .map(|((&a, m), v)| (a as f64 - m) * v)
        .sum()
}

fn column_means(m: &FeatureMatrix) -> Vec<f64> {
    let mut sums = vec![0.0; m.n_cols()];
    for row in m.rows() {
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += v as f64;
        }
    }
    sums.iter().map(|s| s / m.n_rows() as f64).collect()
}

fn centered_dot(a: &[f32], b: &[f32], mean: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mean)
        .map(|((&x, &y), m)| (x as f64 - m) * (y as f64 - m))
        .sum()
}

fn gram_matrix(m: &FeatureMatrix, mean: &[f64]) -> DMatrix<f64> {
    let n = m.n_rows();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| centered_dot(m.row(i), m.row(j), mean))
                .collect()
        })
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            g[(i, i + off)] = v;
            g[(i + off, i)] = v;
        }
    }
    g
}

fn covariance_matrix(m: &FeatureMatrix, mean: &[f64]) -> DMatrix<f64> {
    let (n, d) = (m.n_rows(), m.n_cols());
    let upper: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|a| {
            let mut acc = vec![0.0; d - a];
            for row in m.rows() {
                let da = row[a] as f64 - mean[a];
                for (off, s) in acc.iter_mut().enumerate() {
                    *s += da * (row[a + off] as f64 - mean[a + off]);
                }
            }
            acc.iter().map(|s| s / n as f64).collect()
        })
        .collect();
    let mut c = DMatrix::zeros(d, d);
    for (a, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            c[(a, a + off)] = v;
            c[(a + off, a)] = v;
        }
    }
    c
}

/// Eigenpairs sorted by eigenvalue, largest first (index order on ties).
fn sorted_eigen(mat: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(mat, f64::EPSILON, MAX_EIGEN_ITERATIONS)
        .ok_or(GeometryError::EigenNotConverged)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Ok((values, vectors))
}

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = j;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits a `k`-component PCA and projects every row.
pub fn fit_pca(m: &FeatureMatrix, k: usize, method: PcaMethod) -> Result<PcaFit> {
    let (n, d) = (m.n_rows(), m.n_cols());
    if n < 2 || k == 0 || k > (n - 1).min(d) {
        return Err(GeometryError::BadK {
            k,
            n_rows: n,
            n_cols: d,
        });
    }
    let first = m.row(0);
    if m.rows().all(|r| r == first) {
        return Err(GeometryError::DegenerateData);
    }
    let mean = column_means(m);
    let method = match method {
        PcaMethod::Auto if n <= d => PcaMethod::Gram,
        PcaMethod::Auto => PcaMethod::Covariance,
        other => other,
    };

    let mut explained = Vec::with_capacity(k);
    let mut components = Vec::with_capacity(k);
    match method {
        PcaMethod::Gram => {
            let (lambdas, u) = sorted_eigen(gram_matrix(m, &mean))?;
            let floor = lambdas[0].max(0.0) * NULL_EIGEN_RATIO;
            for c in 0..k {
                let lambda = lambdas[c];
                if lambda <= floor {
                    explained.push(0.0);
                    components.push(vec![0.0; d]);
                    continue;
                }
                let scale = lambda.sqrt();
                let mut v = vec![0.0; d];
                for (i, row) in m.rows().enumerate() {
                    let w = u[(i, c)] / scale;
                    for ((vj, &x), mu) in v.iter_mut().zip(row).zip(&mean) {
                        *vj += w * (x as f64 - mu);
                    }
                }
                fix_sign(&mut v);
                explained.push(lambda / n as f64);
                components.push(v);
            }
        }
        PcaMethod::Covariance => {
            let (lambdas, vecs) = sorted_eigen(covariance_matrix(m, &mean))?;
            let floor = lambdas[0].max(0.0) * NULL_EIGEN_RATIO;
            for c in 0..k {
                if lambdas[c] <= floor {
                    explained.push(0.0);
                    components.push(vec![0.0; d]);
                    continue;
                }
                let mut v: Vec<f64> = vecs.column(c).iter().copied().collect();
                fix_sign(&mut v);
                explained.push(lambdas[c]);
                components.push(v);
            }
        }
        PcaMethod::Auto => unreachable!("resolved above"),
    }

    let values: Vec<f64> = m
        .rows()
        .flat_map(|row| {
            components
                .iter()
                .map(|v| project_centered(row, &mean, v))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(PcaFit {
        lens: LensValues {
            n_rows: n,
            k,
            values,
            explained_variance: explained,
        },
        mean,
        components,
        method,
    })
}

/// Top-`k` PCA lens of the raw (not variance-normalized) matrix.
pub fn pca_lens(m: &FeatureMatrix, k: usize) -> Result<LensValues> {
    fit_pca(m, k, PcaMethod::Auto).map(|fit| fit.lens)
}
