//! Slow, straight-line reference implementations for tests.
//!
//! Nothing here depends on `mapperscope-core`: every routine works on plain
//! `Vec<f64>` rows and is written for obviousness, not speed.

use std::collections::{BTreeMap, BTreeSet};

/// Population mean and variance of every column; constant columns get
/// variance exactly zero.
pub fn column_variances(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    (0..d)
        .map(|j| {
            if rows.iter().all(|r| r[j] == rows[0][j]) {
                return 0.0;
            }
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n
        })
        .collect()
}

pub fn vne(x: &[f64], y: &[f64], variances: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..x.len() {
        if variances[j] > 0.0 {
            acc += (x[j] - y[j]) * (x[j] - y[j]) / variances[j];
        }
    }
    acc.sqrt()
}

// ---------------------------------------------------------------------------
// Mapper
// ---------------------------------------------------------------------------

/// Output of [`reference_mapper`]: node member lists in canonical order and
/// the edge map `(a, b) -> shared`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGraph {
    pub nodes: Vec<Vec<usize>>,
    pub edges: BTreeMap<(usize, usize), usize>,
}

/// Intervals of one axis: base bins of width (hi-lo)/res widened by
/// (gain-1)*w/2 each side, outer base edges pinned to lo and hi. A constant
/// axis has the single interval [lo-0.5, lo+0.5].
fn axis_intervals(lo: f64, hi: f64, res: usize, gain: f64) -> (Vec<(f64, f64)>, bool) {
    if hi <= lo {
        return (vec![(lo - 0.5, lo + 0.5)], true);
    }
    let w = (hi - lo) / res as f64;
    let pad = (gain - 1.0) * w / 2.0;
    let edge = |i: usize| if i == res { hi } else { lo + i as f64 * w };
    ((0..res).map(|i| (edge(i) - pad, edge(i + 1) + pad)).collect(), false)
}

/// Naive agglomerative single linkage. Returns the merge sequence
/// `(distance, cluster_a, cluster_b)` over an initial singleton numbering,
/// and lets the caller replay it.
fn agglomerate(dist: &[Vec<f64>]) -> Vec<(f64, BTreeSet<usize>, BTreeSet<usize>)> {
    let n = dist.len();
    let mut clusters: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                for &p in &clusters[a] {
                    for &q in &clusters[b] {
                        if dist[p][q] < best.0 {
                            best = (dist[p][q], a, b);
                        }
                    }
                }
            }
        }
        let (d, a, b) = best;
        let cb = clusters.remove(b);
        let ca = clusters[a].clone();
        merges.push((d, ca.clone(), cb.clone()));
        clusters[a].extend(cb);
    }
    merges
}

/// Single linkage cut at the left edge of the first empty histogram bin
/// over the merge distances plus the diameter (range min..max, `bins` bins).
pub fn reference_cluster(points: &[Vec<f64>], variances: &[f64], bins: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 1 {
        return vec![vec![0]];
    }
    let mut dist = vec![vec![0.0; n]; n];
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = vne(&points[i], &points[j], variances);
            diameter = diameter.max(dist[i][j]);
        }
    }
    let merges = agglomerate(&dist);
    let mut values: Vec<f64> = merges.iter().map(|m| m.0).collect();
    values.push(diameter);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut threshold = None;
    if hi > lo {
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0; bins];
        for v in &values {
            let b = (((v - lo) / w).floor() as usize).min(bins - 1);
            counts[b] += 1;
        }
        if let Some(b) = counts.iter().position(|&c| c == 0) {
            threshold = Some(lo + b as f64 * w);
        }
    }
    let Some(t) = threshold else {
        return vec![(0..n).collect()];
    };
    // replay merges below the threshold
    let mut clusters: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    for (d, a, b) in merges {
        if d >= t {
            continue;
        }
        let ia = clusters.iter().position(|c| c.is_superset(&a)).unwrap();
        let ib = clusters.iter().position(|c| c.is_superset(&b)).unwrap();
        if ia != ib {
            let moved = clusters[ib].clone();
            clusters[ia].extend(moved);
            clusters.remove(ib);
        }
    }
    let mut out: Vec<Vec<usize>> = clusters.into_iter().map(|c| c.into_iter().collect()).collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

/// Brute-force Mapper: enumerate every grid cell, test every point for
/// membership, cluster, and test every node pair for intersection.
pub fn reference_mapper(
    points: &[Vec<f64>],
    lens: &[Vec<f64>],
    resolution: usize,
    gain: f64,
    bins: usize,
) -> ReferenceGraph {
    let k = lens[0].len();
    let variances = column_variances(points);
    let axes: Vec<(Vec<(f64, f64)>, bool)> = (0..k)
        .map(|a| {
            let lo = lens.iter().map(|l| l[a]).fold(f64::INFINITY, f64::min);
            let hi = lens.iter().map(|l| l[a]).fold(f64::NEG_INFINITY, f64::max);
            axis_intervals(lo, hi, resolution, gain)
        })
        .collect();

    // membership per axis: with gain 1 only the first containing interval
    let in_axis = |a: usize, i: usize, v: f64| -> bool {
        let (ivs, degenerate) = &axes[a];
        let (lo, hi) = ivs[i];
        if !(lo <= v && v <= hi) {
            return false;
        }
        if gain == 1.0 || *degenerate {
            return !(0..i).any(|j| ivs[j].0 <= v && v <= ivs[j].1);
        }
        true
    };

    // all grid cells in lexicographic order
    let mut cells: Vec<Vec<usize>> = vec![vec![]];
    for (ivs, _) in &axes {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                (0..ivs.len()).map(move |i| {
                    let mut c = c.clone();
                    c.push(i);
                    c
                })
            })
            .collect();
    }

    let mut nodes = Vec::new();
    for cell in cells {
        let members: Vec<usize> = (0..points.len())
            .filter(|&p| (0..k).all(|a| in_axis(a, cell[a], lens[p][a])))
            .collect();
        if members.is_empty() {
            continue;
        }
        let sub: Vec<Vec<f64>> = members.iter().map(|&p| points[p].clone()).collect();
        for local in reference_cluster(&sub, &variances, bins) {
            nodes.push(local.iter().map(|&l| members[l]).collect::<Vec<usize>>());
        }
    }

    let mut edges = BTreeMap::new();
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let shared = nodes[a].iter().filter(|p| nodes[b].contains(p)).count();
            if shared > 0 {
                edges.insert((a, b), shared);
            }
        }
    }
    ReferenceGraph { nodes, edges }
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns the
/// eigenvalues sorted descending and the matching eigenvectors (as rows).
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

fn centered(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    rows.iter()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect()
}

fn sign_fixed(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for j in 0..v.len() {
        if v[j].abs() > v[best].abs() {
            best = j;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Reference PCA result: covariance eigenvalues and lens columns.
#[derive(Debug, Clone)]
pub struct ReferencePca {
    pub explained_variance: Vec<f64>,
    /// `k` columns of length `n`.
    pub lens_columns: Vec<Vec<f64>>,
}

fn project(xc: &[Vec<f64>], dirs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    dirs.iter()
        .map(|v| {
            xc.iter()
                .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

/// PCA from the dense `d × d` covariance matrix and Jacobi eigensolver.
pub fn dense_pca(rows: &[Vec<f64>], k: usize) -> ReferencePca {
    let xc = centered(rows);
    let (n, d) = (xc.len() as f64, xc[0].len());
    let mut cov = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            cov[a][b] = xc.iter().map(|r| r[a] * r[b]).sum::<f64>() / n;
        }
    }
    let (values, vectors) = jacobi_eigen(cov);
    let dirs: Vec<Vec<f64>> = vectors.into_iter().take(k).map(sign_fixed).collect();
    ReferencePca {
        explained_variance: values.into_iter().take(k).collect(),
        lens_columns: project(&xc, &dirs),
    }
}

/// PCA by one-sided (Hestenes) Jacobi on the centered data rows: rotate
/// pairs of rows until they are mutually orthogonal, at which point each
/// row is `σ_i v_iᵀ`. Never forms `X Xᵀ` or `Xᵀ X`.
pub fn svd_pca(rows: &[Vec<f64>], k: usize) -> ReferencePca {
    let xc = centered(rows);
    let n = xc.len();
    let mut u = xc.clone();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for j in 0..u[p].len() {
                    let (a, b) = (u[p][j], u[q][j]);
                    u[p][j] = c * a - s * b;
                    u[q][j] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<(f64, usize)> = (0..n).map(|i| (dot(&u[i], &u[i]), i)).collect();
    sv.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let dirs: Vec<Vec<f64>> = sv
        .iter()
        .take(k)
        .map(|&(s2, i)| sign_fixed(u[i].iter().map(|x| x / s2.sqrt()).collect()))
        .collect();
    ReferencePca {
        explained_variance: sv.iter().take(k).map(|&(s2, _)| s2 / n as f64).collect(),
        lens_columns: project(&xc, &dirs),
    }
}
