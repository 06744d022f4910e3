//! Partial clustering of one cover cell: single linkage cut at the first
//! gap of a merge-distance histogram.

use super::Result;
use crate::dataset::FeatureMatrix;
use crate::geometry::{pairwise_distances, ColumnStats, CondensedDistances};

/// Minimum spanning tree edges `(a, b, weight)` over local indices (Prim).
/// The weights are exactly the single-linkage merge distances.
fn minimum_spanning_tree(dist: &CondensedDistances) -> Vec<(usize, usize, f64)> {
    let n = dist.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    in_tree[0] = true;
    for j in 1..n {
        best[j] = dist.get(0, j);
    }
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, best[next]));
        for j in 0..n {
            if !in_tree[j] {
                let d = dist.get(next, j);
                if d < best[j] {
                    best[j] = d;
                    parent[j] = next;
                }
            }
        }
    }
    edges
}

/// Cut threshold from the histogram heuristic, or `None` when every merge
/// should be applied.
///
/// The merge distances and the cell diameter are binned into `bins`
/// equal-width bins spanning their min..max; the threshold is the left edge
/// of the first empty bin. A zero-width range (a single spike) has no empty
/// bin.
pub fn histogram_threshold(merges: &[f64], diameter: f64, bins: usize) -> Option<f64> {
    let values = || merges.iter().copied().chain(std::iter::once(diameter));
    let lo = values().fold(f64::INFINITY, f64::min);
    let hi = values().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return None;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values() {
        let b = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .iter()
        .position(|&c| c == 0)
        .map(|b| lo + b as f64 * width)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Splits `members` (sorted row indices) into single-linkage clusters.
///
/// Clusters come back sorted internally, ordered by size descending and
/// then by smallest member.
pub fn cluster_cell(
    members: &[usize],
    m: &FeatureMatrix,
    stats: &ColumnStats,
    bins: usize,
) -> Result<Vec<Vec<usize>>> {
    if members.len() <= 1 {
        return Ok(vec![members.to_vec()]);
    }
    let dist = pairwise_distances(members, m, stats)?;
    let mst = minimum_spanning_tree(&dist);
    let merges: Vec<f64> = mst.iter().map(|e| e.2).collect();
    let Some(threshold) = histogram_threshold(&merges, dist.max(), bins) else {
        return Ok(vec![members.to_vec()]);
    };

    let n = members.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b, w) in &mst {
        if w < threshold {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for local in 0..n {
        let root = find(&mut parent, local);
        groups.entry(root).or_default().push(members[local]);
    }
    let mut clusters: Vec<Vec<usize>> = groups.into_values().collect();
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    Ok(clusters)
}
