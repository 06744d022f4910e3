use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MapperError, Result};
use crate::geometry::LensValues;

/// Resolution, gain and the lens range of every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub resolution: usize,
    pub gain: f64,
    pub ranges: Vec<(f64, f64)>,
}

impl CoverSpec {
    pub fn for_lens(lens: &LensValues, resolution: usize, gain: f64) -> Result<Self> {
        if resolution == 0 {
            return Err(MapperError::BadResolution(resolution));
        }
        if !(gain.is_finite() && gain >= 1.0) {
            return Err(MapperError::BadGain(gain));
        }
        Ok(CoverSpec {
            resolution,
            gain,
            ranges: (0..lens.k).map(|a| lens.range(a)).collect(),
        })
    }
}

/// The intervals along one lens axis.
///
/// Base bins have width `w = (hi − lo) / resolution`; interval `i` is base
/// bin `i` widened by `(gain − 1)·w/2` on both sides. The outermost base
/// edges are pinned to `lo` and `hi` exactly so that the extreme points are
/// always covered.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisCover {
    lo: f64,
    hi: f64,
    resolution: usize,
    width: f64,
    gain: f64,
}

impl AxisCover {
    pub fn new(lo: f64, hi: f64, resolution: usize, gain: f64) -> Self {
        if hi <= lo {
            // Degenerate axis: one interval around the single lens value.
            return AxisCover {
                lo: lo - 0.5,
                hi: lo + 0.5,
                resolution: 1,
                width: 1.0,
                gain: 1.0,
            };
        }
        AxisCover {
            lo,
            hi,
            resolution,
            width: (hi - lo) / resolution as f64,
            gain,
        }
    }

    /// Number of intervals actually used (1 for a degenerate axis).
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    fn edge(&self, i: usize) -> f64 {
        if i == self.resolution {
            self.hi
        } else {
            self.lo + i as f64 * self.width
        }
    }

    /// Closed interval `[lo_i, hi_i]` of cell `i`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let pad = (self.gain - 1.0) * self.width / 2.0;
        (self.edge(i) - pad, self.edge(i + 1) + pad)
    }

    /// Indices of the intervals containing `v`, ascending. With gain 1 the
    /// intervals only touch, and a boundary value goes to the lower index.
    pub fn containing(&self, v: f64) -> Vec<usize> {
        let base = ((v - self.lo) / self.width).floor();
        let base = if base.is_finite() { base.max(0.0) as usize } else { 0 };
        let reach = self.gain.ceil() as usize + 1;
        let first = base.saturating_sub(reach);
        let last = (base + reach).min(self.resolution - 1);
        let mut hits = Vec::new();
        for i in first..=last {
            let (a, b) = self.interval(i);
            if a <= v && v <= b {
                hits.push(i);
                if self.gain == 1.0 {
                    break;
                }
            }
        }
        hits
    }
}

/// Product cover over all lens axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    axes: Vec<AxisCover>,
}

impl Cover {
    pub fn new(spec: &CoverSpec) -> Self {
        Cover {
            axes: spec
                .ranges
                .iter()
                .map(|&(lo, hi)| AxisCover::new(lo, hi, spec.resolution, spec.gain))
                .collect(),
        }
    }

    pub fn axes(&self) -> &[AxisCover] {
        &self.axes
    }

    /// Grid indices of every cell whose box contains `point`, in
    /// lexicographic order.
    pub fn cells_containing(&self, point: &[f64]) -> Vec<Vec<usize>> {
        let mut cells: Vec<Vec<usize>> = vec![Vec::new()];
        for (axis, &v) in self.axes.iter().zip(point) {
            let hits = axis.containing(v);
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    hits.iter().map(move |&i| {
                        let mut c = prefix.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        cells
    }

    pub fn bounds(&self, cell: &[usize]) -> Vec<(f64, f64)> {
        self.axes
            .iter()
            .zip(cell)
            .map(|(a, &i)| a.interval(i))
            .collect()
    }
}

/// One non-empty cell of the cover and the rows whose lens values fall in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverCell {
    pub axis_indices: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
    pub member_points: Vec<usize>,
}

/// Assigns every row to all cells containing its lens value. Empty cells are
/// dropped; cells come back in lexicographic index order.
pub fn build_cover(lens: &LensValues, resolution: usize, gain: f64) -> Result<Vec<CoverCell>> {
    let spec = CoverSpec::for_lens(lens, resolution, gain)?;
    Ok(assign_cells(lens, &Cover::new(&spec)))
}

pub(crate) fn assign_cells(lens: &LensValues, cover: &Cover) -> Vec<CoverCell> {
    let mut cells: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in 0..lens.n_rows {
        for cell in cover.cells_containing(lens.row(i)) {
            cells.entry(cell).or_default().push(i);
        }
    }
    cells
        .into_iter()
        .map(|(axis_indices, member_points)| CoverCell {
            bounds: cover.bounds(&axis_indices),
            axis_indices,
            member_points,
        })
        .collect()
}
