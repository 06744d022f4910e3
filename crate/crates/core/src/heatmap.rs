//! Activation heat maps: channel aggregation, per-image normalization,
//! bilinear upsampling and a magenta overlay.

use std::io::Cursor;
use std::str::FromStr;

use image::{ImageFormat, Rgba, RgbaImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SpatialActivation;

/// Overlay color at full heat (`#FF00AA`).
pub const HEAT_COLOR: [u8; 3] = [0xFF, 0x00, 0xAA];

#[derive(Debug, Error)]
pub enum HeatmapError {
    #[error("field is {field_h}x{field_w} but the image is {image_h}x{image_w}")]
    DimensionMismatch {
        field_h: usize,
        field_w: usize,
        image_h: usize,
        image_w: usize,
    },
    #[error("alpha must be in [0, 1] (got {0})")]
    BadAlpha(f64),
    #[error("unknown aggregation mode {0:?} (expected l2, sum or max)")]
    BadMode(String),
    #[error("target size must be at least 1x1")]
    EmptyTarget,
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    #[default]
    L2,
    Sum,
    Max,
}

impl FromStr for AggregationMode {
    type Err = HeatmapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l2" => Ok(AggregationMode::L2),
            "sum" => Ok(AggregationMode::Sum),
            "max" => Ok(AggregationMode::Max),
            other => Err(HeatmapError::BadMode(other.to_string())),
        }
    }
}

/// Row-major `height × width` scalar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), height * width, "grid size");
        Grid {
            height,
            width,
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    /// Position of the largest value (first in row-major order on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        (best / self.width, best % self.width)
    }
}

/// Image-sized heat values in `[0, 1]`.
pub type HeatField = Grid;

pub fn aggregate_channels(t: &SpatialActivation, mode: AggregationMode) -> Grid {
    let values = t
        .values()
        .chunks_exact(t.channels())
        .map(|c| match mode {
            AggregationMode::L2 => c.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt(),
            AggregationMode::Sum => c.iter().map(|&v| v as f64).sum(),
            AggregationMode::Max => c.iter().map(|&v| v as f64).fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    Grid::new(t.height(), t.width(), values)
}

/// Min-max scales to `[0, 1]`; a constant grid becomes all zeros.
pub fn normalize_field(grid: &Grid) -> Grid {
    let lo = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = if hi > lo {
        grid.values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; grid.values.len()]
    };
    Grid::new(grid.height, grid.width, values)
}

/// Source coordinate of output index `i` with corners aligned.
fn source_coord(i: usize, src: usize, dst: usize) -> f64 {
    if dst <= 1 || src <= 1 {
        0.0
    } else {
        i as f64 * (src - 1) as f64 / (dst - 1) as f64
    }
}

/// Bilinear resampling with corner-aligned sample positions: output corners
/// coincide with input corners.
pub fn upsample_bilinear(grid: &Grid, height: usize, width: usize) -> Result<Grid, HeatmapError> {
    if height == 0 || width == 0 {
        return Err(HeatmapError::EmptyTarget);
    }
    if (height, width) == (grid.height, grid.width) {
        return Ok(grid.clone());
    }
    let mut values = Vec::with_capacity(height * width);
    for i in 0..height {
        let y = source_coord(i, grid.height, height);
        let y0 = (y.floor() as usize).min(grid.height - 1);
        let y1 = (y0 + 1).min(grid.height - 1);
        let fy = y - y0 as f64;
        for j in 0..width {
            let x = source_coord(j, grid.width, width);
            let x0 = (x.floor() as usize).min(grid.width - 1);
            let x1 = (x0 + 1).min(grid.width - 1);
            let fx = x - x0 as f64;
            let top = grid.get(y0, x0) * (1.0 - fx) + grid.get(y0, x1) * fx;
            let bottom = grid.get(y1, x0) * (1.0 - fx) + grid.get(y1, x1) * fx;
            values.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    Ok(Grid::new(height, width, values))
}

/// Aggregate, normalize, then resample to the image size.
pub fn heat_field(
    t: &SpatialActivation,
    mode: AggregationMode,
    height: usize,
    width: usize,
) -> Result<HeatField, HeatmapError> {
    let normalized = normalize_field(&aggregate_channels(t, mode));
    let mut field = upsample_bilinear(&normalized, height, width)?;
    // rounding in the interpolation can step a hair outside [0, 1]
    field.values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(field)
}

fn blend(base: u8, target: u8, weight: f64) -> u8 {
    let b = base as f64;
    (b + (target as f64 - b) * weight).round() as u8
}

/// Blends the heat color over `base` with per-pixel opacity
/// `alpha · field`. Zero heat leaves a pixel untouched.
pub fn render_overlay(
    field: &HeatField,
    base: &RgbaImage,
    alpha: f64,
) -> Result<RgbaImage, HeatmapError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(HeatmapError::BadAlpha(alpha));
    }
    let (w, h) = (base.width() as usize, base.height() as usize);
    if (field.height, field.width) != (h, w) {
        return Err(HeatmapError::DimensionMismatch {
            field_h: field.height,
            field_w: field.width,
            image_h: h,
            image_w: w,
        });
    }
    let mut out = base.clone();
    for (x, y, px) in out.enumerate_pixels_mut() {
        let a = alpha * field.get(y as usize, x as usize);
        if a <= 0.0 {
            continue;
        }
        let Rgba([r, g, b, base_a]) = *px;
        *px = Rgba([
            blend(r, HEAT_COLOR[0], a),
            blend(g, HEAT_COLOR[1], a),
            blend(b, HEAT_COLOR[2], a),
            blend(base_a, 255, a),
        ]);
    }
    Ok(out)
}

pub fn decode_image(bytes: &[u8]) -> Result<RgbaImage, HeatmapError> {
    Ok(image::load_from_memory(bytes)?.to_rgba8())
}

pub fn encode_png(img: &RgbaImage) -> Result<Vec<u8>, HeatmapError> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

/// Full pipeline from tensor and encoded base image to PNG bytes.
pub fn overlay_png(
    t: &SpatialActivation,
    base_image: &[u8],
    mode: AggregationMode,
    alpha: f64,
) -> Result<Vec<u8>, HeatmapError> {
    let base = decode_image(base_image)?;
    let field = heat_field(t, mode, base.height() as usize, base.width() as usize)?;
    encode_png(&render_overlay(&field, &base, alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(h: usize, w: usize, c: usize, values: &[f32]) -> SpatialActivation {
        SpatialActivation::new("t", h, w, c, values.to_vec()).unwrap()
    }

    #[test]
    fn single_channel() {
        let t = tensor(1, 3, 1, &[-2.0, 0.0, 3.0]);
        assert_eq!(aggregate_channels(&t, AggregationMode::L2).values, vec![2.0, 0.0, 3.0]);
        assert_eq!(aggregate_channels(&t, AggregationMode::Sum).values, vec![-2.0, 0.0, 3.0]);
        assert_eq!(aggregate_channels(&t, AggregationMode::Max).values, vec![-2.0, 0.0, 3.0]);
    }

    #[test]
    fn three_four_five() {
        let t = tensor(1, 1, 3, &[3.0, 4.0, 0.0]);
        assert_eq!(aggregate_channels(&t, AggregationMode::L2).values, vec![5.0]);
        assert_eq!(aggregate_channels(&t, AggregationMode::Sum).values, vec![7.0]);
        assert_eq!(aggregate_channels(&t, AggregationMode::Max).values, vec![4.0]);
    }

    #[test]
    fn zero_tensor() {
        let t = tensor(2, 2, 2, &[0.0; 8]);
        for mode in [AggregationMode::L2, AggregationMode::Sum, AggregationMode::Max] {
            assert_eq!(aggregate_channels(&t, mode).values, vec![0.0; 4]);
        }
    }

    #[test]
    fn normalization() {
        let g = Grid::new(1, 3, vec![0.0, 5.0, 10.0]);
        assert_eq!(normalize_field(&g).values, vec![0.0, 0.5, 1.0]);
        let c = Grid::new(2, 1, vec![3.0, 3.0]);
        assert_eq!(normalize_field(&c).values, vec![0.0, 0.0]);
        let once = normalize_field(&Grid::new(1, 4, vec![2.0, -1.0, 7.0, 0.5]));
        assert_eq!(normalize_field(&once), once);
    }

    #[test]
    fn corner_aligned_upsample() {
        let g = Grid::new(1, 2, vec![0.0, 1.0]);
        assert_eq!(upsample_bilinear(&g, 1, 3).unwrap().values, vec![0.0, 0.5, 1.0]);
        let same = Grid::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(upsample_bilinear(&same, 2, 2).unwrap(), same);
        let up = upsample_bilinear(&same, 3, 3).unwrap();
        assert_eq!(up.values, vec![1.0, 1.5, 2.0, 2.0, 2.5, 3.0, 3.0, 3.5, 4.0]);
        let single = Grid::new(1, 1, vec![0.7]);
        assert_eq!(upsample_bilinear(&single, 2, 3).unwrap().values, vec![0.7; 6]);
        assert!(upsample_bilinear(&single, 0, 3).is_err());
    }

    #[test]
    fn overlay_extremes() {
        let base = RgbaImage::from_pixel(1, 1, Rgba([10, 20, 30, 255]));
        let hot = Grid::new(1, 1, vec![1.0]);
        let out = render_overlay(&hot, &base, 1.0).unwrap();
        assert_eq!(out.get_pixel(0, 0), &Rgba([0xFF, 0x00, 0xAA, 0xFF]));
        assert_eq!(render_overlay(&hot, &base, 0.0).unwrap(), base);
        let cold = Grid::new(1, 1, vec![0.0]);
        assert_eq!(render_overlay(&cold, &base, 0.8).unwrap(), base);
    }

    #[test]
    fn overlay_checks() {
        let base = RgbaImage::new(2, 1);
        let field = Grid::new(1, 1, vec![1.0]);
        assert!(matches!(
            render_overlay(&field, &base, 0.5),
            Err(HeatmapError::DimensionMismatch { .. })
        ));
        let field = Grid::new(1, 2, vec![1.0, 0.0]);
        assert!(matches!(render_overlay(&field, &base, 1.5), Err(HeatmapError::BadAlpha(_))));
    }

    #[test]
    fn png_round_trip() {
        let img = RgbaImage::from_fn(3, 2, |x, y| Rgba([x as u8 * 50, y as u8 * 90, 7, 200]));
        let bytes = encode_png(&img).unwrap();
        assert_eq!(&bytes[1..4], b"PNG");
        assert_eq!(decode_image(&bytes).unwrap(), img);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("max".parse::<AggregationMode>().unwrap(), AggregationMode::Max);
        assert!("mean".parse::<AggregationMode>().is_err());
    }
}
