//! Deterministic feature front end: luma, Sobel gradient magnitude and a
//! four-level average-pooling pyramid.

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::ImageGeometry;

pub const PYRAMID_LEVELS: usize = 4;

/// Non-negative row-major intensity raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl IntensityMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!(
                "intensity map dimensions must be positive, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(invalid(format!(
                "intensity map {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!(
                "intensity at ({}, {}) is {}, values must be finite and non-negative",
                idx % width,
                idx / width,
                values[idx]
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "empty intensity map");
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.values[y * self.width..(y + 1) * self.width]
    }

    pub fn geometry(&self) -> ImageGeometry {
        ImageGeometry {
            width: self.width as u32,
            height: self.height as u32,
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// Copy with every value at or below `floor` set to zero.
    pub fn suppress_below(&self, floor: f32) -> IntensityMap {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            if *v <= floor {
                *v = 0.0;
            }
        }
        out
    }

    /// Copy divided by its largest value; an all-zero map is returned as is.
    pub fn scaled_to_unit_peak(&self) -> IntensityMap {
        let peak = self.values.iter().copied().fold(0.0f32, f32::max);
        let mut out = self.clone();
        if peak > 0.0 {
            for v in out.values.iter_mut() {
                *v /= peak;
            }
        }
        out
    }
}

/// Four-scale feature stack; level `k` is `ceil(W/2^k) × ceil(H/2^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid {
    levels: [IntensityMap; PYRAMID_LEVELS],
}

impl FeaturePyramid {
    /// Assembles a pyramid from explicit levels; level `k` must be
    /// `ceil(W/2^k) × ceil(H/2^k)` of level 0.
    pub fn from_levels(levels: [IntensityMap; PYRAMID_LEVELS]) -> Result<Self> {
        let (w, h) = (levels[0].width, levels[0].height);
        for (k, l) in levels.iter().enumerate() {
            let want = (w.div_ceil(1 << k), h.div_ceil(1 << k));
            if (l.width, l.height) != want {
                return Err(invalid(format!(
                    "pyramid level {k} is {}x{}, expected {}x{}",
                    l.width, l.height, want.0, want.1
                )));
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[IntensityMap; PYRAMID_LEVELS] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &IntensityMap {
        &self.levels[k]
    }

    pub fn base_geometry(&self) -> ImageGeometry {
        self.levels[0].geometry()
    }
}

/// ITU-R 601 luma scaled to `[0, 1]`.
pub fn to_grayscale(image: &RgbImage) -> Result<IntensityMap> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(invalid("cannot convert an empty image"));
    }
    let values = image
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0;
            ((0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64) / 255.0) as f32
        })
        .collect();
    IntensityMap::new(w as usize, h as usize, values)
}

/// Sobel gradient magnitude with replicate padding.
pub fn gradient_magnitude(map: &IntensityMap) -> Result<IntensityMap> {
    let (w, h) = (map.width, map.height);
    if w < 3 || h < 3 {
        return Err(invalid(format!(
            "gradient needs at least a 3x3 map, got {w}x{h}"
        )));
    }
    let mut out = vec![0.0f32; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let rows = [
            map.row(y.saturating_sub(1)),
            map.row(y),
            map.row((y + 1).min(h - 1)),
        ];
        for (x, dst) in row.iter_mut().enumerate() {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let [top, mid, bot] = rows;
            let gx = (top[xr] - top[xl]) + 2.0 * (mid[xr] - mid[xl]) + (bot[xr] - bot[xl]);
            let gy = (bot[xl] + 2.0 * bot[x] + bot[xr]) - (top[xl] + 2.0 * top[x] + top[xr]);
            *dst = gx.hypot(gy);
        }
    });
    IntensityMap::new(w, h, out)
}

fn average_pool(map: &IntensityMap) -> IntensityMap {
    let (w, h) = (map.width.div_ceil(2), map.height.div_ceil(2));
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            let mut n = 0u32;
            for sy in 2 * y..(2 * y + 2).min(map.height) {
                for sx in 2 * x..(2 * x + 2).min(map.width) {
                    acc += map.get(sx, sy) as f64;
                    n += 1;
                }
            }
            values.push((acc / n as f64) as f32);
        }
    }
    IntensityMap {
        width: w,
        height: h,
        values,
    }
}

pub fn build_pyramid(map: &IntensityMap) -> Result<FeaturePyramid> {
    if map.width < 8 || map.height < 8 {
        return Err(invalid(format!(
            "pyramid needs at least an 8x8 map, got {}x{}",
            map.width, map.height
        )));
    }
    let l1 = average_pool(map);
    let l2 = average_pool(&l1);
    let l3 = average_pool(&l2);
    Ok(FeaturePyramid {
        levels: [map.clone(), l1, l2, l3],
    })
}

/// Grayscale, then gradient magnitude, then pyramid.
pub fn image_features(image: &RgbImage) -> Result<FeaturePyramid> {
    build_pyramid(&gradient_magnitude(&to_grayscale(image)?)?)
}
