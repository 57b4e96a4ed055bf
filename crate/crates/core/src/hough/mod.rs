//! Hough-space voting, normalization and multi-scale aggregation.

mod compare;
mod optimized;
mod reference;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frontend::{FeaturePyramid, IntensityMap, PYRAMID_LEVELS};
use crate::geometry::{HoughGridSpec, ImageGeometry};

pub use compare::{compare_kernels, max_relative_error, KernelComparison};
pub use optimized::vote_optimized;
pub use reference::vote_reference;

/// Accumulator over `(theta-bin, r-bin)`, stored theta-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HoughMap {
    spec: HoughGridSpec,
    values: Vec<f32>,
}

impl HoughMap {
    pub fn zeros(spec: HoughGridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.cells()],
        }
    }

    pub fn new(spec: HoughGridSpec, values: Vec<f32>) -> Result<Self> {
        if values.len() != spec.cells() {
            return Err(invalid(format!(
                "hough map {}x{} needs {} values, got {}",
                spec.n_theta,
                spec.n_r,
                spec.cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("hough map values must be finite and non-negative"));
        }
        Ok(Self { spec, values })
    }

    pub(crate) fn from_accumulator(spec: HoughGridSpec, acc: &[f64]) -> Self {
        Self {
            spec,
            values: acc.iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn spec(&self) -> HoughGridSpec {
        self.spec
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.values[i * self.spec.n_r + j]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }

    pub fn max(&self) -> f32 {
        self.values.iter().copied().fold(0.0, f32::max)
    }

    /// Cell with the largest value; ties go to the smallest `(i, j)`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        (best / self.spec.n_r, best % self.spec.n_r)
    }

    pub fn scaled(&self, factor: f32) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Voting kernel selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Reference,
    #[default]
    Optimized,
}

impl Kernel {
    pub fn vote(
        self,
        map: &IntensityMap,
        spec: &HoughGridSpec,
        geom: &ImageGeometry,
    ) -> Result<HoughMap> {
        match self {
            Kernel::Reference => vote_reference(map, spec, geom),
            Kernel::Optimized => vote_optimized(map, spec, geom),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Reference => "reference",
            Kernel::Optimized => "optimized",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(Kernel::Reference),
            "optimized" => Ok(Kernel::Optimized),
            other => Err(invalid(format!(
                "unknown kernel {other:?}, expected reference or optimized"
            ))),
        }
    }
}

pub(crate) fn check_input(
    map: &IntensityMap,
    spec: &HoughGridSpec,
    geom: &ImageGeometry,
) -> Result<()> {
    if map.width() != geom.width as usize || map.height() != geom.height as usize {
        return Err(invalid(format!(
            "map is {}x{} but geometry is {}x{}",
            map.width(),
            map.height(),
            geom.width,
            geom.height
        )));
    }
    if spec.n_theta < 2 || spec.n_r < 2 {
        return Err(invalid("hough grid needs at least 2x2 bins"));
    }
    Ok(())
}

/// Pixel center relative to the image center along one axis.
#[inline(always)]
pub(crate) fn pixel_offset(p: usize, half: f64) -> f64 {
    (p as f64 + 0.5) - half
}

fn min_max(values: &[f32]) -> (f32, f32) {
    values
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn rescale(values: &[f32], lo: f32, hi: f32) -> Vec<f32> {
    // also catches NaN bounds
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![0.0; values.len()];
    }
    let (lo, span) = (lo as f64, (hi - lo) as f64);
    values
        .iter()
        .map(|&v| (((v as f64 - lo) / span) as f32).clamp(0.0, 1.0))
        .collect()
}

/// Min-max rescale to `[0, 1]`; a constant map becomes all zeros.
pub fn normalize(map: &HoughMap) -> HoughMap {
    let (lo, hi) = min_max(&map.values);
    HoughMap {
        spec: map.spec,
        values: rescale(&map.values, lo, hi),
    }
}

/// Min-max rescale of several maps against their shared range.
pub fn normalize_jointly(maps: &[HoughMap]) -> Vec<HoughMap> {
    let (lo, hi) = maps
        .iter()
        .map(|m| min_max(&m.values))
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), (c, d)| {
            (a.min(c), b.max(d))
        });
    maps.iter()
        .map(|m| HoughMap {
            spec: m.spec,
            values: rescale(&m.values, lo, hi),
        })
        .collect()
}

/// Bilinear resampling with bin centers as sample points and edge clamping.
pub fn interpolate(map: &HoughMap, target: &HoughGridSpec) -> HoughMap {
    if map.spec == *target {
        return map.clone();
    }
    let src = map.spec;
    let axis = |n_src: usize, n_dst: usize| -> Vec<(usize, usize, f64)> {
        (0..n_dst)
            .map(|k| {
                let pos = ((k as f64 + 0.5) * n_src as f64 / n_dst as f64 - 0.5)
                    .clamp(0.0, (n_src - 1) as f64);
                let lo = pos.floor() as usize;
                let hi = (lo + 1).min(n_src - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    };
    let rows = axis(src.n_theta, target.n_theta);
    let cols = axis(src.n_r, target.n_r);
    let mut values = Vec::with_capacity(target.cells());
    for &(i0, i1, ti) in &rows {
        for &(j0, j1, tj) in &cols {
            let v00 = map.get(i0, j0) as f64;
            let v01 = map.get(i0, j1) as f64;
            let v10 = map.get(i1, j0) as f64;
            let v11 = map.get(i1, j1) as f64;
            let top = v00 + (v01 - v00) * tj;
            let bot = v10 + (v11 - v10) * tj;
            values.push((top + (bot - top) * ti).max(0.0) as f32);
        }
    }
    HoughMap {
        spec: *target,
        values,
    }
}

/// Grid used at pyramid level `k`: each axis halves per level, floored at 2.
pub fn level_spec(base: &HoughGridSpec, k: usize) -> HoughGridSpec {
    let scale = |n: usize| ((n as f64 / (1u64 << k) as f64).round() as usize).max(2);
    HoughGridSpec {
        n_theta: scale(base.n_theta),
        n_r: scale(base.n_r),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiScaleHough {
    /// Raw accumulators, one per pyramid level at that level's grid.
    pub per_level: Vec<HoughMap>,
    /// Mean of the normalized, resampled levels, renormalized to `[0, 1]`.
    pub aggregated: HoughMap,
}

pub fn aggregate_pyramid(
    pyramid: &FeaturePyramid,
    base_spec: &HoughGridSpec,
    kernel: Kernel,
) -> Result<MultiScaleHough> {
    let mut out = aggregate_channels(std::slice::from_ref(pyramid), base_spec, kernel)?;
    Ok(out.pop().expect("one channel in, one out"))
}

/// Multi-scale aggregation over several feature channels of one image.
///
/// Each level is min-max normalized against the range shared by all
/// channels at that level, and the final per-channel means are normalized
/// jointly as well, so relative strength between channels survives. With a
/// single channel this is plain per-map normalization.
pub fn aggregate_channels(
    pyramids: &[FeaturePyramid],
    base_spec: &HoughGridSpec,
    kernel: Kernel,
) -> Result<Vec<MultiScaleHough>> {
    let Some(first) = pyramids.first() else {
        return Ok(Vec::new());
    };
    let base_geom = first.base_geometry();
    if pyramids.iter().any(|p| p.base_geometry() != base_geom) {
        return Err(invalid("feature channels have different dimensions"));
    }

    let mut per_level: Vec<Vec<HoughMap>> = vec![Vec::with_capacity(PYRAMID_LEVELS); pyramids.len()];
    let mut sums: Vec<Vec<f64>> = vec![vec![0.0; base_spec.cells()]; pyramids.len()];
    for k in 0..PYRAMID_LEVELS {
        let spec = level_spec(base_spec, k);
        let raw = pyramids
            .iter()
            .map(|p| {
                let level = p.level(k);
                kernel.vote(level, &spec, &level.geometry())
            })
            .collect::<Result<Vec<_>>>()?;
        for (acc, norm) in sums.iter_mut().zip(normalize_jointly(&raw)) {
            for (a, v) in acc.iter_mut().zip(interpolate(&norm, base_spec).values()) {
                *a += *v as f64;
            }
        }
        for (levels, raw) in per_level.iter_mut().zip(raw) {
            levels.push(raw);
        }
    }

    let means: Vec<HoughMap> = sums
        .iter()
        .map(|acc| {
            let mean: Vec<f64> = acc.iter().map(|v| v / PYRAMID_LEVELS as f64).collect();
            HoughMap::from_accumulator(*base_spec, &mean)
        })
        .collect();
    Ok(normalize_jointly(&means)
        .into_iter()
        .zip(per_level)
        .map(|(aggregated, per_level)| MultiScaleHough {
            per_level,
            aggregated,
        })
        .collect())
}
