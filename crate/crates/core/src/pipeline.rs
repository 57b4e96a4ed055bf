//! Detection from the three supported input kinds: per-class Hough
//! activations, per-class image-space feature maps and plain images.

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::extraction::{
    classify_by_layout, select_per_class_with, CentroidMode, ClassActivationSet, ClassPredictionSet, PerClass,
    DEFAULT_THRESHOLD,
};
use crate::frontend::{build_pyramid, gradient_magnitude, to_grayscale, FeaturePyramid, IntensityMap};
use crate::geometry::{HoughGridSpec, ImageGeometry};
use crate::hough::{aggregate_channels, aggregate_pyramid, Kernel};

/// Threshold applied to Hough maps voted from image-space feature maps.
/// Every feature pixel votes along a full sinusoid, so even clean maps
/// leave a spread of weak cells that learned activations do not have;
/// the cut sits well above [`DEFAULT_THRESHOLD`].
pub const DEFAULT_FEATURE_THRESHOLD: f64 = 0.2;

/// Feature values at or below this are zeroed before voting. Without it,
/// low-level noise summed over whole chords dominates the coarse levels.
pub const DEFAULT_FEATURE_FLOOR: f32 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    pub grid: HoughGridSpec,
    /// Cut for externally supplied Hough-space activations.
    pub threshold: f64,
    /// Cut for Hough maps voted from image-space features.
    pub feature_threshold: f64,
    /// Noise floor applied to image-space features before voting.
    pub feature_floor: f32,
    pub kernel: Kernel,
    pub centroid: CentroidMode,
}

impl DetectParams {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("threshold", self.threshold), ("feature_threshold", self.feature_threshold)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {t}")));
            }
        }
        if !(self.feature_floor >= 0.0 && self.feature_floor.is_finite()) {
            return Err(invalid(format!("feature_floor must be non-negative, got {}", self.feature_floor)));
        }
        Ok(())
    }
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            grid: HoughGridSpec::default(),
            threshold: DEFAULT_THRESHOLD,
            feature_threshold: DEFAULT_FEATURE_THRESHOLD,
            feature_floor: DEFAULT_FEATURE_FLOOR,
            kernel: Kernel::default(),
            centroid: CentroidMode::default(),
        }
    }
}

/// Strongest line per class from Hough-space activations.
pub fn detect_from_activations(
    acts: &ClassActivationSet,
    geom: &ImageGeometry,
    params: &DetectParams,
) -> Result<ClassPredictionSet> {
    select_per_class_with(acts, params.threshold, params.centroid, geom)
}

/// Votes each class's image-space feature map and picks its strongest line.
pub fn detect_from_class_features(
    channels: &PerClass<IntensityMap>,
    params: &DetectParams,
) -> Result<ClassPredictionSet> {
    let geom = channels[crate::extraction::SemanticClass::AisleLeft].geometry();
    if channels.iter().any(|(_, m)| m.geometry() != geom) {
        return Err(invalid("class feature maps have different dimensions"));
    }
    let pyramids = channels
        .0
        .iter()
        .map(|m| build_pyramid(&m.suppress_below(params.feature_floor)))
        .collect::<Result<Vec<_>>>()?;
    let mut maps = aggregate_channels(&pyramids, &params.grid, params.kernel)?
        .into_iter()
        .map(|m| m.aggregated);
    let acts = ClassActivationSet::new(PerClass::from_fn(|_| maps.next().expect("five channels")))?;
    select_per_class_with(&acts, params.feature_threshold, params.centroid, &geom)
}

/// Classical pipeline for a plain image: gradient features, one
/// class-agnostic Hough map, then layout-based class assignment.
///
/// Gradients are scaled to unit peak first so the floor is relative to the
/// strongest edge, as it is for features already in `[0, 1]`.
pub fn detect_from_image(image: &RgbImage, params: &DetectParams) -> Result<ClassPredictionSet> {
    let features = gradient_magnitude(&to_grayscale(image)?)?.scaled_to_unit_peak();
    detect_from_pyramid(&build_pyramid(&features.suppress_below(params.feature_floor))?, params)
}

pub fn detect_from_pyramid(
    pyramid: &FeaturePyramid,
    params: &DetectParams,
) -> Result<ClassPredictionSet> {
    let geom = pyramid.base_geometry();
    let agg = aggregate_pyramid(pyramid, &params.grid, params.kernel)?;
    classify_by_layout(&agg.aggregated, pyramid.level(0), params.feature_threshold, &geom)
}

/// Rounds confidences so prediction files do not depend on the last bits
/// of floating-point accumulation order.
pub fn round_confidences(set: &ClassPredictionSet) -> ClassPredictionSet {
    let mut out = set.clone();
    for class in crate::extraction::SemanticClass::ALL {
        if let Some(mut p) = set.get(class).copied() {
            p.confidence = (p.confidence * 1e6).round() / 1e6;
            out.set(class, Some(p));
        }
    }
    out
}
