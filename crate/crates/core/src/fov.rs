//! Field-of-view quality labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extraction::{ClassPredictionSet, SemanticClass};
use crate::synth::{project_scene, Camera, SceneSpec, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FovLabel {
    Good,
    Bad,
}

impl FovLabel {
    pub fn from_good(good: bool) -> Self {
        if good {
            FovLabel::Good
        } else {
            FovLabel::Bad
        }
    }

    pub fn is_good(self) -> bool {
        self == FovLabel::Good
    }
}

impl fmt::Display for FovLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FovLabel::Good => "Good",
            FovLabel::Bad => "Bad",
        })
    }
}

impl FromStr for FovLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "good" => Ok(FovLabel::Good),
            "bad" => Ok(FovLabel::Bad),
            _ => Err(invalid(format!("unknown FOV label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FovCriteria {
    pub single_aisle_visible: bool,
    pub full_racks_both_sides: bool,
    pub rack_tops_visible: bool,
    pub aisle_centered: bool,
}

impl FovCriteria {
    pub fn all(&self) -> bool {
        self.single_aisle_visible && self.full_racks_both_sides && self.rack_tops_visible && self.aisle_centered
    }

    pub fn label(&self) -> FovLabel {
        FovLabel::from_good(self.all())
    }
}

/// Quantitative thresholds for the geometric labeler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FovThresholds {
    /// Width of the centered band, as a fraction of image width, that
    /// must contain the aisle vanishing point.
    pub center_band: f64,
    /// Minimum in-image length of a shelf edge, as a fraction of the
    /// image diagonal, for it to count as framed.
    pub min_extent_fraction: f64,
}

impl Default for FovThresholds {
    fn default() -> Self {
        Self {
            center_band: 1.0 / 3.0,
            min_extent_fraction: 0.1,
        }
    }
}

impl FovThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_band > 0.0 && self.center_band <= 1.0) {
            return Err(invalid(format!("center_band must be in (0, 1], got {}", self.center_band)));
        }
        if !(0.0..1.0).contains(&self.min_extent_fraction) {
            return Err(invalid(format!(
                "min_extent_fraction must be in [0, 1), got {}",
                self.min_extent_fraction
            )));
        }
        Ok(())
    }
}

const FOV_CLASSES: [SemanticClass; 4] = [
    SemanticClass::AisleLeft,
    SemanticClass::AisleRight,
    SemanticClass::RackTopLeft,
    SemanticClass::RackTopRight,
];

/// Good when both aisle lines and both rack tops are detected.
pub fn predict_fov(preds: &ClassPredictionSet) -> FovLabel {
    FovLabel::from_good(FOV_CLASSES.iter().all(|&c| preds.is_present(c)))
}

/// Evaluates the four framing criteria on the scene's analytic projection.
pub fn ground_truth_fov(spec: &SceneSpec, thresholds: &FovThresholds) -> Result<(FovLabel, FovCriteria)> {
    thresholds.validate()?;
    let truth = project_scene(spec)?;
    let geom = spec.geometry();
    let min_len = thresholds.min_extent_fraction * geom.diagonal();
    let framed = |c: SemanticClass| truth.get(c).is_some_and(|gt| gt.extent.length() >= min_len);

    let width = spec.width as f64;
    let vp = Camera::new(spec).vanishing_point(Vec3::new(0.0, 0.0, 1.0));
    let inside_corridor = spec.camera.x.abs() < spec.aisle_width / 2.0;
    let single_aisle_visible = inside_corridor && vp.is_some_and(|p| (0.0..=width).contains(&p.x));
    let half_band = thresholds.center_band * width / 2.0;
    let aisle_centered = vp.is_some_and(|p| (p.x - width / 2.0).abs() <= half_band);

    let criteria = FovCriteria {
        single_aisle_visible,
        full_racks_both_sides: framed(SemanticClass::AisleLeft) && framed(SemanticClass::AisleRight),
        rack_tops_visible: framed(SemanticClass::RackTopLeft) && framed(SemanticClass::RackTopRight),
        aisle_centered,
    };
    Ok((criteria.label(), criteria))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovAccuracy {
    pub images: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Fraction of truth labels that are Good.
    pub good_base_rate: f64,
}

pub fn fov_accuracy(dataset: &[(FovLabel, FovLabel)]) -> Result<FovAccuracy> {
    if dataset.is_empty() {
        return Err(invalid("FOV accuracy needs at least one labeled image"));
    }
    let n = dataset.len();
    let correct = dataset.iter().filter(|(p, t)| p == t).count();
    let good = dataset.iter().filter(|(_, t)| t.is_good()).count();
    Ok(FovAccuracy {
        images: n,
        correct,
        accuracy: correct as f64 / n as f64,
        good_base_rate: good as f64 / n as f64,
    })
}
