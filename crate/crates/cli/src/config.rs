//! Run configuration: defaults, TOML file loading and validation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use semline_core::extraction::{CentroidMode, DEFAULT_THRESHOLD};
use semline_core::fov::FovThresholds;
use semline_core::geometry::HoughGridSpec;
use semline_core::hough::Kernel;
use semline_core::metrics::DEFAULT_TAUS;
use semline_core::pipeline::{DetectParams, DEFAULT_FEATURE_FLOOR, DEFAULT_FEATURE_THRESHOLD};
use semline_core::synth::{PoseRanges, SceneSpec};

use crate::error::{CliError, CliResult};

/// `WIDTHxHEIGHT`, e.g. `1200x1200`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Size {
    pub width: u32,
    pub height: u32,
}

impl Size {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|_| format!("bad dimension {v:?} in {s:?}"));
        let size = Size::new(parse(w)?, parse(h)?);
        if size.width == 0 || size.height == 0 {
            return Err(format!("size {s:?} has a zero dimension"));
        }
        Ok(size)
    }
}

impl TryFrom<String> for Size {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Size> for String {
    fn from(s: Size) -> String {
        s.to_string()
    }
}

/// Image rescale target; `none` keeps the input resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Rescale {
    None,
    To(Size),
}

impl FromStr for Rescale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("none") {
            Ok(Rescale::None)
        } else {
            s.parse().map(Rescale::To)
        }
    }
}

impl TryFrom<String> for Rescale {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Rescale> for String {
    fn from(r: Rescale) -> String {
        match r {
            Rescale::None => "none".into(),
            Rescale::To(s) => s.to_string(),
        }
    }
}

/// Scene and sweep settings for `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub count: usize,
    pub image: Size,
    pub focal_length: f64,
    pub aisle_width: f64,
    pub shelf_height: f64,
    pub aisle_length: f64,
    pub clutter_lines: usize,
    pub noise_sigma: f64,
    pub poses: PoseRanges,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let s = SceneSpec::default();
        Self {
            count: 200,
            image: Size::new(s.width, s.height),
            focal_length: s.focal_length,
            aisle_width: s.aisle_width,
            shelf_height: s.shelf_height,
            aisle_length: s.aisle_length,
            clutter_lines: 10,
            noise_sigma: 0.05,
            poses: PoseRanges::default(),
        }
    }
}

impl SynthConfig {
    pub fn base_scene(&self) -> SceneSpec {
        SceneSpec {
            aisle_width: self.aisle_width,
            shelf_height: self.shelf_height,
            aisle_length: self.aisle_length,
            focal_length: self.focal_length,
            width: self.image.width,
            height: self.image.height,
            clutter_lines: self.clutter_lines,
            noise_sigma: self.noise_sigma,
            ..SceneSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: HoughGridSpec,
    /// Cut applied to Hough-space activation inputs.
    pub threshold: f64,
    /// Cut applied to Hough maps voted from image or feature inputs.
    pub feature_threshold: f64,
    pub feature_floor: f32,
    pub taus: Vec<f64>,
    pub rescale: Rescale,
    pub kernel: Kernel,
    pub centroid: CentroidMode,
    pub seed: u64,
    pub fov: FovThresholds,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: HoughGridSpec::default(),
            threshold: DEFAULT_THRESHOLD,
            feature_threshold: DEFAULT_FEATURE_THRESHOLD,
            feature_floor: DEFAULT_FEATURE_FLOOR,
            taus: DEFAULT_TAUS.to_vec(),
            rescale: Rescale::To(Size::new(1200, 1200)),
            kernel: Kernel::default(),
            centroid: CentroidMode::default(),
            seed: 0,
            fov: FovThresholds::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
    }

    pub fn detect_params(&self) -> DetectParams {
        DetectParams {
            grid: self.grid,
            threshold: self.threshold,
            feature_threshold: self.feature_threshold,
            feature_floor: self.feature_floor,
            kernel: self.kernel,
            centroid: self.centroid,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let v = |e: semline_core::Error| CliError::validation(e.to_string());
        HoughGridSpec::new(self.grid.n_theta, self.grid.n_r).map_err(v)?;
        self.detect_params().validate().map_err(v)?;
        if self.taus.is_empty() {
            return Err(CliError::validation("taus must list at least one EA threshold"));
        }
        if let Some(t) = self.taus.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(CliError::validation(format!("EA threshold {t} outside [0, 1]")));
        }
        self.fov.validate().map_err(v)?;
        let base = self.synth.base_scene();
        base.validate().map_err(v)?;
        self.synth.poses.validate(&base).map_err(v)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_pinned() {
        let c = RunConfig::default();
        assert_eq!(c.grid, HoughGridSpec { n_theta: 150, n_r: 150 });
        assert_eq!(c.threshold, 0.01);
        assert_eq!(c.taus, vec![0.0, 0.95]);
        assert_eq!(c.rescale, Rescale::To(Size::new(1200, 1200)));
        c.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), c);

        let partial: RunConfig = toml::from_str("threshold = 0.05\nrescale = \"none\"\n[grid]\nn_theta = 90\nn_r = 60\n").unwrap();
        assert_eq!(partial.threshold, 0.05);
        assert_eq!(partial.rescale, Rescale::None);
        assert_eq!(partial.grid, HoughGridSpec { n_theta: 90, n_r: 60 });
        assert_eq!(partial.kernel, Kernel::Optimized);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(toml::from_str::<RunConfig>("treshold = 0.1").is_err());
        assert!(toml::from_str::<RunConfig>("rescale = \"12x\"").is_err());
        let c = RunConfig {
            threshold: 0.0,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
    }

    #[test]
    fn sizes_parse() {
        assert_eq!("640x480".parse::<Size>().unwrap(), Size::new(640, 480));
        assert!("0x4".parse::<Size>().is_err());
        assert!("640".parse::<Size>().is_err());
    }
}
