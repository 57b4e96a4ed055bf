//! Region-based line extraction from Hough activations, one line per class.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frontend::IntensityMap;
use crate::geometry::{bin_coords_to_line, clip_to_image, ImageGeometry, ParametricLine, Point};
use crate::hough::HoughMap;

/// Classification threshold for activation maps produced by a trained model.
pub const DEFAULT_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SemanticClass {
    AisleLeft,
    AisleRight,
    RackTopLeft,
    RackTopRight,
    WallEndCap,
}

impl SemanticClass {
    pub const ALL: [SemanticClass; 5] = [
        SemanticClass::AisleLeft,
        SemanticClass::AisleRight,
        SemanticClass::RackTopLeft,
        SemanticClass::RackTopRight,
        SemanticClass::WallEndCap,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticClass::AisleLeft => "AisleLeft",
            SemanticClass::AisleRight => "AisleRight",
            SemanticClass::RackTopLeft => "RackTopLeft",
            SemanticClass::RackTopRight => "RackTopRight",
            SemanticClass::WallEndCap => "WallEndCap",
        }
    }

    /// Left/right counterpart; `WallEndCap` maps to itself.
    pub fn mirrored(self) -> Self {
        match self {
            SemanticClass::AisleLeft => SemanticClass::AisleRight,
            SemanticClass::AisleRight => SemanticClass::AisleLeft,
            SemanticClass::RackTopLeft => SemanticClass::RackTopRight,
            SemanticClass::RackTopRight => SemanticClass::RackTopLeft,
            SemanticClass::WallEndCap => SemanticClass::WallEndCap,
        }
    }
}

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SemanticClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SemanticClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownChannel(s.to_string()))
    }
}

/// One value per semantic class, indexed by [`SemanticClass`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerClass<T>(pub [T; 5]);

impl<T> PerClass<T> {
    pub fn from_fn(mut f: impl FnMut(SemanticClass) -> T) -> Self {
        PerClass(SemanticClass::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (SemanticClass, &T)> {
        SemanticClass::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(SemanticClass, &T) -> U) -> PerClass<U> {
        PerClass::from_fn(|c| f(c, &self[c]))
    }
}

impl<T> Index<SemanticClass> for PerClass<T> {
    type Output = T;

    fn index(&self, c: SemanticClass) -> &T {
        &self.0[c.index()]
    }
}

impl<T> IndexMut<SemanticClass> for PerClass<T> {
    fn index_mut(&mut self, c: SemanticClass) -> &mut T {
        &mut self.0[c.index()]
    }
}

/// Five per-class Hough activation maps sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassActivationSet {
    channels: PerClass<HoughMap>,
}

impl ClassActivationSet {
    pub fn new(channels: PerClass<HoughMap>) -> Result<Self> {
        let spec = channels[SemanticClass::AisleLeft].spec();
        if channels.iter().any(|(_, m)| m.spec() != spec) {
            return Err(invalid("class activation channels must share one hough grid"));
        }
        Ok(Self { channels })
    }

    pub fn channel(&self, class: SemanticClass) -> &HoughMap {
        &self.channels[class]
    }

    pub fn channels(&self) -> &PerClass<HoughMap> {
        &self.channels
    }

    pub fn spec(&self) -> crate::geometry::HoughGridSpec {
        self.channels[SemanticClass::AisleLeft].spec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub theta: f64,
    pub r: f64,
    pub confidence: f64,
}

impl Prediction {
    pub fn line(&self) -> ParametricLine {
        ParametricLine {
            theta: self.theta,
            r: self.r,
        }
    }
}

/// At most one line per semantic class.
///
/// Serializes as a map from class name to prediction, omitting absent
/// classes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "BTreeMap<SemanticClass, Prediction>", into = "BTreeMap<SemanticClass, Prediction>")]
pub struct ClassPredictionSet(PerClass<Option<Prediction>>);

impl ClassPredictionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn get(&self, class: SemanticClass) -> Option<&Prediction> {
        self.0[class].as_ref()
    }

    pub fn set(&mut self, class: SemanticClass, prediction: Option<Prediction>) {
        self.0[class] = prediction;
    }

    pub fn with(mut self, class: SemanticClass, prediction: Prediction) -> Self {
        self.0[class] = Some(prediction);
        self
    }

    pub fn is_present(&self, class: SemanticClass) -> bool {
        self.0[class].is_some()
    }

    pub fn present(&self) -> impl Iterator<Item = (SemanticClass, &Prediction)> {
        self.0.iter().filter_map(|(c, p)| p.as_ref().map(|p| (c, p)))
    }

    pub fn len(&self) -> usize {
        self.present().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<BTreeMap<SemanticClass, Prediction>> for ClassPredictionSet {
    fn from(map: BTreeMap<SemanticClass, Prediction>) -> Self {
        let mut set = Self::empty();
        for (c, p) in map {
            set.set(c, Some(p));
        }
        set
    }
}

impl From<ClassPredictionSet> for BTreeMap<SemanticClass, Prediction> {
    fn from(set: ClassPredictionSet) -> Self {
        set.present().map(|(c, p)| (c, *p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentroidMode {
    /// Geometric center of the region's cells.
    #[default]
    Unweighted,
    /// Activation-weighted center of mass.
    Weighted,
}

/// A connected group of supra-threshold cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub centroid_i: f64,
    pub centroid_j: f64,
    pub peak: f32,
    pub peak_cell: (usize, usize),
    pub cells: Vec<(usize, usize)>,
}

/// Labels 8-connected components of cells with value `> threshold`.
///
/// Regions come back ordered by peak (descending); ties go to the region
/// whose peak cell has the smaller `(i, j)`.
pub fn extract_regions(map: &HoughMap, threshold: f64) -> Result<Vec<Region>> {
    extract_regions_with(map, threshold, CentroidMode::Unweighted)
}

pub fn extract_regions_with(
    map: &HoughMap,
    threshold: f64,
    mode: CentroidMode,
) -> Result<Vec<Region>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let spec = map.spec();
    let (rows, cols) = (spec.n_theta, spec.n_r);
    let active = |i: usize, j: usize| map.get(i, j) as f64 > threshold;
    let mut seen = vec![false; rows * cols];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();

    for i0 in 0..rows {
        for j0 in 0..cols {
            if seen[i0 * cols + j0] || !active(i0, j0) {
                continue;
            }
            seen[i0 * cols + j0] = true;
            queue.push_back((i0, j0));
            let mut cells = Vec::new();
            let mut peak_cell = (i0, j0);
            let (mut si, mut sj, mut sw) = (0.0f64, 0.0f64, 0.0f64);
            while let Some((i, j)) = queue.pop_front() {
                let v = map.get(i, j);
                let best = map.get(peak_cell.0, peak_cell.1);
                if v > best || (v == best && (i, j) < peak_cell) {
                    peak_cell = (i, j);
                }
                let weight = match mode {
                    CentroidMode::Unweighted => 1.0,
                    CentroidMode::Weighted => v as f64,
                };
                si += weight * i as f64;
                sj += weight * j as f64;
                sw += weight;
                cells.push((i, j));
                for di in -1isize..=1 {
                    for dj in -1isize..=1 {
                        let (ni, nj) = (i as isize + di, j as isize + dj);
                        if ni < 0 || nj < 0 || ni >= rows as isize || nj >= cols as isize {
                            continue;
                        }
                        let (ni, nj) = (ni as usize, nj as usize);
                        if !seen[ni * cols + nj] && active(ni, nj) {
                            seen[ni * cols + nj] = true;
                            queue.push_back((ni, nj));
                        }
                    }
                }
            }
            regions.push(Region {
                centroid_i: si / sw,
                centroid_j: sj / sw,
                peak: map.get(peak_cell.0, peak_cell.1),
                peak_cell,
                cells,
            });
        }
    }
    regions.sort_by(|a, b| {
        b.peak
            .total_cmp(&a.peak)
            .then_with(|| a.peak_cell.cmp(&b.peak_cell))
    });
    Ok(regions)
}

fn region_prediction(region: &Region, map: &HoughMap, geom: &ImageGeometry) -> Prediction {
    let line = bin_coords_to_line(region.centroid_i, region.centroid_j, &map.spec(), geom);
    Prediction {
        theta: line.theta,
        r: line.r,
        confidence: region.peak as f64,
    }
}

/// Strongest region per class, if any cell exceeds `threshold`.
pub fn select_per_class(
    acts: &ClassActivationSet,
    threshold: f64,
    geom: &ImageGeometry,
) -> Result<ClassPredictionSet> {
    select_per_class_with(acts, threshold, CentroidMode::Unweighted, geom)
}

pub fn select_per_class_with(
    acts: &ClassActivationSet,
    threshold: f64,
    mode: CentroidMode,
    geom: &ImageGeometry,
) -> Result<ClassPredictionSet> {
    let mut out = ClassPredictionSet::empty();
    for class in SemanticClass::ALL {
        let map = acts.channel(class);
        let regions = extract_regions_with(map, threshold, mode)?;
        out.set(class, regions.first().map(|r| region_prediction(r, map, geom)));
    }
    Ok(out)
}

/// Candidates examined by [`classify_by_layout`].
const LAYOUT_CANDIDATES: usize = 16;

/// Lines within this angle of horizontal are end-cap candidates.
const HORIZONTAL_TOLERANCE: f64 = 20.0 * std::f64::consts::PI / 180.0;

/// Half-width, as a fraction of each grid axis, of the window a peak
/// suppresses around itself.
const SUPPRESSION_FRACTION: f64 = 1.0 / 30.0;

/// Strongest cells above `threshold`, each at least the suppression window
/// away from every stronger one. Connected regions are unsuitable here:
/// in a class-agnostic map, lines sharing a vanishing point merge into one
/// region along its sinusoid.
fn peak_candidates(map: &HoughMap, threshold: f64, limit: usize) -> Vec<(usize, usize)> {
    let spec = map.spec();
    let mut cells: Vec<(usize, usize)> = (0..spec.n_theta)
        .flat_map(|i| (0..spec.n_r).map(move |j| (i, j)))
        .filter(|&(i, j)| map.get(i, j) as f64 > threshold)
        .collect();
    cells.sort_by(|a, b| map.get(b.0, b.1).total_cmp(&map.get(a.0, a.1)).then(a.cmp(b)));
    let win = |n: usize| ((n as f64 * SUPPRESSION_FRACTION).round() as usize).max(1);
    let (wi, wj) = (win(spec.n_theta), win(spec.n_r));
    let mut peaks: Vec<(usize, usize)> = Vec::new();
    for (i, j) in cells {
        let near = peaks.iter().any(|&(pi, pj)| pi.abs_diff(i) <= wi && pj.abs_diff(j) <= wj);
        if !near {
            peaks.push((i, j));
            if peaks.len() == limit {
                break;
            }
        }
    }
    peaks
}

/// Line at the activation-weighted center of the 3×3 block around a peak.
fn peak_prediction(map: &HoughMap, (i, j): (usize, usize), geom: &ImageGeometry) -> Prediction {
    let spec = map.spec();
    let (mut si, mut sj, mut w) = (0.0, 0.0, 0.0);
    for a in i.saturating_sub(1)..=(i + 1).min(spec.n_theta - 1) {
        for b in j.saturating_sub(1)..=(j + 1).min(spec.n_r - 1) {
            let v = map.get(a, b) as f64;
            si += v * a as f64;
            sj += v * b as f64;
            w += v;
        }
    }
    let line = bin_coords_to_line(si / w, sj / w, &spec, geom);
    Prediction {
        theta: line.theta,
        r: line.r,
        confidence: map.get(i, j) as f64,
    }
}

/// Assigns classes to lines found in a single class-agnostic activation map.
///
/// Used when no per-class activations exist (plain images through the
/// classical front end). Near-horizontal lines become `WallEndCap`; the
/// others are assigned by the quadrant, relative to the image center, of
/// the feature mass lying along the line: lower-left `AisleLeft`, upper-left
/// `RackTopLeft`, lower-right `AisleRight`, upper-right `RackTopRight`.
/// The strongest candidate wins each class.
pub fn classify_by_layout(
    map: &HoughMap,
    features: &IntensityMap,
    threshold: f64,
    geom: &ImageGeometry,
) -> Result<ClassPredictionSet> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let mut out = ClassPredictionSet::empty();
    let center = geom.center();
    for peak in peak_candidates(map, threshold, LAYOUT_CANDIDATES) {
        let pred = peak_prediction(map, peak, geom);
        let line = pred.line();
        let class = if (line.theta - std::f64::consts::FRAC_PI_2).abs() < HORIZONTAL_TOLERANCE {
            SemanticClass::WallEndCap
        } else {
            let Some(p) = evidence_centroid(&line, features, geom) else {
                continue;
            };
            match (p.x < center.x, p.y > center.y) {
                (true, true) => SemanticClass::AisleLeft,
                (true, false) => SemanticClass::RackTopLeft,
                (false, true) => SemanticClass::AisleRight,
                (false, false) => SemanticClass::RackTopRight,
            }
        };
        if !out.is_present(class) {
            out.set(class, Some(pred));
        }
    }
    Ok(out)
}

/// Feature-weighted mean position of pixels sampled along the line's chord.
fn evidence_centroid(
    line: &ParametricLine,
    features: &IntensityMap,
    geom: &ImageGeometry,
) -> Option<Point> {
    let seg = clip_to_image(line, geom)?;
    let (sx, sy) = (
        features.width() as f64 / geom.width as f64,
        features.height() as f64 / geom.height as f64,
    );
    let steps = seg.length().ceil() as usize;
    let (mut wx, mut wy, mut wsum) = (0.0, 0.0, 0.0);
    for k in 0..=steps {
        let t = k as f64 / steps.max(1) as f64;
        let x = seg.p0.x + t * (seg.p1.x - seg.p0.x);
        let y = seg.p0.y + t * (seg.p1.y - seg.p0.y);
        let px = ((x * sx) as usize).min(features.width() - 1);
        let py = ((y * sy) as usize).min(features.height() - 1);
        let v = features.get(px, py) as f64;
        wx += v * x;
        wy += v * y;
        wsum += v;
    }
    (wsum > 0.0).then(|| Point::new(wx / wsum, wy / wsum))
}
