//! Synthetic store-aisle scenes.
//!
//! World frame: `x` across the aisle (right positive), `y` up, `z` down the
//! aisle. The floor is `y = 0`; the shelf faces are the planes
//! `x = ±aisle_width/2` for `z ∈ [0, aisle_length]`, `shelf_height` tall;
//! the end wall sits at `z = aisle_length`. A pinhole camera with yaw
//! (about `y`, positive turns right) and pitch (positive looks up) views
//! the corridor; image `x` points right and image `y` down.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::extraction::{ClassPredictionSet, PerClass, Prediction, SemanticClass};
use crate::fov::{ground_truth_fov, FovCriteria, FovLabel, FovThresholds};
use crate::frontend::IntensityMap;
use crate::geometry::{clip_segment, ImageGeometry, ParametricLine, Point, Segment};

/// Edges whose visible extent is shorter than this fraction of the image
/// diagonal count as absent.
pub const MIN_VISIBLE_FRACTION: f64 = 0.05;

/// Camera-space depth below which edge points are clipped away.
const NEAR_PLANE: f64 = 0.05;

/// Gaussian stroke cross-section (pixels) and its truncation radius.
pub const STROKE_SIGMA: f64 = 1.0;
pub const STROKE_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        Vec3::new(
            self.x + t * (o.x - self.x),
            self.y + t * (o.y - self.y),
            self.z + t * (o.z - self.z),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub aisle_width: f64,
    pub shelf_height: f64,
    pub aisle_length: f64,
    pub camera: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub focal_length: f64,
    pub width: u32,
    pub height: u32,
    pub clutter_lines: usize,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            aisle_width: 1.8,
            shelf_height: 2.0,
            aisle_length: 12.0,
            camera: Vec3::new(0.0, 1.5, 0.0),
            yaw: 0.0,
            pitch: 0.0,
            focal_length: 420.0,
            width: 600,
            height: 600,
            clutter_lines: 0,
            noise_sigma: 0.0,
            rng_seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("aisle_width", self.aisle_width),
            ("shelf_height", self.shelf_height),
            ("aisle_length", self.aisle_length),
            ("focal_length", self.focal_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.width < 8 || self.height < 8 {
            return Err(invalid(format!(
                "scene image must be at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        let c = self.camera;
        if ![c.x, c.y, c.z, self.yaw, self.pitch].iter().all(|v| v.is_finite()) {
            return Err(invalid("camera pose must be finite"));
        }
        if c.x.abs() >= self.aisle_width / 2.0 || c.y <= 0.0 || c.z >= self.aisle_length {
            return Err(invalid(format!(
                "camera ({}, {}, {}) must sit inside or behind the corridor",
                c.x, c.y, c.z
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    pub fn geometry(&self) -> ImageGeometry {
        ImageGeometry {
            width: self.width,
            height: self.height,
        }
    }

    /// The five semantic edges as 3D segments.
    pub fn edges(&self) -> PerClass<(Vec3, Vec3)> {
        let (hw, h, l) = (self.aisle_width / 2.0, self.shelf_height, self.aisle_length);
        PerClass::from_fn(|c| match c {
            SemanticClass::AisleLeft => (Vec3::new(-hw, 0.0, 0.0), Vec3::new(-hw, 0.0, l)),
            SemanticClass::AisleRight => (Vec3::new(hw, 0.0, 0.0), Vec3::new(hw, 0.0, l)),
            SemanticClass::RackTopLeft => (Vec3::new(-hw, h, 0.0), Vec3::new(-hw, h, l)),
            SemanticClass::RackTopRight => (Vec3::new(hw, h, 0.0), Vec3::new(hw, h, l)),
            SemanticClass::WallEndCap => (Vec3::new(-hw, 0.0, l), Vec3::new(hw, 0.0, l)),
        })
    }

    /// The same scene reflected about the aisle centerline.
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.camera.x = -m.camera.x;
        m.yaw = -m.yaw;
        m
    }
}

/// Pinhole camera looking along `forward` with the given yaw and pitch.
#[derive(Debug, Clone, Copy)]
pub struct Camera {
    position: Vec3,
    right: Vec3,
    up: Vec3,
    forward: Vec3,
    focal: f64,
    cx: f64,
    cy: f64,
}

impl Camera {
    pub fn new(spec: &SceneSpec) -> Self {
        let (sy, cy) = spec.yaw.sin_cos();
        let (sp, cp) = spec.pitch.sin_cos();
        let forward = Vec3::new(sy * cp, sp, cy * cp);
        let right = Vec3::new(cy, 0.0, -sy);
        Self {
            position: spec.camera,
            right,
            up: forward.cross(right),
            forward,
            focal: spec.focal_length,
            cx: spec.width as f64 / 2.0,
            cy: spec.height as f64 / 2.0,
        }
    }

    /// World point in camera coordinates `(right, up, depth)`.
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let d = p.sub(self.position);
        Vec3::new(d.dot(self.right), d.dot(self.up), d.dot(self.forward))
    }

    fn project_camera(&self, c: Vec3) -> Point {
        Point::new(
            self.cx + self.focal * c.x / c.z,
            self.cy - self.focal * c.y / c.z,
        )
    }

    /// Image position of a world point, if it lies in front of the camera.
    pub fn project(&self, p: Vec3) -> Option<Point> {
        let c = self.to_camera(p);
        (c.z > NEAR_PLANE).then(|| self.project_camera(c))
    }

    /// Vanishing point of a world direction, if it lies in front.
    pub fn vanishing_point(&self, dir: Vec3) -> Option<Point> {
        let c = Vec3::new(dir.dot(self.right), dir.dot(self.up), dir.dot(self.forward));
        (c.z > 1e-9).then(|| self.project_camera(c))
    }

    /// Projects a 3D segment after clipping it to the near plane.
    pub fn project_segment(&self, a: Vec3, b: Vec3) -> Option<Segment> {
        let (ca, cb) = (self.to_camera(a), self.to_camera(b));
        let (ca, cb) = match (ca.z > NEAR_PLANE, cb.z > NEAR_PLANE) {
            (true, true) => (ca, cb),
            (false, false) => return None,
            (true, false) => (ca, ca.lerp(cb, (ca.z - NEAR_PLANE) / (ca.z - cb.z))),
            (false, true) => (cb.lerp(ca, (cb.z - NEAR_PLANE) / (cb.z - ca.z)), cb),
        };
        let s = Segment::new(self.project_camera(ca), self.project_camera(cb));
        (!s.is_degenerate()).then_some(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthLine {
    pub line: ParametricLine,
    /// In-image part of the projected edge.
    pub extent: Segment,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruthLines(pub PerClass<Option<GroundTruthLine>>);

impl GroundTruthLines {
    pub fn get(&self, class: SemanticClass) -> Option<&GroundTruthLine> {
        self.0[class].as_ref()
    }

    pub fn present(&self) -> impl Iterator<Item = (SemanticClass, &GroundTruthLine)> {
        self.0.iter().filter_map(|(c, l)| l.as_ref().map(|l| (c, l)))
    }

    /// Ground truth as a prediction set with unit confidence.
    pub fn to_prediction_set(&self) -> ClassPredictionSet {
        let mut set = ClassPredictionSet::empty();
        for (c, gt) in self.present() {
            set.set(
                c,
                Some(Prediction {
                    theta: gt.line.theta,
                    r: gt.line.r,
                    confidence: 1.0,
                }),
            );
        }
        set
    }
}

/// Analytic ground-truth lines for each semantic edge.
pub fn project_scene(spec: &SceneSpec) -> Result<GroundTruthLines> {
    spec.validate()?;
    let cam = Camera::new(spec);
    let geom = spec.geometry();
    let min_extent = MIN_VISIBLE_FRACTION * geom.diagonal();
    let edges = spec.edges();
    let mut out = GroundTruthLines::default();
    for (class, &(a, b)) in edges.iter() {
        let Some(projected) = cam.project_segment(a, b) else {
            continue;
        };
        let Some(extent) = clip_segment(&projected, &geom) else {
            continue;
        };
        if extent.length() < min_extent {
            continue;
        }
        let line = projected.to_line(&geom)?;
        out.0[class] = Some(GroundTruthLine { line, extent });
    }
    Ok(out)
}

fn stroke_profile(d: f64) -> f32 {
    if d > STROKE_RADIUS {
        0.0
    } else {
        (-d * d / (2.0 * STROKE_SIGMA * STROKE_SIGMA)).exp() as f32
    }
}

/// Draws an anti-aliased stroke into `buf`, keeping the per-pixel maximum.
fn draw_stroke(buf: &mut [f32], geom: &ImageGeometry, seg: &Segment, peak: f32) {
    let (w, h) = (geom.width as usize, geom.height as usize);
    let lo = |a: f64, b: f64| ((a.min(b) - STROKE_RADIUS - 1.0).floor().max(0.0)) as usize;
    let hi = |a: f64, b: f64, n: usize| (((a.max(b) + STROKE_RADIUS + 1.0).ceil()).max(0.0) as usize).min(n);
    let (x0, x1) = (lo(seg.p0.x, seg.p1.x), hi(seg.p0.x, seg.p1.x, w));
    let (y0, y1) = (lo(seg.p0.y, seg.p1.y), hi(seg.p0.y, seg.p1.y, h));
    for y in y0..y1 {
        for x in x0..x1 {
            let d = seg.distance_to(&Point::new(x as f64 + 0.5, y as f64 + 0.5));
            let v = peak * stroke_profile(d);
            let cell = &mut buf[y * w + x];
            if v > *cell {
                *cell = v;
            }
        }
    }
}

/// Rendered components of a scene before composition.
#[derive(Debug, Clone)]
pub struct SceneLayers {
    pub geometry: ImageGeometry,
    pub truth: GroundTruthLines,
    /// Per-class stroke rasters for visible edges.
    pub strokes: PerClass<Option<Vec<f32>>>,
    pub clutter: Vec<f32>,
    pub noise: Vec<f32>,
}

impl SceneLayers {
    fn compose(&self, strokes: &[&Vec<f32>]) -> IntensityMap {
        let n = self.clutter.len();
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            let base = strokes.iter().fold(self.clutter[k], |m, s| m.max(s[k]));
            values.push((base + self.noise[k]).max(0.0));
        }
        IntensityMap::new(self.geometry.width as usize, self.geometry.height as usize, values)
            .expect("composed layers are non-negative")
    }

    /// All strokes, clutter and noise in one map.
    pub fn combined(&self) -> IntensityMap {
        let strokes: Vec<_> = self.strokes.0.iter().flatten().collect();
        self.compose(&strokes)
    }

    /// One map per class: that class's stroke plus the shared clutter and
    /// noise.
    pub fn class_channels(&self) -> PerClass<IntensityMap> {
        self.strokes.map(|_, s| match s {
            Some(s) => self.compose(&[s]),
            None => self.compose(&[]),
        })
    }
}

pub fn render_layers(spec: &SceneSpec) -> Result<SceneLayers> {
    let truth = project_scene(spec)?;
    let geom = spec.geometry();
    let n = geom.width as usize * geom.height as usize;
    let strokes = truth.0.map(|_, gt| {
        gt.map(|gt| {
            let mut buf = vec![0.0f32; n];
            draw_stroke(&mut buf, &geom, &gt.extent, 1.0);
            buf
        })
    });

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut clutter = vec![0.0f32; n];
    let (w, h, diag) = (geom.width as f64, geom.height as f64, geom.diagonal());
    for _ in 0..spec.clutter_lines {
        let c = Point::new(rng.random_range(0.0..w), rng.random_range(0.0..h));
        let len = rng.random_range(0.03..0.12) * diag;
        let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let peak: f32 = rng.random_range(0.2..=0.5);
        let (dx, dy) = (angle.cos() * len / 2.0, angle.sin() * len / 2.0);
        let seg = Segment::new(Point::new(c.x - dx, c.y - dy), Point::new(c.x + dx, c.y + dy));
        draw_stroke(&mut clutter, &geom, &seg, peak);
    }

    let mut noise = vec![0.0f32; n];
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).map_err(|e| invalid(e.to_string()))?;
        for v in noise.iter_mut() {
            *v = normal.sample(&mut rng) as f32;
        }
    }
    Ok(SceneLayers {
        geometry: geom,
        truth,
        strokes,
        clutter,
        noise,
    })
}

/// Edge-intensity rendering of the scene.
pub fn render_scene(spec: &SceneSpec) -> Result<IntensityMap> {
    Ok(render_layers(spec)?.combined())
}

/// Closed sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn point(v: f64) -> Self {
        Self { min: v, max: v }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            self.min + (self.max - self.min) * rng.random::<f64>()
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(invalid(format!(
                "{name} range [{}, {}] is empty or not finite",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// Camera pose intervals sampled by [`generate_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRanges {
    pub x: Range,
    pub y: Range,
    pub z: Range,
    pub yaw: Range,
    pub pitch: Range,
}

impl Default for PoseRanges {
    fn default() -> Self {
        Self {
            x: Range::new(-0.5, 0.5),
            y: Range::new(1.2, 1.8),
            z: Range::new(-3.0, 3.0),
            yaw: Range::new(-0.25, 0.25),
            pitch: Range::new(-0.6, 0.1),
        }
    }
}

impl PoseRanges {
    pub fn fixed(spec: &SceneSpec) -> Self {
        Self {
            x: Range::point(spec.camera.x),
            y: Range::point(spec.camera.y),
            z: Range::point(spec.camera.z),
            yaw: Range::point(spec.yaw),
            pitch: Range::point(spec.pitch),
        }
    }

    pub fn validate(&self, base: &SceneSpec) -> Result<()> {
        for (name, r) in [
            ("x", self.x),
            ("y", self.y),
            ("z", self.z),
            ("yaw", self.yaw),
            ("pitch", self.pitch),
        ] {
            r.validate(name)?;
        }
        // every sampled camera must be a valid scene
        let corner = |x: f64, y: f64, z: f64| {
            let mut s = base.clone();
            s.camera = Vec3::new(x, y, z);
            s.validate()
        };
        corner(self.x.min, self.y.min, self.z.max)?;
        corner(self.x.max, self.y.min, self.z.max)?;
        Ok(())
    }
}

/// One sweep entry, without its raster.
#[derive(Debug, Clone)]
pub struct SweepScene {
    pub index: usize,
    pub spec: SceneSpec,
    pub truth: GroundTruthLines,
    pub fov: FovLabel,
    pub criteria: FovCriteria,
}

#[derive(Debug, Clone)]
pub struct SweepItem {
    pub scene: SweepScene,
    pub image: IntensityMap,
}

/// Scene specs and labels for a pose sweep. Item `k` draws its pose and
/// its render seed from `seed + k`, so items are independent of order.
pub fn sweep_scenes(
    n: usize,
    ranges: &PoseRanges,
    base: &SceneSpec,
    thresholds: &FovThresholds,
    seed: u64,
) -> Result<Vec<SweepScene>> {
    if n == 0 {
        return Err(invalid("sweep needs at least one scene"));
    }
    base.validate()?;
    ranges.validate(base)?;
    (0..n)
        .map(|index| {
            let item_seed = seed.wrapping_add(index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(item_seed);
            let mut spec = base.clone();
            spec.camera = Vec3::new(
                ranges.x.sample(&mut rng),
                ranges.y.sample(&mut rng),
                ranges.z.sample(&mut rng),
            );
            spec.yaw = ranges.yaw.sample(&mut rng);
            spec.pitch = ranges.pitch.sample(&mut rng);
            spec.rng_seed = item_seed;
            let truth = project_scene(&spec)?;
            let (fov, criteria) = ground_truth_fov(&spec, thresholds)?;
            Ok(SweepScene {
                index,
                spec,
                truth,
                fov,
                criteria,
            })
        })
        .collect()
}

/// Pose sweep with rendered images, analytic ground truth and FOV labels.
pub fn generate_sweep(
    n: usize,
    ranges: &PoseRanges,
    base: &SceneSpec,
    thresholds: &FovThresholds,
    seed: u64,
) -> Result<Vec<SweepItem>> {
    sweep_scenes(n, ranges, base, thresholds, seed)?
        .into_iter()
        .map(|scene| {
            let image = render_scene(&scene.spec)?;
            Ok(SweepItem { scene, image })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::line_to_bin;
    use crate::hough::vote_reference;
    use crate::geometry::HoughGridSpec;
    use std::f64::consts::PI;

    #[test]
    fn centered_pose_is_mirror_symmetric() {
        let truth = project_scene(&SceneSpec::default()).unwrap();
        let l = truth.get(SemanticClass::AisleLeft).unwrap().line;
        let r = truth.get(SemanticClass::AisleRight).unwrap().line;
        assert!((l.theta + r.theta - PI).abs() < 1e-9, "{l:?} {r:?}");
        assert!((l.r - r.r).abs() < 1e-9);
        assert_eq!(truth.present().count(), 5);
    }

    #[test]
    fn mirrored_scene_swaps_sides() {
        let spec = SceneSpec {
            camera: Vec3::new(0.3, 1.4, 1.0),
            yaw: 0.2,
            pitch: -0.1,
            ..SceneSpec::default()
        };
        let a = project_scene(&spec).unwrap();
        let b = project_scene(&spec.mirrored()).unwrap();
        for class in SemanticClass::ALL {
            match (a.get(class), b.get(class.mirrored())) {
                (Some(x), Some(y)) => {
                    let folded = ParametricLine::new(PI - x.line.theta, x.line.r);
                    assert!((folded.theta - y.line.theta).abs() < 1e-9, "{class}");
                    assert!((folded.r - y.line.r).abs() < 1e-9, "{class}");
                }
                (None, None) => {}
                _ => panic!("presence differs for {class}"),
            }
        }
    }

    #[test]
    fn steep_downward_pitch_hides_rack_tops() {
        let spec = SceneSpec {
            pitch: -1.2,
            ..SceneSpec::default()
        };
        let truth = project_scene(&spec).unwrap();
        assert!(truth.get(SemanticClass::RackTopLeft).is_none());
        assert!(truth.get(SemanticClass::RackTopRight).is_none());
    }

    #[test]
    fn distant_end_wall_is_too_short() {
        let spec = SceneSpec {
            aisle_length: 200.0,
            ..SceneSpec::default()
        };
        let truth = project_scene(&spec).unwrap();
        assert!(truth.get(SemanticClass::WallEndCap).is_none());
        assert!(truth.get(SemanticClass::AisleLeft).is_some());
    }

    #[test]
    fn looking_away_shows_nothing() {
        let spec = SceneSpec {
            yaw: PI,
            ..SceneSpec::default()
        };
        assert_eq!(project_scene(&spec).unwrap().present().count(), 0);
    }

    #[test]
    fn projected_lines_are_valid() {
        let scenes = sweep_scenes(
            50,
            &PoseRanges::default(),
            &SceneSpec::default(),
            &FovThresholds::default(),
            5,
        )
        .unwrap();
        for s in scenes {
            for (_, gt) in s.truth.present() {
                gt.line.validate(&s.spec.geometry()).unwrap();
            }
        }
    }

    #[test]
    fn clean_render_stays_near_segments() {
        let spec = SceneSpec {
            camera: Vec3::new(0.2, 1.3, 0.5),
            yaw: 0.1,
            ..SceneSpec::default()
        };
        let layers = render_layers(&spec).unwrap();
        let img = layers.combined();
        let segs: Vec<_> = layers.truth.present().map(|(_, gt)| gt.extent).collect();
        for y in 0..img.height() {
            for x in 0..img.width() {
                if img.get(x, y) > 0.0 {
                    let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                    let d = segs.iter().map(|s| s.distance_to(&p)).fold(f64::INFINITY, f64::min);
                    assert!(d <= STROKE_RADIUS, "pixel ({x}, {y}) is {d} px from any edge");
                }
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = SceneSpec {
            clutter_lines: 10,
            noise_sigma: 0.05,
            rng_seed: 99,
            ..SceneSpec::default()
        };
        assert_eq!(render_scene(&spec).unwrap(), render_scene(&spec).unwrap());
        let other = SceneSpec { rng_seed: 100, ..spec.clone() };
        assert_ne!(render_scene(&spec).unwrap(), render_scene(&other).unwrap());
    }

    #[test]
    fn single_line_scene_votes_at_its_bin() {
        let spec = SceneSpec {
            width: 240,
            height: 180,
            focal_length: 170.0,
            ..SceneSpec::default()
        };
        let layers = render_layers(&spec).unwrap();
        let gt = layers.truth.get(SemanticClass::AisleLeft).unwrap();
        let img = layers.class_channels()[SemanticClass::AisleLeft].clone();
        let grid = HoughGridSpec::new(90, 90).unwrap();
        let geom = spec.geometry();
        let acc = vote_reference(&img, &grid, &geom).unwrap();
        let (ai, aj) = acc.argmax();
        let (ti, tj) = line_to_bin(&gt.line, &grid, &geom);
        assert!(ai.abs_diff(ti) <= 1 && aj.abs_diff(tj) <= 1, "{:?} vs {:?}", (ai, aj), (ti, tj));
    }

    #[test]
    fn sweep_collapsed_to_a_point_is_one_scene() {
        let base = SceneSpec::default();
        let s = sweep_scenes(1, &PoseRanges::fixed(&base), &base, &FovThresholds::default(), 4).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].spec.camera, base.camera);
        assert_eq!(s[0].spec.yaw, base.yaw);
        assert_eq!(s[0].truth, project_scene(&base).unwrap());
    }

    #[test]
    fn sweep_is_reproducible_and_mixed() {
        let run = || {
            sweep_scenes(200, &PoseRanges::default(), &SceneSpec::default(), &FovThresholds::default(), 17)
                .unwrap()
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.spec == y.spec && x.fov == y.fov));
        assert!(a.iter().any(|s| s.fov == FovLabel::Good));
        assert!(a.iter().any(|s| s.fov == FovLabel::Bad));
    }

    #[test]
    fn invalid_sweeps_rejected() {
        let base = SceneSpec::default();
        let t = FovThresholds::default();
        assert!(sweep_scenes(0, &PoseRanges::default(), &base, &t, 1).is_err());
        let bad = PoseRanges {
            yaw: Range::new(0.5, -0.5),
            ..PoseRanges::default()
        };
        assert!(sweep_scenes(3, &bad, &base, &t, 1).is_err());
        let outside = PoseRanges {
            x: Range::new(-2.0, 0.0),
            ..PoseRanges::default()
        };
        assert!(sweep_scenes(3, &outside, &base, &t, 1).is_err());
    }

    #[test]
    fn invalid_scene_rejected() {
        let s = SceneSpec {
            aisle_width: 0.0,
            ..SceneSpec::default()
        };
        assert!(project_scene(&s).is_err());
        let mut s = SceneSpec::default();
        s.camera.z = 20.0;
        assert!(s.validate().is_err());
    }
}
