//! Line geometry in Hough parameter space.
//!
//! Lines use the normal form `x'·cos θ + y'·sin θ = r`, where `(x', y')` are
//! pixel coordinates relative to the image center (x right, y down). `θ` is
//! kept in `[0, π)`; the equivalent pair `(θ − π, −r)` is folded into that
//! range on construction.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Tolerance used when checking `|r| ≤ R` on externally produced lines.
const R_TOLERANCE: f64 = 1e-9;

/// Chords shorter than this (in pixels) are treated as a tangent point.
const MIN_CHORD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGeometry {
    pub width: u32,
    pub height: u32,
}

impl ImageGeometry {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn center(&self) -> Point {
        Point::new(self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    /// Half the image diagonal, the largest `|r|` of any line touching the image.
    pub fn half_diagonal(&self) -> f64 {
        let (w, h) = (self.width as f64, self.height as f64);
        (w * w + h * h).sqrt() / 2.0
    }

    pub fn diagonal(&self) -> f64 {
        2.0 * self.half_diagonal()
    }
}

/// Quantization of the Hough parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HoughGridSpec {
    pub n_theta: usize,
    pub n_r: usize,
}

impl Default for HoughGridSpec {
    fn default() -> Self {
        Self {
            n_theta: 150,
            n_r: 150,
        }
    }
}

impl HoughGridSpec {
    pub fn new(n_theta: usize, n_r: usize) -> Result<Self> {
        if n_theta < 2 || n_r < 2 {
            return Err(invalid(format!(
                "hough grid needs at least 2x2 bins, got {n_theta}x{n_r}"
            )));
        }
        Ok(Self { n_theta, n_r })
    }

    pub fn cells(&self) -> usize {
        self.n_theta * self.n_r
    }

    /// Angle at the center of theta bin `i`.
    #[inline]
    pub fn theta_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * PI / self.n_theta as f64
    }

    /// `(cos θ, sin θ)` for every theta bin center.
    pub fn trig_table(&self) -> Vec<(f64, f64)> {
        (0..self.n_theta)
            .map(|i| {
                let t = self.theta_center(i);
                (t.cos(), t.sin())
            })
            .collect()
    }

    #[inline]
    pub fn theta_bin(&self, theta: f64) -> usize {
        let f = (theta * self.n_theta as f64 / PI).floor();
        (f.max(0.0) as usize).min(self.n_theta - 1)
    }

    pub fn r_binning(&self, geom: &ImageGeometry) -> RBinning {
        RBinning::new(self.n_r, geom.half_diagonal())
    }
}

/// Maps a signed distance `r ∈ [−R, R]` to an r-bin index.
///
/// Both voting kernels and [`line_to_bin`] go through this type so that a
/// given `r` lands in the same bin everywhere.
#[derive(Debug, Clone, Copy)]
pub struct RBinning {
    pub half_diag: f64,
    scale: f64,
    last: usize,
}

impl RBinning {
    pub fn new(n_r: usize, half_diag: f64) -> Self {
        Self {
            half_diag,
            scale: n_r as f64 / (2.0 * half_diag),
            last: n_r - 1,
        }
    }

    #[inline(always)]
    pub fn bin(&self, r: f64) -> usize {
        let f = ((r + self.half_diag) * self.scale).floor();
        (f.max(0.0) as usize).min(self.last)
    }

    /// Same result as [`RBinning::bin`] for every input, including NaN and
    /// infinities, without calling `floor`. A float-to-int `as` cast
    /// truncates toward zero and saturates negatives and NaN to 0, so for
    /// `x ≥ 0` it equals `floor(x)` and for `x < 0` it equals the clamped
    /// floor, which is 0.
    #[inline(always)]
    pub fn bin_truncating(&self, r: f64) -> usize {
        (((r + self.half_diag) * self.scale) as usize).min(self.last)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A line in normal form relative to the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricLine {
    pub theta: f64,
    pub r: f64,
}

impl ParametricLine {
    /// Builds a line, folding `theta` into `[0, π)` (negating `r` as needed).
    pub fn new(theta: f64, r: f64) -> Self {
        let mut t = theta.rem_euclid(2.0 * PI);
        let mut r = r;
        if t >= PI {
            t -= PI;
            r = -r;
        }
        if t >= PI {
            // rem_euclid can return values that round up to the period.
            t = 0.0;
            r = -r;
        }
        Self { theta: t, r }
    }

    pub fn validate(&self, geom: &ImageGeometry) -> Result<()> {
        if !(0.0..PI).contains(&self.theta) {
            return Err(invalid(format!("theta {} outside [0, pi)", self.theta)));
        }
        let big_r = geom.half_diagonal();
        if !self.r.is_finite() || self.r.abs() > big_r + R_TOLERANCE {
            return Err(invalid(format!(
                "r {} outside [-{big_r}, {big_r}]",
                self.r
            )));
        }
        Ok(())
    }

    /// Unit normal `(cos θ, sin θ)`.
    pub fn normal(&self) -> (f64, f64) {
        (self.theta.cos(), self.theta.sin())
    }
}

/// A chord of a line, in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub p0: Point,
    pub p1: Point,
}

impl Segment {
    pub const fn new(p0: Point, p1: Point) -> Self {
        Self { p0, p1 }
    }

    pub fn length(&self) -> f64 {
        self.p0.distance(&self.p1)
    }

    pub fn midpoint(&self) -> Point {
        Point::new((self.p0.x + self.p1.x) / 2.0, (self.p0.y + self.p1.y) / 2.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.length() <= MIN_CHORD
    }

    /// The infinite line through both endpoints (two-point normal form).
    pub fn to_line(&self, geom: &ImageGeometry) -> Result<ParametricLine> {
        if self.is_degenerate() {
            return Err(invalid("cannot derive a line from a degenerate segment"));
        }
        let c = geom.center();
        let (dx, dy) = (self.p1.x - self.p0.x, self.p1.y - self.p0.y);
        let len = dx.hypot(dy);
        let (nx, ny) = (-dy / len, dx / len);
        let r = nx * (self.p0.x - c.x) + ny * (self.p0.y - c.y);
        Ok(ParametricLine::new(ny.atan2(nx), r))
    }

    /// Shortest distance from `p` to any point of the segment.
    pub fn distance_to(&self, p: &Point) -> f64 {
        let (dx, dy) = (self.p1.x - self.p0.x, self.p1.y - self.p0.y);
        let len2 = dx * dx + dy * dy;
        if len2 == 0.0 {
            return self.p0.distance(p);
        }
        let t = (((p.x - self.p0.x) * dx + (p.y - self.p0.y) * dy) / len2).clamp(0.0, 1.0);
        p.distance(&Point::new(self.p0.x + t * dx, self.p0.y + t * dy))
    }
}

/// Continuous line at bin `(i, j)` of the grid (bin centers).
pub fn bin_to_line(
    i: usize,
    j: usize,
    spec: &HoughGridSpec,
    geom: &ImageGeometry,
) -> Result<ParametricLine> {
    if i >= spec.n_theta || j >= spec.n_r {
        return Err(invalid(format!(
            "bin ({i}, {j}) outside {}x{} grid",
            spec.n_theta, spec.n_r
        )));
    }
    Ok(bin_coords_to_line(i as f64, j as f64, spec, geom))
}

/// Like [`bin_to_line`] but for fractional bin coordinates such as region
/// centroids.
pub fn bin_coords_to_line(
    i: f64,
    j: f64,
    spec: &HoughGridSpec,
    geom: &ImageGeometry,
) -> ParametricLine {
    let big_r = geom.half_diagonal();
    let theta = (i + 0.5) * PI / spec.n_theta as f64;
    let r = ((j + 0.5) / spec.n_r as f64) * 2.0 * big_r - big_r;
    ParametricLine::new(theta, r)
}

pub fn line_to_bin(
    line: &ParametricLine,
    spec: &HoughGridSpec,
    geom: &ImageGeometry,
) -> (usize, usize) {
    (
        spec.theta_bin(line.theta),
        spec.r_binning(geom).bin(line.r),
    )
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    X(f64),
    Y(f64),
}

/// Intersects the infinite line with the image rectangle `[0, W] × [0, H]`.
///
/// Endpoints are ordered by `(x, y)`. Returns `None` when the line misses the
/// rectangle or only touches it at a point.
pub fn clip_to_image(line: &ParametricLine, geom: &ImageGeometry) -> Option<Segment> {
    let (hw, hh) = (geom.width as f64 / 2.0, geom.height as f64 / 2.0);
    let (c, s) = line.normal();
    let (px, py) = (line.r * c, line.r * s);
    let (dx, dy) = (-s, c);

    let mut lo = (f64::NEG_INFINITY, None);
    let mut hi = (f64::INFINITY, None);
    for (p, d, half, side) in [
        (px, dx, hw, Side::X as fn(f64) -> Side),
        (py, dy, hh, Side::Y as fn(f64) -> Side),
    ] {
        if d == 0.0 {
            if p < -half || p > half {
                return None;
            }
            continue;
        }
        let (mut t_a, mut t_b) = ((-half - p) / d, (half - p) / d);
        let (mut b_a, mut b_b) = (side(-half), side(half));
        if t_a > t_b {
            std::mem::swap(&mut t_a, &mut t_b);
            std::mem::swap(&mut b_a, &mut b_b);
        }
        if t_a > lo.0 {
            lo = (t_a, Some(b_a));
        }
        if t_b < hi.0 {
            hi = (t_b, Some(b_b));
        }
    }
    if hi.0 - lo.0 <= MIN_CHORD {
        return None;
    }

    let endpoint = |t: f64, side: Option<Side>| {
        let (mut x, mut y) = (px + t * dx, py + t * dy);
        match side {
            Some(Side::X(b)) => x = b,
            Some(Side::Y(b)) => y = b,
            None => {}
        }
        Point::new(x.clamp(-hw, hw) + hw, y.clamp(-hh, hh) + hh)
    };
    let (a, b) = (endpoint(lo.0, lo.1), endpoint(hi.0, hi.1));
    let seg = if (a.x, a.y) <= (b.x, b.y) {
        Segment::new(a, b)
    } else {
        Segment::new(b, a)
    };
    (!seg.is_degenerate()).then_some(seg)
}

/// Part of a finite segment inside `[0, W] × [0, H]` (Liang–Barsky).
pub fn clip_segment(seg: &Segment, geom: &ImageGeometry) -> Option<Segment> {
    let (w, h) = (geom.width as f64, geom.height as f64);
    let (dx, dy) = (seg.p1.x - seg.p0.x, seg.p1.y - seg.p0.y);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-dx, seg.p0.x),
        (dx, w - seg.p0.x),
        (-dy, seg.p0.y),
        (dy, h - seg.p0.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t0 >= t1 {
        return None;
    }
    let at = |t: f64| {
        Point::new(
            (seg.p0.x + t * dx).clamp(0.0, w),
            (seg.p0.y + t * dy).clamp(0.0, h),
        )
    };
    let out = Segment::new(at(t0), at(t1));
    (!out.is_degenerate()).then_some(out)
}

/// Acute angle between two lines, in `[0, π/2]`.
pub fn angle_between(a: &ParametricLine, b: &ParametricLine) -> f64 {
    let d = (a.theta - b.theta).abs();
    d.min(PI - d).clamp(0.0, FRAC_PI_2)
}

/// Distance between segment midpoints as a fraction of the image diagonal.
pub fn midpoint_distance(a: &Segment, b: &Segment, geom: &ImageGeometry) -> Result<f64> {
    if a.is_degenerate() || b.is_degenerate() {
        return Err(invalid("midpoint distance of a degenerate segment"));
    }
    let d = a.midpoint().distance(&b.midpoint()) / geom.diagonal();
    Ok(d.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(w: u32, h: u32) -> ImageGeometry {
        ImageGeometry::new(w, h).unwrap()
    }

    #[test]
    fn first_bin_center_on_default_grid() {
        let g = geom(1200, 1200);
        let line = bin_to_line(0, 0, &HoughGridSpec::default(), &g).unwrap();
        assert!((line.theta - 0.010_471_975_5).abs() < 1e-9);
        assert!((line.r - (-842.871_280)).abs() < 1e-5);
    }

    #[test]
    fn small_grid_bin_centers() {
        let g = geom(100, 100);
        let spec = HoughGridSpec::new(2, 3).unwrap();
        let l = bin_to_line(1, 1, &spec, &g).unwrap();
        assert!((l.theta - 3.0 * PI / 4.0).abs() < 1e-12);
        assert!(l.r.abs() < 1e-12);
    }

    #[test]
    fn bin_out_of_range() {
        let g = geom(10, 10);
        let spec = HoughGridSpec::default();
        assert!(bin_to_line(150, 0, &spec, &g).is_err());
        assert!(bin_to_line(0, 150, &spec, &g).is_err());
        assert!(HoughGridSpec::new(1, 5).is_err());
        assert!(ImageGeometry::new(0, 5).is_err());
    }

    #[test]
    fn grid_corners_quantize_to_extreme_bins() {
        let g = geom(640, 480);
        let spec = HoughGridSpec::default();
        let big_r = g.half_diagonal();
        assert_eq!(line_to_bin(&ParametricLine { theta: 0.0, r: -big_r }, &spec, &g), (0, 0));
        let hi = ParametricLine {
            theta: PI - 1e-12,
            r: big_r - 1e-9,
        };
        assert_eq!(line_to_bin(&hi, &spec, &g), (149, 149));
        let over = ParametricLine { theta: PI, r: big_r };
        assert_eq!(line_to_bin(&over, &spec, &g), (149, 149));
    }

    #[test]
    fn construction_folds_theta() {
        let l = ParametricLine::new(PI + 0.25, 10.0);
        assert!((l.theta - 0.25).abs() < 1e-12);
        assert_eq!(l.r, -10.0);
        let l = ParametricLine::new(-0.25, 10.0);
        assert!((l.theta - (PI - 0.25)).abs() < 1e-12);
        assert_eq!(l.r, -10.0);
    }

    #[test]
    fn clip_horizontal_and_vertical() {
        let g = geom(100, 100);
        let h = clip_to_image(&ParametricLine::new(FRAC_PI_2, 0.0), &g).unwrap();
        assert_eq!(h.p0, Point::new(0.0, 50.0));
        assert_eq!(h.p1, Point::new(100.0, 50.0));
        let v = clip_to_image(&ParametricLine::new(0.0, 0.0), &g).unwrap();
        assert_eq!(v.p0, Point::new(50.0, 0.0));
        assert_eq!(v.p1, Point::new(50.0, 100.0));
    }

    #[test]
    fn clip_tangent_and_outside_are_none() {
        let g = geom(100, 100);
        let big_r = g.half_diagonal();
        assert!(clip_to_image(&ParametricLine::new(0.0, big_r), &g).is_none());
        assert!(clip_to_image(&ParametricLine::new(PI / 4.0, big_r), &g).is_none());
        assert!(clip_to_image(&ParametricLine::new(0.0, 50.5), &g).is_none());
        // a line along the border is a full chord, not a tangent
        let edge = clip_to_image(&ParametricLine::new(0.0, 50.0), &g).unwrap();
        assert_eq!(edge.length(), 100.0);
    }

    #[test]
    fn angle_between_examples() {
        let a = ParametricLine::new(0.1, 0.0);
        let b = ParametricLine::new(3.0, 0.0);
        // min(2.9, π − 2.9)
        assert!((angle_between(&a, &b) - 0.241_592_653_589_793).abs() < 1e-12);
        assert_eq!(angle_between(&a, &a), 0.0);
        let p = ParametricLine::new(FRAC_PI_2, 0.0);
        assert!((angle_between(&ParametricLine::new(0.0, 0.0), &p) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn midpoint_distance_examples() {
        let g = geom(100, 100);
        let a = Segment::new(Point::new(-10.0, 0.0), Point::new(10.0, 0.0));
        let b = Segment::new(Point::new(20.0, 40.0), Point::new(40.0, 40.0));
        let d = midpoint_distance(&a, &b, &g).unwrap();
        assert!((d - 50.0 / 141.421_356_237_309_5).abs() < 1e-12);
        assert_eq!(midpoint_distance(&a, &a, &g).unwrap(), 0.0);

        let tl = Segment::new(Point::new(0.0, 0.0), Point::new(0.0, 0.0 + 1e-3));
        let corner = Segment::new(Point::new(-1.0, -1.0), Point::new(1.0, 1.0));
        let far = Segment::new(Point::new(99.0, 99.0), Point::new(101.0, 101.0));
        assert_eq!(midpoint_distance(&corner, &far, &g).unwrap(), 1.0);
        let deg = Segment::new(Point::new(3.0, 3.0), Point::new(3.0, 3.0));
        assert!(midpoint_distance(&deg, &tl, &g).is_err());
    }

    #[test]
    fn two_point_form_matches_clip() {
        let g = geom(320, 240);
        let line = ParametricLine::new(1.1, -37.5);
        let seg = clip_to_image(&line, &g).unwrap();
        let back = seg.to_line(&g).unwrap();
        assert!((back.theta - line.theta).abs() < 1e-9);
        assert!((back.r - line.r).abs() < 1e-9);
    }

    #[test]
    fn full_default_grid_round_trips() {
        let g = geom(1200, 1200);
        let spec = HoughGridSpec::default();
        for i in 0..spec.n_theta {
            for j in 0..spec.n_r {
                let l = bin_to_line(i, j, &spec, &g).unwrap();
                assert_eq!(line_to_bin(&l, &spec, &g), (i, j));
            }
        }
    }

    fn on_boundary(p: &Point, g: &ImageGeometry) -> bool {
        let (w, h) = (g.width as f64, g.height as f64);
        let inside = (-1e-9..=w + 1e-9).contains(&p.x) && (-1e-9..=h + 1e-9).contains(&p.y);
        let edge = p.x.abs() <= 1e-9
            || (p.x - w).abs() <= 1e-9
            || p.y.abs() <= 1e-9
            || (p.y - h).abs() <= 1e-9;
        inside && edge
    }

    #[test]
    fn truncating_bin_matches_on_special_values() {
        let b = RBinning::new(150, 848.5);
        for r in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY, -848.5, -848.5 - 1e-12, -849.6, 848.5, -0.0, 1e300] {
            assert_eq!(b.bin(r), b.bin_truncating(r), "r = {r}");
        }
    }

    proptest! {
        #[test]
        fn truncating_bin_matches_floor(n in 2usize..400, half in 1.0f64..3000.0, r in -4000.0f64..4000.0) {
            let b = RBinning::new(n, half);
            prop_assert_eq!(b.bin(r), b.bin_truncating(r));
        }

        #[test]
        fn clipped_endpoints_lie_on_boundary(
            w in 2u32..2000, h in 2u32..2000,
            theta in 0.0f64..PI, frac in -1.0f64..1.0,
        ) {
            let g = geom(w, h);
            let line = ParametricLine::new(theta, frac * g.half_diagonal());
            if let Some(seg) = clip_to_image(&line, &g) {
                prop_assert!(on_boundary(&seg.p0, &g), "{:?}", seg);
                prop_assert!(on_boundary(&seg.p1, &g), "{:?}", seg);
                // endpoints satisfy the line equation
                let c = g.center();
                let (ct, st) = line.normal();
                for p in [seg.p0, seg.p1] {
                    let resid = (p.x - c.x) * ct + (p.y - c.y) * st - line.r;
                    prop_assert!(resid.abs() < 1e-6);
                }
            }
        }

        #[test]
        fn angle_between_symmetric_and_bounded(a in 0.0f64..PI, b in 0.0f64..PI) {
            let (la, lb) = (ParametricLine::new(a, 0.0), ParametricLine::new(b, 0.0));
            let ab = angle_between(&la, &lb);
            prop_assert_eq!(ab, angle_between(&lb, &la));
            prop_assert!((0.0..=FRAC_PI_2).contains(&ab));
        }

        #[test]
        fn midpoint_distance_symmetric_and_bounded(
            coords in proptest::array::uniform8(-50.0f64..150.0),
        ) {
            let g = geom(100, 100);
            let a = Segment::new(Point::new(coords[0], coords[1]), Point::new(coords[2], coords[3]));
            let b = Segment::new(Point::new(coords[4], coords[5]), Point::new(coords[6], coords[7]));
            prop_assume!(!a.is_degenerate() && !b.is_degenerate());
            let d = midpoint_distance(&a, &b, &g).unwrap();
            prop_assert_eq!(d, midpoint_distance(&b, &a, &g).unwrap());
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
