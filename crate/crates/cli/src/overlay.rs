//! Color-coded line overlays for visual inspection.

use image::{Rgb, RgbImage};

use semline_core::extraction::{ClassPredictionSet, SemanticClass};
use semline_core::geometry::{clip_segment, clip_to_image, ImageGeometry, ParametricLine, Point, Segment};

pub fn class_color(class: SemanticClass) -> Rgb<u8> {
    match class {
        SemanticClass::AisleLeft => Rgb([230, 60, 50]),
        SemanticClass::AisleRight => Rgb([40, 120, 230]),
        SemanticClass::RackTopLeft => Rgb([250, 170, 30]),
        SemanticClass::RackTopRight => Rgb([40, 190, 200]),
        SemanticClass::WallEndCap => Rgb([90, 200, 70]),
    }
}

/// Crossing point of two lines in pixel coordinates, if not parallel.
fn intersect(a: &ParametricLine, b: &ParametricLine, geom: &ImageGeometry) -> Option<Point> {
    let ((ca, sa), (cb, sb)) = (a.normal(), b.normal());
    let det = ca * sb - sa * cb;
    if det.abs() < 1e-9 {
        return None;
    }
    let x = (a.r * sb - b.r * sa) / det;
    let y = (ca * b.r - cb * a.r) / det;
    let c = geom.center();
    Some(Point::new(x + c.x, y + c.y))
}

/// Image-space segment drawn for each class. The end-cap line is cut
/// back to the span between the two aisle lines when both are present.
pub fn segments(preds: &ClassPredictionSet, geom: &ImageGeometry) -> Vec<(SemanticClass, Segment)> {
    let line = |c| preds.get(c).map(|p| p.line());
    let mut out = Vec::new();
    for (class, p) in preds.present() {
        let l = p.line();
        let seg = match (class, line(SemanticClass::AisleLeft), line(SemanticClass::AisleRight)) {
            (SemanticClass::WallEndCap, Some(a), Some(b)) => {
                match (intersect(&l, &a, geom), intersect(&l, &b, geom)) {
                    (Some(p0), Some(p1)) => clip_segment(&Segment::new(p0, p1), geom),
                    _ => clip_to_image(&l, geom),
                }
            }
            _ => clip_to_image(&l, geom),
        };
        if let Some(seg) = seg {
            out.push((class, seg));
        }
    }
    out
}

fn draw_segment(img: &mut RgbImage, seg: &Segment, color: Rgb<u8>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let steps = (seg.length() * 2.0).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let x = seg.p0.x + t * (seg.p1.x - seg.p0.x);
        let y = seg.p0.y + t * (seg.p1.y - seg.p0.y);
        let (cx, cy) = (x.floor() as i64, y.floor() as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (px, py) = (cx + dx, cy + dy);
                if (0..w).contains(&px) && (0..h).contains(&py) {
                    img.put_pixel(px as u32, py as u32, color);
                }
            }
        }
    }
}

/// Copy of `base` with every predicted line drawn in its class color.
pub fn render(base: &RgbImage, preds: &ClassPredictionSet) -> RgbImage {
    let mut img = base.clone();
    let geom = ImageGeometry {
        width: img.width(),
        height: img.height(),
    };
    for (class, seg) in segments(preds, &geom) {
        draw_segment(&mut img, &seg, class_color(class));
    }
    img
}
