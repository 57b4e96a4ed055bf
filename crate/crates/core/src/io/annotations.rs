//! Line annotations, one JSON record per line:
//!
//! ```text
//! {"id":"aisle_0001","width":600,"height":600,
//!  "lines":{"AisleLeft":[[12.0,590.5],[288.1,301.7]], ...}}
//! ```
//!
//! Endpoints are pixel coordinates with the origin at the top-left corner
//! and must lie inside `[0, width] × [0, height]`. Classes without a line
//! are omitted.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::jsonl::{field, parse_lines, reject_unknown, string_field, u32_field, RecordContext};
use crate::error::Result;
use crate::extraction::{ClassPredictionSet, PerClass, Prediction, SemanticClass};
use crate::geometry::{ImageGeometry, Point, Segment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    pub width: u32,
    pub height: u32,
    #[serde(with = "lines_serde")]
    pub lines: PerClass<Option<Segment>>,
}

impl AnnotationRecord {
    pub fn geometry(&self) -> ImageGeometry {
        ImageGeometry {
            width: self.width,
            height: self.height,
        }
    }

    /// Ground truth in normal form, with unit confidence.
    pub fn to_truth(&self) -> Result<ClassPredictionSet> {
        let geom = self.geometry();
        let mut set = ClassPredictionSet::empty();
        for (class, seg) in self.lines.iter() {
            if let Some(seg) = seg {
                let line = seg.to_line(&geom)?;
                set.set(
                    class,
                    Some(Prediction {
                        theta: line.theta,
                        r: line.r,
                        confidence: 1.0,
                    }),
                );
            }
        }
        Ok(set)
    }
}

mod lines_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(lines: &PerClass<Option<Segment>>, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<SemanticClass, [[f64; 2]; 2]> = lines
            .iter()
            .filter_map(|(c, seg)| seg.map(|g| (c, [[g.p0.x, g.p0.y], [g.p1.x, g.p1.y]])))
            .collect();
        map.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PerClass<Option<Segment>>, D::Error> {
        let map = BTreeMap::<SemanticClass, [[f64; 2]; 2]>::deserialize(d)?;
        let mut out = PerClass::default();
        for (c, [a, b]) in map {
            out[c] = Some(Segment::new(Point::new(a[0], a[1]), Point::new(b[0], b[1])));
        }
        Ok(out)
    }
}

fn endpoint(ctx: &RecordContext, v: &Value, name: &str, geom: &ImageGeometry) -> Result<Point> {
    let coords = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| ctx.error(name, "expected an [x, y] pair"))?;
    let mut xy = [0.0; 2];
    for (k, c) in coords.iter().enumerate() {
        xy[k] = c
            .as_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| ctx.error(name, "coordinates must be finite numbers"))?;
    }
    let (w, h) = (geom.width as f64, geom.height as f64);
    if !(0.0..=w).contains(&xy[0]) || !(0.0..=h).contains(&xy[1]) {
        return Err(ctx.error(
            name,
            format!("endpoint ({}, {}) outside the {}x{} image", xy[0], xy[1], geom.width, geom.height),
        ));
    }
    Ok(Point::new(xy[0], xy[1]))
}

pub(crate) fn parse_record(ctx: &RecordContext, v: &Value) -> Result<AnnotationRecord> {
    let obj = v.as_object().ok_or_else(|| ctx.error("record", "expected a JSON object"))?;
    reject_unknown(ctx, obj, &["id", "width", "height", "lines"])?;
    let id = string_field(ctx, obj, "id")?;
    let width = u32_field(ctx, obj, "width")?;
    let height = u32_field(ctx, obj, "height")?;
    let geom = ImageGeometry::new(width, height).map_err(|e| ctx.error("width", e.to_string()))?;
    let lines_obj = field(ctx, obj, "lines")?
        .as_object()
        .ok_or_else(|| ctx.error("lines", "expected an object keyed by class"))?;
    let mut lines = PerClass::default();
    for (name, seg) in lines_obj {
        let path = format!("lines.{name}");
        let class: SemanticClass = name.parse().map_err(|_| ctx.error(&path, "unknown class"))?;
        let pts = seg
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| ctx.error(&path, "expected two endpoints"))?;
        let p0 = endpoint(ctx, &pts[0], &format!("{path}[0]"), &geom)?;
        let p1 = endpoint(ctx, &pts[1], &format!("{path}[1]"), &geom)?;
        let segment = Segment::new(p0, p1);
        if segment.is_degenerate() {
            return Err(ctx.error(&path, "endpoints coincide"));
        }
        lines[class] = Some(segment);
    }
    Ok(AnnotationRecord {
        id,
        width,
        height,
        lines,
    })
}

pub fn parse_annotations(text: &str, path: &Path) -> Result<Vec<AnnotationRecord>> {
    parse_lines(text, path, parse_record)
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    parse_annotations(&std::fs::read_to_string(path)?, path)
}

pub fn annotations_to_string(records: &[AnnotationRecord]) -> Result<String> {
    super::jsonl::to_lines(records)
}
