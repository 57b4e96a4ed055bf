//! Prediction and FOV label files, one JSON record per line:
//!
//! ```text
//! {"id":"aisle_0001","width":600,"height":600,
//!  "predictions":{"AisleLeft":{"theta":0.61,"r":-12.5,"confidence":0.93}}}
//! {"id":"aisle_0001","label":"Good"}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::jsonl::{f64_field, field, parse_lines, reject_unknown, string_field, u32_field, RecordContext};
use crate::error::Result;
use crate::extraction::{ClassPredictionSet, Prediction, SemanticClass};
use crate::fov::{FovCriteria, FovLabel};
use crate::geometry::{ImageGeometry, ParametricLine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub predictions: ClassPredictionSet,
}

impl PredictionRecord {
    pub fn geometry(&self) -> ImageGeometry {
        ImageGeometry {
            width: self.width,
            height: self.height,
        }
    }
}

fn parse_prediction(ctx: &RecordContext, v: &Value, path: &str, geom: &ImageGeometry) -> Result<Prediction> {
    let obj = v.as_object().ok_or_else(|| ctx.error(path, "expected an object"))?;
    let sub = |name: &str| format!("{path}.{name}");
    let get = |name: &str| f64_field(ctx, obj, name).map_err(|_| ctx.error(&sub(name), "expected a finite number"));
    if let Some(k) = obj.keys().find(|k| !matches!(k.as_str(), "theta" | "r" | "confidence")) {
        return Err(ctx.error(&sub(k), "unknown field"));
    }
    let (theta, r, confidence) = (get("theta")?, get("r")?, get("confidence")?);
    ParametricLine { theta, r }
        .validate(geom)
        .map_err(|e| ctx.error(path, e.to_string()))?;
    if confidence < 0.0 {
        return Err(ctx.error(&sub("confidence"), "must be non-negative"));
    }
    Ok(Prediction { theta, r, confidence })
}

fn parse_record(ctx: &RecordContext, v: &Value) -> Result<PredictionRecord> {
    let obj = v.as_object().ok_or_else(|| ctx.error("record", "expected a JSON object"))?;
    reject_unknown(ctx, obj, &["id", "width", "height", "predictions"])?;
    let id = string_field(ctx, obj, "id")?;
    let width = u32_field(ctx, obj, "width")?;
    let height = u32_field(ctx, obj, "height")?;
    let geom = ImageGeometry::new(width, height).map_err(|e| ctx.error("width", e.to_string()))?;
    let preds = field(ctx, obj, "predictions")?
        .as_object()
        .ok_or_else(|| ctx.error("predictions", "expected an object keyed by class"))?;
    let mut set = ClassPredictionSet::empty();
    for (name, p) in preds {
        let path = format!("predictions.{name}");
        let class: SemanticClass = name.parse().map_err(|_| ctx.error(&path, "unknown class"))?;
        set.set(class, Some(parse_prediction(ctx, p, &path, &geom)?));
    }
    Ok(PredictionRecord {
        id,
        width,
        height,
        predictions: set,
    })
}

pub fn parse_predictions(text: &str, path: &Path) -> Result<Vec<PredictionRecord>> {
    parse_lines(text, path, parse_record)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    parse_predictions(&std::fs::read_to_string(path)?, path)
}

pub fn predictions_to_string(records: &[PredictionRecord]) -> Result<String> {
    super::jsonl::to_lines(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FovRecord {
    pub id: String,
    pub label: FovLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<FovCriteria>,
}

fn parse_fov(ctx: &RecordContext, v: &Value) -> Result<FovRecord> {
    let obj = v.as_object().ok_or_else(|| ctx.error("record", "expected a JSON object"))?;
    reject_unknown(ctx, obj, &["id", "label", "criteria"])?;
    let id = string_field(ctx, obj, "id")?;
    let label = string_field(ctx, obj, "label")?
        .parse()
        .map_err(|_| ctx.error("label", "expected \"Good\" or \"Bad\""))?;
    let criteria = match obj.get("criteria") {
        None | Some(Value::Null) => None,
        Some(c) => Some(serde_json::from_value(c.clone()).map_err(|e| ctx.error("criteria", e.to_string()))?),
    };
    Ok(FovRecord { id, label, criteria })
}

pub fn parse_fov_labels(text: &str, path: &Path) -> Result<Vec<FovRecord>> {
    parse_lines(text, path, parse_fov)
}

pub fn read_fov_labels(path: &Path) -> Result<Vec<FovRecord>> {
    parse_fov_labels(&std::fs::read_to_string(path)?, path)
}

pub fn fov_labels_to_string(records: &[FovRecord]) -> Result<String> {
    super::jsonl::to_lines(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn p(text: &str) -> Result<Vec<PredictionRecord>> {
        parse_predictions(text, Path::new("p.jsonl"))
    }

    #[test]
    fn round_trip_is_exact() {
        let set = ClassPredictionSet::empty()
            .with(
                SemanticClass::AisleRight,
                Prediction {
                    theta: 2.0943951023931957,
                    r: -17.125,
                    confidence: 0.271828,
                },
            )
            .with(
                SemanticClass::WallEndCap,
                Prediction {
                    theta: std::f64::consts::FRAC_PI_2,
                    r: 40.0,
                    confidence: 1.0,
                },
            );
        let recs = vec![
            PredictionRecord {
                id: "x".into(),
                width: 120,
                height: 90,
                predictions: set,
            },
            PredictionRecord {
                id: "blank".into(),
                width: 120,
                height: 90,
                predictions: ClassPredictionSet::empty(),
            },
        ];
        let text = predictions_to_string(&recs).unwrap();
        assert!(text.contains(r#""predictions":{}"#));
        assert_eq!(p(&text).unwrap(), recs);
    }

    #[test]
    fn invalid_predictions_are_located() {
        let cases = [
            (r#"{"id":"a","width":10,"height":10,"predictions":{"AisleLeft":{"theta":4.0,"r":0,"confidence":1}}}"#, "predictions.AisleLeft"),
            (r#"{"id":"a","width":10,"height":10,"predictions":{"AisleLeft":{"theta":1.0,"r":99,"confidence":1}}}"#, "predictions.AisleLeft"),
            (r#"{"id":"a","width":10,"height":10,"predictions":{"AisleLeft":{"theta":1.0,"r":0}}}"#, "predictions.AisleLeft.confidence"),
            (r#"{"id":"a","width":10,"height":10,"predictions":{"Aisle":{"theta":1.0,"r":0,"confidence":1}}}"#, "predictions.Aisle"),
            (r#"{"id":"a","width":10,"height":10}"#, "predictions"),
        ];
        for (text, want) in cases {
            match p(text) {
                Err(Error::Record { field, .. }) => assert_eq!(field, want),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn fov_labels_round_trip() {
        let recs = vec![
            FovRecord {
                id: "a".into(),
                label: FovLabel::Good,
                criteria: Some(FovCriteria {
                    single_aisle_visible: true,
                    full_racks_both_sides: true,
                    rack_tops_visible: true,
                    aisle_centered: true,
                }),
            },
            FovRecord {
                id: "b".into(),
                label: FovLabel::Bad,
                criteria: None,
            },
        ];
        let text = fov_labels_to_string(&recs).unwrap();
        assert_eq!(parse_fov_labels(&text, Path::new("f")).unwrap(), recs);
        assert!(parse_fov_labels(r#"{"id":"a","label":"Okay"}"#, Path::new("f")).is_err());
    }
}
