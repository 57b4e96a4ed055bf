//! Line-delimited JSON helpers with located errors.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub(crate) struct RecordContext {
    pub path: PathBuf,
    pub line: usize,
}

impl RecordContext {
    pub fn error(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Record {
            path: self.path.clone(),
            line: self.line,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Records carrying an image id, unique within a file.
pub(crate) trait Keyed {
    fn key(&self) -> &str;
}

impl Keyed for super::AnnotationRecord {
    fn key(&self) -> &str {
        &self.id
    }
}

impl Keyed for super::PredictionRecord {
    fn key(&self) -> &str {
        &self.id
    }
}

impl Keyed for super::FovRecord {
    fn key(&self) -> &str {
        &self.id
    }
}

pub(crate) fn parse_lines<T: Keyed>(
    text: &str,
    path: &Path,
    parse: impl Fn(&RecordContext, &Value) -> Result<T>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let ctx = RecordContext {
            path: path.to_path_buf(),
            line: k + 1,
        };
        let value: Value = serde_json::from_str(raw).map_err(|e| ctx.error("record", e.to_string()))?;
        let rec = parse(&ctx, &value)?;
        if !seen.insert(rec.key().to_string()) {
            return Err(ctx.error("id", format!("duplicate id {:?}", rec.key())));
        }
        out.push(rec);
    }
    Ok(out)
}

pub(crate) fn to_lines<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub(crate) fn field<'a>(ctx: &RecordContext, obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| ctx.error(name, "missing"))
}

pub(crate) fn string_field(ctx: &RecordContext, obj: &Map<String, Value>, name: &str) -> Result<String> {
    field(ctx, obj, name)?
        .as_str()
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .ok_or_else(|| ctx.error(name, "expected a non-empty string"))
}

pub(crate) fn u32_field(ctx: &RecordContext, obj: &Map<String, Value>, name: &str) -> Result<u32> {
    field(ctx, obj, name)?
        .as_u64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| ctx.error(name, "expected a non-negative integer"))
}

pub(crate) fn f64_field(ctx: &RecordContext, obj: &Map<String, Value>, name: &str) -> Result<f64> {
    field(ctx, obj, name)?
        .as_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ctx.error(name, "expected a finite number"))
}

pub(crate) fn reject_unknown(ctx: &RecordContext, obj: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ctx.error(k, "unknown field")),
        None => Ok(()),
    }
}
