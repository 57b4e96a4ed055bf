//! File formats: float grids, annotations, predictions, FOV labels and
//! evaluation reports.

mod annotations;
mod grid;
mod jsonl;
mod predictions;
mod report;

use std::fs;
use std::io::Write;
use std::path::Path;

pub use annotations::{annotations_to_string, parse_annotations, read_annotations, AnnotationRecord};
pub use grid::{FloatGrid, GridChannel, MAGIC, VERSION};
pub use predictions::{
    fov_labels_to_string, parse_fov_labels, parse_predictions, predictions_to_string, read_fov_labels,
    read_predictions, FovRecord, PredictionRecord,
};
pub use report::{parse_report, read_report, render_table, report_to_json, table_path, write_report, UNDEFINED};

use crate::error::{invalid, Result};

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Writes a grid file atomically.
pub fn write_float_grid(grid: &FloatGrid, path: &Path) -> Result<()> {
    write_atomic(path, &grid.to_bytes())
}

pub fn read_float_grid(path: &Path) -> Result<FloatGrid> {
    FloatGrid::read(path)
}
