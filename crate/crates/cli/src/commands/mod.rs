pub mod bench;
pub mod detect;
pub mod eval;
pub mod fov;
pub mod synth;

use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Expands directories into their files with extension `ext`, sorted by
/// name. Plain file arguments are kept as given.
pub(crate) fn expand_inputs(paths: &[PathBuf], ext: &str) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<_> = std::fs::read_dir(p)
                .map_err(|e| CliError::data(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && has_extension(f, ext))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn has_extension(p: &Path, ext: &str) -> bool {
    p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Record id for an input file: its stem.
pub(crate) fn file_id(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}
