use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::frontend::IntensityMap;
use crate::geometry::HoughGridSpec;

use super::{vote_optimized, vote_reference, HoughMap};

/// Relative tolerance at which the optimized kernel counts as equivalent.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-4;

/// Timing and equivalence of both kernels on one input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelComparison {
    pub width: usize,
    pub height: usize,
    pub n_theta: usize,
    pub n_r: usize,
    pub runs: usize,
    pub reference_median_ms: f64,
    pub optimized_median_ms: f64,
    /// optimized / reference wall time.
    pub time_ratio: f64,
    /// reference / optimized wall time.
    pub speedup: f64,
    pub max_relative_error: f64,
    pub equivalent: bool,
}

/// Largest per-cell `|candidate − oracle| / oracle`. A cell that is zero in
/// the oracle must be exactly zero in the candidate.
pub fn max_relative_error(candidate: &HoughMap, oracle: &HoughMap) -> f64 {
    if candidate.spec() != oracle.spec() {
        return f64::INFINITY;
    }
    candidate
        .values()
        .iter()
        .zip(oracle.values())
        .map(|(&c, &o)| {
            let (c, o) = (c as f64, o as f64);
            if o == 0.0 {
                if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (c - o).abs() / o.abs()
            }
        })
        .fold(0.0, f64::max)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Times both kernels `runs` times each (interleaved) and checks equivalence.
pub fn compare_kernels(
    map: &IntensityMap,
    spec: &HoughGridSpec,
    runs: usize,
) -> Result<KernelComparison> {
    if runs == 0 {
        return Err(invalid("kernel comparison needs at least one run"));
    }
    let geom = map.geometry();
    let mut ref_ms = Vec::with_capacity(runs);
    let mut opt_ms = Vec::with_capacity(runs);
    let mut max_err = 0.0f64;
    for _ in 0..runs {
        let t = Instant::now();
        let reference = vote_reference(map, spec, &geom)?;
        ref_ms.push(t.elapsed().as_secs_f64() * 1e3);

        let t = Instant::now();
        let optimized = vote_optimized(map, spec, &geom)?;
        opt_ms.push(t.elapsed().as_secs_f64() * 1e3);

        max_err = max_err.max(max_relative_error(&optimized, &reference));
    }
    let (reference_median_ms, optimized_median_ms) = (median(ref_ms), median(opt_ms));
    Ok(KernelComparison {
        width: map.width(),
        height: map.height(),
        n_theta: spec.n_theta,
        n_r: spec.n_r,
        runs,
        reference_median_ms,
        optimized_median_ms,
        time_ratio: optimized_median_ms / reference_median_ms,
        speedup: reference_median_ms / optimized_median_ms,
        max_relative_error: max_err,
        equivalent: max_err <= EQUIVALENCE_TOLERANCE,
    })
}
