use rayon::prelude::*;

use crate::error::Result;
use crate::frontend::IntensityMap;
use crate::geometry::{HoughGridSpec, ImageGeometry};

use super::{check_input, pixel_offset, HoughMap};

/// Number of row bands voted independently. Fixed so that the merge order,
/// and therefore the rounding, does not depend on the thread count.
const BANDS: usize = 16;

/// Optimized voting kernel.
///
/// Differences from the reference loop:
/// - r-bins are quantized by a saturating cast instead of `floor` and two
///   clamps ([`crate::geometry::RBinning::bin_truncating`], bin-for-bin
///   identical);
/// - each row's nonzero pixels and their x offsets are gathered once, then
///   voted theta-outer / pixel-inner, so `y·sin θ` is hoisted and the votes
///   of one pass walk a single accumulator row;
/// - row bands vote into private accumulators in parallel and are merged
///   in band order.
///
/// Every vote computes `x·cos θ + y·sin θ` with the same operands and
/// operation order as the reference, so both kernels fill identical bins.
pub fn vote_optimized(
    map: &IntensityMap,
    spec: &HoughGridSpec,
    geom: &ImageGeometry,
) -> Result<HoughMap> {
    check_input(map, spec, geom)?;
    let (w, h) = (map.width(), map.height());
    let (n_theta, n_r) = (spec.n_theta, spec.n_r);
    let trig = spec.trig_table();
    let binning = spec.r_binning(geom);
    let (half_w, half_h) = (geom.width as f64 / 2.0, geom.height as f64 / 2.0);

    let band_rows = h.div_ceil(BANDS);
    let partials: Vec<Option<Vec<f64>>> = (0..h.div_ceil(band_rows))
        .into_par_iter()
        .map(|band| {
            let rows = band * band_rows..((band + 1) * band_rows).min(h);
            let mut acc: Option<Vec<f64>> = None;
            let mut xs: Vec<f64> = Vec::with_capacity(w);
            let mut vs: Vec<f64> = Vec::with_capacity(w);
            for y in rows {
                xs.clear();
                vs.clear();
                for (x, &v) in map.row(y).iter().enumerate() {
                    if v > 0.0 {
                        xs.push(pixel_offset(x, half_w));
                        vs.push(v as f64);
                    }
                }
                if xs.is_empty() {
                    continue;
                }
                let acc = acc.get_or_insert_with(|| vec![0.0; n_theta * n_r]);
                let yc = pixel_offset(y, half_h);
                for (cells, &(c, s)) in acc.chunks_exact_mut(n_r).zip(&trig) {
                    let y_term = yc * s;
                    for (&xc, &v) in xs.iter().zip(&vs) {
                        cells[binning.bin_truncating(xc * c + y_term)] += v;
                    }
                }
            }
            acc
        })
        .collect();

    let mut total = vec![0.0f64; n_theta * n_r];
    for part in partials.into_iter().flatten() {
        for (t, p) in total.iter_mut().zip(&part) {
            *t += p;
        }
    }
    Ok(HoughMap::from_accumulator(*spec, &total))
}
