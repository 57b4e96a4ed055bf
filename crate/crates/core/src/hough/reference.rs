use crate::error::Result;
use crate::frontend::IntensityMap;
use crate::geometry::{HoughGridSpec, ImageGeometry};

use super::{check_input, pixel_offset, HoughMap};

/// Scalar pixel-centric voting. Pixels are visited row-major and each casts
/// one vote per theta bin, in ascending theta order. Single-threaded and
/// deterministic; this is the oracle for [`super::vote_optimized`].
pub fn vote_reference(
    map: &IntensityMap,
    spec: &HoughGridSpec,
    geom: &ImageGeometry,
) -> Result<HoughMap> {
    check_input(map, spec, geom)?;
    let trig = spec.trig_table();
    let binning = spec.r_binning(geom);
    let (half_w, half_h) = (geom.width as f64 / 2.0, geom.height as f64 / 2.0);
    let n_r = spec.n_r;

    let mut acc = vec![0.0f64; spec.cells()];
    for y in 0..map.height() {
        let yc = pixel_offset(y, half_h);
        for x in 0..map.width() {
            let v = map.get(x, y);
            if v <= 0.0 {
                continue;
            }
            let xc = pixel_offset(x, half_w);
            for (i, &(c, s)) in trig.iter().enumerate() {
                let r = xc * c + yc * s;
                acc[i * n_r + binning.bin(r)] += v as f64;
            }
        }
    }
    Ok(HoughMap::from_accumulator(*spec, &acc))
}
