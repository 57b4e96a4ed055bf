use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::Args;
use image::imageops::FilterType;
use image::RgbImage;
use rayon::prelude::*;

use semline_core::extraction::{ClassPredictionSet, Prediction};
use semline_core::frontend::build_pyramid;
use semline_core::geometry::{clip_to_image, ImageGeometry, Point, Segment};
use semline_core::io::{predictions_to_string, write_atomic, FloatGrid, PredictionRecord};
use semline_core::pipeline::{
    detect_from_activations, detect_from_class_features, detect_from_image, detect_from_pyramid,
    round_confidences, DetectParams,
};

use super::{expand_inputs, file_id};
use crate::config::{Rescale, RunConfig, Size};
use crate::error::{CliError, CliResult};
use crate::overlay;

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// PNG images, or directories of them.
    pub images: Vec<PathBuf>,

    /// Feature grids (.hslf): five class channels, or one class-agnostic
    /// channel. Directories are expanded.
    #[arg(long, num_args = 1..)]
    pub features: Vec<PathBuf>,

    /// Hough-space activation grids (.hslf) with five class channels.
    #[arg(long, num_args = 1..)]
    pub activations: Vec<PathBuf>,

    /// Image size the activation grids refer to, as WIDTHxHEIGHT.
    #[arg(long)]
    pub geometry: Option<Size>,

    /// Output predictions file (JSON lines).
    #[arg(long, short)]
    pub out: PathBuf,

    /// Directory for color-coded overlays of image inputs.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum InputKind {
    Image,
    Features,
    Activations,
}

struct Job {
    id: String,
    path: PathBuf,
    kind: InputKind,
}

struct Detection {
    record: PredictionRecord,
    image: Option<RgbImage>,
}

/// Maps a line found on a resized image back to the original frame by
/// scaling its chord endpoints.
fn rescale_prediction(p: &Prediction, from: &ImageGeometry, to: &ImageGeometry) -> Option<Prediction> {
    let chord = clip_to_image(&p.line(), from)?;
    let (sx, sy) = (to.width as f64 / from.width as f64, to.height as f64 / from.height as f64);
    let scale = |q: Point| Point::new(q.x * sx, q.y * sy);
    let line = Segment::new(scale(chord.p0), scale(chord.p1)).to_line(to).ok()?;
    Some(Prediction {
        theta: line.theta,
        r: line.r,
        confidence: p.confidence,
    })
}

fn detect_image(path: &Path, rescale: Rescale, params: &DetectParams) -> CliResult<(ClassPredictionSet, ImageGeometry, RgbImage)> {
    let img = image::open(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
        .to_rgb8();
    let orig = ImageGeometry::new(img.width(), img.height()).map_err(|e| CliError::data_at(path.display(), e))?;
    let target = match rescale {
        Rescale::To(s) if (s.width, s.height) != (img.width(), img.height()) => Some(s),
        _ => None,
    };
    let preds = match target {
        None => detect_from_image(&img, params).map_err(|e| CliError::data_at(path.display(), e))?,
        Some(s) => {
            let resized = image::imageops::resize(&img, s.width, s.height, FilterType::Triangle);
            let from = ImageGeometry::new(s.width, s.height)?;
            let found = detect_from_image(&resized, params).map_err(|e| CliError::data_at(path.display(), e))?;
            let mut back = ClassPredictionSet::empty();
            for (class, p) in found.present() {
                back.set(class, rescale_prediction(p, &from, &orig));
            }
            back
        }
    };
    Ok((preds, orig, img))
}

fn detect_features(path: &Path, params: &DetectParams) -> CliResult<(ClassPredictionSet, ImageGeometry)> {
    let at = |e| CliError::data_at(path.display(), e);
    let grid = FloatGrid::read(path).map_err(at)?;
    let geom = ImageGeometry::new(grid.width(), grid.height()).map_err(at)?;
    let preds = if grid.channels().len() == 1 {
        let map = grid.to_intensity().map_err(at)?;
        detect_from_pyramid(&build_pyramid(&map.suppress_below(params.feature_floor)).map_err(at)?, params)
    } else {
        detect_from_class_features(&grid.to_class_maps().map_err(at)?, params)
    }
    .map_err(at)?;
    Ok((preds, geom))
}

fn detect_activations(path: &Path, geom: &ImageGeometry, params: &DetectParams) -> CliResult<ClassPredictionSet> {
    let at = |e| CliError::data_at(path.display(), e);
    let acts = FloatGrid::read(path).map_err(at)?.to_activations().map_err(at)?;
    if acts.spec() != params.grid {
        return Err(CliError::data(format!(
            "{}: activation grid is {}x{} but the configured grid is {}x{}",
            path.display(),
            acts.spec().n_theta,
            acts.spec().n_r,
            params.grid.n_theta,
            params.grid.n_r
        )));
    }
    detect_from_activations(&acts, geom, params).map_err(at)
}

fn run_job(job: &Job, config: &RunConfig, act_geom: Option<ImageGeometry>, keep_image: bool) -> CliResult<Detection> {
    let params = config.detect_params();
    let (preds, geom, image) = match job.kind {
        InputKind::Image => {
            let (p, g, img) = detect_image(&job.path, config.rescale, &params)?;
            (p, g, keep_image.then_some(img))
        }
        InputKind::Features => {
            let (p, g) = detect_features(&job.path, &params)?;
            (p, g, None)
        }
        InputKind::Activations => {
            let g = act_geom.expect("checked before dispatch");
            (detect_activations(&job.path, &g, &params)?, g, None)
        }
    };
    Ok(Detection {
        record: PredictionRecord {
            id: job.id.clone(),
            width: geom.width,
            height: geom.height,
            predictions: round_confidences(&preds),
        },
        image,
    })
}

pub fn run(config: &RunConfig, args: &DetectArgs) -> CliResult<()> {
    let act_geom = match (args.activations.is_empty(), args.geometry) {
        (false, None) => return Err(CliError::validation("--activations needs --geometry WIDTHxHEIGHT")),
        (_, Some(s)) => Some(ImageGeometry::new(s.width, s.height)?),
        (true, None) => None,
    };
    let mut jobs = Vec::new();
    for (paths, ext, kind) in [
        (&args.images, "png", InputKind::Image),
        (&args.features, "hslf", InputKind::Features),
        (&args.activations, "hslf", InputKind::Activations),
    ] {
        for path in expand_inputs(paths, ext)? {
            jobs.push(Job {
                id: file_id(&path),
                path,
                kind,
            });
        }
    }
    if jobs.is_empty() {
        return Err(CliError::validation("no inputs: pass images, --features or --activations"));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = jobs.iter().find(|j| !seen.insert(j.id.as_str())) {
        return Err(CliError::validation(format!("two inputs share the id {:?}", dup.id)));
    }
    if let Some(dir) = &args.overlay {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }

    let results: Vec<_> = jobs
        .par_iter()
        .map(|job| run_job(job, config, act_geom, args.overlay.is_some()))
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut failures = 0usize;
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(det) => {
                if let (Some(dir), Some(img)) = (&args.overlay, &det.image) {
                    let path = dir.join(format!("{}.png", job.id));
                    if let Err(e) = overlay::render(img, &det.record.predictions).save(&path) {
                        eprintln!("error: {}: {e}", path.display());
                        failures += 1;
                    }
                }
                records.push(det.record);
            }
            Err(e) => {
                eprintln!("error: {e}");
                failures += 1;
            }
        }
    }
    let text = predictions_to_string(&records)?;
    write_atomic(&args.out, text.as_bytes()).map_err(|e| CliError::data_at(args.out.display(), e))?;
    eprintln!("detected lines in {} of {} inputs", records.len(), jobs.len());
    if failures > 0 {
        return Err(CliError::data(format!("{failures} of {} inputs failed", jobs.len())));
    }
    Ok(())
}
