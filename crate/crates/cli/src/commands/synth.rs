use std::path::{Path, PathBuf};

use clap::Args;
use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::Serialize;

use semline_core::extraction::PerClass;
use semline_core::frontend::IntensityMap;
use semline_core::geometry::{Point, Segment};
use semline_core::io::{annotations_to_string, fov_labels_to_string, AnnotationRecord, FloatGrid, FovRecord};
use semline_core::synth::{render_layers, sweep_scenes, SceneSpec, SweepScene};

use crate::config::{RunConfig, Size};
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; must not exist or be empty.
    #[arg(long, short)]
    pub out: PathBuf,

    /// Number of scenes [default: 200].
    #[arg(long, short)]
    pub n: Option<usize>,

    /// Clutter segments per scene [default: 10].
    #[arg(long)]
    pub clutter: Option<usize>,

    /// Standard deviation of additive Gaussian noise [default: 0.05].
    #[arg(long)]
    pub noise: Option<f64>,

    /// Image size as WIDTHxHEIGHT [default: 600x600]. The focal length
    /// scales with the width, so the field of view is unchanged.
    #[arg(long)]
    pub image: Option<Size>,

    /// Also write per-class feature grids under features/.
    #[arg(long)]
    pub with_features: bool,
}

impl SynthArgs {
    pub fn apply(&self, config: &mut RunConfig) {
        let s = &mut config.synth;
        if let Some(n) = self.n {
            s.count = n;
        }
        if let Some(c) = self.clutter {
            s.clutter_lines = c;
        }
        if let Some(v) = self.noise {
            s.noise_sigma = v;
        }
        if let Some(i) = self.image {
            s.focal_length *= i.width as f64 / s.image.width as f64;
            s.image = i;
        }
    }
}

#[derive(Serialize)]
struct SceneLine<'a> {
    id: &'a str,
    scene: &'a SceneSpec,
}

struct Rendered {
    id: String,
    png: Vec<u8>,
    features: Option<Vec<u8>>,
    annotation: AnnotationRecord,
    fov: FovRecord,
}

pub fn scene_id(index: usize) -> String {
    format!("scene_{index:04}")
}

fn to_rgb(map: &IntensityMap) -> RgbImage {
    RgbImage::from_fn(map.width() as u32, map.height() as u32, |x, y| {
        let v = (map.get(x as usize, y as usize).clamp(0.0, 1.0) * 255.0).round() as u8;
        Rgb([v, v, v])
    })
}

fn encode_png(img: &RgbImage) -> CliResult<Vec<u8>> {
    let mut buf = std::io::Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png)
        .map_err(|e| CliError::Internal(format!("png encoding: {e}")))?;
    Ok(buf.into_inner())
}

fn render(scene: &SweepScene, with_features: bool) -> CliResult<Rendered> {
    let id = scene_id(scene.index);
    let layers = render_layers(&scene.spec)?;
    let png = encode_png(&to_rgb(&layers.combined()))?;
    let features = if with_features {
        Some(FloatGrid::from_class_maps(&layers.class_channels())?.to_bytes())
    } else {
        None
    };
    let geom = scene.spec.geometry();
    // clipping can leave endpoints a rounding error outside the frame
    let clamp = |p: Point| Point::new(p.x.clamp(0.0, geom.width as f64), p.y.clamp(0.0, geom.height as f64));
    let lines: PerClass<Option<Segment>> =
        scene.truth.0.map(|_, gt| gt.as_ref().map(|gt| Segment::new(clamp(gt.extent.p0), clamp(gt.extent.p1))));
    Ok(Rendered {
        annotation: AnnotationRecord {
            id: id.clone(),
            width: geom.width,
            height: geom.height,
            lines,
        },
        fov: FovRecord {
            id: id.clone(),
            label: scene.fov,
            criteria: Some(scene.criteria),
        },
        id,
        png,
        features,
    })
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn write_dataset(dir: &Path, scenes: &[SweepScene], items: &[Rendered]) -> CliResult<()> {
    let mkdir = |p: &Path| std::fs::create_dir_all(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())));
    mkdir(&dir.join("images"))?;
    if items.iter().any(|i| i.features.is_some()) {
        mkdir(&dir.join("features"))?;
    }
    for item in items {
        write(&dir.join("images").join(format!("{}.png", item.id)), &item.png)?;
        if let Some(f) = &item.features {
            write(&dir.join("features").join(format!("{}.hslf", item.id)), f)?;
        }
    }
    let annotations: Vec<_> = items.iter().map(|i| i.annotation.clone()).collect();
    let fov: Vec<_> = items.iter().map(|i| i.fov.clone()).collect();
    write(&dir.join("annotations.jsonl"), annotations_to_string(&annotations)?.as_bytes())?;
    write(&dir.join("fov.jsonl"), fov_labels_to_string(&fov)?.as_bytes())?;
    let mut scene_lines = String::new();
    for (s, i) in scenes.iter().zip(items) {
        let line = serde_json::to_string(&SceneLine { id: &i.id, scene: &s.spec })
            .map_err(|e| CliError::Internal(e.to_string()))?;
        scene_lines.push_str(&line);
        scene_lines.push('\n');
    }
    write(&dir.join("scenes.jsonl"), scene_lines.as_bytes())
}

fn check_target(out: &Path) -> CliResult<()> {
    if out.exists() {
        let empty_dir = out.is_dir()
            && std::fs::read_dir(out)
                .map_err(|e| CliError::data(format!("{}: {e}", out.display())))?
                .next()
                .is_none();
        if !empty_dir {
            return Err(CliError::validation(format!("{} already exists and is not an empty directory", out.display())));
        }
    }
    Ok(())
}

/// Builds the dataset in a sibling staging directory and renames it into
/// place, so a failed run leaves nothing at `--out`.
pub fn run(config: &RunConfig, args: &SynthArgs) -> CliResult<()> {
    let s = &config.synth;
    if s.count == 0 {
        return Err(CliError::validation("--n must be at least 1"));
    }
    check_target(&args.out)?;
    let scenes = sweep_scenes(s.count, &s.poses, &s.base_scene(), &config.fov, config.seed)?;
    let items = scenes
        .par_iter()
        .map(|scene| render(scene, args.with_features))
        .collect::<CliResult<Vec<_>>>()?;

    let name = args
        .out
        .file_name()
        .ok_or_else(|| CliError::validation(format!("{} has no directory name", args.out.display())))?
        .to_string_lossy()
        .into_owned();
    let parent = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent).map_err(|e| CliError::data(format!("{}: {e}", parent.display())))?;
    let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
    let result = write_dataset(&staging, &scenes, &items).and_then(|()| {
        if args.out.exists() {
            std::fs::remove_dir(&args.out)?;
        }
        std::fs::rename(&staging, &args.out).map_err(CliError::from)
    });
    if result.is_err() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    result?;
    let good = scenes.iter().filter(|s| s.fov.is_good()).count();
    eprintln!("wrote {} scenes to {} ({} Good, {} Bad)", scenes.len(), args.out.display(), good, scenes.len() - good);
    Ok(())
}
