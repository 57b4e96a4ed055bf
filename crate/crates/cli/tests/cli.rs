use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::RgbImage;
use tempfile::TempDir;

use semline_core::extraction::{ClassActivationSet, ClassPredictionSet, PerClass, SemanticClass};
use semline_core::geometry::HoughGridSpec;
use semline_core::hough::HoughMap;
use semline_core::io::{
    parse_fov_labels, predictions_to_string, read_annotations, read_predictions, read_report, FloatGrid,
    PredictionRecord,
};
use semline_core::synth::{render_layers, SceneSpec};

fn semline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_scene() -> SceneSpec {
    SceneSpec {
        width: 240,
        height: 240,
        focal_length: 170.0,
        ..SceneSpec::default()
    }
}

/// Synthetic dataset of `n` small scenes.
fn synth(dir: &Path, n: usize, extra: &[&str]) -> PathBuf {
    let out = dir.join("data");
    let n = n.to_string();
    let mut args = vec!["synth", "--out", p(&out), "-n", &n, "--image", "200x200", "--seed", "5"];
    args.extend_from_slice(extra);
    let o = semline(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn blank_image_gives_empty_prediction_set() {
    let dir = TempDir::new().unwrap();
    let img = dir.path().join("blank.png");
    RgbImage::new(64, 48).save(&img).unwrap();
    let out = dir.path().join("pred.jsonl");
    let o = semline(&["detect", p(&img), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = read_predictions(&out).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!((recs[0].id.as_str(), recs[0].width, recs[0].height), ("blank", 64, 48));
    assert!(recs[0].predictions.is_empty());
}

#[test]
fn clean_scene_features_give_five_classes() {
    let dir = TempDir::new().unwrap();
    let spec = small_scene();
    let grid = FloatGrid::from_class_maps(&render_layers(&spec).unwrap().class_channels()).unwrap();
    let path = dir.path().join("clean.hslf");
    std::fs::write(&path, grid.to_bytes()).unwrap();
    let out = dir.path().join("pred.jsonl");
    let o = semline(&["detect", "--features", p(&path), "--out", p(&out), "--grid", "90x90"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = read_predictions(&out).unwrap();
    assert_eq!(recs[0].predictions.len(), 5, "{:?}", recs[0].predictions);
}

fn activation_file(dir: &Path, spec: HoughGridSpec) -> PathBuf {
    let channels = PerClass::from_fn(|c| {
        let mut v = vec![0.0f32; spec.cells()];
        if c != SemanticClass::WallEndCap {
            v[(5 + 10 * c.index()) * spec.n_r + 20] = 0.8;
        }
        HoughMap::new(spec, v).unwrap()
    });
    let grid = FloatGrid::from_activations(&ClassActivationSet::new(channels).unwrap());
    let path = dir.join("acts.hslf");
    std::fs::write(&path, grid.to_bytes()).unwrap();
    path
}

#[test]
fn activation_input_skips_the_front_end() {
    let dir = TempDir::new().unwrap();
    let acts = activation_file(dir.path(), HoughGridSpec::new(60, 40).unwrap());
    let out = dir.path().join("pred.jsonl");
    let o = semline(&[
        "detect", "--activations", p(&acts), "--geometry", "320x240", "--grid", "60x40", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = &read_predictions(&out).unwrap()[0];
    assert_eq!((rec.width, rec.height), (320, 240));
    assert_eq!(rec.predictions.len(), 4);
    assert!(!rec.predictions.is_present(SemanticClass::WallEndCap));
    assert_eq!(rec.predictions.get(SemanticClass::AisleLeft).unwrap().confidence, 0.8, "rounded to 1e-6");

    let o = semline(&["detect", "--activations", p(&acts), "--grid", "60x40", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1), "missing --geometry");
    let o = semline(&["detect", "--activations", p(&acts), "--geometry", "320x240", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2), "grid mismatch is a data error");
}

#[test]
fn unreadable_inputs_fail_at_the_end() {
    let dir = TempDir::new().unwrap();
    let good = dir.path().join("good.png");
    RgbImage::new(32, 32).save(&good).unwrap();
    let bad = dir.path().join("bad.png");
    std::fs::write(&bad, b"not a png").unwrap();
    let out = dir.path().join("pred.jsonl");
    let o = semline(&["detect", p(&good), p(&bad), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.png"));
    let recs = read_predictions(&out).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].id, "good");
}

#[test]
fn overlays_are_written_for_images() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, &["--clutter", "0", "--noise", "0"]);
    let out = dir.path().join("pred.jsonl");
    let ov = dir.path().join("overlay");
    let o = semline(&[
        "detect", p(&data.join("images")), "--out", p(&out), "--overlay", p(&ov), "--rescale", "none",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for id in ["scene_0000", "scene_0001"] {
        let img = image::open(ov.join(format!("{id}.png"))).unwrap().to_rgb8();
        assert_eq!(img.dimensions(), (200, 200));
        assert!(img.pixels().any(|px| px.0[0] != px.0[1]), "{id}: no colored pixels");
    }
}

#[test]
fn synth_layout_and_labels() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 20, &["--with-features"]);
    for f in ["annotations.jsonl", "fov.jsonl", "scenes.jsonl"] {
        assert!(data.join(f).is_file(), "{f}");
    }
    assert!(data.join("images/scene_0019.png").is_file());
    assert!(data.join("features/scene_0019.hslf").is_file());
    assert_eq!(read_annotations(&data.join("annotations.jsonl")).unwrap().len(), 20);
    let labels = parse_fov_labels(&std::fs::read_to_string(data.join("fov.jsonl")).unwrap(), &data).unwrap();
    let good = labels.iter().filter(|l| l.label.is_good()).count();
    assert!(good > 0 && good < 20, "labels should be mixed, got {good} Good of 20");
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.contains("partial"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn synth_rejects_bad_requests_without_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("data");
    let o = semline(&["synth", "--out", p(&out), "-n", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let o = semline(&["synth", "--out", p(&out), "-n", "2", "--noise", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("keep.txt"), b"x").unwrap();
    let o = semline(&["synth", "--out", p(&out), "-n", "1"]);
    assert_eq!(o.status.code(), Some(1), "non-empty target");
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn eval_of_ground_truth_is_perfect() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 4, &[]);
    let annotations = data.join("annotations.jsonl");
    let recs: Vec<_> = read_annotations(&annotations)
        .unwrap()
        .into_iter()
        .map(|a| PredictionRecord {
            id: a.id.clone(),
            width: a.width,
            height: a.height,
            predictions: a.to_truth().unwrap(),
        })
        .collect();
    let preds = dir.path().join("truth_preds.jsonl");
    std::fs::write(&preds, predictions_to_string(&recs).unwrap()).unwrap();
    let report = dir.path().join("report.json");
    let o = semline(&["eval", "--predictions", p(&preds), "--annotations", p(&annotations), "--out", p(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_report(&report).unwrap();
    assert_eq!(r.median_ea, Some(1.0));
    assert!(r.dataset.iter().all(|d| d.metrics.f1.unwrap_or(1.0) == 1.0));
    assert!(stdout(&o).contains("median EA 1.000"));
    assert!(report.with_extension("txt").is_file());
}

#[test]
fn eval_lists_unmatched_ids() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, &[]);
    let preds = dir.path().join("other.jsonl");
    let rec = PredictionRecord {
        id: "elsewhere".into(),
        width: 200,
        height: 200,
        predictions: ClassPredictionSet::empty(),
    };
    std::fs::write(&preds, predictions_to_string(&[rec]).unwrap()).unwrap();
    let o = semline(&[
        "eval",
        "--predictions",
        p(&preds),
        "--annotations",
        p(&data.join("annotations.jsonl")),
        "--out",
        p(&dir.path().join("r.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("elsewhere"), "{}", stderr(&o));
}

#[test]
fn fov_labels_with_and_without_truth() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 6, &["--with-features"]);
    let preds = dir.path().join("pred.jsonl");
    let o = semline(&["detect", "--features", p(&data.join("features")), "--out", p(&preds), "--grid", "90x90"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = semline(&["fov", "--predictions", p(&preds)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 6);
    assert!(!stdout(&o).contains("accuracy"));

    let labels = dir.path().join("labels.jsonl");
    let o = semline(&["fov", "--predictions", p(&preds), "--truth", p(&data.join("fov.jsonl")), "--out", p(&labels)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy"));
    assert!(stdout(&o).contains("good base rate"));
    assert_eq!(parse_fov_labels(&std::fs::read_to_string(&labels).unwrap(), &labels).unwrap().len(), 6);
}

#[test]
fn all_class_predictions_are_good() {
    let dir = TempDir::new().unwrap();
    let full = PredictionRecord {
        id: "full".into(),
        width: 100,
        height: 100,
        predictions: ClassPredictionSet::empty()
            .with(SemanticClass::AisleLeft, pred(0.5))
            .with(SemanticClass::AisleRight, pred(2.5))
            .with(SemanticClass::RackTopLeft, pred(1.0))
            .with(SemanticClass::RackTopRight, pred(2.0)),
    };
    let path = dir.path().join("p.jsonl");
    std::fs::write(&path, predictions_to_string(&[full]).unwrap()).unwrap();
    let o = semline(&["fov", "--predictions", p(&path)]);
    assert_eq!(stdout(&o).trim(), "full\tGood");
}

fn pred(theta: f64) -> semline_core::extraction::Prediction {
    semline_core::extraction::Prediction {
        theta,
        r: 0.0,
        confidence: 1.0,
    }
}

#[test]
fn bench_checks_equivalence_and_rejects_bad_sizes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bench.json");
    let o = semline(&["bench", "--sizes", "64x64,96x80", "--grid", "30x30", "--input", "dense", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["equivalent"] == true && r["time_ratio"].as_f64().unwrap() > 0.0));

    assert_eq!(semline(&["bench", "--sizes", "0x64"]).status.code(), Some(1));
    assert_eq!(semline(&["bench", "--sizes", "64x64", "--runs", "3"]).status.code(), Some(1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "rescale = \"none\"\n[grid]\nn_theta = 20\nn_r = 20\n").unwrap();
    let out = dir.path().join("b.json");
    let o = semline(&["--config", p(&cfg), "bench", "--sizes", "32x32", "--input", "dense", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v[0]["n_theta"], 20);

    let o = semline(&["--config", p(&cfg), "bench", "--grid", "24x16", "--sizes", "32x32", "--input", "dense", "--out", p(&out)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((v[0]["n_theta"].as_u64(), v[0]["n_r"].as_u64()), (Some(24), Some(16)));

    std::fs::write(&cfg, "treshold = 0.1\n").unwrap();
    assert_eq!(semline(&["--config", p(&cfg), "bench"]).status.code(), Some(1));
    assert_eq!(semline(&["--threshold", "2", "bench"]).status.code(), Some(1));
}
