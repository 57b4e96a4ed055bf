//! EA line-placement score and per-class detection metrics.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::extraction::{ClassPredictionSet, SemanticClass};
use crate::geometry::{angle_between, clip_to_image, midpoint_distance, ImageGeometry, ParametricLine};

/// EA thresholds reported by default: plain presence and the 0.95 variant.
pub const DEFAULT_TAUS: [f64; 2] = [0.0, 0.95];

/// Euclidean-and-angular similarity of two lines, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EAScore(pub f64);

impl EAScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Scores a predicted line against the ground truth for one class.
///
/// A line missing on exactly one side scores 0, missing on both sides
/// scores 1. Otherwise `((1 − Δθ/(π/2)) · (1 − D))²` where `D` is the
/// diagonal-normalized distance between the midpoints of the two lines'
/// image chords; a line that does not cross the image scores 0.
pub fn ea_score(
    pred: Option<&ParametricLine>,
    truth: Option<&ParametricLine>,
    geom: &ImageGeometry,
) -> EAScore {
    match (pred, truth) {
        (None, None) => EAScore(1.0),
        (Some(_), None) | (None, Some(_)) => EAScore(0.0),
        (Some(p), Some(t)) => {
            let (Some(sp), Some(st)) = (clip_to_image(p, geom), clip_to_image(t, geom)) else {
                return EAScore(0.0);
            };
            let Ok(d) = midpoint_distance(&sp, &st, geom) else {
                return EAScore(0.0);
            };
            let angular = 1.0 - angle_between(p, t) / FRAC_PI_2;
            let s = angular * (1.0 - d);
            EAScore((s * s).clamp(0.0, 1.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    TruePositive,
    FalsePositive,
    FalseNegative,
    TrueNegative,
    /// Both sides present but the EA score is under the threshold; counts
    /// as a false positive and a false negative at once.
    Misplaced,
}

pub fn classify_outcome(pred_present: bool, truth_present: bool, ea: EAScore, tau: f64) -> Outcome {
    match (pred_present, truth_present) {
        (false, false) => Outcome::TrueNegative,
        (true, false) => Outcome::FalsePositive,
        (false, true) => Outcome::FalseNegative,
        (true, true) if ea.0 >= tau => Outcome::TruePositive,
        (true, true) => Outcome::Misplaced,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Counts {
    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::TruePositive => self.tp += 1,
            Outcome::FalsePositive => self.fp += 1,
            Outcome::FalseNegative => self.fn_ += 1,
            Outcome::TrueNegative => self.tn += 1,
            Outcome::Misplaced => {
                self.fp += 1;
                self.fn_ += 1;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Precision, recall, accuracy and F1 derived from a confusion count.
/// Undefined ratios (zero denominator) are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    #[serde(flatten)]
    pub counts: Counts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
}

impl From<Counts> for ClassMetrics {
    fn from(c: Counts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        Self {
            counts: c,
            precision,
            recall,
            accuracy: ratio(c.tp + c.tn, c.total()),
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: SemanticClass,
    #[serde(flatten)]
    pub metrics: ClassMetrics,
}

/// Dataset-level metrics with all classes pooled, at one EA threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdedF1 {
    pub tau: f64,
    #[serde(flatten)]
    pub metrics: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub images: usize,
    /// Per-class presence metrics, in class order.
    pub classes: Vec<ClassRow>,
    /// Number of class slots where at least one side has a line.
    pub ea_count: usize,
    pub mean_ea: Option<f64>,
    pub median_ea: Option<f64>,
    pub dataset: Vec<ThresholdedF1>,
}

impl EvalReport {
    pub fn class(&self, class: SemanticClass) -> &ClassMetrics {
        &self.classes[class.index()].metrics
    }

    pub fn at_tau(&self, tau: f64) -> Option<&ClassMetrics> {
        self.dataset.iter().find(|d| d.tau == tau).map(|d| &d.metrics)
    }
}

/// One image's predictions and ground truth.
#[derive(Debug, Clone)]
pub struct EvalSample<'a> {
    pub predictions: &'a ClassPredictionSet,
    pub truth: &'a ClassPredictionSet,
    pub geometry: ImageGeometry,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Evaluates a dataset whose images all share one geometry.
pub fn evaluate(
    dataset: &[(ClassPredictionSet, ClassPredictionSet)],
    geom: &ImageGeometry,
    taus: &[f64],
) -> Result<EvalReport> {
    let samples: Vec<_> = dataset
        .iter()
        .map(|(p, t)| EvalSample {
            predictions: p,
            truth: t,
            geometry: *geom,
        })
        .collect();
    evaluate_samples(&samples, taus)
}

pub fn evaluate_samples(samples: &[EvalSample<'_>], taus: &[f64]) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(invalid("cannot evaluate an empty dataset"));
    }
    if let Some(t) = taus.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(invalid(format!("EA threshold {t} outside [0, 1]")));
    }
    let mut per_class = [Counts::default(); 5];
    let mut pooled = vec![Counts::default(); taus.len()];
    let mut scores = Vec::new();
    for s in samples {
        for class in SemanticClass::ALL {
            let pred = s.predictions.get(class).map(|p| p.line());
            let truth = s.truth.get(class).map(|p| p.line());
            let ea = ea_score(pred.as_ref(), truth.as_ref(), &s.geometry);
            let (pp, tp) = (pred.is_some(), truth.is_some());
            if pp || tp {
                scores.push(ea.0);
            }
            per_class[class.index()].record(classify_outcome(pp, tp, ea, 0.0));
            for (counts, &tau) in pooled.iter_mut().zip(taus) {
                counts.record(classify_outcome(pp, tp, ea, tau));
            }
        }
    }
    Ok(EvalReport {
        images: samples.len(),
        classes: SemanticClass::ALL
            .into_iter()
            .map(|class| ClassRow {
                class,
                metrics: per_class[class.index()].into(),
            })
            .collect(),
        ea_count: scores.len(),
        mean_ea: (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64),
        median_ea: median(&scores),
        dataset: taus
            .iter()
            .zip(pooled)
            .map(|(&tau, c)| ThresholdedF1 {
                tau,
                metrics: c.into(),
            })
            .collect(),
    })
}
