use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use semline_core::io::{read_annotations, read_predictions, render_table, write_report, AnnotationRecord, PredictionRecord};
use semline_core::metrics::{evaluate_samples, EvalReport, EvalSample};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predictions file written by `detect`.
    #[arg(long)]
    pub predictions: PathBuf,

    /// Ground-truth annotations (JSON lines).
    #[arg(long)]
    pub annotations: PathBuf,

    /// Report path; the text table is written beside it as `.txt`.
    #[arg(long, short)]
    pub out: PathBuf,
}

fn id_list(ids: &[&str]) -> String {
    const SHOWN: usize = 10;
    let mut s = ids.iter().take(SHOWN).copied().collect::<Vec<_>>().join(", ");
    if ids.len() > SHOWN {
        s.push_str(&format!(" and {} more", ids.len() - SHOWN));
    }
    s
}

/// Pairs records by id. Every prediction needs an annotation and the
/// other way round, with matching image sizes.
pub fn score(preds: &[PredictionRecord], truth: &[AnnotationRecord], taus: &[f64]) -> CliResult<EvalReport> {
    let by_id: BTreeMap<_, _> = preds.iter().map(|p| (p.id.as_str(), p)).collect();
    let truth_ids: BTreeMap<_, _> = truth.iter().map(|a| (a.id.as_str(), a)).collect();
    let missing_truth: Vec<_> = by_id.keys().filter(|k| !truth_ids.contains_key(*k)).copied().collect();
    let missing_pred: Vec<_> = truth_ids.keys().filter(|k| !by_id.contains_key(*k)).copied().collect();
    if !missing_truth.is_empty() {
        return Err(CliError::data(format!("predictions without annotations: {}", id_list(&missing_truth))));
    }
    if !missing_pred.is_empty() {
        return Err(CliError::data(format!("annotations without predictions: {}", id_list(&missing_pred))));
    }
    let truths = truth
        .iter()
        .map(|a| a.to_truth().map_err(|e| CliError::data_at(&a.id, e)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut samples = Vec::with_capacity(truth.len());
    for (a, t) in truth.iter().zip(&truths) {
        let p = by_id[a.id.as_str()];
        if (p.width, p.height) != (a.width, a.height) {
            return Err(CliError::data(format!(
                "{}: prediction is for {}x{} but the annotation is {}x{}",
                a.id, p.width, p.height, a.width, a.height
            )));
        }
        samples.push(EvalSample {
            predictions: &p.predictions,
            truth: t,
            geometry: a.geometry(),
        });
    }
    Ok(evaluate_samples(&samples, taus)?)
}

pub fn run(config: &RunConfig, args: &EvalArgs) -> CliResult<()> {
    let preds = read_predictions(&args.predictions).map_err(|e| CliError::data_at(args.predictions.display(), e))?;
    let truth = read_annotations(&args.annotations).map_err(|e| CliError::data_at(args.annotations.display(), e))?;
    if truth.is_empty() {
        return Err(CliError::data(format!("{}: no annotations", args.annotations.display())));
    }
    let report = score(&preds, &truth, &config.taus)?;
    write_report(&report, &args.out).map_err(|e| CliError::data_at(args.out.display(), e))?;
    print!("{}", render_table(&report));
    Ok(())
}
