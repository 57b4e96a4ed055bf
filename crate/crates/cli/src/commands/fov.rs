use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use semline_core::fov::{fov_accuracy, predict_fov, FovAccuracy};
use semline_core::io::{fov_labels_to_string, read_fov_labels, read_predictions, write_atomic, FovRecord};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct FovArgs {
    /// Predictions file written by `detect`.
    #[arg(long)]
    pub predictions: PathBuf,

    /// Reference labels (JSON lines) to score against.
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Where to write the predicted labels (JSON lines).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn run(_config: &RunConfig, args: &FovArgs) -> CliResult<()> {
    let preds = read_predictions(&args.predictions).map_err(|e| CliError::data_at(args.predictions.display(), e))?;
    let labels: Vec<FovRecord> = preds
        .iter()
        .map(|p| FovRecord {
            id: p.id.clone(),
            label: predict_fov(&p.predictions),
            criteria: None,
        })
        .collect();
    for r in &labels {
        println!("{}\t{}", r.id, r.label);
    }
    if let Some(out) = &args.out {
        write_atomic(out, fov_labels_to_string(&labels)?.as_bytes()).map_err(|e| CliError::data_at(out.display(), e))?;
    }
    if let Some(truth_path) = &args.truth {
        let truth = read_fov_labels(truth_path).map_err(|e| CliError::data_at(truth_path.display(), e))?;
        let acc = score(&labels, &truth)?;
        println!(
            "accuracy {:.3} ({}/{})  good base rate {:.3}",
            acc.accuracy, acc.correct, acc.images, acc.good_base_rate
        );
    }
    Ok(())
}

/// Accuracy of `predicted` against `truth`; both must cover the same ids.
pub fn score(predicted: &[FovRecord], truth: &[FovRecord]) -> CliResult<FovAccuracy> {
    let by_id: BTreeMap<_, _> = truth.iter().map(|t| (t.id.as_str(), t.label)).collect();
    if predicted.len() != truth.len() || predicted.iter().any(|p| !by_id.contains_key(p.id.as_str())) {
        let pred_ids: Vec<_> = predicted.iter().map(|p| p.id.as_str()).collect();
        let odd: Vec<_> = pred_ids
            .iter()
            .filter(|id| !by_id.contains_key(*id))
            .chain(by_id.keys().filter(|id| !pred_ids.contains(id)))
            .take(10)
            .copied()
            .collect();
        return Err(CliError::data(format!(
            "predicted and reference labels cover different images: {}",
            odd.join(", ")
        )));
    }
    let pairs: Vec<_> = predicted.iter().map(|p| (p.label, by_id[p.id.as_str()])).collect();
    fov_accuracy(&pairs).map_err(|e| CliError::data(e.to_string()))
}
