//! Evaluation protocols: repeated random holdout, leave-one-out and a
//! fixed test set. Fits run concurrently; results are ordered by run index.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use netlines_core::rng::derive_seed;
use netlines_core::Dataset;

use crate::error::{CliError, CliResult};
use crate::model::ModelFile;
use crate::report::{EvalReport, RunRecord};
use crate::train::{error_rate, fit, TrainOptions};

/// Offset of the split-seed streams, kept apart from the training streams.
const SPLIT_STREAM: u64 = 1 << 32;

/// Trains on `train` and scores on `test` (labels are matched by class name).
pub fn run_once(run_id: usize, train: &Dataset, test: Option<&Dataset>, opts: &TrainOptions) -> CliResult<RunRecord> {
    let (model, _) = fit(train, opts)?;
    score(run_id, &model, Some(train), test)
}

/// Scores a trained model; `train` is the set it was fit on, if known.
pub fn score(run_id: usize, model: &ModelFile, train: Option<&Dataset>, test: Option<&Dataset>) -> CliResult<RunRecord> {
    let train_error = match train {
        Some(t) => Some(error_rate(model, &model.align(t)?)?),
        None => None,
    };
    let (test_size, test_error) = match test {
        Some(t) if !t.is_empty() => (t.len(), Some(error_rate(model, &model.align(t)?)?)),
        _ => (0, None),
    };
    Ok(RunRecord {
        run_id,
        train_size: train.map_or(0, Dataset::len),
        test_size,
        hidden: model.hidden_counts(),
        weights: model.weight_count(),
        train_error,
        test_error,
    })
}

/// `repeats` random draws of `p` training patterns. Each run is tested on
/// `test` if given, otherwise on the patterns it did not draw.
pub fn holdout(
    data: &Dataset,
    p: usize,
    repeats: usize,
    test: Option<&Dataset>,
    opts: &TrainOptions,
) -> CliResult<EvalReport> {
    if p == 0 || p > data.len() {
        return Err(CliError::Usage(format!(
            "holdout size {p} must be between 1 and {}",
            data.len()
        )));
    }
    if repeats == 0 {
        return Err(CliError::Usage("need at least one repeat".into()));
    }
    let base = opts.growth.trainer.seed;
    let runs = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(base, SPLIT_STREAM + r as u64)));
            let train = data.subset(&order[..p]);
            let rest;
            let test = match test {
                Some(t) => Some(t),
                None => {
                    rest = data.subset(&order[p..]);
                    Some(&rest)
                }
            };
            run_once(r, &train, test, &opts.with_seed(derive_seed(base, r as u64)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EvalReport::new(format!("holdout P={p} x{repeats}"), runs))
}

/// One fit per pattern, trained on all the others and tested on it.
pub fn leave_one_out(data: &Dataset, opts: &TrainOptions) -> CliResult<EvalReport> {
    if data.len() < 2 {
        return Err(CliError::Usage("leave-one-out needs at least two patterns".into()));
    }
    let base = opts.growth.trainer.seed;
    let runs = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let keep: Vec<usize> = (0..data.len()).filter(|&j| j != i).collect();
            let train = data.subset(&keep);
            let test = data.subset(&[i]);
            run_once(i, &train, Some(&test), &opts.with_seed(derive_seed(base, i as u64)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EvalReport::new(format!("leave-one-out D={}", data.len()), runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data(n: usize) -> Dataset {
        let features = (0..n).map(|i| vec![i as f64]).collect();
        let labels = (0..n).map(|i| (i >= n / 2) as i64).collect();
        Dataset::from_parts(features, labels).unwrap()
    }

    #[test]
    fn leave_one_out_runs_one_fit_per_pattern() {
        let data = line_data(12);
        let report = leave_one_out(&data, &TrainOptions::default()).unwrap();
        assert_eq!(report.runs.len(), 12);
        assert!(report.runs.iter().all(|r| r.train_size == 11 && r.test_size == 1));
        assert_eq!(report.pooled_test_error(), Some(0.0));
    }

    #[test]
    fn holdout_is_reproducible() {
        let data = line_data(20);
        let a = holdout(&data, 8, 4, None, &TrainOptions::default()).unwrap();
        let b = holdout(&data, 8, 4, None, &TrainOptions::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.runs.iter().all(|r| r.test_size == 12));
        let fixed = line_data(6);
        let c = holdout(&data, 8, 2, Some(&fixed), &TrainOptions::default()).unwrap();
        assert!(c.runs.iter().all(|r| r.test_size == 6));
    }
}
