use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};
use crate::readout::{accuracy, nrmse, ReadoutModel};
use crate::reservoir::{forward, readout_features, DeepReservoir, FeatureMode};
use crate::tasks::{Dataset, SequenceDataset, SeriesDataset, TimeSeries};

use super::config::ExperimentConfig;

/// Outcome of one (config, seed) pair. Metrics are present exactly when
/// `failure` is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub config_id: usize,
    pub seed: u64,
    pub val: Option<f64>,
    pub test: Option<f64>,
    pub wall_time_ms: f64,
    pub failure: Option<String>,
}

impl TrialResult {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Errors that mean "this configuration is unusable" rather than a bug or
/// bad input. They are recorded on the trial instead of aborting the search.
fn is_trial_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NumericOverflow { .. }
            | Error::UndefinedNormalization
            | Error::Convergence(_)
            | Error::CannotRescale
            | Error::InvalidInput(_)
    )
}

/// Builds the reservoir, fits the readout and scores validation and test.
/// `rng` supplies every weight draw for this trial.
pub fn run_trial(
    config: &ExperimentConfig,
    config_id: usize,
    dataset: &Dataset,
    seed: u64,
    rng: &mut RngStream,
) -> Result<TrialResult> {
    let start = Instant::now();
    let outcome = evaluate(config, dataset, rng);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut result = TrialResult {
        config_id,
        seed,
        val: None,
        test: None,
        wall_time_ms,
        failure: None,
    };
    match outcome {
        Ok((v, t)) if v.is_finite() && t.is_finite() => {
            result.val = Some(v);
            result.test = Some(t);
        }
        Ok((v, t)) => result.failure = Some(format!("non-finite metric (val {v}, test {t})")),
        Err(e) if is_trial_failure(&e) => result.failure = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(result)
}

fn evaluate(
    config: &ExperimentConfig,
    dataset: &Dataset,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    let deep_cfg = config.deep_config()?;
    match dataset {
        Dataset::Series(data) => {
            let deep = deep_cfg.build(data.series.inputs.cols(), rng)?;
            evaluate_series(config, &deep, data)
        }
        Dataset::Sequences(data) => {
            let deep = deep_cfg.build(data.channels(), rng)?;
            evaluate_sequences(config, &deep, data)
        }
    }
}

/// Features and aligned targets of one split, run from the zero state.
fn series_features(
    deep: &DeepReservoir,
    split: &TimeSeries,
    washout: usize,
    mode: FeatureMode,
) -> Result<(Matrix, Matrix)> {
    let traj = forward(deep, &split.inputs, washout, None)?;
    let feats = readout_features(&traj, deep.concat(), mode)?;
    let targets = match mode {
        FeatureMode::PerStep => split.targets.row_range(washout, split.len()),
        FeatureMode::LastStep => split.targets.row_range(split.len() - 1, split.len()),
    };
    Ok((feats, targets))
}

fn evaluate_series(
    config: &ExperimentConfig,
    deep: &DeepReservoir,
    data: &SeriesDataset,
) -> Result<(f64, f64)> {
    let mode = config.readout;
    let (f_train, y_train) = series_features(deep, &data.train(), config.washout, mode)?;
    let readout = ReadoutModel::fit(&f_train, &y_train, config.hyper.lambda)?;
    let score = |split: TimeSeries| -> Result<f64> {
        let (f, y) = series_features(deep, &split, config.washout, mode)?;
        nrmse(&readout.predict(&f)?, &y, config.normalizer)
    };
    Ok((score(data.val())?, score(data.test())?))
}

/// Final-state features, one row per sequence.
pub fn sequence_features(deep: &DeepReservoir, sequences: &[&Matrix]) -> Result<Matrix> {
    let rows = sequences
        .iter()
        .map(|seq| {
            let traj = forward(deep, seq, 0, None)?;
            let f = readout_features(&traj, deep.concat(), FeatureMode::LastStep)?;
            Ok(f.row(0).to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(&rows)
}

fn evaluate_sequences(
    config: &ExperimentConfig,
    deep: &DeepReservoir,
    data: &SequenceDataset,
) -> Result<(f64, f64)> {
    if data.train.is_empty() || data.val.is_empty() || data.test.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{}: every split needs at least one sequence",
            data.name
        )));
    }
    let all: Vec<&Matrix> = data.sequences.iter().collect();
    let feats = sequence_features(deep, &all)?;
    let k = data.n_classes();
    let lambda = config.hyper.lambda;

    let fit = |idx: &[usize]| {
        ReadoutModel::fit_classifier(&feats.select_rows(idx), &data.labels_of(idx), k, lambda)
    };
    let val_model = fit(&data.train)?;
    let val = accuracy(
        &val_model.predict(&feats.select_rows(&data.val))?,
        &data.labels_of(&data.val),
    )?;

    let mut train_val = data.train.clone();
    train_val.extend_from_slice(&data.val);
    let test_model = fit(&train_val)?;
    let test = accuracy(
        &test_model.predict(&feats.select_rows(&data.test))?,
        &data.labels_of(&data.test),
    )?;
    Ok((val, test))
}
