//! Linear readout trained by ridge regression, plus the scoring functions.
//!
//! The readout has no intercept: inputs are the raw reservoir features.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{ridge_solve, Matrix};
use crate::reservoir::DeepReservoir;

/// Lambdas tried when fitting classifiers.
pub const CLASSIFICATION_LAMBDAS: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// `outputs x features`.
    pub weights: Matrix,
    pub lambda: f64,
}

impl ReadoutModel {
    pub fn fit(features: &Matrix, targets: &Matrix, lambda: f64) -> Result<Self> {
        if !features.is_finite() {
            return Err(Error::InvalidInput(
                "features have non-finite entries".into(),
            ));
        }
        Ok(ReadoutModel {
            weights: ridge_solve(features, targets, lambda)?,
            lambda,
        })
    }

    /// One-hot ridge fit for `n_classes` labels.
    pub fn fit_classifier(
        features: &Matrix,
        labels: &[usize],
        n_classes: usize,
        lambda: f64,
    ) -> Result<Self> {
        ReadoutModel::fit(features, &one_hot(labels, n_classes)?, lambda)
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn predict(&self, features: &Matrix) -> Result<Matrix> {
        check_dim("readout feature width", self.input_dim(), features.cols())?;
        features.matmul_transposed(&self.weights)
    }

    pub fn predict_labels(&self, features: &Matrix) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict(features)?))
    }
}

/// Column index of each row's maximum; ties go to the lowest index.
pub fn argmax_rows(scores: &Matrix) -> Vec<usize> {
    scores
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

pub fn one_hot(labels: &[usize], n_classes: usize) -> Result<Matrix> {
    if n_classes == 0 {
        return Err(Error::InvalidInput("need at least one class".into()));
    }
    let mut m = Matrix::zeros(labels.len(), n_classes);
    for (i, &c) in labels.iter().enumerate() {
        if c >= n_classes {
            return Err(Error::InvalidInput(format!(
                "label {c} out of range for {n_classes} classes"
            )));
        }
        m[(i, c)] = 1.0;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    /// Population standard deviation of the target.
    #[default]
    Std,
    /// `max - min` of the target.
    Range,
}

/// RMSE divided by the target's spread, averaged over output columns.
pub fn nrmse(pred: &Matrix, target: &Matrix, normalizer: Normalizer) -> Result<f64> {
    check_dim("prediction rows", target.rows(), pred.rows())?;
    check_dim("prediction columns", target.cols(), pred.cols())?;
    let (n, d) = target.shape();
    if n == 0 || d == 0 {
        return Err(Error::InsufficientData("nrmse of an empty target".into()));
    }
    let mut total = 0.0;
    for j in 0..d {
        let y = target.column(j);
        let p = pred.column(j);
        let mse = y.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64;
        let scale = match normalizer {
            Normalizer::Std => population_std(&y),
            Normalizer::Range => {
                let (lo, hi) = y
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                hi - lo
            }
        };
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::UndefinedNormalization);
        }
        total += mse.sqrt() / scale;
    }
    Ok(total / d as f64)
}

pub fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Fraction of rows whose highest score sits at the true label.
pub fn accuracy(logits: &Matrix, labels: &[usize]) -> Result<f64> {
    check_dim("label count", labels.len(), logits.rows())?;
    label_accuracy(&argmax_rows(logits), labels)
}

pub fn label_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_dim("label count", truth.len(), pred.len())?;
    if truth.is_empty() {
        return Err(Error::InsufficientData(
            "accuracy of an empty label set".into(),
        ));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Reservoir weights together with a trained readout, for exact reloads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub format_version: u32,
    pub reservoir: DeepReservoir,
    pub readout: Option<ReadoutModel>,
}

impl ModelDump {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn new(reservoir: DeepReservoir, readout: Option<ReadoutModel>) -> Result<Self> {
        if let Some(r) = &readout {
            check_dim(
                "readout width vs reservoir features",
                reservoir.feature_width(),
                r.input_dim(),
            )?;
        }
        Ok(ModelDump {
            format_version: Self::FORMAT_VERSION,
            reservoir,
            readout,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dump: ModelDump = serde_json::from_str(&text)?;
        if dump.format_version != Self::FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported model format version {}",
                dump.format_version
            )));
        }
        ModelDump::new(dump.reservoir, dump.readout)
    }
}
