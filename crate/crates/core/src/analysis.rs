//! Layer-wise frequency analysis of reservoir states driven by a multisine.

use std::path::Path;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fft_magnitudes_with, Matrix, RngStream};
use crate::reservoir::{forward_with, Activation, DeepConfig, ForwardOptions};

/// Angular frequencies (radians per step) of the probe signal.
pub const MULTISINE_FREQUENCIES: [f64; 12] = [
    0.2, 0.331, 0.42, 0.51, 0.63, 0.74, 0.85, 0.97, 1.08, 1.19, 1.27, 1.32,
];

/// Frequencies at or above this value count as the high band.
pub const BAND_SPLIT_FREQUENCY: f64 = 0.74;

/// `s(t) = Σ_i sin(φ_i t)` for `t = 1..=steps`.
pub fn multisine(steps: usize, frequencies: &[f64]) -> Vec<f64> {
    (1..=steps)
        .map(|t| frequencies.iter().map(|&f| (f * t as f64).sin()).sum())
        .collect()
}

/// Unit-averaged magnitude spectra per layer, averaged again over trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    /// Number of time samples each spectrum was computed from.
    pub sample_count: usize,
    /// `raw[l][k]`: mean magnitude of bin `k` in layer `l + 1`.
    pub raw: Vec<Vec<f64>>,
}

impl SpectralProfile {
    pub fn num_layers(&self) -> usize {
        self.raw.len()
    }

    pub fn num_bins(&self) -> usize {
        self.raw.first().map_or(0, Vec::len)
    }

    /// Angular frequency of bin `k`.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.sample_count as f64
    }

    /// Bin nearest to angular frequency `omega`.
    pub fn bin_of(&self, omega: f64) -> usize {
        let b = (omega / (2.0 * std::f64::consts::PI) * self.sample_count as f64).round() as usize;
        b.min(self.num_bins().saturating_sub(1))
    }

    /// Each layer's spectrum scaled to a maximum of one.
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        self.raw
            .iter()
            .map(|s| {
                let m = s.iter().copied().fold(0.0, f64::max);
                if m > 0.0 {
                    s.iter().map(|v| v / m).collect()
                } else {
                    s.clone()
                }
            })
            .collect()
    }

    /// Share of each layer's energy (squared magnitude) in bins at or above
    /// [`BAND_SPLIT_FREQUENCY`].
    pub fn high_band_fractions(&self) -> Result<Vec<f64>> {
        let split = self.bin_of(BAND_SPLIT_FREQUENCY);
        self.raw
            .iter()
            .map(|s| band_energy_ratio(s, split))
            .collect()
    }

    pub fn low_band_fractions(&self) -> Result<Vec<f64>> {
        Ok(self
            .high_band_fractions()?
            .into_iter()
            .map(|f| 1.0 - f)
            .collect())
    }

    /// Long-format CSV `layer,bin,omega,magnitude` of the normalized spectra.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["layer", "bin", "omega", "magnitude"])?;
        for (l, spec) in self.normalized().iter().enumerate() {
            for (k, m) in spec.iter().enumerate() {
                w.write_record([
                    (l + 1).to_string(),
                    k.to_string(),
                    self.bin_frequency(k).to_string(),
                    m.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// `Σ_{k >= split} m_k² / Σ_k m_k²`.
pub fn band_energy_ratio(magnitudes: &[f64], split: usize) -> Result<f64> {
    if split == 0 || split >= magnitudes.len() {
        return Err(Error::InvalidInput(format!(
            "split bin {split} outside 1..{}",
            magnitudes.len()
        )));
    }
    let total: f64 = magnitudes.iter().map(|m| m * m).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("spectrum has zero energy".into()));
    }
    let high: f64 = magnitudes[split..].iter().map(|m| m * m).sum();
    Ok(high / total)
}

/// Drives `trials` freshly drawn reservoirs with `signal` and averages the
/// per-unit state spectra, first over the units of a layer and then over
/// trials. Trial `i` builds its weights from `rng.child(i)`.
pub fn layerwise_spectra(
    config: &DeepConfig,
    signal: &[f64],
    trials: usize,
    washout: usize,
    rng: &RngStream,
) -> Result<SpectralProfile> {
    layerwise_spectra_with(config, signal, trials, washout, rng, Activation::Tanh)
}

pub fn layerwise_spectra_with(
    config: &DeepConfig,
    signal: &[f64],
    trials: usize,
    washout: usize,
    rng: &RngStream,
    activation: Activation,
) -> Result<SpectralProfile> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    if washout + 2 > signal.len() {
        return Err(Error::EmptyFeatures {
            washout,
            steps: signal.len(),
        });
    }
    let inputs = Matrix::column_vector(signal);
    let kept = signal.len() - washout;
    let bins = kept / 2 + 1;
    let mut raw = vec![vec![0.0; bins]; config.layers.len()];
    let mut planner = FftPlanner::new();
    let mut series = vec![0.0; kept];
    for trial in 0..trials {
        let deep = config.build(1, &mut rng.child(trial as u64))?;
        let opts = ForwardOptions {
            activation,
            ..Default::default()
        };
        let traj = forward_with(&deep, &inputs, washout, None, opts)?;
        for (l, states) in traj.states.iter().enumerate() {
            let n = states.cols();
            for unit in 0..n {
                for (t, v) in series.iter_mut().enumerate() {
                    *v = states[(washout + t, unit)];
                }
                let spec = fft_magnitudes_with(&mut planner, &series)?;
                let w = 1.0 / (n * trials) as f64;
                for (acc, m) in raw[l].iter_mut().zip(&spec.magnitudes) {
                    *acc += w * m;
                }
            }
        }
    }
    Ok(SpectralProfile {
        sample_count: kept,
        raw,
    })
}
