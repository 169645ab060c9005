use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-sided magnitude spectrum `|X_k|`, `k = 0..=T/2` (unnormalized DFT).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
    pub sample_count: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Bin nearest to angular frequency `omega` (radians per sample).
    pub fn bin_of_angular_frequency(&self, omega: f64) -> usize {
        let bin = (omega / (2.0 * std::f64::consts::PI) * self.sample_count as f64).round();
        (bin.max(0.0) as usize).min(self.len().saturating_sub(1))
    }

    /// Two-sided energy `Σ_k |X_k|²` reconstructed from the one-sided bins.
    pub fn two_sided_energy(&self) -> f64 {
        let t = self.sample_count;
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mirrored = k != 0 && !(t % 2 == 0 && k == t / 2);
                if mirrored {
                    2.0 * m * m
                } else {
                    m * m
                }
            })
            .sum()
    }
}

pub fn fft_magnitudes(signal: &[f64]) -> Result<Spectrum> {
    let mut planner = FftPlanner::new();
    fft_magnitudes_with(&mut planner, signal)
}

/// Same as [`fft_magnitudes`], reusing a planner across many calls.
pub fn fft_magnitudes_with(planner: &mut FftPlanner<f64>, signal: &[f64]) -> Result<Spectrum> {
    let t = signal.len();
    if t < 2 {
        return Err(Error::InvalidInput(format!(
            "spectrum needs at least 2 samples, got {t}"
        )));
    }
    let fft = planner.plan_fft_forward(t);
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft.process(&mut buf);
    Ok(Spectrum {
        magnitudes: buf[..=t / 2].iter().map(|z| z.norm()).collect(),
        sample_count: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_signal_is_all_dc() {
        let s = fft_magnitudes(&[2.5; 64]).unwrap();
        assert_eq!(s.len(), 33);
        assert!((s.magnitudes[0] - 2.5 * 64.0).abs() < 1e-9);
        assert!(s.magnitudes[1..].iter().all(|&m| m < 1e-9));
    }

    #[test]
    fn integer_sinusoid_peaks_at_its_bin() {
        let t = 128;
        for k in [1usize, 5, 17, 63] {
            let x: Vec<f64> = (0..t)
                .map(|n| (2.0 * PI * k as f64 * n as f64 / t as f64).sin())
                .collect();
            let s = fft_magnitudes(&x).unwrap();
            let peak = s
                .magnitudes
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(peak, k);
        }
    }

    #[test]
    fn parseval_holds_for_odd_and_even_lengths() {
        for t in [7usize, 8, 31, 100] {
            let x: Vec<f64> = (0..t).map(|n| ((n * n) as f64 * 0.37).cos()).collect();
            let s = fft_magnitudes(&x).unwrap();
            let time_energy: f64 = x.iter().map(|v| v * v).sum();
            assert!((s.two_sided_energy() / t as f64 - time_energy).abs() < 1e-9);
        }
    }

    #[test]
    fn too_short_is_rejected() {
        assert!(fft_magnitudes(&[1.0]).is_err());
        assert!(fft_magnitudes(&[]).is_err());
    }
}
