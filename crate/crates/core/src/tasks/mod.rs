//! Benchmark data: synthetic generators, split protocols and loaders for
//! external classification sets.

pub mod cache;
pub mod generators;
pub mod loaders;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{Matrix, RngStream};

pub use generators::{
    ctxor, integrate_lorenz96, integrate_mackey_glass, lorenz96, lorenz96_rk4_step, mackey_glass,
    narma, narma_recurrence, sinmem, Lorenz96Params, MackeyGlassForm, MackeyGlassParams,
};

/// Aligned per-step inputs and targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub inputs: Matrix,
    pub targets: Matrix,
}

impl TimeSeries {
    pub fn new(inputs: Matrix, targets: Matrix) -> Result<Self> {
        check_dim("target length", inputs.rows(), targets.rows())?;
        Ok(TimeSeries { inputs, targets })
    }

    pub fn univariate(x: &[f64], y: &[f64]) -> Self {
        TimeSeries {
            inputs: Matrix::column_vector(x),
            targets: Matrix::column_vector(y),
        }
    }

    /// Inputs `s(t)` and targets `s(t + horizon)` for `t < steps`.
    pub fn forecast(states: &[Vec<f64>], steps: usize, horizon: usize) -> Result<Self> {
        if states.len() < steps + horizon || steps == 0 {
            return Err(Error::InsufficientData(format!(
                "forecast needs {} states, have {}",
                steps + horizon,
                states.len()
            )));
        }
        let inputs = Matrix::from_rows(&states[..steps])?;
        let targets = Matrix::from_rows(&states[horizon..horizon + steps])?;
        Ok(TimeSeries { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    pub fn slice(&self, range: Range<usize>) -> TimeSeries {
        TimeSeries {
            inputs: self.inputs.row_range(range.start, range.end),
            targets: self.targets.row_range(range.start, range.end),
        }
    }
}

/// Lengths of contiguous train, validation and test blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitScheme {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitScheme {
    pub const MEMORY: SplitScheme = SplitScheme {
        train: 4000,
        val: 1000,
        test: 1000,
    };
    pub const LORENZ: SplitScheme = SplitScheme {
        train: 400,
        val: 400,
        test: 400,
    };
    /// Mackey-Glass and NARMA.
    pub const LONG: SplitScheme = SplitScheme {
        train: 5000,
        val: 2500,
        test: 2500,
    };

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

/// A time series cut into consecutive train/validation/test windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDataset {
    pub name: String,
    pub series: TimeSeries,
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

impl SeriesDataset {
    pub fn split(name: impl Into<String>, series: TimeSeries, scheme: SplitScheme) -> Result<Self> {
        if scheme.total() > series.len() {
            return Err(Error::InsufficientData(format!(
                "split needs {} steps, series has {}",
                scheme.total(),
                series.len()
            )));
        }
        let a = scheme.train;
        let b = a + scheme.val;
        let c = b + scheme.test;
        Ok(SeriesDataset {
            name: name.into(),
            series,
            train: 0..a,
            val: a..b,
            test: b..c,
        })
    }

    pub fn train(&self) -> TimeSeries {
        self.series.slice(self.train.clone())
    }

    pub fn val(&self) -> TimeSeries {
        self.series.slice(self.val.clone())
    }

    pub fn test(&self) -> TimeSeries {
        self.series.slice(self.test.clone())
    }
}

/// Labelled sequences with index-based splits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDataset {
    pub name: String,
    /// One `steps x channels` matrix per sequence.
    pub sequences: Vec<Matrix>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SequenceDataset {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn channels(&self) -> usize {
        self.sequences.first().map_or(0, Matrix::cols)
    }

    pub fn labels_of(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| self.labels[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dataset {
    Series(SeriesDataset),
    Sequences(SequenceDataset),
}

/// Splits `indices` so that each class contributes `round(frac * n_c)`
/// items to the first part, shuffled with `rng`.
pub fn stratified_split(
    indices: &[usize],
    labels: &[usize],
    first_fraction: f64,
    rng: &mut RngStream,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&first_fraction) {
        return Err(Error::InvalidInput(format!(
            "split fraction must lie in [0, 1], got {first_fraction}"
        )));
    }
    let n_classes = indices.iter().map(|&i| labels[i] + 1).max().unwrap_or(0);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for c in 0..n_classes {
        let mut members: Vec<usize> = indices
            .iter()
            .copied()
            .filter(|&i| labels[i] == c)
            .collect();
        rng.shuffle(&mut members);
        let k = (first_fraction * members.len() as f64).round() as usize;
        first.extend_from_slice(&members[..k]);
        second.extend_from_slice(&members[k..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskClass {
    Memory,
    Forecasting,
    Classification,
}

/// Synthetic benchmarks with their default lengths and splits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskId {
    CtXor5,
    CtXor10,
    SinMem10,
    SinMem20,
    Lz25,
    Lz50,
    Mg,
    Mg84,
    N30,
    N60,
}

impl TaskId {
    pub const ALL: [TaskId; 10] = [
        TaskId::CtXor5,
        TaskId::CtXor10,
        TaskId::SinMem10,
        TaskId::SinMem20,
        TaskId::Lz25,
        TaskId::Lz50,
        TaskId::Mg,
        TaskId::Mg84,
        TaskId::N30,
        TaskId::N60,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskId::CtXor5 => "ctxor5",
            TaskId::CtXor10 => "ctxor10",
            TaskId::SinMem10 => "sinmem10",
            TaskId::SinMem20 => "sinmem20",
            TaskId::Lz25 => "lz25",
            TaskId::Lz50 => "lz50",
            TaskId::Mg => "mg",
            TaskId::Mg84 => "mg84",
            TaskId::N30 => "n30",
            TaskId::N60 => "n60",
        }
    }

    pub fn class(self) -> TaskClass {
        match self {
            TaskId::CtXor5 | TaskId::CtXor10 | TaskId::SinMem10 | TaskId::SinMem20 => {
                TaskClass::Memory
            }
            _ => TaskClass::Forecasting,
        }
    }

    pub fn scheme(self) -> SplitScheme {
        match self.class() {
            TaskClass::Memory => SplitScheme::MEMORY,
            _ => match self {
                TaskId::Lz25 | TaskId::Lz50 => SplitScheme::LORENZ,
                _ => SplitScheme::LONG,
            },
        }
    }

    /// Generates the full series and splits it. Deterministic in `rng`.
    pub fn generate(self, rng: &mut RngStream) -> Result<SeriesDataset> {
        let steps = self.scheme().total();
        let series = match self {
            TaskId::CtXor5 => ctxor(steps, 5, 2, rng)?,
            TaskId::CtXor10 => ctxor(steps, 10, 2, rng)?,
            TaskId::SinMem10 => sinmem(steps, 10, rng)?,
            TaskId::SinMem20 => sinmem(steps, 20, rng)?,
            TaskId::Lz25 => lorenz96(steps, 25, &Lorenz96Params::default(), rng)?,
            TaskId::Lz50 => lorenz96(steps, 50, &Lorenz96Params::default(), rng)?,
            TaskId::Mg => mackey_glass(steps, 1, &MackeyGlassParams::default())?,
            TaskId::Mg84 => mackey_glass(steps, 84, &MackeyGlassParams::default())?,
            TaskId::N30 => narma(steps, 30, rng)?,
            TaskId::N60 => narma(steps, 60, rng)?,
        };
        SeriesDataset::split(self.name(), series, self.scheme())
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        TaskId::ALL
            .iter()
            .copied()
            .find(|t| t.name() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown task '{s}'")))
    }
}
