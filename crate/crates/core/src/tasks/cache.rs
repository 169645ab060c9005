//! On-disk cache of generated series: `<name>.csv` with `in_*` and `out_*`
//! columns next to `<name>.json` describing how it was produced.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::tasks::{SeriesDataset, SplitScheme, TimeSeries};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub generator: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub split: SplitScheme,
    pub input_dim: usize,
    pub target_dim: usize,
}

pub fn cache_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{name}.csv")),
        dir.join(format!("{name}.json")),
    )
}

pub fn write_series_cache(
    dir: &Path,
    data: &SeriesDataset,
    manifest: &DatasetManifest,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (csv_path, json_path) = cache_paths(dir, &data.name);
    let s = &data.series;
    let mut w = csv::Writer::from_path(&csv_path)?;
    let mut header: Vec<String> = (0..s.inputs.cols()).map(|i| format!("in_{i}")).collect();
    header.extend((0..s.targets.cols()).map(|i| format!("out_{i}")));
    w.write_record(&header)?;
    for t in 0..s.len() {
        let rec: Vec<String> = s
            .inputs
            .row(t)
            .iter()
            .chain(s.targets.row(t))
            .map(|v| format!("{v:?}"))
            .collect();
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))
}

pub fn read_series_cache(dir: &Path, name: &str) -> Result<(SeriesDataset, DatasetManifest)> {
    let (csv_path, json_path) = cache_paths(dir, name);
    let text = std::fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)?;
    let mut rdr = csv::Reader::from_path(&csv_path)?;
    let width = manifest.input_dim + manifest.target_dim;
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse {
                path: csv_path.clone(),
                line: i + 2,
                message: e.to_string(),
            })?;
        if values.len() != width {
            return Err(Error::Parse {
                path: csv_path.clone(),
                line: i + 2,
                message: format!("expected {width} columns, got {}", values.len()),
            });
        }
        inputs.push(values[..manifest.input_dim].to_vec());
        targets.push(values[manifest.input_dim..].to_vec());
    }
    let series = TimeSeries::new(Matrix::from_rows(&inputs)?, Matrix::from_rows(&targets)?)?;
    Ok((
        SeriesDataset::split(name, series, manifest.split)?,
        manifest,
    ))
}
