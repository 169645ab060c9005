//! Readers and writers for labelled sequence files.
//!
//! Two formats are understood: the UCR/UEA `.ts` text format (header lines
//! starting with `@`, then one `dim1:dim2:...:label` record per line with
//! comma-separated values per dimension) and flattened-image CSV (one row per
//! image, label first, then integer pixel intensities in `0..=255`).

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};
use crate::tasks::{stratified_split, SequenceDataset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceFormat {
    UcrTs,
    FlattenedImageCsv,
}

impl std::str::FromStr for SequenceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ucr-ts" | "ts" => Ok(SequenceFormat::UcrTs),
            "flattened-image-csv" | "image-csv" | "csv" => Ok(SequenceFormat::FlattenedImageCsv),
            _ => Err(Error::InvalidInput(format!(
                "unknown sequence format '{s}'"
            ))),
        }
    }
}

/// Pixel values are divided by this on load.
pub const PIXEL_SCALE: f64 = 255.0;

/// Sequences with their raw string labels, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledSequences {
    pub sequences: Vec<Matrix>,
    pub labels: Vec<String>,
}

impl LabelledSequences {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Reorders the time axis of every sequence with a seeded permutation.
    pub fn permute_steps(&mut self, seed: u64) -> Result<()> {
        let Some(first) = self.sequences.first() else {
            return Ok(());
        };
        let steps = first.rows();
        if self.sequences.iter().any(|s| s.rows() != steps) {
            return Err(Error::InvalidInput(
                "a step permutation needs equal-length sequences".into(),
            ));
        }
        let perm = step_permutation(steps, seed);
        for s in &mut self.sequences {
            *s = s.select_rows(&perm);
        }
        Ok(())
    }
}

/// The order applied by [`LabelledSequences::permute_steps`].
pub fn step_permutation(steps: usize, seed: u64) -> Vec<usize> {
    RngStream::new(seed)
        .child_named("step-permutation")
        .permutation(steps)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn read_ucr_ts(path: &Path) -> Result<LabelledSequences> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut in_data = false;
    let mut out = LabelledSequences {
        sequences: Vec::new(),
        labels: Vec::new(),
    };
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            if line.to_ascii_lowercase().starts_with("@data") {
                in_data = true;
            } else if !line.starts_with('@') {
                return Err(parse_err(path, lineno, "expected a header line or @data"));
            }
            continue;
        }
        let mut fields: Vec<&str> = line.split(':').collect();
        if fields.len() < 2 {
            return Err(parse_err(path, lineno, "record has no label"));
        }
        let label = fields.pop().expect("checked length").trim().to_string();
        let dims: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| {
                f.split(',')
                    .map(|v| {
                        let v = v.trim();
                        v.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| parse_err(path, lineno, format!("bad value '{v}'")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let steps = dims[0].len();
        if dims.iter().any(|d| d.len() != steps) {
            return Err(parse_err(path, lineno, "dimensions have different lengths"));
        }
        let m = Matrix::from_fn(steps, dims.len(), |t, c| dims[c][t]);
        if let Some(prev) = out.sequences.first() {
            if prev.cols() != m.cols() {
                return Err(parse_err(
                    path,
                    lineno,
                    "channel count differs from earlier records",
                ));
            }
        }
        out.sequences.push(m);
        out.labels.push(label);
    }
    if !in_data {
        return Err(parse_err(path, 0, "missing @data section"));
    }
    Ok(out)
}

pub fn write_ucr_ts(path: &Path, data: &LabelledSequences, problem: &str) -> Result<()> {
    let wrap = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    let mut classes = data.labels.clone();
    sort_labels(&mut classes);
    classes.dedup();
    let channels = data.sequences.first().map_or(1, Matrix::cols);
    writeln!(w, "@problemName {problem}").map_err(wrap)?;
    writeln!(w, "@timeStamps false").map_err(wrap)?;
    writeln!(w, "@univariate {}", channels == 1).map_err(wrap)?;
    writeln!(w, "@classLabel true {}", classes.join(" ")).map_err(wrap)?;
    writeln!(w, "@data").map_err(wrap)?;
    for (s, label) in data.sequences.iter().zip(&data.labels) {
        let dims: Vec<String> = (0..s.cols())
            .map(|c| {
                s.column(c)
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        writeln!(w, "{}:{label}", dims.join(":")).map_err(wrap)?;
    }
    w.flush().map_err(wrap)
}

pub fn read_image_csv(path: &Path) -> Result<LabelledSequences> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut out = LabelledSequences {
        sequences: Vec::new(),
        labels: Vec::new(),
    };
    let mut width = None;
    for (i, rec) in rdr.records().enumerate() {
        let lineno = i + 1;
        let rec = rec?;
        if rec.len() < 2 {
            return Err(parse_err(path, lineno, "row needs a label and pixels"));
        }
        // a header row has a non-numeric pixel column
        if i == 0 && rec.get(1).is_some_and(|v| v.trim().parse::<f64>().is_err()) {
            continue;
        }
        let pixels = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| (0.0..=PIXEL_SCALE).contains(x))
                    .map(|x| x / PIXEL_SCALE)
                    .ok_or_else(|| parse_err(path, lineno, format!("bad pixel '{v}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(pixels.len()),
            Some(w) if w != pixels.len() => {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected {w} pixels, got {}", pixels.len()),
                ))
            }
            _ => {}
        }
        out.labels.push(rec[0].trim().to_string());
        out.sequences.push(Matrix::column_vector(&pixels));
    }
    Ok(out)
}

/// Writes integer pixel rows; inverse of [`read_image_csv`] for integral data.
pub fn write_image_csv(path: &Path, labels: &[String], pixels: &[Vec<u8>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for (label, row) in labels.iter().zip(pixels) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|p| p.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_sequence_classification(
    path: &Path,
    format: SequenceFormat,
    permutation_seed: Option<u64>,
) -> Result<LabelledSequences> {
    let mut data = match format {
        SequenceFormat::UcrTs => read_ucr_ts(path)?,
        SequenceFormat::FlattenedImageCsv => read_image_csv(path)?,
    };
    if data.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} holds no sequences",
            path.display()
        )));
    }
    if let Some(seed) = permutation_seed {
        data.permute_steps(seed)?;
    }
    Ok(data)
}

/// Numeric labels sort by value, anything else lexicographically.
fn sort_labels(labels: &mut [String]) {
    let numeric = labels.iter().all(|l| l.parse::<f64>().is_ok());
    if numeric {
        labels.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.partial_cmp(&y).unwrap_or(Ordering::Equal)
        });
    } else {
        labels.sort();
    }
}

/// Train and test files combined into one dataset: the training file is
/// split into train/validation with a stratified split, the test file is kept
/// whole. Both files share one label index.
pub fn load_classification_pair(
    name: &str,
    train_path: &Path,
    test_path: &Path,
    format: SequenceFormat,
    permutation_seed: Option<u64>,
    train_fraction: f64,
    rng: &mut RngStream,
) -> Result<SequenceDataset> {
    let train = load_sequence_classification(train_path, format, permutation_seed)?;
    let test = load_sequence_classification(test_path, format, permutation_seed)?;
    let channels = train.sequences[0].cols();
    if test.sequences[0].cols() != channels {
        return Err(Error::InvalidInput(
            "train and test files differ in channel count".into(),
        ));
    }

    let mut class_names: Vec<String> = train.labels.iter().chain(&test.labels).cloned().collect();
    sort_labels(&mut class_names);
    class_names.dedup();
    let index_of = |l: &String| {
        class_names
            .iter()
            .position(|c| c == l)
            .expect("label collected")
    };

    let n_train = train.len();
    let labels: Vec<usize> = train
        .labels
        .iter()
        .chain(&test.labels)
        .map(index_of)
        .collect();
    let train_idx: Vec<usize> = (0..n_train).collect();
    let (fit, val) = stratified_split(&train_idx, &labels, train_fraction, rng)?;
    let test_idx: Vec<usize> = (n_train..n_train + test.len()).collect();

    let mut sequences = train.sequences;
    sequences.extend(test.sequences);
    Ok(SequenceDataset {
        name: name.to_string(),
        sequences,
        labels,
        class_names,
        train: fit,
        val,
        test: test_idx,
    })
}
