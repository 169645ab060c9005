use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::readout::{Normalizer, CLASSIFICATION_LAMBDAS};
use crate::reservoir::{allocate_units, DeepConfig, FeatureMode, LayerConfig, ResidualKind};
use crate::tasks::loaders::SequenceFormat;
use crate::tasks::{TaskClass, TaskId};

/// Model families compared in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelClass {
    LeakyEsn,
    ResEsn(ResidualKind),
    DeepEsn,
    DeepResEsn(ResidualKind),
}

impl ModelClass {
    pub const ALL: [ModelClass; 8] = [
        ModelClass::LeakyEsn,
        ModelClass::ResEsn(ResidualKind::RandomOrthogonal),
        ModelClass::ResEsn(ResidualKind::Cyclic),
        ModelClass::ResEsn(ResidualKind::Identity),
        ModelClass::DeepEsn,
        ModelClass::DeepResEsn(ResidualKind::RandomOrthogonal),
        ModelClass::DeepResEsn(ResidualKind::Cyclic),
        ModelClass::DeepResEsn(ResidualKind::Identity),
    ];

    pub fn is_deep(self) -> bool {
        matches!(self, ModelClass::DeepEsn | ModelClass::DeepResEsn(_))
    }

    pub fn is_leaky(self) -> bool {
        matches!(self, ModelClass::LeakyEsn | ModelClass::DeepEsn)
    }

    pub fn residual(self) -> ResidualKind {
        match self {
            ModelClass::LeakyEsn | ModelClass::DeepEsn => ResidualKind::Identity,
            ModelClass::ResEsn(k) | ModelClass::DeepResEsn(k) => k,
        }
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelClass::LeakyEsn => f.write_str("LeakyESN"),
            ModelClass::DeepEsn => f.write_str("DeepESN"),
            ModelClass::ResEsn(k) => write!(f, "ResESN_{}", k.tag()),
            ModelClass::DeepResEsn(k) => write!(f, "DeepResESN_{}", k.tag()),
        }
    }
}

impl FromStr for ModelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "leakyesn" => return Ok(ModelClass::LeakyEsn),
            "deepesn" => return Ok(ModelClass::DeepEsn),
            _ => {}
        }
        let (head, tag) = key
            .rsplit_once('_')
            .ok_or_else(|| Error::InvalidInput(format!("unknown model class '{s}'")))?;
        let kind = ResidualKind::from_tag(tag)
            .ok_or_else(|| Error::InvalidInput(format!("unknown residual kind in '{s}'")))?;
        match head {
            "resesn" => Ok(ModelClass::ResEsn(kind)),
            "deepresesn" => Ok(ModelClass::DeepResEsn(kind)),
            _ => Err(Error::InvalidInput(format!("unknown model class '{s}'"))),
        }
    }
}

impl Serialize for ModelClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ModelClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Candidate values for every searched hyperparameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperGrid {
    pub concat: Vec<bool>,
    pub n_layers: Vec<usize>,
    pub spectral_radius: Vec<f64>,
    pub input_scaling: Vec<f64>,
    pub bias_scaling: Vec<f64>,
    pub leak_rate: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda_regression: Vec<f64>,
    pub lambda_classification: Vec<f64>,
    /// Values of `τ`, `α` and `β` only offered to memory tasks.
    pub memory_only: Vec<f64>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            concat: vec![false, true],
            n_layers: vec![2, 3, 4, 5],
            spectral_radius: vec![0.9, 1.0, 1.1],
            input_scaling: vec![0.01, 0.1, 1.0, 10.0],
            bias_scaling: vec![0.0, 0.01, 0.1, 1.0, 10.0],
            leak_rate: vec![1e-4, 0.1, 0.5, 0.9, 0.99, 1.0],
            alpha: vec![0.0, 1e-4, 0.1, 0.5, 0.9, 0.99, 1.0],
            beta: vec![1e-4, 0.1, 0.5, 0.9, 0.99, 1.0],
            lambda_regression: vec![0.0],
            lambda_classification: CLASSIFICATION_LAMBDAS.to_vec(),
            memory_only: vec![1e-4, 0.99],
        }
    }
}

impl HyperGrid {
    fn coefficient_values(&self, values: &[f64], task: TaskClass) -> Vec<f64> {
        values
            .iter()
            .copied()
            .filter(|v| task == TaskClass::Memory || !self.memory_only.contains(v))
            .collect()
    }

    pub fn validate(&self, model: ModelClass, task: TaskClass) -> Result<()> {
        let mut lists: Vec<(&str, usize)> = vec![
            ("spectral_radius", self.spectral_radius.len()),
            ("input_scaling", self.input_scaling.len()),
            ("bias_scaling", self.bias_scaling.len()),
            ("lambda", self.lambdas(task).len()),
        ];
        if model.is_leaky() {
            lists.push((
                "leak_rate",
                self.coefficient_values(&self.leak_rate, task).len(),
            ));
        } else {
            lists.push(("alpha", self.coefficient_values(&self.alpha, task).len()));
            lists.push(("beta", self.coefficient_values(&self.beta, task).len()));
        }
        if model.is_deep() {
            lists.push(("n_layers", self.n_layers.len()));
            lists.push(("concat", self.concat.len()));
        }
        match lists.iter().find(|(_, n)| *n == 0) {
            Some((name, _)) => Err(Error::InvalidConfig(format!(
                "grid has no values for {name}"
            ))),
            None => Ok(()),
        }
    }

    pub fn lambdas(&self, task: TaskClass) -> &[f64] {
        match task {
            TaskClass::Classification => &self.lambda_classification,
            _ => &self.lambda_regression,
        }
    }
}

/// Hyperparameters of one group of layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerHyper {
    pub spectral_radius: f64,
    pub input_scaling: f64,
    pub bias_scaling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leak_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl LayerHyper {
    fn coefficients(&self) -> Result<(f64, f64)> {
        match (self.leak_rate, self.alpha, self.beta) {
            (Some(tau), None, None) => Ok((1.0 - tau, tau)),
            (None, Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::InvalidConfig(
                "a layer needs either leak_rate or both alpha and beta".into(),
            )),
        }
    }

    fn layer_config(&self, hidden_size: usize, residual: ResidualKind) -> Result<LayerConfig> {
        let (alpha, beta) = self.coefficients()?;
        let cfg = LayerConfig {
            hidden_size,
            spectral_radius: self.spectral_radius,
            input_scaling: self.input_scaling,
            bias_scaling: self.bias_scaling,
            alpha,
            beta,
            residual,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One point of the search space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_layers: usize,
    pub concat: bool,
    pub base: LayerHyper,
    /// Applied to layers beyond the first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inter: Option<LayerHyper>,
    pub lambda: f64,
}

/// Where a task's data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TaskSpec {
    Synthetic {
        id: TaskId,
    },
    Classification {
        name: String,
        train: PathBuf,
        test: PathBuf,
        format: SequenceFormat,
        #[serde(default)]
        permutation_seed: Option<u64>,
        /// Fraction of the training file kept for fitting; the rest validates.
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
    },
}

fn default_train_fraction() -> f64 {
    0.7
}

impl TaskSpec {
    pub fn class(&self) -> TaskClass {
        match self {
            TaskSpec::Synthetic { id } => id.class(),
            TaskSpec::Classification { .. } => TaskClass::Classification,
        }
    }

    pub fn name(&self) -> String {
        match self {
            TaskSpec::Synthetic { id } => id.name().to_string(),
            TaskSpec::Classification { name, .. } => name.clone(),
        }
    }
}

impl From<TaskId> for TaskSpec {
    fn from(id: TaskId) -> Self {
        TaskSpec::Synthetic { id }
    }
}

pub const DEFAULT_WASHOUT: usize = 200;
pub const DEFAULT_TOTAL_UNITS: usize = 100;
pub const DEFAULT_BUDGET: usize = 100;
pub const DEFAULT_SEEDS: u64 = 10;

/// A fully specified model on a task: everything a trial needs except the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelClass,
    pub hyper: Hyperparams,
    pub task: TaskSpec,
    pub total_units: usize,
    pub seeds: Vec<u64>,
    pub washout: usize,
    pub readout: FeatureMode,
    #[serde(default)]
    pub normalizer: Normalizer,
}

impl ExperimentConfig {
    /// Layer list for this config: the unit budget is split across layers
    /// when states are concatenated.
    pub fn deep_config(&self) -> Result<DeepConfig> {
        let h = &self.hyper;
        if !self.model.is_deep() && h.n_layers != 1 {
            return Err(Error::InvalidConfig(format!(
                "{} is single-layer",
                self.model
            )));
        }
        let sizes = allocate_units(self.total_units, h.n_layers, h.concat)?;
        let residual = self.model.residual();
        let layers = sizes
            .iter()
            .enumerate()
            .map(|(l, &n)| {
                let group = if l == 0 {
                    &h.base
                } else {
                    h.inter.as_ref().ok_or_else(|| {
                        Error::InvalidConfig("deep config is missing inter hyperparameters".into())
                    })?
                };
                group.layer_config(n, residual)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DeepConfig {
            layers,
            concat: h.concat,
            share_residual: false,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_document(path)
    }
}

/// Reads a JSON or TOML document, chosen by file extension.
pub fn read_document<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e
                .span()
                .map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        }),
        _ => Ok(serde_json::from_str(&text)?),
    }
}

fn pick<T: Copy>(values: &[T], rng: &mut RngStream) -> T {
    *rng.choose(values)
}

fn sample_layer(
    grid: &HyperGrid,
    model: ModelClass,
    task: TaskClass,
    rng: &mut RngStream,
) -> LayerHyper {
    let spectral_radius = pick(&grid.spectral_radius, rng);
    let input_scaling = pick(&grid.input_scaling, rng);
    let bias_scaling = pick(&grid.bias_scaling, rng);
    let (leak_rate, alpha, beta) = if model.is_leaky() {
        (
            Some(pick(&grid.coefficient_values(&grid.leak_rate, task), rng)),
            None,
            None,
        )
    } else {
        let a = pick(&grid.coefficient_values(&grid.alpha, task), rng);
        let b = pick(&grid.coefficient_values(&grid.beta, task), rng);
        (None, Some(a), Some(b))
    };
    LayerHyper {
        spectral_radius,
        input_scaling,
        bias_scaling,
        leak_rate,
        alpha,
        beta,
    }
}

/// Uniform independent draw of every hyperparameter that applies to `model`.
pub fn sample_hyperparams(
    grid: &HyperGrid,
    model: ModelClass,
    task: TaskClass,
    rng: &mut RngStream,
) -> Result<Hyperparams> {
    grid.validate(model, task)?;
    let (n_layers, concat) = if model.is_deep() {
        (pick(&grid.n_layers, rng), pick(&grid.concat, rng))
    } else {
        (1, false)
    };
    if n_layers == 0 {
        return Err(Error::InvalidConfig("grid offers zero layers".into()));
    }
    let base = sample_layer(grid, model, task, rng);
    let inter = (n_layers > 1).then(|| sample_layer(grid, model, task, rng));
    let lambda = pick(grid.lambdas(task), rng);
    Ok(Hyperparams {
        n_layers,
        concat,
        base,
        inter,
        lambda,
    })
}

/// Settings shared by every config of a search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    pub total_units: usize,
    pub seeds: Vec<u64>,
    pub washout: usize,
    pub normalizer: Normalizer,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            total_units: DEFAULT_TOTAL_UNITS,
            seeds: (0..DEFAULT_SEEDS).collect(),
            washout: DEFAULT_WASHOUT,
            normalizer: Normalizer::Std,
        }
    }
}

/// A search document: one task, the models to compare and the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub task: TaskSpec,
    #[serde(default = "all_models")]
    pub models: Vec<ModelClass>,
    #[serde(default)]
    pub grid: HyperGrid,
    #[serde(default)]
    pub settings: SearchSettings,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

fn all_models() -> Vec<ModelClass> {
    ModelClass::ALL.to_vec()
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

impl SearchSpec {
    pub fn new(task: TaskSpec) -> Self {
        SearchSpec {
            task,
            models: all_models(),
            grid: HyperGrid::default(),
            settings: SearchSettings::default(),
            budget: DEFAULT_BUDGET,
            seed: 0,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_document(path)
    }
}

pub fn sample_config(
    grid: &HyperGrid,
    model: ModelClass,
    task: &TaskSpec,
    settings: &SearchSettings,
    rng: &mut RngStream,
) -> Result<ExperimentConfig> {
    let class = task.class();
    Ok(ExperimentConfig {
        model,
        hyper: sample_hyperparams(grid, model, class, rng)?,
        task: task.clone(),
        total_units: settings.total_units,
        seeds: settings.seeds.clone(),
        washout: settings.washout,
        readout: match class {
            TaskClass::Classification => FeatureMode::LastStep,
            _ => FeatureMode::PerStep,
        },
        normalizer: settings.normalizer,
    })
}
