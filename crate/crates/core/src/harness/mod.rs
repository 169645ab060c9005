//! Experiment harness: hyperparameter sampling, seed-averaged trials,
//! random-search model selection and report files.

pub mod config;
pub mod report;
pub mod search;
pub mod trial;

pub use config::{
    read_document, sample_config, sample_hyperparams, ExperimentConfig, HyperGrid, Hyperparams,
    LayerHyper, ModelClass, SearchSettings, SearchSpec, TaskSpec,
};
pub use report::{
    emit_reports, write_artifacts, Artifacts, ConfigRow, Manifest, ModelSummary, ResultsTable,
};
pub use search::{
    data_stream, random_search, run_trials, run_trials_with_ids, select_best, trial_stream,
    SearchOutcome, SearchPlan,
};
pub use trial::{run_trial, TrialResult};

use crate::error::Result;
use crate::numerics::RngStream;
use crate::tasks::loaders::load_classification_pair;
use crate::tasks::Dataset;

/// Materializes the data of `task`. Synthetic tasks draw from `rng`;
/// classification files use it for the stratified validation split.
pub fn load_task(task: &TaskSpec, rng: &mut RngStream) -> Result<Dataset> {
    match task {
        TaskSpec::Synthetic { id } => Ok(Dataset::Series(id.generate(rng)?)),
        TaskSpec::Classification {
            name,
            train,
            test,
            format,
            permutation_seed,
            train_fraction,
        } => Ok(Dataset::Sequences(load_classification_pair(
            name,
            train,
            test,
            *format,
            *permutation_seed,
            *train_fraction,
            rng,
        )?)),
    }
}
