use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::tasks::{Dataset, TaskClass};

use super::config::{
    sample_config, ExperimentConfig, HyperGrid, ModelClass, SearchSettings, TaskSpec,
};
use super::report::{ConfigRow, ResultsTable};
use super::trial::{run_trial, TrialResult};

/// Stream used to sample config `config_id` of `model`.
pub fn sampling_stream(master: &RngStream, model: ModelClass, config_id: usize) -> RngStream {
    master
        .child_named(&format!("search/{model}"))
        .child(config_id as u64)
}

/// Weight stream of one trial. It ignores the model class, so classes that
/// reduce to one another draw the same weights for the same config id and
/// seed. `run` on a saved config reuses it to reproduce search numbers.
pub fn trial_stream(master: &RngStream, config_id: usize, seed: u64) -> RngStream {
    master
        .child_named("trial")
        .child(config_id as u64)
        .child(seed)
}

/// Stream for dataset generation, shared by every model of a search.
pub fn data_stream(master: &RngStream) -> RngStream {
    master.child_named("data")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchPlan {
    pub model: ModelClass,
    pub task: TaskSpec,
    pub grid: HyperGrid,
    pub settings: SearchSettings,
    pub budget: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best_id: usize,
    pub best: ExperimentConfig,
    pub configs: Vec<ExperimentConfig>,
    pub trials: Vec<TrialResult>,
    pub table: ResultsTable,
}

impl SearchOutcome {
    pub fn best_row(&self) -> &ConfigRow {
        &self.table.rows[self.best_id]
    }
}

/// Ranking key of a config: fewer failed seeds first, then the seed-mean
/// validation metric. Any failure alone puts a config behind every fully
/// successful one, i.e. a failed trial counts as an infinitely bad score.
fn compare_rows(a: &ConfigRow, b: &ConfigRow, class: TaskClass) -> Ordering {
    a.failures.cmp(&b.failures).then_with(|| {
        let (x, y) = (
            a.val_mean.unwrap_or(f64::NAN),
            b.val_mean.unwrap_or(f64::NAN),
        );
        let ord = match class {
            TaskClass::Classification => y.partial_cmp(&x),
            _ => x.partial_cmp(&y),
        };
        ord.unwrap_or(Ordering::Equal)
    })
}

/// Index of the best row; ties keep the earlier config.
pub fn select_best(rows: &[ConfigRow], class: TaskClass) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, row) in rows.iter().enumerate() {
        if row.successes == 0 {
            continue;
        }
        match best {
            Some(b) if compare_rows(row, &rows[b], class) != Ordering::Less => {}
            _ => best = Some(i),
        }
    }
    best.ok_or(Error::NoViableConfig)
}

/// Uniform random search: `budget` configs, each scored on every seed.
/// Results are identical for any `jobs`.
pub fn random_search(
    plan: &SearchPlan,
    dataset: &Dataset,
    master: &RngStream,
    jobs: usize,
) -> Result<SearchOutcome> {
    if plan.budget == 0 {
        return Err(Error::InvalidConfig(
            "search budget must be at least 1".into(),
        ));
    }
    if plan.settings.seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least one seed".into()));
    }
    let configs = (0..plan.budget)
        .map(|i| {
            let mut rng = sampling_stream(master, plan.model, i);
            sample_config(&plan.grid, plan.model, &plan.task, &plan.settings, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let trials = run_trials(&configs, dataset, master, jobs)?;
    let table = ResultsTable::from_trials(&configs, &trials);
    let best_id = select_best(&table.rows, plan.task.class())?;
    Ok(SearchOutcome {
        best_id,
        best: configs[best_id].clone(),
        configs,
        trials,
        table,
    })
}

/// Runs every (config, seed) pair on a pool of `jobs` workers. Output order
/// is config-major, seed-minor regardless of scheduling. `configs[i]` is
/// treated as config id `i`.
pub fn run_trials(
    configs: &[ExperimentConfig],
    dataset: &Dataset,
    master: &RngStream,
    jobs: usize,
) -> Result<Vec<TrialResult>> {
    run_trials_with_ids(configs.iter().enumerate(), dataset, master, jobs)
}

pub fn run_trials_with_ids<'a>(
    configs: impl IntoIterator<Item = (usize, &'a ExperimentConfig)>,
    dataset: &Dataset,
    master: &RngStream,
    jobs: usize,
) -> Result<Vec<TrialResult>> {
    let pairs: Vec<(usize, &ExperimentConfig, u64)> = configs
        .into_iter()
        .flat_map(|(i, c)| c.seeds.iter().map(move |&s| (i, c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, c, s)| run_trial(c, i, dataset, s, &mut trial_stream(master, i, s)))
            .collect()
    })
}
