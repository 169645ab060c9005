use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::SpectralProfile;
use crate::error::{Error, Result};
use crate::readout::population_std;
use crate::stability::{write_eigen_csv, LayerEigenvalues, StabilityReport};

use super::config::{ExperimentConfig, ModelClass};
use super::trial::TrialResult;

/// Seed statistics of one config. Means and stds cover the successful
/// seeds only and are empty when none succeeded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigRow {
    pub config_id: usize,
    pub model: ModelClass,
    pub task: String,
    pub n_layers: usize,
    pub concat: bool,
    pub val_mean: Option<f64>,
    pub val_std: Option<f64>,
    pub test_mean: Option<f64>,
    pub test_std: Option<f64>,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ConfigRow>,
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (Some(mean), Some(population_std(values)))
}

impl ResultsTable {
    /// One row per config; trials are matched by `config_id` and reduced in
    /// seed order so the statistics do not depend on trial order.
    pub fn from_trials(configs: &[ExperimentConfig], trials: &[TrialResult]) -> Self {
        let rows = configs
            .iter()
            .enumerate()
            .map(|(id, cfg)| {
                let mut mine: Vec<&TrialResult> =
                    trials.iter().filter(|t| t.config_id == id).collect();
                mine.sort_by_key(|t| t.seed);
                let vals: Vec<f64> = mine.iter().filter_map(|t| t.val).collect();
                let tests: Vec<f64> = mine.iter().filter_map(|t| t.test).collect();
                let (val_mean, val_std) = mean_std(&vals);
                let (test_mean, test_std) = mean_std(&tests);
                let successes = mine.iter().filter(|t| t.succeeded()).count();
                ConfigRow {
                    config_id: id,
                    model: cfg.model,
                    task: cfg.task.name(),
                    n_layers: cfg.hyper.n_layers,
                    concat: cfg.hyper.concat,
                    val_mean,
                    val_std,
                    test_mean,
                    test_std,
                    successes,
                    failures: mine.len() - successes,
                }
            })
            .collect();
        ResultsTable { rows }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<ConfigRow>, _>>()?;
        Ok(ResultsTable { rows })
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| model | task | config | layers | concat | validation | test | ok | failed |\n",
        );
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                r.model,
                r.task,
                r.config_id,
                r.n_layers,
                r.concat,
                fmt_stat(r.val_mean, r.val_std),
                fmt_stat(r.test_mean, r.test_std),
                r.successes,
                r.failures
            );
        }
        out
    }
}

const CSV_HEADER: [&str; 11] = [
    "config_id",
    "model",
    "task",
    "n_layers",
    "concat",
    "val_mean",
    "val_std",
    "test_mean",
    "test_std",
    "successes",
    "failures",
];

fn fmt_stat(mean: Option<f64>, std: Option<f64>) -> String {
    match (mean, std) {
        (Some(m), Some(s)) => format!("{m:.4e} ± {s:.1e}"),
        _ => "n/a".into(),
    }
}

/// Best config of one model's search, with everything needed to rerun it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelClass,
    pub best_id: usize,
    pub best: ExperimentConfig,
    pub best_row: ConfigRow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub master_seed: u64,
    pub budget: usize,
    /// Full search document as given, so the run can be repeated.
    pub search: serde_json::Value,
    pub models: Vec<ModelSummary>,
}

#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub stability: Vec<(String, StabilityReport)>,
    pub spectra: Vec<(String, SpectralProfile)>,
    pub eigen: Vec<(String, Vec<LayerEigenvalues>)>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the output directory: results table, manifest, and whichever
/// analysis artifacts are present. Returns the files written.
pub fn emit_reports(
    out: &Path,
    table: &ResultsTable,
    manifest: Option<&Manifest>,
    artifacts: &Artifacts,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let mut written = Vec::new();

    let csv_path = out.join("results.csv");
    table.write_csv(&csv_path)?;
    written.push(csv_path);

    let md_path = out.join("results.md");
    let mut md = String::new();
    if let Some(m) = manifest {
        let best = ResultsTable {
            rows: m.models.iter().map(|s| s.best_row.clone()).collect(),
        };
        md.push_str("## Best configuration per model\n\n");
        md.push_str(&best.to_markdown());
        md.push_str("\n## All configurations\n\n");
    }
    md.push_str(&table.to_markdown());
    std::fs::write(&md_path, md).map_err(|e| Error::io(&md_path, e))?;
    written.push(md_path);

    if let Some(m) = manifest {
        let path = out.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(m)?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    written.extend(write_artifacts(out, artifacts)?);
    Ok(written)
}

/// Writes the `stability/`, `spectra/` and `eigen/` subdirectories for the
/// artifacts present.
pub fn write_artifacts(out: &Path, artifacts: &Artifacts) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if !artifacts.stability.is_empty() {
        let dir = out.join("stability");
        ensure_dir(&dir)?;
        for (name, report) in &artifacts.stability {
            let path = dir.join(format!("{name}.json"));
            report.write_json(&path)?;
            written.push(path);
        }
    }
    if !artifacts.spectra.is_empty() {
        let dir = out.join("spectra");
        ensure_dir(&dir)?;
        for (name, profile) in &artifacts.spectra {
            let path = dir.join(format!("{name}.csv"));
            profile.write_csv(&path)?;
            written.push(path);
        }
    }
    if !artifacts.eigen.is_empty() {
        let dir = out.join("eigen");
        ensure_dir(&dir)?;
        for (name, eig) in &artifacts.eigen {
            let path = dir.join(format!("{name}.csv"));
            write_eigen_csv(eig, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{sample_config, HyperGrid, SearchSettings, TaskSpec};
    use crate::numerics::RngStream;
    use crate::reservoir::ResidualKind;
    use crate::tasks::TaskId;

    fn configs(n: usize) -> Vec<ExperimentConfig> {
        let mut rng = RngStream::new(0);
        let settings = SearchSettings {
            seeds: vec![0, 1, 2],
            ..Default::default()
        };
        (0..n)
            .map(|_| {
                sample_config(
                    &HyperGrid::default(),
                    ModelClass::DeepResEsn(ResidualKind::Cyclic),
                    &TaskSpec::from(TaskId::N30),
                    &settings,
                    &mut rng,
                )
                .unwrap()
            })
            .collect()
    }

    fn trial(config_id: usize, seed: u64, v: Option<f64>) -> TrialResult {
        TrialResult {
            config_id,
            seed,
            val: v,
            test: v.map(|x| x * 2.0),
            wall_time_ms: 1.0,
            failure: v.is_none().then(|| "diverged".to_string()),
        }
    }

    #[test]
    fn statistics_match_direct_computation() {
        let cfgs = configs(2);
        let trials = vec![
            trial(1, 2, Some(0.3)),
            trial(0, 0, Some(0.1)),
            trial(0, 1, None),
            trial(0, 2, Some(0.2)),
            trial(1, 0, None),
            trial(1, 1, None),
        ];
        let t = ResultsTable::from_trials(&cfgs, &trials);
        let r0 = &t.rows[0];
        assert_eq!((r0.successes, r0.failures), (2, 1));
        assert!((r0.val_mean.unwrap() - 0.15).abs() < 1e-15);
        assert!((r0.val_std.unwrap() - 0.05).abs() < 1e-15);
        assert!((r0.test_mean.unwrap() - 0.3).abs() < 1e-15);
        let r1 = &t.rows[1];
        assert_eq!(r1.val_std, Some(0.0));
        assert_eq!(r1.failures, 2);

        let mut shuffled = trials.clone();
        shuffled.reverse();
        assert_eq!(ResultsTable::from_trials(&cfgs, &shuffled), t);
    }

    #[test]
    fn csv_round_trip() {
        let cfgs = configs(3);
        let trials = vec![
            trial(0, 0, Some(1.0 / 3.0)),
            trial(1, 0, None),
            trial(2, 0, Some(1e-17)),
        ];
        let t = ResultsTable::from_trials(&cfgs, &trials);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(ResultsTable::read_csv(&p).unwrap(), t);
    }

    #[test]
    fn empty_table_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_reports(
            dir.path(),
            &ResultsTable::default(),
            None,
            &Artifacts::default(),
        )
        .unwrap();
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("config_id,model"));
        assert_eq!(
            ResultsTable::read_csv(&dir.path().join("results.csv"))
                .unwrap()
                .rows
                .len(),
            0
        );
    }

    #[test]
    fn unwritable_output_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_reports(
            &blocker.join("out"),
            &ResultsTable::default(),
            None,
            &Artifacts::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
