use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use deepresesn::analysis::{layerwise_spectra, multisine, MULTISINE_FREQUENCIES};
use deepresesn::harness::{
    data_stream, emit_reports, load_task, random_search, read_document, run_trials_with_ids,
    trial_stream, write_artifacts, Artifacts, ExperimentConfig, Manifest, ModelSummary,
    ResultsTable, SearchPlan, SearchSpec, TaskSpec,
};
use deepresesn::numerics::RngStream;
use deepresesn::stability::{eigenspectrum_report, Probe, StabilityReport};
use deepresesn::tasks::cache::{write_series_cache, DatasetManifest};
use deepresesn::tasks::{Dataset, TaskId};
use deepresesn::{Error, Result};

#[derive(Parser)]
#[command(
    name = "deepresesn",
    version,
    about = "Deep residual echo state network experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; overrides the one in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic datasets into <out>/data.
    GenerateData {
        /// Tasks to generate; all synthetic tasks when omitted.
        #[arg(long = "task", value_name = "ID")]
        tasks: Vec<TaskId>,
        #[command(flatten)]
        common: Common,
    },
    /// Random search over the grid for every model of a search document.
    Search {
        /// JSON or TOML search document.
        config: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate one experiment config on all of its seeds.
    Run {
        config: PathBuf,
        /// Config id the trial streams are derived from; use the id reported
        /// by `search` to reproduce its numbers.
        #[arg(long, default_value_t = 0)]
        config_id: usize,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Stability and contraction report of a config's reservoir.
    Stability {
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        config_id: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Layer-wise state spectra under a multi-sine drive.
    Spectra {
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalues of each layer's Jacobian block.
    Eigen {
        config: PathBuf,
        /// `origin`, or `random` for a state and input drawn from (-scale, scale).
        #[arg(long, default_value = "random")]
        probe: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Re-render results.md from an output directory's results.csv.
    Report {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenerateData { tasks, common } => generate_data(&tasks, &common),
        Command::Search {
            config,
            budget,
            jobs,
            common,
        } => search(&config, budget, jobs, &common),
        Command::Run {
            config,
            config_id,
            jobs,
            common,
        } => run(&config, config_id, jobs, &common),
        Command::Stability {
            config,
            config_id,
            common,
        } => stability(&config, config_id, &common),
        Command::Spectra {
            config,
            trials,
            steps,
            common,
        } => spectra(&config, trials, steps, &common),
        Command::Eigen {
            config,
            probe,
            scale,
            common,
        } => eigen(&config, &probe, scale, &common),
        Command::Report { out } => report(&out),
    }
}

fn cache_dataset(dir: &Path, task: &TaskSpec, seed: u64, data: &Dataset) -> Result<()> {
    if let (TaskSpec::Synthetic { id }, Dataset::Series(series)) = (task, data) {
        let manifest = DatasetManifest {
            generator: id.name().to_string(),
            parameters: json!({ "task": id.name() }),
            seed,
            split: id.scheme(),
            input_dim: series.series.inputs.cols(),
            target_dim: series.series.targets.cols(),
        };
        write_series_cache(dir, series, &manifest)?;
    }
    Ok(())
}

fn generate_data(tasks: &[TaskId], common: &Common) -> Result<()> {
    let seed = common.seed.unwrap_or(0);
    let master = RngStream::new(seed);
    let list = if tasks.is_empty() {
        TaskId::ALL.to_vec()
    } else {
        tasks.to_vec()
    };
    let dir = common.out.join("data");
    for id in list {
        let task = TaskSpec::from(id);
        let data = load_task(&task, &mut data_stream(&master))?;
        cache_dataset(&dir, &task, seed, &data)?;
        println!("{}", dir.join(format!("{}.csv", id.name())).display());
    }
    Ok(())
}

fn search(path: &Path, budget: Option<usize>, jobs: usize, common: &Common) -> Result<()> {
    let mut spec = SearchSpec::load(path)?;
    if let Some(b) = budget {
        spec.budget = b;
    }
    if let Some(s) = common.seed {
        spec.seed = s;
    }
    let master = RngStream::new(spec.seed);
    let dataset = load_task(&spec.task, &mut data_stream(&master))?;
    cache_dataset(&common.out.join("data"), &spec.task, spec.seed, &dataset)?;

    let mut table = ResultsTable::default();
    let mut summaries = Vec::new();
    let mut artifacts = Artifacts::default();
    for &model in &spec.models {
        let start = Instant::now();
        let plan = SearchPlan {
            model,
            task: spec.task.clone(),
            grid: spec.grid.clone(),
            settings: spec.settings.clone(),
            budget: spec.budget,
        };
        let outcome = random_search(&plan, &dataset, &master, jobs)?;
        let row = outcome.best_row().clone();
        eprintln!(
            "{model}: best config {} val {:?} test {:?} ({:.1}s)",
            outcome.best_id,
            row.val_mean,
            row.test_mean,
            start.elapsed().as_secs_f64()
        );
        let deep = build_for(&outcome.best, &dataset, &master, outcome.best_id)?;
        artifacts
            .stability
            .push((model.to_string(), StabilityReport::compute(&deep)?));
        table.rows.extend(outcome.table.rows);
        summaries.push(ModelSummary {
            model,
            best_id: outcome.best_id,
            best: outcome.best,
            best_row: row,
        });
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: spec.seed,
        budget: spec.budget,
        search: serde_json::to_value(&spec)?,
        models: summaries,
    };
    for p in emit_reports(&common.out, &table, Some(&manifest), &artifacts)? {
        println!("{}", p.display());
    }
    Ok(())
}

/// Reservoir of the first seed of `config`, as drawn during trials.
fn build_for(
    config: &ExperimentConfig,
    dataset: &Dataset,
    master: &RngStream,
    config_id: usize,
) -> Result<deepresesn::reservoir::DeepReservoir> {
    let seed = *config
        .seeds
        .first()
        .ok_or_else(|| Error::InvalidConfig("config has no seeds".into()))?;
    let input_dim = match dataset {
        Dataset::Series(s) => s.series.inputs.cols(),
        Dataset::Sequences(s) => s.channels(),
    };
    config
        .deep_config()?
        .build(input_dim, &mut trial_stream(master, config_id, seed))
}

fn input_dim_of(task: &TaskSpec, master: &RngStream) -> Result<usize> {
    Ok(match load_task(task, &mut data_stream(master))? {
        Dataset::Series(s) => s.series.inputs.cols(),
        Dataset::Sequences(s) => s.channels(),
    })
}

fn run(path: &Path, config_id: usize, jobs: usize, common: &Common) -> Result<()> {
    let config = ExperimentConfig::load(path)?;
    let seed = common.seed.unwrap_or(0);
    let master = RngStream::new(seed);
    let dataset = load_task(&config.task, &mut data_stream(&master))?;
    let trials = run_trials_with_ids([(config_id, &config)], &dataset, &master, jobs)?;
    let mut configs = vec![config.clone(); config_id + 1];
    configs[config_id] = config;
    let mut table = ResultsTable::from_trials(&configs, &trials);
    table.rows.retain(|r| r.config_id == config_id);
    for t in &trials {
        println!("{}", serde_json::to_string(t)?);
    }
    emit_reports(&common.out, &table, None, &Artifacts::default())?;
    Ok(())
}

fn stability(path: &Path, config_id: usize, common: &Common) -> Result<()> {
    let config = ExperimentConfig::load(path)?;
    let master = RngStream::new(common.seed.unwrap_or(0));
    let input_dim = input_dim_of(&config.task, &master)?;
    let seed = config.seeds.first().copied().unwrap_or(0);
    let deep = config
        .deep_config()?
        .build(input_dim, &mut trial_stream(&master, config_id, seed))?;
    let report = StabilityReport::compute(&deep)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let artifacts = Artifacts {
        stability: vec![(config.model.to_string(), report)],
        ..Default::default()
    };
    write_artifacts(&common.out, &artifacts)?;
    Ok(())
}

fn spectra(path: &Path, trials: usize, steps: usize, common: &Common) -> Result<()> {
    let config = ExperimentConfig::load(path)?;
    let master = RngStream::new(common.seed.unwrap_or(0));
    let signal = multisine(steps, &MULTISINE_FREQUENCIES);
    let profile = layerwise_spectra(
        &config.deep_config()?,
        &signal,
        trials,
        0,
        &master.child_named("spectra"),
    )?;
    let high = profile.high_band_fractions()?;
    println!(
        "{}",
        json!({ "model": config.model.to_string(), "high_band_fraction": high })
    );
    let artifacts = Artifacts {
        spectra: vec![(config.model.to_string(), profile)],
        ..Default::default()
    };
    for p in write_artifacts(&common.out, &artifacts)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn eigen(path: &Path, probe: &str, scale: f64, common: &Common) -> Result<()> {
    let config = ExperimentConfig::load(path)?;
    let master = RngStream::new(common.seed.unwrap_or(0));
    let probe = match probe {
        "origin" => Probe::Origin,
        "random" => Probe::Random { scale },
        other => return Err(Error::InvalidInput(format!("unknown probe '{other}'"))),
    };
    let input_dim = input_dim_of(&config.task, &master)?;
    let deep = config
        .deep_config()?
        .build(input_dim, &mut master.child_named("eigen/weights"))?;
    let report = eigenspectrum_report(&deep, probe, &mut master.child_named("eigen/probe"))?;
    let radii: Vec<f64> = report.iter().map(|l| l.max_modulus()).collect();
    println!(
        "{}",
        json!({ "model": config.model.to_string(), "max_modulus": radii })
    );
    let artifacts = Artifacts {
        eigen: vec![(config.model.to_string(), report)],
        ..Default::default()
    };
    for p in write_artifacts(&common.out, &artifacts)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn report(out: &Path) -> Result<()> {
    let table = ResultsTable::read_csv(&out.join("results.csv"))?;
    let manifest_path = out.join("manifest.json");
    let manifest: Option<Manifest> = if manifest_path.exists() {
        Some(read_document(&manifest_path)?)
    } else {
        None
    };
    let written = emit_reports(out, &table, manifest.as_ref(), &Artifacts::default())?;
    print!(
        "{}",
        std::fs::read_to_string(&written[1]).map_err(|e| Error::Io {
            path: written[1].clone(),
            source: e
        })?
    );
    Ok(())
}
