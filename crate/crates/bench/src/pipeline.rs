use std::fs;
use std::path::{Path as FsPath, PathBuf};

use pdg_core::path::Path;
use pdg_core::pathdb::{build_database, curate, BuildReport, CurationSpec, PathDatabase, Strategy};
use pdg_core::seed::{derive_seed, rng_for, str_key};
use serde::{Deserialize, Serialize};

use crate::config::{Cell, Experiment, SweepConfig};
use crate::dataset::{make_dataset, Dataset, Problem, Split};
use crate::planner::{PlannerId, TrialRecord};
use crate::report::{emit_report, write_records_csv, write_xy, ReportFiles};
use crate::stats::median;
use crate::tuning::{grid_search, run_trials, GridResult};
use crate::BenchError;

const BUILD: u64 = 1;
const CURATE: u64 = 2;
const TUNE: u64 = 3;
const TEST: u64 = 4;
const SWEEP: u64 = 5;

/// Dataset, training paths and candidate databases of an experiment.
pub struct Prepared {
    pub dataset: Dataset,
    pub train_paths: Vec<Path>,
    pub build: BuildReport,
    pub dbs: Vec<PathDatabase>,
    pub db_names: Vec<String>,
    pub validate: Vec<Problem>,
    pub test: Vec<Problem>,
}

impl Prepared {
    pub fn space(&self) -> &pdg_core::space::SpaceSpec {
        &self.validate.first().or(self.test.first()).expect("no problems").mp.env.space
    }
}

pub fn make_experiment_dataset(exp: &Experiment) -> Dataset {
    let d = &exp.dataset;
    make_dataset(
        d.distribution,
        d.n_passages,
        d.n_train,
        d.n_validate,
        d.n_test,
        d.tasks_per_env,
        d.eval_tasks_per_env,
        exp.seed,
    )
}

fn problems(dataset: &Dataset, split: Split) -> Vec<Problem> {
    let (p, errors) = dataset.problems(split);
    for (seed, e) in errors {
        tracing::warn!(env_seed = seed, ?split, "task sampling failed: {e}");
    }
    p
}

fn candidate_name(spec: &CurationSpec, draw: usize) -> String {
    let interp = match spec.interpolation {
        pdg_core::pathdb::Interpolation::Interpolated => "interp",
        pdg_core::pathdb::Interpolation::Uninterpolated => "raw",
    };
    match spec.strategy {
        Strategy::RandomSubset { fraction, .. } => format!("random-{fraction}-{interp}-{draw}"),
        Strategy::DtwCluster { threshold, m, .. } => format!("dtw-{threshold}-m{m}-{interp}-{draw}"),
    }
}

/// Builds the training database and every curated candidate.
pub fn prepare(exp: &Experiment) -> Result<Prepared, BenchError> {
    let dataset = make_experiment_dataset(exp);
    let train = problems(&dataset, Split::Train);
    let pairs: Vec<_> = train.iter().map(|p| (p.mp.clone(), p.source)).collect();
    let build_params = exp.database.build.planner_params(pdg_core::planners::ExploreMethod::Rrt);
    let (train_paths, build) = build_database(
        &pairs,
        &build_params,
        &exp.database.build_budget.budget(),
        derive_seed(exp.seed, &[BUILD]),
    );
    tracing::info!(solved = build.solved, failed = build.failed.len(), "training database built");
    let validate = problems(&dataset, Split::Validate);
    let test = problems(&dataset, Split::Test);
    let space = train
        .first()
        .map(|p| p.mp.env.space.clone())
        .ok_or_else(|| BenchError::Contract("no training problems".into()))?;
    let mut dbs = Vec::new();
    let mut db_names = Vec::new();
    if !train_paths.is_empty() {
        for (i, spec) in exp.database.candidates.iter().enumerate() {
            let mut rng = rng_for(exp.seed, &[CURATE, i as u64]);
            let drawn = curate(&space, &train_paths, spec, exp.database.resample_step, &mut rng)?;
            for (j, db) in drawn.into_iter().enumerate() {
                db_names.push(candidate_name(spec, j));
                dbs.push(db);
            }
        }
    }
    Ok(Prepared {
        dataset,
        train_paths,
        build,
        dbs,
        db_names,
        validate,
        test,
    })
}

/// Grid search of every configured planner on the validation split.
pub fn tune(exp: &Experiment, prep: &Prepared) -> Result<Vec<GridResult>, BenchError> {
    let budget = exp.budget.budget();
    exp.planners
        .iter()
        .map(|pc| {
            let cells = pc.grid.cells(pc.id, prep.dbs.len());
            grid_search(
                &prep.validate,
                pc.id,
                cells,
                &prep.dbs,
                exp.tuning.trials_per_cell,
                derive_seed(exp.seed, &[TUNE]),
                &budget,
                exp.tuning.metric,
            )
        })
        .collect()
}

/// Runs each tuned planner on the test split.
pub fn evaluate(exp: &Experiment, prep: &Prepared, tuned: &[(PlannerId, Cell)]) -> Vec<TrialRecord> {
    let budget = exp.budget.budget();
    tuned
        .iter()
        .flat_map(|(p, cell)| {
            run_trials(
                &prep.test,
                *p,
                cell,
                &prep.dbs,
                exp.eval.runs_per_problem,
                derive_seed(exp.seed, &[TEST]),
                &budget,
            )
        })
        .collect()
}

/// One database size of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub size: usize,
    pub trials: usize,
    pub successes: usize,
    pub median_time_s: f64,
    pub median_configs: f64,
    pub mean_ee_ratio: f64,
}

/// Runs `base` against random databases of each configured size on the
/// validation split.
pub fn sweep_dbsize(
    exp: &Experiment,
    prep: &Prepared,
    sweep: &SweepConfig,
    base: &Cell,
) -> Result<Vec<SweepPoint>, BenchError> {
    let n = prep.train_paths.len();
    let budget = exp.budget.budget();
    let mut out = Vec::new();
    for &size in &sweep.sizes {
        if size == 0 || size > n {
            return Err(BenchError::Contract(format!("sweep size {size} outside 1..={n}")));
        }
        let spec = CurationSpec {
            strategy: Strategy::RandomSubset {
                fraction: size as f64 / n as f64,
                k: sweep.draws,
            },
            interpolation: sweep.interpolation,
        };
        let mut rng = rng_for(exp.seed, &[SWEEP, size as u64]);
        let dbs = curate(prep.space(), &prep.train_paths, &spec, exp.database.resample_step, &mut rng)?;
        let mut recs = Vec::new();
        for i in 0..dbs.len() {
            let cell = Cell {
                params: base.params.clone(),
                db: Some(i),
            };
            recs.extend(run_trials(
                &prep.validate,
                sweep.planner,
                &cell,
                &dbs,
                sweep.runs_per_problem,
                derive_seed(exp.seed, &[SWEEP, i as u64]),
                &budget,
            ));
        }
        let t: Vec<f64> = recs.iter().map(|r| r.wall_time_s).collect();
        let c: Vec<f64> = recs.iter().map(|r| r.configs_checked as f64).collect();
        let ee: Vec<f64> = recs.iter().filter_map(|r| r.ee_ratio).collect();
        out.push(SweepPoint {
            size,
            trials: recs.len(),
            successes: recs.iter().filter(|r| r.success).count(),
            median_time_s: median(&t),
            median_configs: median(&c),
            mean_ee_ratio: ee.iter().sum::<f64>() / ee.len().max(1) as f64,
        });
        tracing::info!(size, "sweep point done");
    }
    Ok(out)
}

/// Everything an experiment run produces.
pub struct ExperimentOutput {
    pub prepared: Prepared,
    pub grids: Vec<GridResult>,
    pub tuned: Vec<(PlannerId, Cell)>,
    pub records: Vec<TrialRecord>,
    pub report: Option<ReportFiles>,
}

/// Identifier of a run directory: config name plus seed.
pub fn run_id(exp: &Experiment) -> String {
    format!("{}-{:016x}", exp.name, derive_seed(exp.seed, &[str_key(&exp.name)]))
}

pub fn run_dir(root: &FsPath, exp: &Experiment) -> PathBuf {
    root.join(run_id(exp))
}

/// Dataset, database, tuning and test evaluation. With `out`, every
/// artifact is written below it.
pub fn run_experiment(exp: &Experiment, out: Option<&FsPath>) -> Result<ExperimentOutput, BenchError> {
    let prepared = prepare(exp)?;
    let grids = tune(exp, &prepared)?;
    let tuned: Vec<(PlannerId, Cell)> = grids.iter().map(|g| (g.planner, g.best_cell().clone())).collect();
    let records = evaluate(exp, &prepared, &tuned);
    let mut report = None;
    if let Some(dir) = out {
        write_artifacts(dir, exp, &prepared, &grids, &tuned)?;
        write_records_csv(&dir.join("records.csv"), &records)?;
        report = Some(emit_report(&dir.join("report"), exp.dataset.distribution.name(), &records, exp.eval.drop_worst)?);
    }
    Ok(ExperimentOutput {
        prepared,
        grids,
        tuned,
        records,
        report,
    })
}

/// Config copy, dataset, environments, databases and tuning tables.
pub fn write_artifacts(
    dir: &FsPath,
    exp: &Experiment,
    prep: &Prepared,
    grids: &[GridResult],
    tuned: &[(PlannerId, Cell)],
) -> Result<(), BenchError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), exp.to_toml())?;
    prep.dataset.materialize(dir)?;
    write_databases(dir, exp, prep)?;
    for g in grids {
        let path = dir.join("tuning").join(format!("{}.csv", g.planner));
        fs::create_dir_all(path.parent().unwrap())?;
        let mut w = csv::Writer::from_path(&path)?;
        for row in &g.table {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    fs::write(dir.join("tuned.json"), serde_json::to_string_pretty(tuned)?)?;
    Ok(())
}

pub fn write_databases(dir: &FsPath, exp: &Experiment, prep: &Prepared) -> Result<(), BenchError> {
    let root = dir.join("db");
    let dist = exp.dataset.distribution.name();
    if !prep.train_paths.is_empty() {
        let full = PathDatabase::new(prep.space().clone(), prep.train_paths.clone());
        full.save(&PathDatabase::file_path(&root, dist, "train"))?;
    }
    for (db, name) in prep.dbs.iter().zip(&prep.db_names) {
        db.save(&PathDatabase::file_path(&root, dist, name))?;
    }
    Ok(())
}

/// Writes sweep curves as `x,y` files.
pub fn write_sweep(dir: &FsPath, points: &[SweepPoint]) -> Result<(), BenchError> {
    let xs = |f: fn(&SweepPoint) -> f64| points.iter().map(|p| (p.size as f64, f(p))).collect::<Vec<_>>();
    write_xy(&dir.join("dbsize_time.csv"), "db_size", "median_time_s", &xs(|p| p.median_time_s))?;
    write_xy(&dir.join("dbsize_configs.csv"), "db_size", "median_configs", &xs(|p| p.median_configs))?;
    write_xy(&dir.join("dbsize_ee.csv"), "db_size", "mean_ee_ratio", &xs(|p| p.mean_ee_ratio))?;
    fs::write(dir.join("dbsize.json"), serde_json::to_string_pretty(points)?)?;
    Ok(())
}
