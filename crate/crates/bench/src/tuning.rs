use pdg_core::pathdb::PathDatabase;
use pdg_core::planners::Budget;
use pdg_core::seed::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, Metric};
use crate::dataset::Problem;
use crate::planner::{run_trial, PlannerId, TrialRecord};
use crate::stats::median;
use crate::BenchError;

/// Seed of one trial. Planners and grid cells share seeds so that
/// comparisons are paired.
pub fn trial_seed(seed: u64, problem: &Problem, trial: usize) -> u64 {
    derive_seed(seed, &[problem.source.env_seed, problem.source.task_id, trial as u64])
}

/// Runs every (problem, trial) pair on the worker pool; output order is
/// problem-major and independent of scheduling.
pub fn run_trials(
    problems: &[Problem],
    planner: PlannerId,
    cell: &Cell,
    dbs: &[PathDatabase],
    trials: usize,
    seed: u64,
    budget: &Budget,
) -> Vec<TrialRecord> {
    let db = cell.db.map(|i| &dbs[i]);
    let jobs: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    jobs.par_iter()
        .map(|&(p, t)| {
            let pr = &problems[p];
            run_trial(pr, planner, &cell.params, db, trial_seed(seed, pr, t), budget)
        })
        .collect()
}

pub fn metric_value(r: &TrialRecord, metric: Metric) -> f64 {
    match metric {
        Metric::Time => r.wall_time_s,
        Metric::Configs => r.configs_checked as f64,
    }
}

/// Aggregate performance of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub params: String,
    pub db: Option<usize>,
    pub trials: usize,
    pub successes: usize,
    pub mean_metric: f64,
    pub median_configs: f64,
    pub median_time_s: f64,
}

impl CellResult {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    pub fn from_records(index: usize, cell: &Cell, planner: PlannerId, recs: &[TrialRecord], metric: Metric) -> Self {
        let n = recs.len();
        let m: Vec<f64> = recs.iter().map(|r| metric_value(r, metric)).collect();
        let cc: Vec<f64> = recs.iter().map(|r| r.configs_checked as f64).collect();
        let t: Vec<f64> = recs.iter().map(|r| r.wall_time_s).collect();
        CellResult {
            index,
            params: cell.params.label(planner),
            db: cell.db,
            trials: n,
            successes: recs.iter().filter(|r| r.success).count(),
            mean_metric: m.iter().sum::<f64>() / n.max(1) as f64,
            median_configs: if n > 0 { median(&cc) } else { f64::NAN },
            median_time_s: if n > 0 { median(&t) } else { f64::NAN },
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub planner: PlannerId,
    pub cells: Vec<Cell>,
    pub table: Vec<CellResult>,
    pub best: usize,
    pub records: Vec<TrialRecord>,
}

impl GridResult {
    pub fn best_cell(&self) -> &Cell {
        &self.cells[self.best]
    }
}

/// Best cell: lowest mean metric among cells that solved every trial, else
/// the highest success rate (then lowest mean metric). Ties keep the
/// earlier cell.
pub fn pick_best(table: &[CellResult]) -> usize {
    let full: Vec<&CellResult> = table.iter().filter(|c| c.successes == c.trials).collect();
    let pool: Vec<&CellResult> = if full.is_empty() {
        let top = table.iter().map(|c| c.success_rate()).fold(f64::NEG_INFINITY, f64::max);
        table.iter().filter(|c| c.success_rate() == top).collect()
    } else {
        full
    };
    pool.iter()
        .fold(None::<&CellResult>, |best, c| match best {
            Some(b) if b.mean_metric <= c.mean_metric => Some(b),
            _ => Some(c),
        })
        .map(|c| c.index)
        .unwrap()
}

/// Evaluates every cell on `problems` with `trials` runs per problem.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    problems: &[Problem],
    planner: PlannerId,
    cells: Vec<Cell>,
    dbs: &[PathDatabase],
    trials: usize,
    seed: u64,
    budget: &Budget,
    metric: Metric,
) -> Result<GridResult, BenchError> {
    if cells.is_empty() {
        return Err(BenchError::Contract("empty parameter grid".into()));
    }
    if problems.is_empty() {
        return Err(BenchError::Contract("no validation problems".into()));
    }
    let mut table = Vec::with_capacity(cells.len());
    let mut records = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let recs = run_trials(problems, planner, cell, dbs, trials, seed, budget);
        table.push(CellResult::from_records(i, cell, planner, &recs, metric));
        records.extend(recs);
    }
    let best = pick_best(&table);
    tracing::info!(%planner, best = %table[best].params, db = ?table[best].db, "tuned");
    Ok(GridResult {
        planner,
        cells,
        table,
        best,
        records,
    })
}
