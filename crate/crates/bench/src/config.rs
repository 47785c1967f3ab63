use std::fs;
use std::path::Path as FsPath;
use std::time::Duration;

use pdg_core::environment::DistributionId;
use pdg_core::pathdb::CurationSpec;
use pdg_core::planners::Budget;
use serde::{Deserialize, Serialize};

use crate::planner::{PlannerId, TrialParams};
use crate::BenchError;

pub const CONFIG_VERSION: u32 = 1;

/// Metric used to rank runs and grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Wall-clock search time.
    Time,
    /// Configurations collision checked.
    Configs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub distribution: DistributionId,
    pub n_passages: Option<usize>,
    pub n_train: usize,
    pub n_validate: usize,
    pub n_test: usize,
    pub tasks_per_env: usize,
    #[serde(default = "one")]
    pub eval_tasks_per_env: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub max_configs: Option<u64>,
    pub max_time_s: Option<f64>,
}

impl BudgetConfig {
    pub fn budget(&self) -> Budget {
        Budget {
            max_configs: self.max_configs,
            max_time: self.max_time_s.map(Duration::from_secs_f64),
            ..Default::default()
        }
    }
}

/// How training paths are planned and which curated databases are tried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatabaseConfig {
    #[serde(default)]
    pub build: TrialParams,
    pub build_budget: BudgetConfig,
    /// Resampling step for interpolated candidates.
    pub resample_step: f64,
    pub candidates: Vec<CurationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    #[serde(default = "default_trials")]
    pub trials_per_cell: usize,
    pub metric: Metric,
}

fn default_trials() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub runs_per_problem: usize,
    /// Worst runs dropped per statistic.
    pub drop_worst: usize,
}

/// Per-field candidate lists; the grid is their cartesian product and an
/// empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamGrid {
    pub base: TrialParams,
    pub p_goal: Vec<f64>,
    pub tau: Vec<f64>,
    pub batch: Vec<usize>,
    pub r_attach: Vec<f64>,
    pub prm_n: Vec<usize>,
    pub prm_k: Vec<usize>,
    /// Sets `delta_goal` and `delta_value` to a multiple of `tau`.
    pub delta_scale: Vec<f64>,
    pub k: Vec<usize>,
    /// Candidate database indices; empty means all candidates.
    pub db: Vec<usize>,
}

/// One grid point: parameters plus the database it runs against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub params: TrialParams,
    pub db: Option<usize>,
}

impl ParamGrid {
    pub fn cells(&self, planner: PlannerId, n_dbs: usize) -> Vec<Cell> {
        fn axis<T: Clone>(v: &[T], base: T) -> Vec<T> {
            if v.is_empty() {
                vec![base]
            } else {
                v.to_vec()
            }
        }
        let b = &self.base;
        let dbs: Vec<Option<usize>> = if !planner.uses_database() {
            vec![None]
        } else if self.db.is_empty() {
            (0..n_dbs).map(Some).collect()
        } else {
            self.db.iter().map(|&i| Some(i)).collect()
        };
        let mut out = Vec::new();
        for &p_goal in &axis(&self.p_goal, b.p_goal) {
            for &tau in &axis(&self.tau, b.tau) {
                for &batch in &axis(&self.batch, b.batch) {
                    for &r_attach in &axis(&self.r_attach, b.r_attach) {
                        for &prm_n in &axis(&self.prm_n, b.prm_n) {
                            for &prm_k in &axis(&self.prm_k, b.prm_k) {
                                for &scale in &axis(&self.delta_scale, f64::NAN) {
                                    for &k in &axis(&self.k, b.k) {
                                        for &db in &dbs {
                                            let mut params = TrialParams {
                                                p_goal,
                                                tau,
                                                batch,
                                                r_attach,
                                                prm_n,
                                                prm_k,
                                                k,
                                                ..b.clone()
                                            };
                                            if !scale.is_nan() {
                                                params.delta_goal = scale * tau;
                                                params.delta_value = scale * tau;
                                            }
                                            out.push(Cell { params, db });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub id: PlannerId,
    #[serde(default)]
    pub grid: ParamGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub planner: PlannerId,
    /// Database sizes, in paths.
    pub sizes: Vec<usize>,
    pub interpolation: pdg_core::pathdb::Interpolation,
    /// Independent subsets drawn per size.
    pub draws: usize,
    pub runs_per_problem: usize,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub version: u32,
    pub name: String,
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub budget: BudgetConfig,
    pub database: DatabaseConfig,
    pub tuning: TuningConfig,
    pub eval: EvalConfig,
    pub planners: Vec<PlannerConfig>,
    pub sweep: Option<SweepConfig>,
}

impl Experiment {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let e: Experiment = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        if e.version != CONFIG_VERSION {
            return Err(BenchError::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                e.version
            )));
        }
        for c in &e.database.candidates {
            c.validate()?;
        }
        Ok(e)
    }

    pub fn load(path: &FsPath) -> Result<Self, BenchError> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("experiment config serializes")
    }
}
