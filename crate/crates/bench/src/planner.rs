use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use pdg_core::collision::{CCStats, CachedValidator, ValidityOracle};
use pdg_core::lightning::lightning_plan;
use pdg_core::path::Path;
use pdg_core::pathdb::PathDatabase;
use pdg_core::pdg::{bipdg_plan, pdg_plan, PdgParams};
use pdg_core::planners::{birrt_plan, prm_plan, rrt_plan, Budget, ExploreMethod, PlannerParams};
use pdg_core::seed::rng_for;
use serde::{Deserialize, Serialize};

use crate::dataset::Problem;
use crate::BenchError;

/// Every planner the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerId {
    Rrt,
    Rsg,
    Birrt,
    Birsg,
    Prm,
    Prmstar,
    PdgRrt,
    PdgRsg,
    BipdgRrt,
    BipdgRsg,
    LightningRrt,
    LightningRsg,
}

impl PlannerId {
    pub const ALL: [PlannerId; 12] = [
        PlannerId::Rrt,
        PlannerId::Rsg,
        PlannerId::Birrt,
        PlannerId::Birsg,
        PlannerId::Prm,
        PlannerId::Prmstar,
        PlannerId::PdgRrt,
        PlannerId::PdgRsg,
        PlannerId::BipdgRrt,
        PlannerId::BipdgRsg,
        PlannerId::LightningRrt,
        PlannerId::LightningRsg,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerId::Rrt => "rrt",
            PlannerId::Rsg => "rsg",
            PlannerId::Birrt => "birrt",
            PlannerId::Birsg => "birsg",
            PlannerId::Prm => "prm",
            PlannerId::Prmstar => "prmstar",
            PlannerId::PdgRrt => "pdg-rrt",
            PlannerId::PdgRsg => "pdg-rsg",
            PlannerId::BipdgRrt => "bipdg-rrt",
            PlannerId::BipdgRsg => "bipdg-rsg",
            PlannerId::LightningRrt => "lightning-rrt",
            PlannerId::LightningRsg => "lightning-rsg",
        }
    }

    /// Exploration flavor used by the planner (or its fallback).
    pub fn method(&self) -> ExploreMethod {
        match self {
            PlannerId::Rsg | PlannerId::Birsg | PlannerId::PdgRsg | PlannerId::BipdgRsg | PlannerId::LightningRsg => {
                ExploreMethod::Rsg
            }
            _ => ExploreMethod::Rrt,
        }
    }

    pub fn uses_database(&self) -> bool {
        matches!(
            self,
            PlannerId::PdgRrt
                | PlannerId::PdgRsg
                | PlannerId::BipdgRrt
                | PlannerId::BipdgRsg
                | PlannerId::LightningRrt
                | PlannerId::LightningRsg
        )
    }

    pub fn is_pdg(&self) -> bool {
        matches!(self, PlannerId::PdgRrt | PlannerId::PdgRsg | PlannerId::BipdgRrt | PlannerId::BipdgRsg)
    }
}

impl fmt::Display for PlannerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| BenchError::UnknownPlanner(s.to_string()))
    }
}

/// Tunable parameters of one trial; fields a planner does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrialParams {
    pub p_goal: f64,
    pub tau: f64,
    pub batch: usize,
    pub r_attach: f64,
    pub prm_n: usize,
    pub prm_k: usize,
    pub delta_goal: f64,
    pub delta_value: f64,
    /// Lightning retrieval count.
    pub k: usize,
    /// Edge discretization override; `None` keeps the environment's step.
    pub edge_step: Option<f64>,
}

impl Default for TrialParams {
    fn default() -> Self {
        let p = PlannerParams::default();
        let d = PdgParams::default();
        TrialParams {
            p_goal: p.p_goal,
            tau: p.tau,
            batch: p.batch,
            r_attach: p.r_attach,
            prm_n: p.prm_n,
            prm_k: p.prm_k,
            delta_goal: d.delta_goal,
            delta_value: d.delta_value,
            k: 10,
            edge_step: None,
        }
    }
}

impl TrialParams {
    pub fn planner_params(&self, method: ExploreMethod) -> PlannerParams {
        PlannerParams {
            method,
            p_goal: self.p_goal,
            tau: self.tau,
            batch: self.batch,
            r_attach: self.r_attach,
            prm_n: self.prm_n,
            prm_k: self.prm_k,
        }
    }

    pub fn pdg_params(&self, method: ExploreMethod) -> PdgParams {
        PdgParams {
            delta_goal: self.delta_goal,
            delta_value: self.delta_value,
            explore: self.planner_params(method),
        }
    }

    /// Compact label of the fields that matter for `planner`.
    pub fn label(&self, planner: PlannerId) -> String {
        let mut s = format!("p_goal={} tau={}", self.p_goal, self.tau);
        if planner.method() == ExploreMethod::Rsg {
            s += &format!(" batch={}", self.batch);
        }
        if matches!(
            planner,
            PlannerId::Birrt | PlannerId::Birsg | PlannerId::BipdgRrt | PlannerId::BipdgRsg | PlannerId::LightningRrt | PlannerId::LightningRsg
        ) {
            s += &format!(" r_attach={}", self.r_attach);
        }
        match planner {
            PlannerId::Prm | PlannerId::Prmstar => s = format!("n={} k={}", self.prm_n, self.prm_k),
            p if p.is_pdg() => s += &format!(" delta_goal={} delta_value={}", self.delta_goal, self.delta_value),
            PlannerId::LightningRrt | PlannerId::LightningRsg => s += &format!(" k={}", self.k),
            _ => {}
        }
        if let Some(step) = self.edge_step {
            s += &format!(" step={step}");
        }
        s
    }
}

/// Outcome of one (planner, params, problem, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub planner: PlannerId,
    pub params: String,
    pub env_seed: u64,
    pub task_id: u64,
    pub run_seed: u64,
    pub success: bool,
    pub wall_time_s: f64,
    pub configs_checked: u64,
    pub batch_calls: u64,
    pub edges_checked: u64,
    pub path_length: Option<f64>,
    /// Exploit share of expansions; PDG variants only.
    pub ee_ratio: Option<f64>,
    /// A returned path passed an independent end-to-end check.
    pub revalidated: Option<bool>,
    pub error: Option<String>,
}

impl TrialRecord {
    /// Compares everything except wall time.
    pub fn same_outcome(&self, other: &TrialRecord) -> bool {
        let mut a = self.clone();
        a.wall_time_s = other.wall_time_s;
        a == *other
    }
}

struct Outcome {
    path: Option<Path>,
    stats: CCStats,
    ee_ratio: Option<f64>,
}

/// Runs one trial on a fresh oracle. `db` is required by database planners.
/// Panics inside the planner become failure records.
pub fn run_trial(
    problem: &Problem,
    planner: PlannerId,
    params: &TrialParams,
    db: Option<&PathDatabase>,
    run_seed: u64,
    budget: &Budget,
) -> TrialRecord {
    let step = params.edge_step.unwrap_or(problem.mp.env.step);
    run_trial_on(&problem.mp.env.oracle_with_step(step), problem, planner, params, db, run_seed, budget)
}

/// [`run_trial`] against a caller-supplied oracle, which should be fresh.
pub fn run_trial_on(
    oracle: &ValidityOracle,
    problem: &Problem,
    planner: PlannerId,
    params: &TrialParams,
    db: Option<&PathDatabase>,
    run_seed: u64,
    budget: &Budget,
) -> TrialRecord {
    let (s, t) = (&problem.mp.task.start, &problem.mp.task.goal);
    let step = oracle.step();
    let mut record = TrialRecord {
        planner,
        params: params.label(planner),
        env_seed: problem.source.env_seed,
        task_id: problem.source.task_id,
        run_seed,
        success: false,
        wall_time_s: 0.0,
        configs_checked: 0,
        batch_calls: 0,
        edges_checked: 0,
        path_length: None,
        ee_ratio: None,
        revalidated: None,
        error: None,
    };
    if planner.uses_database() && db.is_none() {
        record.error = Some(format!("{planner} needs a path database"));
        return record;
    }
    let method = planner.method();
    let started = Instant::now();
    let run = catch_unwind(AssertUnwindSafe(|| {
        let mut v = CachedValidator::new(oracle);
        let mut rng = rng_for(run_seed, &[]);
        let pp = params.planner_params(method);
        let plain = |r: pdg_core::planners::PlanResult| Outcome {
            path: r.path,
            stats: r.stats,
            ee_ratio: None,
        };
        match planner {
            PlannerId::Rrt | PlannerId::Rsg => plain(rrt_plan(&mut v, s, t, &pp, budget, &mut rng)),
            PlannerId::Birrt | PlannerId::Birsg => plain(birrt_plan(&mut v, s, t, &pp, budget, &mut rng)),
            PlannerId::Prm => plain(prm_plan(&mut v, s, t, &pp, budget, &mut rng, false)),
            PlannerId::Prmstar => plain(prm_plan(&mut v, s, t, &pp, budget, &mut rng, true)),
            PlannerId::PdgRrt | PlannerId::PdgRsg | PlannerId::BipdgRrt | PlannerId::BipdgRsg => {
                let pdg = params.pdg_params(method);
                let db = db.unwrap();
                let r = if matches!(planner, PlannerId::PdgRrt | PlannerId::PdgRsg) {
                    pdg_plan(&mut v, s, t, db, &pdg, budget, &mut rng)
                } else {
                    bipdg_plan(&mut v, s, t, db, &pdg, budget, &mut rng)
                };
                Outcome {
                    ee_ratio: Some(r.ee_ratio()),
                    path: r.path,
                    stats: r.stats,
                }
            }
            PlannerId::LightningRrt | PlannerId::LightningRsg => {
                let r = lightning_plan(&mut v, s, t, db.unwrap(), params.k, &pp, budget, &mut rng);
                Outcome {
                    path: r.path,
                    stats: r.stats,
                    ee_ratio: None,
                }
            }
        }
    }));
    record.wall_time_s = started.elapsed().as_secs_f64();
    match run {
        Ok(out) => {
            record.configs_checked = out.stats.configs_checked;
            record.batch_calls = out.stats.batch_calls;
            record.edges_checked = out.stats.edges_checked;
            record.ee_ratio = out.ee_ratio;
            if let Some(p) = out.path {
                record.success = true;
                record.path_length = Some(p.length());
                record.revalidated = Some(revalidate(problem, &p, step));
            }
        }
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "planner panicked".into());
            record.error = Some(msg);
        }
    }
    record
}

/// End-to-end check of a returned path with a fresh oracle: endpoints match
/// the task and every state and edge is valid.
pub fn revalidate(problem: &Problem, path: &Path, step: f64) -> bool {
    let (env, task) = (&problem.mp.env, &problem.mp.task);
    let oracle = env.oracle_with_step(step);
    path.start() == &task.start && path.end() == &task.goal && oracle.path_is_valid(path.states())
}
