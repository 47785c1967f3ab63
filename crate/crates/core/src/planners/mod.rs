//! Plan-from-scratch planners: RRT, RSG, their bidirectional forms, PRM and
//! PRM*. They double as exploration and repair subroutines for the
//! database planners.

mod birrt;
mod prm;
mod rrt;
mod tree;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::collision::CCStats;
use crate::error::{Error, Result};
use crate::path::Path;

pub use birrt::{birrt_plan, connect_trees};
pub use prm::{dijkstra, prm_plan, prm_star_k, Roadmap};
pub use rrt::{explore_step, rrt_extend, rrt_plan, rsg_extend, Extend};
pub use tree::{LinearScan, NearestIndex, Node, SearchTree};

/// Tree-expansion strategy shared by RRT-style planners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploreMethod {
    Rrt,
    Rsg,
}

impl std::str::FromStr for ExploreMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rrt" => Ok(ExploreMethod::Rrt),
            "rsg" => Ok(ExploreMethod::Rsg),
            _ => Err(Error::Contract(format!("unknown exploration method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub method: ExploreMethod,
    /// Probability of sampling the goal (or opposite root) instead of a uniform sample.
    pub p_goal: f64,
    /// Maximum extension distance.
    pub tau: f64,
    /// RSG candidate batch size.
    pub batch: usize,
    /// Bidirectional connection radius.
    pub r_attach: f64,
    /// PRM samples per round.
    pub prm_n: usize,
    /// PRM neighbor count.
    pub prm_k: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            method: ExploreMethod::Rrt,
            p_goal: 0.02,
            tau: 6.0,
            batch: 32,
            r_attach: 5.0,
            prm_n: 512,
            prm_k: 16,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.p_goal)
            && self.tau > 0.0
            && self.r_attach > 0.0
            && self.batch >= 1
            && self.prm_n >= 1
            && self.prm_k >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid planner parameters {self:?}")))
        }
    }

    /// Candidates per extension: 1 for RRT, `batch` for RSG.
    pub fn candidates(&self) -> usize {
        match self.method {
            ExploreMethod::Rrt => 1,
            ExploreMethod::Rsg => self.batch,
        }
    }
}

/// Stopping limits; whichever is hit first ends the run.
#[derive(Debug, Clone, Default)]
pub struct Budget {
    pub max_configs: Option<u64>,
    pub max_time: Option<Duration>,
    pub max_iterations: Option<u64>,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Budget {
    pub fn configs(n: u64) -> Self {
        Budget {
            max_configs: Some(n),
            ..Default::default()
        }
    }

    pub fn with_time(mut self, t: Duration) -> Self {
        self.max_time = Some(t);
        self
    }

    pub fn with_iterations(mut self, n: u64) -> Self {
        self.max_iterations = Some(n);
        self
    }

    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn start(&self, stats: CCStats) -> BudgetClock {
        BudgetClock {
            budget: self.clone(),
            started: Instant::now(),
            base: stats,
        }
    }

    /// The part of this budget left after `used` has been spent.
    pub fn remaining(&self, used: CCStats, elapsed: Duration) -> Budget {
        Budget {
            max_configs: self
                .max_configs
                .map(|m| m.saturating_sub(used.configs_checked)),
            max_time: self.max_time.map(|t| t.saturating_sub(elapsed)),
            max_iterations: self.max_iterations,
            cancel: self.cancel.clone(),
        }
    }
}

/// A running budget measured from a starting stats snapshot.
#[derive(Debug, Clone)]
pub struct BudgetClock {
    budget: Budget,
    started: Instant,
    base: CCStats,
}

impl BudgetClock {
    pub fn exhausted(&self, stats: CCStats, iterations: u64) -> bool {
        let b = &self.budget;
        b.max_configs
            .is_some_and(|m| stats.configs_checked - self.base.configs_checked >= m)
            || b.max_iterations.is_some_and(|m| iterations >= m)
            || b.max_time.is_some_and(|t| self.started.elapsed() >= t)
            || b.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed))
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn used(&self, stats: CCStats) -> CCStats {
        stats.since(&self.base)
    }

    pub fn remaining(&self, stats: CCStats) -> Budget {
        self.budget.remaining(self.used(stats), self.elapsed())
    }
}

/// Outcome of a plan-from-scratch run. `path` is `None` when the budget ran out.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub path: Option<Path>,
    /// Cost spent by this run.
    pub stats: CCStats,
    pub iterations: u64,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.path.is_some()
    }
}
