use rayon::prelude::*;
use tracing::warn;

use crate::collision::{CachedValidator, Validator};
use crate::environment::MPProblem;
use crate::path::{Path, PathSource};
use crate::planners::{prm_plan, Budget, PlannerParams};
use crate::seed::rng_for;

/// Shortcut smoothing: drop `p_i` whenever the edge `p_{i-1} -> p_{i+1}` is
/// valid, sweeping until a full pass removes nothing.
pub fn smooth_path<V: Validator>(p: &Path, v: &mut V) -> Path {
    let space = v.space().clone();
    let mut states = p.states().to_vec();
    loop {
        let before = states.len();
        let mut i = 1;
        while i + 1 < states.len() {
            if v.check_edge(&states[i - 1], &states[i + 1]).valid {
                states.remove(i);
            } else {
                i += 1;
            }
        }
        if states.len() == before {
            break;
        }
    }
    let mut out = Path::new(&space, states);
    out.source = p.source;
    out
}

/// Plans one training problem with PRM* and smooths the result.
pub fn build_path(problem: &MPProblem, params: &PlannerParams, budget: &Budget, seed: u64) -> Option<Path> {
    let oracle = problem.env.oracle();
    let mut v = CachedValidator::new(&oracle);
    let mut rng = rng_for(seed, &[problem.env.seed]);
    let r = prm_plan(&mut v, &problem.task.start, &problem.task.goal, params, budget, &mut rng, true);
    r.path.map(|p| smooth_path(&p, &mut v))
}

#[derive(Debug, Clone, Default)]
pub struct BuildReport {
    pub solved: usize,
    pub failed: Vec<PathSource>,
}

/// Solves every training problem (in parallel) and collects the smoothed
/// paths in input order. Failures are logged and skipped.
pub fn build_database(
    problems: &[(MPProblem, PathSource)],
    params: &PlannerParams,
    budget: &Budget,
    seed: u64,
) -> (Vec<Path>, BuildReport) {
    let results: Vec<Option<Path>> = problems
        .par_iter()
        .map(|(prob, src)| {
            build_path(prob, params, budget, crate::seed::derive_seed(seed, &[src.env_seed, src.task_id]))
                .map(|p| p.with_source(*src))
        })
        .collect();
    let mut report = BuildReport::default();
    let mut paths = Vec::new();
    for (r, (_, src)) in results.into_iter().zip(problems) {
        match r {
            Some(p) => {
                report.solved += 1;
                paths.push(p);
            }
            None => {
                warn!(env_seed = src.env_seed, task_id = src.task_id, "training problem unsolved; skipped");
                report.failed.push(*src);
            }
        }
    }
    (paths, report)
}
