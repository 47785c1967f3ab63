//! Lightning retrieve-and-repair baseline: fetch the stored paths whose
//! endpoints best match the task, keep the one with the fewest collisions,
//! and patch its broken stretches with BiRRT.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::collision::{CCStats, CachedValidator, Validator, ValidityOracle};
use crate::path::Path;
use crate::pathdb::PathDatabase;
use crate::planners::{birrt_plan, Budget, PlannerParams};
use crate::seed::rng_for;
use crate::space::Configuration;

/// Ids of the `k` paths whose (first, last) states are closest to
/// (`start`, `goal`) under `d(s,s') + d(t,t')`; ties go to the lower id.
pub fn query_k_nearest(db: &PathDatabase, start: &Configuration, goal: &Configuration, k: usize) -> Vec<usize> {
    assert!(k >= 1, "contract violation: k must be at least 1");
    let space = db.space();
    let mut scored: Vec<(f64, usize)> = db
        .paths()
        .iter()
        .enumerate()
        .map(|(i, p)| (space.distance(start, p.start()) + space.distance(goal, p.end()), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Full validation result of one candidate path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCheck {
    pub states: Vec<bool>,
    /// `edges[i]` covers `(p_i, p_{i+1})`.
    pub edges: Vec<bool>,
}

impl PathCheck {
    pub fn violations(&self) -> usize {
        self.states.iter().chain(&self.edges).filter(|ok| !**ok).count()
    }
}

/// Validates every state and every edge of all candidates (one batch each)
/// and returns the index of the path with the fewest violations.
pub fn select_best<V: Validator>(candidates: &[&Path], v: &mut V) -> (usize, Vec<PathCheck>) {
    assert!(!candidates.is_empty(), "contract violation: no candidate paths");
    let states: Vec<Configuration> = candidates.iter().flat_map(|p| p.states().iter().cloned()).collect();
    let state_ok = v.check_configs(&states);
    let edges: Vec<_> = candidates
        .iter()
        .flat_map(|p| p.states().windows(2).map(|w| (&w[0], &w[1])))
        .collect();
    let edge_ok: Vec<bool> = v.check_edges(&edges).into_iter().map(|o| o.valid).collect();
    let mut checks = Vec::with_capacity(candidates.len());
    let (mut si, mut ei) = (0, 0);
    for p in candidates {
        let n = p.len();
        checks.push(PathCheck {
            states: state_ok[si..si + n].to_vec(),
            edges: edge_ok[ei..ei + n - 1].to_vec(),
        });
        si += n;
        ei += n - 1;
    }
    let best = (0..checks.len())
        .min_by_key(|&i| (checks[i].violations(), i))
        .unwrap();
    (best, checks)
}

/// Maximal runs of valid states joined by valid edges, as inclusive index ranges.
pub fn valid_segments(check: &PathCheck) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < check.states.len() {
        if !check.states[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < check.states.len() && check.edges[j] && check.states[j + 1] {
            j += 1;
        }
        out.push((i, j));
        i = j + 1;
    }
    out
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub path: Option<Path>,
    /// BiRRT invocations made.
    pub birrt_calls: usize,
    /// CC spent inside those invocations.
    pub birrt_stats: CCStats,
}

/// Rebuilds a start-to-goal path from the valid segments of `path`.
///
/// The start and goal join their neighboring segment by a straight edge
/// when it is valid; every other gap is bridged by BiRRT.
#[allow(clippy::too_many_arguments)]
pub fn repair<V: Validator, R: Rng + ?Sized>(
    path: &Path,
    check: &PathCheck,
    start: &Configuration,
    goal: &Configuration,
    params: &PlannerParams,
    budget: &Budget,
    v: &mut V,
    rng: &mut R,
) -> RepairOutcome {
    let clock = budget.start(v.stats());
    let space = v.space().clone();
    let segments = valid_segments(check);
    // anchors: start, each valid segment, goal
    let mut pieces: Vec<Vec<Configuration>> = vec![vec![start.clone()]];
    for &(a, b) in &segments {
        pieces.push(path.states()[a..=b].to_vec());
    }
    pieces.push(vec![goal.clone()]);
    let last = pieces.len() - 1;

    let mut out = pieces[0].clone();
    let mut birrt_calls = 0;
    let mut birrt_stats = CCStats::default();
    for (i, piece) in pieces.into_iter().enumerate().skip(1) {
        let from = out.last().unwrap().clone();
        let to = piece[0].clone();
        let endpoint_gap = i == 1 || i == last;
        if from != to {
            let straight = endpoint_gap && v.check_edge(&from, &to).valid;
            if !straight {
                birrt_calls += 1;
                let r = birrt_plan(v, &from, &to, params, &clock.remaining(v.stats()), rng);
                birrt_stats = birrt_stats + r.stats;
                let Some(bridge) = r.path else {
                    return RepairOutcome {
                        path: None,
                        birrt_calls,
                        birrt_stats,
                    };
                };
                out.extend(bridge.into_states().into_iter().skip(1));
                out.pop();
            }
        }
        out.extend(piece);
    }
    RepairOutcome {
        path: Some(Path::new(&space, out)),
        birrt_calls,
        birrt_stats,
    }
}

#[derive(Debug, Clone)]
pub struct LightningReport {
    pub path: Option<Path>,
    pub stats: CCStats,
    pub wall_time: Duration,
    pub retrieved: Vec<usize>,
    pub selected: Option<usize>,
    pub violations: usize,
    pub birrt_calls: usize,
    /// CC spent on retrieval-time validation alone.
    pub select_stats: CCStats,
    /// CC spent inside BiRRT sub-calls.
    pub repair_stats: CCStats,
}

impl LightningReport {
    pub fn solved(&self) -> bool {
        self.path.is_some()
    }
}

/// Retrieve, validate and repair. An empty database falls back to BiRRT on
/// the whole task.
#[allow(clippy::too_many_arguments)]
pub fn lightning_plan<V: Validator, R: Rng + ?Sized>(
    v: &mut V,
    start: &Configuration,
    goal: &Configuration,
    db: &PathDatabase,
    k: usize,
    params: &PlannerParams,
    budget: &Budget,
    rng: &mut R,
) -> LightningReport {
    let started = Instant::now();
    let clock = budget.start(v.stats());
    if db.is_empty() {
        let r = birrt_plan(v, start, goal, params, budget, rng);
        return LightningReport {
            path: r.path,
            stats: clock.used(v.stats()),
            wall_time: started.elapsed(),
            retrieved: Vec::new(),
            selected: None,
            violations: 0,
            birrt_calls: 1,
            select_stats: CCStats::default(),
            repair_stats: clock.used(v.stats()),
        };
    }
    let retrieved = query_k_nearest(db, start, goal, k);
    if clock.exhausted(v.stats(), 0) {
        return LightningReport {
            path: None,
            stats: CCStats::default(),
            wall_time: started.elapsed(),
            retrieved,
            selected: None,
            violations: 0,
            birrt_calls: 0,
            select_stats: CCStats::default(),
            repair_stats: CCStats::default(),
        };
    }
    let candidates: Vec<&Path> = retrieved.iter().map(|&i| db.path(i)).collect();
    let (best, checks) = select_best(&candidates, v);
    let select_stats = clock.used(v.stats());
    let out = repair(
        candidates[best],
        &checks[best],
        start,
        goal,
        params,
        &clock.remaining(v.stats()),
        v,
        rng,
    );
    LightningReport {
        path: out.path,
        stats: clock.used(v.stats()),
        repair_stats: out.birrt_stats,
        wall_time: started.elapsed(),
        selected: Some(retrieved[best]),
        retrieved,
        violations: checks[best].violations(),
        birrt_calls: out.birrt_calls,
        select_stats,
    }
}

/// Which planner finished first in race mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceWinner {
    Lightning,
    Scratch,
    Neither,
}

/// Runs Lightning and plain BiRRT concurrently on independent oracles; the
/// first to finish cancels the other. Reported CC is the sum of both.
#[allow(clippy::too_many_arguments)]
pub fn lightning_race(
    oracle: &ValidityOracle,
    start: &Configuration,
    goal: &Configuration,
    db: &PathDatabase,
    k: usize,
    params: &PlannerParams,
    budget: &Budget,
    seed: u64,
) -> (LightningReport, RaceWinner) {
    let started = Instant::now();
    let cancel = Arc::new(AtomicBool::new(false));
    let budget = budget.clone().with_cancel(cancel.clone());
    let (lo, so) = (oracle.fresh(), oracle.fresh());
    let (mut lr, sr) = std::thread::scope(|sc| {
        let l = sc.spawn(|| {
            let mut v = CachedValidator::new(&lo);
            let r = lightning_plan(&mut v, start, goal, db, k, params, &budget, &mut rng_for(seed, &[0]));
            if r.solved() {
                cancel.store(true, Ordering::Relaxed);
            }
            r
        });
        let s = sc.spawn(|| {
            let mut v = CachedValidator::new(&so);
            let r = birrt_plan(&mut v, start, goal, params, &budget, &mut rng_for(seed, &[1]));
            if r.solved() {
                cancel.store(true, Ordering::Relaxed);
            }
            r
        });
        (l.join().unwrap(), s.join().unwrap())
    });
    // with both solved, the one that spent less wall time is taken as the winner
    let winner = match (lr.solved(), sr.solved()) {
        (true, false) => RaceWinner::Lightning,
        (false, true) => RaceWinner::Scratch,
        (true, true) if lr.wall_time <= started.elapsed().saturating_sub(lr.wall_time) => RaceWinner::Lightning,
        (true, true) => RaceWinner::Scratch,
        (false, false) => RaceWinner::Neither,
    };
    if winner == RaceWinner::Scratch {
        lr.path = sr.path;
    }
    lr.stats = lo.stats() + so.stats();
    lr.wall_time = started.elapsed();
    (lr, winner)
}
