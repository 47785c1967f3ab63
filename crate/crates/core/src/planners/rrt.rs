use rand::Rng;
use rand_distr::StandardNormal;

use super::{Budget, ExploreMethod, PlanResult, PlannerParams, SearchTree};
use crate::collision::Validator;
use crate::path::Path;
use crate::space::Configuration;

/// Result of one tree extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extend {
    Added(usize),
    Trapped,
}

/// Classic RRT extension: step at most `tau` from the nearest node toward `target`.
pub fn rrt_extend<V: Validator>(
    tree: &mut SearchTree,
    target: &Configuration,
    tau: f64,
    v: &mut V,
) -> Extend {
    let space = v.space().clone();
    let near = tree.nearest(&space, target);
    let q_near = tree.node(near).config.clone();
    if space.distance(&q_near, target) == 0.0 {
        return Extend::Trapped;
    }
    let q_new = space.steer(&q_near, target, tau);
    if v.check_edge(&q_near, &q_new).valid {
        Extend::Added(tree.add(&space, near, q_new))
    } else {
        Extend::Trapped
    }
}

/// Random-sampling-guided extension: one candidate toward `target` plus
/// `b - 1` in uniformly random directions, all of the same length, validated
/// together; the valid candidate closest to `target` is kept.
pub fn rsg_extend<V: Validator, R: Rng + ?Sized>(
    tree: &mut SearchTree,
    target: &Configuration,
    tau: f64,
    b: usize,
    v: &mut V,
    rng: &mut R,
) -> Extend {
    let space = v.space().clone();
    let near = tree.nearest(&space, target);
    let q_near = tree.node(near).config.clone();
    let d = space.distance(&q_near, target);
    if d == 0.0 {
        return Extend::Trapped;
    }
    let len = tau.min(d);
    let mut candidates = Vec::with_capacity(b);
    candidates.push(space.steer(&q_near, target, tau));
    let mut dir = vec![0.0; space.dim()];
    while candidates.len() < b {
        for x in dir.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        if let Some(c) = space.offset(&q_near, &dir, len) {
            candidates.push(c);
        }
    }
    let edges: Vec<_> = candidates.iter().map(|c| (&q_near, c)).collect();
    let outcomes = v.check_edges(&edges);
    let mut best: Option<(f64, usize)> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if o.valid {
            let dt = space.distance(&candidates[i], target);
            if best.is_none_or(|(bd, _)| dt < bd) {
                best = Some((dt, i));
            }
        }
    }
    match best {
        Some((_, i)) => Extend::Added(tree.add(&space, near, candidates.swap_remove(i))),
        None => Extend::Trapped,
    }
}

/// Extension with the configured method.
pub(crate) fn extend<V: Validator, R: Rng + ?Sized>(
    tree: &mut SearchTree,
    target: &Configuration,
    params: &PlannerParams,
    v: &mut V,
    rng: &mut R,
) -> Extend {
    match params.method {
        ExploreMethod::Rrt => rrt_extend(tree, target, params.tau, v),
        ExploreMethod::Rsg => rsg_extend(tree, target, params.tau, params.batch, v, rng),
    }
}

/// Samples `bias` with probability `p` and a uniform configuration otherwise.
pub(crate) fn sample_target<R: Rng + ?Sized>(
    space: &crate::space::SpaceSpec,
    bias: &Configuration,
    p: f64,
    rng: &mut R,
) -> Configuration {
    if rng.random_bool(p) {
        bias.clone()
    } else {
        space.sample_uniform(rng)
    }
}

/// One exploration iteration of goal-biased RRT/RSG.
///
/// After a successful extension, a new node within `tau` of `goal` tries a
/// direct connection. Returns the extension outcome and the goal's node
/// index if it was reached.
pub fn explore_step<V: Validator, R: Rng + ?Sized>(
    tree: &mut SearchTree,
    goal: &Configuration,
    params: &PlannerParams,
    v: &mut V,
    rng: &mut R,
) -> (Extend, Option<usize>) {
    let target = sample_target(v.space(), goal, params.p_goal, rng);
    let ext = extend(tree, &target, params, v, rng);
    let Extend::Added(n) = ext else {
        return (ext, None);
    };
    let q = tree.node(n).config.clone();
    if &q == goal {
        return (ext, Some(n));
    }
    let space = v.space().clone();
    if space.distance(&q, goal) <= params.tau && v.check_edge(&q, goal).valid {
        let g = tree.add(&space, n, goal.clone());
        return (ext, Some(g));
    }
    (ext, None)
}

/// Unidirectional RRT (or RSG) from `start` until `goal` joins the tree.
pub fn rrt_plan<V: Validator, R: Rng + ?Sized>(
    v: &mut V,
    start: &Configuration,
    goal: &Configuration,
    params: &PlannerParams,
    budget: &Budget,
    rng: &mut R,
) -> PlanResult {
    let clock = budget.start(v.stats());
    let space = v.space().clone();
    if start == goal {
        return PlanResult {
            path: Some(Path::new(&space, vec![start.clone()])),
            stats: clock.used(v.stats()),
            iterations: 0,
        };
    }
    let mut tree = SearchTree::new(start.clone());
    let mut iterations = 0;
    while !clock.exhausted(v.stats(), iterations) {
        iterations += 1;
        if let (_, Some(g)) = explore_step(&mut tree, goal, params, v, rng) {
            return PlanResult {
                path: Some(Path::new(&space, tree.path_to(g))),
                stats: clock.used(v.stats()),
                iterations,
            };
        }
    }
    PlanResult {
        path: None,
        stats: clock.used(v.stats()),
        iterations,
    }
}
