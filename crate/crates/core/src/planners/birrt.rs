use rand::Rng;

use super::rrt::{extend, sample_target};
use super::{Budget, Extend, PlanResult, PlannerParams, SearchTree};
use crate::collision::Validator;
use crate::path::Path;
use crate::space::Configuration;

/// Tries to join node `n` of `from` to its nearest neighbor in `to`.
///
/// The edge is validated only when that neighbor lies within `r_attach`.
/// Returns the matched node of `to`.
pub fn connect_trees<V: Validator>(
    v: &mut V,
    from: &SearchTree,
    n: usize,
    to: &SearchTree,
    r_attach: f64,
) -> Option<usize> {
    let space = v.space().clone();
    let q = &from.node(n).config;
    let m = to.nearest(&space, q);
    let p = &to.node(m).config;
    if space.distance(q, p) <= r_attach && v.check_edge(q, p).valid {
        Some(m)
    } else {
        None
    }
}

/// Joins a start-tree branch and a goal-tree branch into one path.
pub(crate) fn join(start_tree: &SearchTree, a: usize, goal_tree: &SearchTree, b: usize) -> Vec<Configuration> {
    let mut states = start_tree.path_to(a);
    let mut back = goal_tree.path_to(b);
    back.reverse();
    states.extend(back);
    states
}

/// Bidirectional RRT (BiRSG when `params.method` is RSG).
pub fn birrt_plan<V: Validator, R: Rng + ?Sized>(
    v: &mut V,
    start: &Configuration,
    goal: &Configuration,
    params: &PlannerParams,
    budget: &Budget,
    rng: &mut R,
) -> PlanResult {
    let clock = budget.start(v.stats());
    let space = v.space().clone();
    let done = |path: Option<Vec<Configuration>>, v: &V, iterations| PlanResult {
        path: path.map(|s| Path::new(&space, s)),
        stats: clock.used(v.stats()),
        iterations,
    };
    if start == goal {
        return done(Some(vec![start.clone()]), v, 0);
    }
    let mut trees = [SearchTree::new(start.clone()), SearchTree::new(goal.clone())];
    if clock.exhausted(v.stats(), 0) {
        return done(None, v, 0);
    }
    if space.distance(start, goal) <= params.r_attach && v.check_edge(start, goal).valid {
        return done(Some(vec![start.clone(), goal.clone()]), v, 0);
    }
    let mut iterations = 0;
    let mut side = 0;
    while !clock.exhausted(v.stats(), iterations) {
        iterations += 1;
        let other = 1 - side;
        let bias = trees[other].root().clone();
        let target = sample_target(&space, &bias, params.p_goal, rng);
        if let Extend::Added(n) = extend(&mut trees[side], &target, params, v, rng) {
            if let Some(m) = connect_trees(v, &trees[side], n, &trees[other], params.r_attach) {
                let states = if side == 0 {
                    join(&trees[0], n, &trees[1], m)
                } else {
                    join(&trees[0], m, &trees[1], n)
                };
                return done(Some(states), v, iterations);
            }
        }
        side = other;
    }
    done(None, v, iterations)
}
