use crate::collision::{EdgeOutcome, Validator};
use crate::path::Path;
use crate::pathdb::{PathDatabase, StateHit};
use crate::space::Configuration;

/// Database restricted to paths passing near the goal, each truncated after
/// its closest state to the goal and ending exactly at the goal.
#[derive(Debug, Clone)]
pub struct GoalFilteredDb {
    pub db: PathDatabase,
    /// Original database id of each active path.
    pub origin: Vec<usize>,
    pub goal: Configuration,
}

/// Keeps every path whose closest state to `goal` lies within `delta_goal`
/// and sees the goal along a valid edge. All such edges are validated in
/// one batch; a path already touching the goal needs no validation.
pub fn filter_goal<V: Validator>(
    db: &PathDatabase,
    goal: &Configuration,
    delta_goal: f64,
    v: &mut V,
) -> GoalFilteredDb {
    let space = db.space().clone();
    let mut near = Vec::new();
    for id in 0..db.len() {
        if let Some((c, d)) = db.closest_live(id, goal) {
            if d <= delta_goal {
                near.push((id, c, d));
            }
        }
    }
    let edges: Vec<_> = near
        .iter()
        .filter(|(_, _, d)| *d > 0.0)
        .map(|&(id, c, _)| (db.path(id).state(c), goal))
        .collect();
    let mut outcomes = v.check_edges(&edges).into_iter();
    let mut paths = Vec::new();
    let mut origin = Vec::new();
    for (id, c, d) in near {
        if d > 0.0 && !outcomes.next().unwrap().valid {
            continue;
        }
        let p = db.path(id);
        let mut states = p.states()[db.live_start(id)..=c].to_vec();
        states.push(goal.clone());
        let mut kept = Path::new(&space, states);
        kept.source = p.source;
        paths.push(kept);
        origin.push(id);
    }
    GoalFilteredDb {
        db: PathDatabase::new(space, paths),
        origin,
        goal: goal.clone(),
    }
}

/// Outcome of valuing a configuration against one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathValue {
    pub path: usize,
    /// Closest live state.
    pub closest: usize,
    /// Attachment state: successor of the closest state, or the last state.
    pub attach: usize,
    /// Distance to the closest state; zero means the query lies on the path.
    pub closest_distance: f64,
    pub value: f64,
    pub edge: EdgeOutcome,
}

impl PathValue {
    /// The query sits on the path and its outgoing path edge is blocked.
    pub fn blocks_path(&self) -> bool {
        self.closest_distance == 0.0 && !self.edge.valid && self.attach != self.closest
    }
}

fn attachment(db: &PathDatabase, path: usize, closest: usize) -> usize {
    if closest + 1 < db.path(path).len() {
        closest + 1
    } else {
        closest
    }
}

fn finish(
    db: &PathDatabase,
    x: &Configuration,
    path: usize,
    closest: usize,
    closest_distance: f64,
    edge: EdgeOutcome,
) -> PathValue {
    let attach = attachment(db, path, closest);
    let p = db.path(path);
    let value = if edge.valid {
        db.space().distance(x, p.state(attach)) + p.suffix_cost(attach)
    } else {
        f64::INFINITY
    };
    PathValue {
        path,
        closest,
        attach,
        closest_distance,
        value,
        edge,
    }
}

/// Path-closest value: one edge validation from `x` to the successor of its
/// closest live state. `None` for a retired path.
pub fn path_value<V: Validator>(
    x: &Configuration,
    db: &PathDatabase,
    path: usize,
    v: &mut V,
) -> Option<PathValue> {
    let (c, d) = db.closest_live(path, x)?;
    let target = db.path(path).state(attachment(db, path, c));
    let edge = v.check_edge(x, target);
    Some(finish(db, x, path, c, d, edge))
}

/// Reference path-optimal value: the best attachment over every live state,
/// each edge validated. Quadratic cost; for tests and audits only.
pub fn optimal_path_value<V: Validator>(
    x: &Configuration,
    db: &PathDatabase,
    path: usize,
    v: &mut V,
) -> f64 {
    let p = db.path(path);
    let range = db.live_range(path);
    let edges: Vec<_> = range.clone().map(|i| (x, p.state(i))).collect();
    let outcomes = v.check_edges(&edges);
    range
        .zip(outcomes)
        .filter(|(_, o)| o.valid)
        .map(|(i, _)| db.space().distance(x, p.state(i)) + p.suffix_cost(i))
        .fold(f64::INFINITY, f64::min)
}

/// Candidate closest states per path from a ball query: for each path with
/// a live state in the ball, its closest live state overall (the ball holds
/// every state at least that close).
pub(crate) fn closest_per_path(hits: &[StateHit]) -> Vec<(usize, usize, f64)> {
    let mut out: Vec<(usize, usize, f64)> = Vec::new();
    for h in hits {
        match out.last_mut() {
            Some(last) if last.0 == h.path => {
                if h.distance < last.2 {
                    *last = (h.path, h.index, h.distance);
                }
            }
            _ => out.push((h.path, h.index, h.distance)),
        }
    }
    out
}

/// Database value restricted to paths meeting the `delta` ball around `x`.
///
/// Returns every per-path evaluation (path id order) and the index of the
/// best finite one, ties to the lowest path id. Candidate edges are
/// validated in one batch.
pub fn database_value<V: Validator>(
    x: &Configuration,
    db: &PathDatabase,
    delta: f64,
    v: &mut V,
) -> (Vec<PathValue>, Option<usize>) {
    let hits = db.delta_ball_query(x, delta);
    let cands = closest_per_path(&hits);
    let edges: Vec<_> = cands
        .iter()
        .map(|&(p, c, _)| (x, db.path(p).state(attachment(db, p, c))))
        .collect();
    let outcomes = v.check_edges(&edges);
    let values: Vec<PathValue> = cands
        .iter()
        .zip(outcomes)
        .map(|(&(p, c, d), o)| finish(db, x, p, c, d, o))
        .collect();
    let mut best: Option<usize> = None;
    for (i, pv) in values.iter().enumerate() {
        if pv.value.is_finite() && best.is_none_or(|b| pv.value < values[b].value) {
            best = Some(i);
        }
    }
    (values, best)
}

/// Result of deleting a path prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathUpdate {
    pub path: usize,
    /// New first live index.
    pub start: usize,
    pub retired: bool,
}

/// Deletes the prefix before an invalid path edge `(p_{i-1}, p_i)`: through
/// `p_{i-1}` when `p_i` is valid, through `p_i` otherwise. A path left with
/// fewer than two live states is retired.
pub fn update_path(db: &mut PathDatabase, path: usize, i: usize, pi_valid: bool) -> PathUpdate {
    let start = if pi_valid { i } else { i + 1 };
    db.delete_prefix(path, start);
    let remaining = db.live_range(path).len();
    let retired = remaining < 2;
    if retired {
        db.retire(path);
    }
    PathUpdate {
        path,
        start: db.live_start(path),
        retired,
    }
}
