use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::value::{database_value, filter_goal, update_path, GoalFilteredDb, PathValue};
use crate::collision::{CCStats, Validator};
use crate::path::Path;
use crate::pathdb::PathDatabase;
use crate::planners::{connect_trees, explore_step, Budget, BudgetClock, Extend, PlannerParams, SearchTree};
use crate::space::{ConfigKey, Configuration};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdgParams {
    /// Radius for the initial goal filter.
    pub delta_goal: f64,
    /// Radius for node valuation queries.
    pub delta_value: f64,
    /// Exploration fallback (RRT or RSG) and bidirectional connect radius.
    pub explore: PlannerParams,
}

impl Default for PdgParams {
    fn default() -> Self {
        PdgParams {
            delta_goal: 5.0,
            delta_value: 5.0,
            explore: PlannerParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub path: Option<Path>,
    pub stats: CCStats,
    pub explore: u64,
    pub exploit: u64,
    pub wall_time: Duration,
    /// Paths surviving the goal filter (summed over both trees when bidirectional).
    pub active_paths: usize,
    pub path_updates: u64,
}

impl RunReport {
    pub fn solved(&self) -> bool {
        self.path.is_some()
    }

    pub fn expansions(&self) -> u64 {
        self.explore + self.exploit
    }

    /// Share of expansions that followed the database.
    pub fn ee_ratio(&self) -> f64 {
        if self.expansions() == 0 {
            0.0
        } else {
            self.exploit as f64 / self.expansions() as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NodeState {
    /// Awaiting full valuation.
    Pending,
    Infinite,
    /// On path state `idx`; valued lazily against that path alone.
    Deferred { path: usize, idx: usize },
    /// Validated edge to state `attach`.
    Attached { path: usize, attach: usize, value: f64 },
    /// Already exploited along its attachment.
    Consumed { path: usize, attach: usize },
}

impl NodeState {
    /// Path and the lowest state index this entry depends on.
    fn dependency(&self) -> Option<(usize, usize)> {
        match *self {
            NodeState::Deferred { path, idx } => Some((path, idx)),
            NodeState::Attached { path, attach, .. } | NodeState::Consumed { path, attach } => {
                Some((path, attach))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct NodeMeta {
    state: NodeState,
    version: u32,
}

#[derive(Debug, PartialEq)]
struct HeapEntry {
    value: f64,
    node: usize,
    version: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (value, node id)
        o.value.total_cmp(&self.value).then(o.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// What one call to [`PdgSearch::step`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Added a database state as a child of the selected node.
    Exploited(usize),
    /// The state to exploit was already in the tree; no node added.
    Duplicate,
    Explored(Extend),
    /// The goal is in the tree at this node.
    Solved(usize),
    Exhausted,
}

enum Selection {
    Exploit(usize),
    Explore,
    Exhausted,
}

/// One database-guided search tree growing from `start` toward `goal`.
#[derive(Debug)]
pub struct PdgSearch {
    params: PdgParams,
    goal: Configuration,
    fdb: GoalFilteredDb,
    tree: SearchTree,
    meta: Vec<NodeMeta>,
    keys: HashMap<ConfigKey, usize>,
    heap: BinaryHeap<HeapEntry>,
    pending: Vec<usize>,
    path_nodes: Vec<Vec<usize>>,
    goal_node: Option<usize>,
    pub explore: u64,
    pub exploit: u64,
    pub path_updates: u64,
}

impl PdgSearch {
    /// Filters `db` toward `goal` (charged to `v`) and seeds the tree at `start`.
    pub fn new<V: Validator>(
        start: &Configuration,
        goal: &Configuration,
        db: &PathDatabase,
        params: &PdgParams,
        v: &mut V,
    ) -> Self {
        let fdb = filter_goal(db, goal, params.delta_goal, v);
        let n_paths = fdb.db.len();
        let mut s = PdgSearch {
            params: params.clone(),
            goal: goal.clone(),
            fdb,
            tree: SearchTree::new(start.clone()),
            meta: Vec::new(),
            keys: HashMap::new(),
            heap: BinaryHeap::new(),
            pending: Vec::new(),
            path_nodes: vec![Vec::new(); n_paths],
            goal_node: None,
            explore: 0,
            exploit: 0,
            path_updates: 0,
        };
        s.sync_new_nodes();
        if start == goal {
            s.goal_node = Some(0);
        }
        s
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    pub fn filtered(&self) -> &GoalFilteredDb {
        &self.fdb
    }

    pub fn goal_node(&self) -> Option<usize> {
        self.goal_node
    }

    pub fn expansions(&self) -> u64 {
        self.explore + self.exploit
    }

    /// Registers tree nodes added since the last call as pending valuation.
    fn sync_new_nodes(&mut self) {
        for i in self.meta.len()..self.tree.len() {
            let c = &self.tree.node(i).config;
            self.keys.entry(c.key()).or_insert(i);
            if c == &self.goal {
                self.goal_node = Some(i);
            }
            self.meta.push(NodeMeta {
                state: NodeState::Pending,
                version: 0,
            });
            self.pending.push(i);
        }
    }

    fn set_state(&mut self, n: usize, state: NodeState) {
        let m = &mut self.meta[n];
        m.version += 1;
        m.state = state;
        let value = match state {
            NodeState::Deferred { path, idx } => Some((path, self.fdb.db.path(path).suffix_cost(idx))),
            NodeState::Attached { path, value, .. } => Some((path, value)),
            _ => None,
        };
        if let Some((path, value)) = value {
            self.path_nodes[path].push(n);
            self.heap.push(HeapEntry {
                value,
                node: n,
                version: self.meta[n].version,
            });
        }
    }

    /// Applies a prefix deletion and sends every node that depended on a
    /// deleted state back to pending valuation.
    fn apply_update(&mut self, path: usize, i: usize, pi_valid: bool) {
        let u = update_path(&mut self.fdb.db, path, i, pi_valid);
        self.path_updates += 1;
        let nodes = std::mem::take(&mut self.path_nodes[path]);
        let mut keep = Vec::new();
        for n in nodes {
            match self.meta[n].state.dependency() {
                Some((p, idx)) if p == path => {
                    if u.retired || idx < u.start {
                        let m = &mut self.meta[n];
                        m.version += 1;
                        m.state = NodeState::Pending;
                        self.pending.push(n);
                    } else {
                        keep.push(n);
                    }
                }
                _ => {}
            }
        }
        keep.sort_unstable();
        keep.dedup();
        self.path_nodes[path] = keep;
    }

    /// Full valuation of a pending node against every nearby path.
    fn evaluate(&mut self, n: usize, v: &mut impl Validator) {
        let x = self.tree.node(n).config.clone();
        let (values, best) = database_value(&x, &self.fdb.db, self.params.delta_value, v);
        let blocked: Vec<PathValue> = values.iter().copied().filter(PathValue::blocks_path).collect();
        let state = match best {
            Some(b) => NodeState::Attached {
                path: values[b].path,
                attach: values[b].attach,
                value: values[b].value,
            },
            None => NodeState::Infinite,
        };
        self.set_state(n, state);
        for pv in blocked {
            self.apply_update(pv.path, pv.attach, pv.edge.to_valid);
        }
    }

    fn pop_live(&mut self) -> Option<usize> {
        while let Some(e) = self.heap.pop() {
            if self.meta[e.node].version == e.version {
                return Some(e.node);
            }
        }
        None
    }

    fn select(&mut self, v: &mut impl Validator, clock: &BudgetClock) -> Selection {
        loop {
            while let Some(n) = self.pending.pop() {
                if clock.exhausted(v.stats(), self.expansions()) {
                    self.pending.push(n);
                    return Selection::Exhausted;
                }
                if self.meta[n].state != NodeState::Pending {
                    continue;
                }
                self.evaluate(n, v);
                if matches!(self.meta[n].state, NodeState::Attached { .. }) {
                    break;
                }
            }
            let Some(n) = self.pop_live() else {
                if self.pending.is_empty() {
                    return Selection::Explore;
                }
                continue;
            };
            match self.meta[n].state {
                NodeState::Attached { .. } => return Selection::Exploit(n),
                NodeState::Deferred { path, idx } => {
                    if clock.exhausted(v.stats(), self.expansions()) {
                        self.heap.push(HeapEntry {
                            value: self.fdb.db.path(path).suffix_cost(idx),
                            node: n,
                            version: self.meta[n].version,
                        });
                        return Selection::Exhausted;
                    }
                    let p = self.fdb.db.path(path);
                    let (a, b) = (p.state(idx).clone(), p.state(idx + 1).clone());
                    let edge = v.check_edge(&a, &b);
                    if edge.valid {
                        let value = self.fdb.db.path(path).suffix_cost(idx);
                        self.meta[n].state = NodeState::Attached {
                            path,
                            attach: idx + 1,
                            value,
                        };
                        return Selection::Exploit(n);
                    }
                    self.apply_update(path, idx + 1, edge.to_valid);
                }
                _ => unreachable!("only attached and deferred nodes enter the heap"),
            }
        }
    }

    fn exploit(&mut self, n: usize) -> Step {
        let NodeState::Attached { path, attach, .. } = self.meta[n].state else {
            unreachable!("exploit on an unattached node");
        };
        let m = &mut self.meta[n];
        m.version += 1;
        m.state = NodeState::Consumed { path, attach };
        let target = self.fdb.db.path(path).state(attach).clone();
        if self.keys.contains_key(&target.key()) {
            return Step::Duplicate;
        }
        let space = self.fdb.db.space().clone();
        let child = self.tree.add(&space, n, target);
        self.exploit += 1;
        self.sync_new_nodes();
        self.pending.retain(|&p| p != child);
        if self.goal_node == Some(child) {
            return Step::Solved(child);
        }
        self.set_state(child, NodeState::Deferred { path, idx: attach });
        Step::Exploited(child)
    }

    /// One selection plus one expansion (or none when the budget runs out).
    pub fn step<V: Validator, R: Rng + ?Sized>(
        &mut self,
        v: &mut V,
        rng: &mut R,
        clock: &BudgetClock,
    ) -> Step {
        if let Some(g) = self.goal_node {
            return Step::Solved(g);
        }
        if clock.exhausted(v.stats(), self.expansions()) {
            return Step::Exhausted;
        }
        match self.select(v, clock) {
            Selection::Exhausted => Step::Exhausted,
            Selection::Exploit(n) => self.exploit(n),
            Selection::Explore => {
                self.explore += 1;
                let (ext, _) = explore_step(&mut self.tree, &self.goal, &self.params.explore, v, rng);
                self.sync_new_nodes();
                match self.goal_node {
                    Some(g) => Step::Solved(g),
                    None => Step::Explored(ext),
                }
            }
        }
    }

    pub fn path_to(&self, n: usize) -> Vec<Configuration> {
        self.tree.path_to(n)
    }
}

/// Database-guided search from `start` to `goal`.
pub fn pdg_plan<V: Validator, R: Rng + ?Sized>(
    v: &mut V,
    start: &Configuration,
    goal: &Configuration,
    db: &PathDatabase,
    params: &PdgParams,
    budget: &Budget,
    rng: &mut R,
) -> RunReport {
    let started = Instant::now();
    let clock = budget.start(v.stats());
    let space = v.space().clone();
    let mut search = PdgSearch::new(start, goal, db, params, v);
    let path = loop {
        match search.step(v, rng, &clock) {
            Step::Solved(g) => break Some(Path::new(&space, search.path_to(g))),
            Step::Exhausted => break None,
            _ => {}
        }
    };
    RunReport {
        path,
        stats: clock.used(v.stats()),
        explore: search.explore,
        exploit: search.exploit,
        wall_time: started.elapsed(),
        active_paths: search.fdb.db.len(),
        path_updates: search.path_updates,
    }
}

fn reversed_db(db: &PathDatabase) -> PathDatabase {
    let space = db.space().clone();
    let paths = db.paths().iter().map(|p| p.reversed(&space)).collect();
    PathDatabase::new(space, paths)
}

/// Bidirectional variant: a forward search toward `goal` and a backward
/// search (over reversed database paths) toward `start` alternate
/// expansions and stop when their trees connect within `r_attach`.
pub fn bipdg_plan<V: Validator, R: Rng + ?Sized>(
    v: &mut V,
    start: &Configuration,
    goal: &Configuration,
    db: &PathDatabase,
    params: &PdgParams,
    budget: &Budget,
    rng: &mut R,
) -> RunReport {
    let started = Instant::now();
    let clock = budget.start(v.stats());
    let space = v.space().clone();
    let report = |path: Option<Vec<Configuration>>, searches: &[PdgSearch], v: &V| RunReport {
        path: path.map(|s| Path::new(&space, s)),
        stats: clock.used(v.stats()),
        explore: searches.iter().map(|s| s.explore).sum(),
        exploit: searches.iter().map(|s| s.exploit).sum(),
        wall_time: started.elapsed(),
        active_paths: searches.iter().map(|s| s.fdb.db.len()).sum(),
        path_updates: searches.iter().map(|s| s.path_updates).sum(),
    };
    if start == goal {
        return report(Some(vec![start.clone()]), &[], v);
    }
    let mut searches = [
        PdgSearch::new(start, goal, db, params, v),
        PdgSearch::new(goal, start, &reversed_db(db), params, v),
    ];
    let r_attach = params.explore.r_attach;
    let mut path = None;
    if space.distance(start, goal) <= r_attach
        && !clock.exhausted(v.stats(), 0)
        && v.check_edge(start, goal).valid
    {
        path = Some(vec![start.clone(), goal.clone()]);
    }
    let mut side = 0;
    while path.is_none() {
        let other = 1 - side;
        let step = searches[side].step(v, rng, &clock);
        let added = match step {
            Step::Exhausted => break,
            Step::Solved(g) => {
                let mut states = searches[side].path_to(g);
                if side == 1 {
                    states.reverse();
                }
                path = Some(states);
                break;
            }
            Step::Exploited(n) | Step::Explored(Extend::Added(n)) => Some(n),
            _ => None,
        };
        if let Some(n) = added {
            if let Some(m) = connect_trees(v, &searches[side].tree, n, &searches[other].tree, r_attach) {
                let (a, b) = if side == 0 { (n, m) } else { (m, n) };
                let mut states = searches[0].path_to(a);
                let mut back = searches[1].path_to(b);
                back.reverse();
                states.extend(back);
                path = Some(states);
            }
        }
        side = other;
    }
    report(path, &searches, v)
}
