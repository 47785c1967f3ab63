use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand::Rng;

use super::{Budget, LinearScan, NearestIndex, PlanResult, PlannerParams};
use crate::collision::Validator;
use crate::path::Path;
use crate::space::{Configuration, SpaceSpec};

/// Undirected roadmap with distance-weighted edges.
#[derive(Debug, Clone, Default)]
pub struct Roadmap {
    pub nodes: Vec<Configuration>,
    pub adj: Vec<Vec<(usize, f64)>>,
    index: LinearScan,
}

impl Roadmap {
    pub fn add_node(&mut self, c: Configuration) -> usize {
        self.index.insert(&c);
        self.nodes.push(c);
        self.adj.push(Vec::new());
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize, w: f64) {
        self.adj[a].push((b, w));
        self.adj[b].push((a, w));
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Neighbor count of the PRM* connection rule for `n` nodes in `d` dimensions.
pub fn prm_star_k(n: usize, d: usize) -> usize {
    let k = std::f64::consts::E * (1.0 + 1.0 / d as f64) * (n.max(2) as f64).ln();
    k.ceil() as usize
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        // reversed for a min-heap; ties go to the lower node index
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Shortest path by edge weight; returns (cost, node sequence).
pub fn dijkstra(adj: &[Vec<(usize, f64)>], s: usize, t: usize) -> Option<(f64, Vec<usize>)> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut prev = vec![usize::MAX; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == t {
            break;
        }
        for &(w, c) in &adj[u] {
            let nd = d + c;
            if nd < dist[w] {
                dist[w] = nd;
                prev[w] = u;
                heap.push(Entry(nd, w));
            }
        }
    }
    if !dist[t].is_finite() {
        return None;
    }
    let mut seq = vec![t];
    while *seq.last().unwrap() != s {
        seq.push(prev[*seq.last().unwrap()]);
    }
    seq.reverse();
    Some((dist[t], seq))
}

fn connect_new<V: Validator>(
    v: &mut V,
    space: &SpaceSpec,
    map: &mut Roadmap,
    first_new: usize,
    k: usize,
    tried: &mut HashSet<(usize, usize)>,
) {
    let mut pairs = Vec::new();
    for i in first_new..map.len() {
        for j in map.index.k_nearest(space, &map.nodes[i], k + 1) {
            if j == i {
                continue;
            }
            let key = (i.min(j), i.max(j));
            if tried.insert(key) {
                pairs.push(key);
            }
        }
    }
    let edges: Vec<_> = pairs.iter().map(|&(a, b)| (&map.nodes[a], &map.nodes[b])).collect();
    let outcomes = v.check_edges(&edges);
    for (&(a, b), o) in pairs.iter().zip(outcomes) {
        if o.valid {
            let w = space.distance(&map.nodes[a], &map.nodes[b]);
            map.add_edge(a, b, w);
        }
    }
}

/// PRM, or PRM* when `star` is set: grow a roadmap in rounds of
/// `params.prm_n` samples until `start` and `goal` are connected.
pub fn prm_plan<V: Validator, R: Rng + ?Sized>(
    v: &mut V,
    start: &Configuration,
    goal: &Configuration,
    params: &PlannerParams,
    budget: &Budget,
    rng: &mut R,
    star: bool,
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
    let mut map = Roadmap::default();
    map.add_node(start.clone());
    map.add_node(goal.clone());
    let mut tried = HashSet::new();
    let mut rounds = 0;
    while !clock.exhausted(v.stats(), rounds) {
        rounds += 1;
        let samples: Vec<Configuration> =
            (0..params.prm_n).map(|_| space.sample_uniform(rng)).collect();
        let valid = v.check_configs(&samples);
        let first_new = if rounds == 1 { 0 } else { map.len() };
        for (c, ok) in samples.into_iter().zip(valid) {
            if ok {
                map.add_node(c);
            }
        }
        let k = if star {
            prm_star_k(map.len(), space.dim())
        } else {
            params.prm_k
        };
        connect_new(v, &space, &mut map, first_new, k, &mut tried);
        if let Some((_, seq)) = dijkstra(&map.adj, 0, 1) {
            let states = seq.into_iter().map(|i| map.nodes[i].clone()).collect();
            return PlanResult {
                path: Some(Path::new(&space, states)),
                stats: clock.used(v.stats()),
                iterations: rounds,
            };
        }
    }
    PlanResult {
        path: None,
        stats: clock.used(v.stats()),
        iterations: rounds,
    }
}
