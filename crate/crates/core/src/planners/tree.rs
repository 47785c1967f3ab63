use crate::space::{Configuration, SpaceSpec};

/// Nearest-neighbor queries over an append-only set of configurations.
pub trait NearestIndex {
    fn insert(&mut self, c: &Configuration);

    /// Index of the closest point; ties go to the lowest index.
    fn nearest(&self, space: &SpaceSpec, q: &Configuration) -> Option<usize>;

    /// The `k` closest points ordered by (distance, index).
    fn k_nearest(&self, space: &SpaceSpec, q: &Configuration, k: usize) -> Vec<usize>;

    /// Every point within `r` of `q`, ordered by (distance, index).
    fn within(&self, space: &SpaceSpec, q: &Configuration, r: f64) -> Vec<usize>;
}

/// Exact brute-force index. Reference for any accelerated structure.
#[derive(Debug, Clone, Default)]
pub struct LinearScan {
    points: Vec<Configuration>,
}

impl LinearScan {
    fn sorted(&self, space: &SpaceSpec, q: &Configuration, r: Option<f64>) -> Vec<(f64, usize)> {
        let mut v: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (space.distance(q, p), i))
            .filter(|(d, _)| r.is_none_or(|r| *d <= r))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        v
    }
}

impl NearestIndex for LinearScan {
    fn insert(&mut self, c: &Configuration) {
        self.points.push(c.clone());
    }

    fn nearest(&self, space: &SpaceSpec, q: &Configuration) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (i, p) in self.points.iter().enumerate() {
            let d = space.distance(q, p);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        best.map(|(_, i)| i)
    }

    fn k_nearest(&self, space: &SpaceSpec, q: &Configuration, k: usize) -> Vec<usize> {
        let mut v: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (space.distance(q, p), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < v.len() {
            v.select_nth_unstable_by(k, cmp);
            v.truncate(k);
        }
        v.sort_by(cmp);
        v.into_iter().map(|(_, i)| i).collect()
    }

    fn within(&self, space: &SpaceSpec, q: &Configuration, r: f64) -> Vec<usize> {
        self.sorted(space, q, Some(r)).into_iter().map(|(_, i)| i).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub config: Configuration,
    pub parent: Option<usize>,
    /// Path cost from the root.
    pub cost: f64,
}

/// Rooted tree whose parent edges have all been validated.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<Node>,
    index: LinearScan,
}

impl SearchTree {
    pub fn new(root: Configuration) -> Self {
        let mut t = SearchTree {
            nodes: Vec::new(),
            index: LinearScan::default(),
        };
        t.index.insert(&root);
        t.nodes.push(Node {
            config: root,
            parent: None,
            cost: 0.0,
        });
        t
    }

    pub fn root(&self) -> &Configuration {
        &self.nodes[0].config
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Appends a child whose edge to `parent` the caller has validated.
    pub fn add(&mut self, space: &SpaceSpec, parent: usize, config: Configuration) -> usize {
        let cost = self.nodes[parent].cost + space.distance(&self.nodes[parent].config, &config);
        self.index.insert(&config);
        self.nodes.push(Node {
            config,
            parent: Some(parent),
            cost,
        });
        self.nodes.len() - 1
    }

    pub fn nearest(&self, space: &SpaceSpec, q: &Configuration) -> usize {
        self.index.nearest(space, q).expect("tree is never empty")
    }

    pub fn within(&self, space: &SpaceSpec, q: &Configuration, r: f64) -> Vec<usize> {
        self.index.within(space, q, r)
    }

    /// Configurations from the root down to node `i`.
    pub fn path_to(&self, mut i: usize) -> Vec<Configuration> {
        let mut out = vec![self.nodes[i].config.clone()];
        while let Some(p) = self.nodes[i].parent {
            out.push(self.nodes[p].config.clone());
            i = p;
        }
        out.reverse();
        out
    }
}
