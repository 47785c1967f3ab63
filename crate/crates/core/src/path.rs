use serde::{Deserialize, Serialize};

use crate::space::{Configuration, SpaceSpec};

/// Where a stored path came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathSource {
    pub env_seed: u64,
    pub task_id: u64,
}

/// Ordered configurations `p_0..p_k` with cost-to-go suffix sums.
///
/// `suffix_cost[i]` is the distance along the path from `p_i` to `p_k`.
/// Consecutive duplicate states are collapsed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    states: Vec<Configuration>,
    suffix_cost: Vec<f64>,
    pub source: Option<PathSource>,
}

impl Path {
    pub fn new(space: &SpaceSpec, states: Vec<Configuration>) -> Self {
        assert!(!states.is_empty(), "contract violation: a path needs at least one state");
        let mut deduped: Vec<Configuration> = Vec::with_capacity(states.len());
        for s in states {
            if deduped.last() != Some(&s) {
                deduped.push(s);
            }
        }
        let suffix_cost = suffix_costs(space, &deduped);
        Path {
            states: deduped,
            suffix_cost,
            source: None,
        }
    }

    pub fn with_source(mut self, source: PathSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn states(&self) -> &[Configuration] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Configuration {
        &self.states[i]
    }

    pub fn suffix_cost(&self, i: usize) -> f64 {
        self.suffix_cost[i]
    }

    pub fn suffix_costs(&self) -> &[f64] {
        &self.suffix_cost
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn start(&self) -> &Configuration {
        &self.states[0]
    }

    pub fn end(&self) -> &Configuration {
        self.states.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.suffix_cost[0]
    }

    pub fn reversed(&self, space: &SpaceSpec) -> Path {
        let mut states = self.states.clone();
        states.reverse();
        Path {
            source: self.source,
            ..Path::new(space, states)
        }
    }

    pub fn into_states(self) -> Vec<Configuration> {
        self.states
    }
}

pub(crate) fn suffix_costs(space: &SpaceSpec, states: &[Configuration]) -> Vec<f64> {
    let mut out = vec![0.0; states.len()];
    for i in (0..states.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] + space.distance(&states[i], &states[i + 1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_costs_accumulate_backwards() {
        let s = SpaceSpec::euclidean(&[(0.0, 10.0), (0.0, 10.0)]).unwrap();
        let c = |x: f64, y: f64| s.config(vec![x, y]).unwrap();
        let p = Path::new(&s, vec![c(0.0, 0.0), c(3.0, 4.0), c(3.0, 4.0), c(3.0, 6.0)]);
        assert_eq!(p.len(), 3);
        assert_eq!(p.suffix_costs(), &[7.0, 2.0, 0.0]);
        assert_eq!(p.length(), 7.0);
        let r = p.reversed(&s);
        assert_eq!(r.suffix_costs(), &[7.0, 5.0, 0.0]);
        assert_eq!(r.start(), p.end());
    }
}
