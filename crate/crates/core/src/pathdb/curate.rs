use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dtw::dtw_bounded;
use super::PathDatabase;
use crate::error::{Error, Result};
use crate::path::Path;
use crate::space::{Edge, SpaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    RandomSubset { fraction: f64, k: usize },
    DtwCluster { threshold: f64, m: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// States resampled at the collision-check step along every edge.
    Interpolated,
    /// No three consecutive states collinear.
    Uninterpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurationSpec {
    #[serde(flatten)]
    pub strategy: Strategy,
    pub interpolation: Interpolation,
}

impl CurationSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self.strategy {
            Strategy::RandomSubset { fraction, k } => fraction > 0.0 && fraction <= 1.0 && k >= 1,
            Strategy::DtwCluster { threshold, m, k } => threshold > 0.0 && m >= 1 && k >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("invalid curation spec {self:?}")))
        }
    }
}

/// Greedy single-pass clustering: each path joins the first cluster whose
/// representative (its first member) is within `threshold` DTW, otherwise
/// it founds a new cluster. Returns the cluster id of each path.
pub fn cluster_greedy(space: &SpaceSpec, paths: &[Path], threshold: f64) -> Vec<usize> {
    assert!(threshold > 0.0, "contract violation: threshold must be positive");
    let mut reps: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let found = reps
            .iter()
            .position(|&r| dtw_bounded(space, &paths[r], p, threshold) <= threshold);
        match found {
            Some(c) => out.push(c),
            None => {
                out.push(reps.len());
                reps.push(i);
            }
        }
    }
    out
}

/// Removes middle states of collinear triples until none remain.
pub fn drop_collinear(space: &SpaceSpec, p: &Path) -> Path {
    let mut states: Vec<_> = p.states().to_vec();
    let mut i = 1;
    while i + 1 < states.len() {
        let (a, b, c) = (&states[i - 1], &states[i], &states[i + 1]);
        let direct = space.distance(a, c);
        let via = space.distance(a, b) + space.distance(b, c);
        if via - direct <= 1e-9 * via.max(1.0) {
            states.remove(i);
            i = i.saturating_sub(1).max(1);
        } else {
            i += 1;
        }
    }
    let mut out = Path::new(space, states);
    out.source = p.source;
    out
}

/// Resamples every edge at spacing at most `step`.
pub fn resample(space: &SpaceSpec, p: &Path, step: f64) -> Path {
    let mut states = vec![p.start().clone()];
    for w in p.states().windows(2) {
        let pts = space.interpolate(&Edge::new(w[0].clone(), w[1].clone()), step);
        states.extend(pts.into_iter().skip(1));
    }
    let mut out = Path::new(space, states);
    out.source = p.source;
    out
}

fn apply(space: &SpaceSpec, p: &Path, mode: Interpolation, step: f64) -> Path {
    match mode {
        Interpolation::Interpolated => resample(space, &drop_collinear(space, p), step),
        Interpolation::Uninterpolated => drop_collinear(space, p),
    }
}

/// Candidate databases drawn from `db` per the curation strategy.
///
/// Selected paths keep their original order. `step` is the resampling step
/// for the interpolated mode.
pub fn curate<R: Rng + ?Sized>(
    space: &SpaceSpec,
    db: &[Path],
    spec: &CurationSpec,
    step: f64,
    rng: &mut R,
) -> Result<Vec<PathDatabase>> {
    spec.validate()?;
    if db.is_empty() {
        return Err(Error::Contract("cannot curate an empty database".into()));
    }
    let picks: Vec<Vec<usize>> = match spec.strategy {
        Strategy::RandomSubset { fraction, k } => {
            let n = ((fraction * db.len() as f64).round() as usize).min(db.len());
            (0..k)
                .map(|_| {
                    let mut v = sample(rng, db.len(), n).into_vec();
                    v.sort_unstable();
                    v
                })
                .collect()
        }
        Strategy::DtwCluster { threshold, m, k } => {
            let ids = cluster_greedy(space, db, threshold);
            let n_clusters = ids.iter().max().map_or(0, |&c| c + 1);
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
            for (i, &c) in ids.iter().enumerate() {
                members[c].push(i);
            }
            (0..k)
                .map(|_| {
                    let mut v: Vec<usize> = members
                        .iter()
                        .flat_map(|mem| {
                            let take = m.min(mem.len());
                            sample(rng, mem.len(), take)
                                .into_iter()
                                .map(|j| mem[j])
                                .collect::<Vec<_>>()
                        })
                        .collect();
                    v.sort_unstable();
                    v
                })
                .collect()
        }
    };
    Ok(picks
        .into_iter()
        .map(|ix| {
            let paths = ix
                .into_iter()
                .map(|i| apply(space, &db[i], spec.interpolation, step))
                .collect();
            PathDatabase::new(space.clone(), paths)
        })
        .collect())
}
