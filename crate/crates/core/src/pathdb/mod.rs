//! Path database: offline construction, similarity, curation, storage and
//! the live-state index used during database-guided planning.

mod build;
mod curate;
mod dtw;

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{Path, PathSource};
use crate::space::{Configuration, DimKind, SpaceSpec};

pub use build::{build_database, build_path, smooth_path, BuildReport};
pub use curate::{cluster_greedy, curate, drop_collinear, resample, CurationSpec, Interpolation, Strategy};
pub use dtw::{dtw, dtw_bounded};

pub const DB_FORMAT_VERSION: u32 = 1;

/// A path state hit by a ball query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateHit {
    pub path: usize,
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
struct Entry {
    key: f64,
    path: u32,
    index: u32,
}

/// States sorted along one coordinate, so ball queries only scan the slab
/// whose coordinate is within the ball's per-dimension reach.
#[derive(Debug, Clone)]
struct SlabIndex {
    dim: usize,
    angular: bool,
    entries: Vec<Entry>,
}

impl SlabIndex {
    fn new(space: &SpaceSpec, paths: &[Path]) -> Self {
        let dim = space
            .dims
            .iter()
            .position(|d| d.kind == DimKind::Linear)
            .unwrap_or(0);
        let mut entries = Vec::new();
        for (p, path) in paths.iter().enumerate() {
            for (i, s) in path.states().iter().enumerate() {
                entries.push(Entry {
                    key: s.coords()[dim],
                    path: p as u32,
                    index: i as u32,
                });
            }
        }
        entries.sort_by(|a, b| a.key.total_cmp(&b.key));
        SlabIndex {
            dim,
            angular: space.dims[dim].kind == DimKind::Angular,
            entries,
        }
    }

    fn lower(&self, v: f64) -> usize {
        self.entries.partition_point(|e| e.key < v)
    }

    fn upper(&self, v: f64) -> usize {
        self.entries.partition_point(|e| e.key <= v)
    }

    /// Ranges of `entries` that may contain states within `reach` of `x` along the slab dimension.
    fn ranges(&self, x: f64, reach: f64) -> Vec<(usize, usize)> {
        // widened slightly so rounding never prunes a true hit; exact
        // distances are checked afterwards
        let reach = reach * (1.0 + 1e-9) + 1e-12;
        if !self.angular {
            return vec![(self.lower(x - reach), self.upper(x + reach))];
        }
        let tau = std::f64::consts::TAU;
        if reach >= std::f64::consts::PI {
            return vec![(0, self.entries.len())];
        }
        let (lo, hi) = (x - reach, x + reach);
        let mut out = vec![(self.lower(lo.max(0.0)), self.upper(hi.min(tau)))];
        if lo < 0.0 {
            out.push((self.lower(lo + tau), self.entries.len()));
        }
        if hi > tau {
            out.push((0, self.upper(hi - tau)));
        }
        out
    }
}

/// Runtime database: paths plus per-path live-prefix bookkeeping.
///
/// Deleting a prefix or retiring a path never touches the stored states;
/// queries skip anything that is no longer live.
#[derive(Debug, Clone)]
pub struct PathDatabase {
    space: SpaceSpec,
    paths: Vec<Path>,
    live_start: Vec<usize>,
    retired: Vec<bool>,
    index: SlabIndex,
}

impl PathDatabase {
    pub fn new(space: SpaceSpec, paths: Vec<Path>) -> Self {
        for p in &paths {
            for s in p.states() {
                assert_eq!(s.dim(), space.dim(), "contract violation: path state dimension");
            }
        }
        let index = SlabIndex::new(&space, &paths);
        PathDatabase {
            live_start: vec![0; paths.len()],
            retired: vec![false; paths.len()],
            space,
            paths,
            index,
        }
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, id: usize) -> &Path {
        &self.paths[id]
    }

    pub fn state_count(&self) -> usize {
        self.paths.iter().map(Path::len).sum()
    }

    /// First live state index of a path.
    pub fn live_start(&self, id: usize) -> usize {
        self.live_start[id]
    }

    pub fn is_retired(&self, id: usize) -> bool {
        self.retired[id]
    }

    pub fn is_live(&self, id: usize, index: usize) -> bool {
        !self.retired[id] && index >= self.live_start[id]
    }

    /// Live state indices of a path.
    pub fn live_range(&self, id: usize) -> std::ops::Range<usize> {
        if self.retired[id] {
            0..0
        } else {
            self.live_start[id]..self.paths[id].len()
        }
    }

    /// Drops every state before `start`. Never moves the live start backwards.
    pub fn delete_prefix(&mut self, id: usize, start: usize) {
        self.live_start[id] = self.live_start[id].max(start);
    }

    pub fn retire(&mut self, id: usize) {
        self.retired[id] = true;
    }

    /// Every live state within `delta` of `x`, ordered by (path, index).
    pub fn delta_ball_query(&self, x: &Configuration, delta: f64) -> Vec<StateHit> {
        let reach = self.space.coord_radius(self.index.dim, delta);
        let mut hits = Vec::new();
        for (lo, hi) in self.index.ranges(x.coords()[self.index.dim], reach) {
            for e in &self.index.entries[lo..hi] {
                let (p, i) = (e.path as usize, e.index as usize);
                if !self.is_live(p, i) {
                    continue;
                }
                let d = self.space.distance(x, self.paths[p].state(i));
                if d <= delta {
                    hits.push(StateHit {
                        path: p,
                        index: i,
                        distance: d,
                    });
                }
            }
        }
        hits.sort_by_key(|h| (h.path, h.index));
        hits
    }

    /// Reference implementation of [`delta_ball_query`](Self::delta_ball_query).
    pub fn delta_ball_scan(&self, x: &Configuration, delta: f64) -> Vec<StateHit> {
        let mut hits = Vec::new();
        for p in 0..self.paths.len() {
            for i in self.live_range(p) {
                let d = self.space.distance(x, self.paths[p].state(i));
                if d <= delta {
                    hits.push(StateHit {
                        path: p,
                        index: i,
                        distance: d,
                    });
                }
            }
        }
        hits
    }

    /// Closest live state of path `id` to `x`; ties go to the lower index.
    pub fn closest_live(&self, id: usize, x: &Configuration) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in self.live_range(id) {
            let d = self.space.distance(x, self.paths[id].state(i));
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }

    /// A copy with all deletions undone.
    pub fn pristine(&self) -> PathDatabase {
        PathDatabase::new(self.space.clone(), self.paths.clone())
    }

    pub fn to_file(&self) -> DatabaseFile {
        DatabaseFile {
            version: DB_FORMAT_VERSION,
            space: self.space.clone(),
            paths: self
                .paths
                .iter()
                .map(|p| StoredPath {
                    source: p.source,
                    states: p.states().iter().map(|s| s.coords().to_vec()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: DatabaseFile) -> Result<Self> {
        if file.version != DB_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: file.version,
                expected: DB_FORMAT_VERSION,
            });
        }
        file.space.validate()?;
        let mut paths = Vec::with_capacity(file.paths.len());
        for sp in file.paths {
            if sp.states.is_empty() {
                return Err(Error::Contract("stored path has no states".into()));
            }
            let states = sp
                .states
                .into_iter()
                .map(|c| file.space.config(c))
                .collect::<Result<Vec<_>>>()?;
            let mut p = Path::new(&file.space, states);
            p.source = sp.source;
            paths.push(p);
        }
        Ok(PathDatabase::new(file.space, paths))
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let w = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(w, &self.to_file())?;
        Ok(())
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let r = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::from_file(serde_json::from_reader(r)?)
    }

    /// `<root>/<dist>/<name>.pdb`
    pub fn file_path(root: &FsPath, dist: &str, name: &str) -> std::path::PathBuf {
        root.join(dist).join(format!("{name}.pdb"))
    }
}

/// On-disk form. Suffix costs are derived data and recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatabaseFile {
    pub version: u32,
    pub space: SpaceSpec,
    pub paths: Vec<StoredPath>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoredPath {
    pub source: Option<PathSource>,
    pub states: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Dim;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_db(space: &SpaceSpec, rng: &mut ChaCha8Rng, n: usize) -> PathDatabase {
        let paths = (0..n)
            .map(|_| {
                let k = rng.random_range(1..8);
                Path::new(space, (0..k).map(|_| space.sample_uniform(rng)).collect())
            })
            .collect();
        PathDatabase::new(space.clone(), paths)
    }

    fn check_against_scan(space: SpaceSpec, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut db = random_db(&space, &mut rng, 60);
        for round in 0..2 {
            for _ in 0..100 {
                let x = space.sample_uniform(&mut rng);
                let delta = rng.random_range(0.05..3.0);
                assert_eq!(db.delta_ball_query(&x, delta), db.delta_ball_scan(&x, delta));
            }
            if round == 0 {
                for p in 0..db.len() {
                    match p % 3 {
                        0 => db.delete_prefix(p, 2),
                        1 => db.retire(p),
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn ball_query_matches_scan_euclidean() {
        check_against_scan(SpaceSpec::euclidean(&[(0.0, 5.0), (0.0, 5.0), (0.0, 5.0)]).unwrap(), 1);
    }

    #[test]
    fn ball_query_matches_scan_weighted_mixed() {
        let s = SpaceSpec::new(
            vec![
                Dim::linear(0.0, 4.0).with_weight(2.0),
                Dim::linear(0.0, 4.0),
                Dim::angular(),
            ],
            0.7,
        )
        .unwrap();
        check_against_scan(s, 2);
    }

    #[test]
    fn ball_query_matches_scan_all_angular() {
        let s = SpaceSpec::new(vec![Dim::angular(), Dim::angular()], 0.5).unwrap();
        check_against_scan(s, 3);
    }

    #[test]
    fn exact_state_hit_and_empty_ball() {
        let s = SpaceSpec::euclidean(&[(0.0, 10.0), (0.0, 10.0)]).unwrap();
        let c = |x: f64, y: f64| Configuration::from_raw(vec![x, y]);
        let db = PathDatabase::new(s.clone(), vec![Path::new(&s, vec![c(1.0, 1.0), c(5.0, 1.0)])]);
        let hits = db.delta_ball_query(&c(5.0, 1.0), 0.5);
        assert_eq!(hits, vec![StateHit { path: 0, index: 1, distance: 0.0 }]);
        assert!(db.delta_ball_query(&c(3.0, 5.0), 1.0).is_empty());
    }

    #[test]
    fn file_round_trip_recomputes_suffix_costs() {
        let s = SpaceSpec::euclidean(&[(0.0, 5.0), (0.0, 5.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let db = random_db(&s, &mut rng, 10);
        let dir = tempfile::tempdir().unwrap();
        let f = PathDatabase::file_path(dir.path(), "random_passage", "test");
        db.save(&f).unwrap();
        let back = PathDatabase::load(&f).unwrap();
        assert_eq!(back.paths(), db.paths());

        let mut file = db.to_file();
        file.version = 99;
        assert!(matches!(PathDatabase::from_file(file), Err(Error::FormatVersion { found: 99, .. })));
    }
}
