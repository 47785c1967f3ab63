//! Hand-built scenes for targeted comparisons.

use std::sync::Arc;

use pdg_core::collision::{Obstacle, RobotModel};
use pdg_core::environment::{Bounds, Environment, MPProblem, Task};
use pdg_core::path::{Path, PathSource};
use pdg_core::pathdb::PathDatabase;
use pdg_core::space::{Configuration, SpaceSpec};

use crate::dataset::Problem;

fn c(x: f64, y: f64) -> Configuration {
    Configuration::from_raw(vec![x, y])
}

/// Two walls between start and goal: a wide opening at the bottom of the
/// first and a narrow tunnel at the top of the second. The database holds
/// two paths from other layouts, each blocked at one wall:
///
/// * path 0 passes the first wall low (valid) and the second wall low (blocked);
/// * path 1 passes the first wall high (blocked) and the second wall through
///   the tunnel (valid).
///
/// Both paths share a waypoint between the walls, so the valid prefix of
/// one meets the valid suffix of the other.
pub fn complementary_paths() -> (Problem, PathDatabase) {
    let (w, h) = (40.0, 20.0);
    let space = SpaceSpec::euclidean(&[(0.0, w), (0.0, h)]).unwrap();
    let obstacles = vec![
        // first wall, open for y < 4
        Obstacle::rect([12.0, 4.0], [14.0, h]),
        // second wall, tunnel for y > 18.5
        Obstacle::rect([25.0, 0.0], [29.0, 18.5]),
    ];
    let env = Environment::custom(
        space.clone(),
        RobotModel::point2d(),
        Bounds {
            min: [0.0, 0.0, -1.0],
            max: [w, h, 1.0],
        },
        obstacles,
        0.25,
    );
    let (s, t) = (c(3.0, 10.0), c(37.0, 10.0));
    let low = [(11.0, 2.0), (15.0, 2.0), (20.0, 10.0), (24.0, 2.0), (30.0, 2.0)];
    let high = [(11.0, 18.0), (15.0, 18.0), (20.0, 10.0), (24.0, 19.25), (30.0, 19.25)];
    let route = |mid: &[(f64, f64)], id: u64| {
        let mut states = vec![s.clone()];
        states.extend(mid.iter().map(|&(x, y)| c(x, y)));
        states.push(t.clone());
        Path::new(&space, states).with_source(PathSource { env_seed: id, task_id: 0 })
    };
    let db = PathDatabase::new(space.clone(), vec![route(&low, 1), route(&high, 2)]);
    let problem = Problem {
        mp: MPProblem {
            env: Arc::new(env),
            task: Task { start: s, goal: t },
        },
        source: PathSource { env_seed: 0, task_id: 0 },
    };
    (problem, db)
}
