//! Procedural environment distributions, task sampling, and the on-disk
//! environment format.
//!
//! Every generator is a pure function of `(seed, constants)`. Distribution
//! constants live in [`constants`] and are versioned with the file format.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collision::{Obstacle, RobotKind, RobotModel, ValidityOracle, Vec3};
use crate::error::{Error, Result};
use crate::space::{Configuration, Dim, SpaceSpec};

pub const ENV_FORMAT_VERSION: u32 = 1;

/// Rejection-sampling attempts per configuration before giving up.
pub const MAX_SAMPLING_ATTEMPTS: usize = 100_000;

/// Fixed numeric constants of the three distributions (format version 1).
pub mod constants {
    pub mod random_passage {
        pub const WALL_SPACING: f64 = 10.0;
        pub const HEIGHT: f64 = 30.0;
        pub const WALL_THICKNESS: f64 = 1.0;
        pub const GAP_WIDTH: f64 = 2.0;
    }

    pub mod cubicles {
        pub const ROOM: f64 = 60.0;
        pub const GROUP_SLOTS: usize = 9;
        pub const SLOT_PITCH: f64 = 20.0;
        pub const MAX_PER_GROUP: usize = 4;
        pub const INNER_WIDTH: f64 = 2.0;
        pub const DEPTH: f64 = 2.5;
        pub const WALL: f64 = 0.4;
        pub const BASE_RADIUS: f64 = 1.5;
        pub const LINK_LENGTH: f64 = 1.0;
        pub const LINK_RADIUS: f64 = 0.3;
        pub const ANGULAR_SCALE: f64 = 4.0;
        pub const IK_TOLERANCE: f64 = 0.5;
    }

    pub mod shelves {
        pub const COUNT: (usize, usize) = (2, 4);
        pub const STANDOFF: (f64, f64) = (0.7, 1.1);
        pub const SIZE: (f64, f64) = (0.35, 0.5);
        pub const DEPTH: (f64, f64) = (0.3, 0.6);
        pub const WIDTH_PER_SIZE: f64 = 2.5;
        pub const BOARD: f64 = 0.1;
        pub const LINK_LENGTHS: [f64; 5] = [0.6, 0.8, 0.7, 0.4, 0.2];
        pub const LINK_RADIUS: f64 = 0.06;
        pub const IK_TOLERANCE: f64 = 0.2;
        /// Half-width of the base-yaw window around the target bearing; wide
        /// enough to contain every reaching configuration.
        pub const YAW_WINDOW: f64 = 0.6;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionId {
    RandomPassage,
    Cubicles,
    Shelves,
    Custom,
}

impl DistributionId {
    pub fn name(&self) -> &'static str {
        match self {
            DistributionId::RandomPassage => "randompassage",
            DistributionId::Cubicles => "cubicles",
            DistributionId::Shelves => "shelves",
            DistributionId::Custom => "custom",
        }
    }
}

impl std::str::FromStr for DistributionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "randompassage" => Ok(DistributionId::RandomPassage),
            "cubicles" => Ok(DistributionId::Cubicles),
            "shelves" => Ok(DistributionId::Shelves),
            "custom" => Ok(DistributionId::Custom),
            _ => Err(Error::Contract(format!("unknown distribution {s:?}"))),
        }
    }
}

impl std::fmt::Display for DistributionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicleGroup {
    pub count: usize,
    /// Opening faces +y.
    pub facing_up: bool,
}

/// Sampled parameters of a generated environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    RandomPassage { blocked_top: Vec<bool> },
    Cubicles { groups: Vec<CubicleGroup> },
    Shelves {
        count: usize,
        standoff: f64,
        size: f64,
        depth: f64,
    },
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec3,
    pub max: Vec3,
}

impl Bounds {
    pub fn intersects(&self, o: &Obstacle) -> bool {
        match o {
            Obstacle::Box { min, max } => (0..3).all(|i| min[i] <= self.max[i] && max[i] >= self.min[i]),
            Obstacle::Sphere { center, radius } => {
                let d2: f64 = (0..3)
                    .map(|i| {
                        let c = center[i].clamp(self.min[i], self.max[i]);
                        (c - center[i]).powi(2)
                    })
                    .sum();
                d2 <= radius * radius
            }
        }
    }
}

/// How task endpoints are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TaskMode {
    UniformFree,
    /// End effector within `tolerance` of one of the targets.
    IkRegion { targets: Vec<Vec3>, tolerance: f64 },
}

impl TaskMode {
    fn name(&self) -> &'static str {
        match self {
            TaskMode::UniformFree => "uniform_free",
            TaskMode::IkRegion { .. } => "ik_region",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: u32,
    pub distribution: DistributionId,
    pub seed: u64,
    pub bounds: Bounds,
    pub obstacles: Vec<Obstacle>,
    pub space: SpaceSpec,
    pub robot: RobotModel,
    /// Edge discretization step.
    pub step: f64,
    pub layout: Layout,
    pub task_mode: TaskMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub start: Configuration,
    pub goal: Configuration,
}

/// A full planning problem: robot and environment plus a task.
#[derive(Debug, Clone)]
pub struct MPProblem {
    pub env: std::sync::Arc<Environment>,
    pub task: Task,
}

impl Environment {
    /// Environment with explicit geometry, for fixtures and tests.
    pub fn custom(
        space: SpaceSpec,
        robot: RobotModel,
        bounds: Bounds,
        obstacles: Vec<Obstacle>,
        step: f64,
    ) -> Self {
        Environment {
            version: ENV_FORMAT_VERSION,
            distribution: DistributionId::Custom,
            seed: 0,
            bounds,
            obstacles,
            space,
            robot,
            step,
            layout: Layout::Custom,
            task_mode: TaskMode::UniformFree,
        }
    }

    /// Empty planar box `[0, w] x [0, h]` for a point robot.
    pub fn empty_plane(w: f64, h: f64, step: f64) -> Self {
        Self::custom(
            SpaceSpec::euclidean(&[(0.0, w), (0.0, h)]).expect("positive extents"),
            RobotModel::point2d(),
            Bounds {
                min: [0.0, 0.0, -1.0],
                max: [w, h, 1.0],
            },
            Vec::new(),
            step,
        )
    }

    pub fn generate(dist: DistributionId, seed: u64) -> Result<Self> {
        match dist {
            DistributionId::RandomPassage => Ok(gen_random_passage(seed, 8)),
            DistributionId::Cubicles => Ok(gen_cubicles(seed)),
            DistributionId::Shelves => Ok(gen_shelves(seed)),
            DistributionId::Custom => Err(Error::Contract("custom environments are not generated".into())),
        }
    }

    pub fn oracle(&self) -> ValidityOracle {
        self.oracle_with_step(self.step)
    }

    pub fn oracle_with_step(&self, step: f64) -> ValidityOracle {
        ValidityOracle::new(
            self.space.clone(),
            self.robot.clone(),
            self.obstacles.clone(),
            step,
        )
        .expect("environment geometry was validated at construction")
    }

    pub fn config(&self, coords: Vec<f64>) -> Result<Configuration> {
        self.space.config(coords)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Environment = serde_json::from_str(text)?;
        if env.version != ENV_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: env.version,
                expected: ENV_FORMAT_VERSION,
            });
        }
        env.space.validate()?;
        env.robot.validate()?;
        for o in &env.obstacles {
            o.validate()?;
        }
        Ok(env)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Conventional file location `<root>/<dist>/<seed>.env.json`.
    pub fn file_path(root: &Path, dist: DistributionId, seed: u64) -> std::path::PathBuf {
        root.join(dist.name()).join(format!("{seed}.env.json"))
    }
}

/// Point robot crossing `n_passages` walls, each open at either the top or
/// the bottom.
pub fn gen_random_passage(seed: u64, n_passages: usize) -> Environment {
    use constants::random_passage::*;
    assert!(n_passages >= 1, "contract violation: need at least one passage");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = WALL_SPACING * (n_passages as f64 + 1.0);
    let blocked_top: Vec<bool> = (0..n_passages).map(|_| rng.random_bool(0.5)).collect();
    let mut obstacles = Vec::with_capacity(2 * n_passages);
    for (i, &top) in blocked_top.iter().enumerate() {
        let xc = WALL_SPACING * (i as f64 + 1.0);
        let (x0, x1) = (xc - WALL_THICKNESS / 2.0, xc + WALL_THICKNESS / 2.0);
        obstacles.push(Obstacle::rect([x0, GAP_WIDTH], [x1, HEIGHT - GAP_WIDTH]));
        if top {
            obstacles.push(Obstacle::rect([x0, HEIGHT - GAP_WIDTH], [x1, HEIGHT]));
        } else {
            obstacles.push(Obstacle::rect([x0, 0.0], [x1, GAP_WIDTH]));
        }
    }
    Environment {
        version: ENV_FORMAT_VERSION,
        distribution: DistributionId::RandomPassage,
        seed,
        bounds: Bounds {
            min: [0.0, 0.0, -1.0],
            max: [width, HEIGHT, 1.0],
        },
        obstacles,
        space: SpaceSpec::euclidean(&[(0.0, width), (0.0, HEIGHT)]).unwrap(),
        robot: RobotModel::point2d(),
        step: WALL_THICKNESS.min(GAP_WIDTH) / 2.0,
        layout: Layout::RandomPassage { blocked_top },
        task_mode: TaskMode::UniformFree,
    }
}

/// Planar mobile manipulator among nine groups of cubicles.
pub fn gen_cubicles(seed: u64) -> Environment {
    use constants::cubicles::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<CubicleGroup> = (0..GROUP_SLOTS)
        .map(|_| CubicleGroup {
            count: rng.random_range(1..=MAX_PER_GROUP),
            facing_up: rng.random_bool(0.5),
        })
        .collect();
    let mut obstacles = Vec::new();
    let mut targets = Vec::new();
    let per_row = (GROUP_SLOTS as f64).sqrt().round() as usize;
    for (slot, g) in groups.iter().enumerate() {
        let cx = SLOT_PITCH * (slot % per_row) as f64 + SLOT_PITCH / 2.0;
        let cy = SLOT_PITCH * (slot / per_row) as f64 + SLOT_PITCH / 2.0;
        let total = g.count as f64 * INNER_WIDTH + (g.count as f64 + 1.0) * WALL;
        let x_left = cx - total / 2.0;
        // interior spans [cy - DEPTH/2, cy + DEPTH/2]; the back wall closes it
        let (back0, back1) = if g.facing_up {
            (cy - DEPTH / 2.0 - WALL, cy - DEPTH / 2.0)
        } else {
            (cy + DEPTH / 2.0, cy + DEPTH / 2.0 + WALL)
        };
        let y_lo = back0.min(cy - DEPTH / 2.0);
        let y_hi = back1.max(cy + DEPTH / 2.0);
        obstacles.push(Obstacle::rect([x_left, back0], [x_left + total, back1]));
        for k in 0..=g.count {
            let x = x_left + k as f64 * (INNER_WIDTH + WALL);
            obstacles.push(Obstacle::rect([x, y_lo], [x + WALL, y_hi]));
            if k < g.count {
                targets.push([x + WALL + INNER_WIDTH / 2.0, cy, 0.0]);
            }
        }
    }
    let mut dims = vec![Dim::linear(0.0, ROOM), Dim::linear(0.0, ROOM)];
    dims.extend(std::iter::repeat_n(Dim::angular(), 4));
    Environment {
        version: ENV_FORMAT_VERSION,
        distribution: DistributionId::Cubicles,
        seed,
        bounds: Bounds {
            min: [0.0, 0.0, -1.0],
            max: [ROOM, ROOM, 1.0],
        },
        obstacles,
        space: SpaceSpec::new(dims, ANGULAR_SCALE).unwrap(),
        robot: RobotModel {
            kind: RobotKind::PlanarMobileManipulator {
                base_radius: BASE_RADIUS,
                link_lengths: [LINK_LENGTH; 4],
                link_radii: [LINK_RADIUS; 4],
            },
            sphere_spacing: LINK_RADIUS,
        },
        step: WALL / 2.0,
        layout: Layout::Cubicles { groups },
        task_mode: TaskMode::IkRegion {
            targets,
            tolerance: IK_TOLERANCE,
        },
    }
}

/// Five-joint arm reaching into a shelf unit of random count, standoff,
/// size, and depth.
pub fn gen_shelves(seed: u64) -> Environment {
    use constants::shelves::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(COUNT.0..=COUNT.1);
    let standoff = rng.random_range(STANDOFF.0..STANDOFF.1);
    let size = rng.random_range(SIZE.0..SIZE.1);
    let depth = rng.random_range(DEPTH.0..DEPTH.1);

    let shoulder = LINK_LENGTHS[0];
    let half_w = WIDTH_PER_SIZE * size / 2.0;
    let z0 = shoulder - count as f64 * size / 2.0;
    let (x0, x1) = (standoff, standoff + depth);
    let half_b = BOARD / 2.0;
    let mut obstacles = Vec::new();
    for i in 0..=count {
        let z = z0 + i as f64 * size;
        obstacles.push(Obstacle::aabb([x0, -half_w, z - half_b], [x1, half_w, z + half_b]));
    }
    let (zb, zt) = (z0 - half_b, z0 + count as f64 * size + half_b);
    obstacles.push(Obstacle::aabb([x0, -half_w - BOARD, zb], [x1, -half_w, zt]));
    obstacles.push(Obstacle::aabb([x0, half_w, zb], [x1, half_w + BOARD, zt]));
    obstacles.push(Obstacle::aabb([x1, -half_w - BOARD, zb], [x1 + BOARD, half_w + BOARD, zt]));
    let targets = (0..count)
        .map(|i| [standoff + depth / 2.0, 0.0, z0 + (i as f64 + 0.5) * size])
        .collect();
    let reach: f64 = LINK_LENGTHS.iter().sum::<f64>() + LINK_RADIUS;
    Environment {
        version: ENV_FORMAT_VERSION,
        distribution: DistributionId::Shelves,
        seed,
        bounds: Bounds {
            min: [-reach, -reach, shoulder - reach],
            max: [reach, reach, shoulder + reach],
        },
        obstacles,
        space: SpaceSpec::new(vec![Dim::angular(); 5], 1.0).unwrap(),
        robot: RobotModel {
            kind: RobotKind::Arm5Dof {
                base_position: [0.0, 0.0, 0.0],
                link_lengths: LINK_LENGTHS,
                link_radii: [LINK_RADIUS; 5],
            },
            sphere_spacing: LINK_RADIUS,
        },
        step: BOARD / 2.0,
        layout: Layout::Shelves {
            count,
            standoff,
            size,
            depth,
        },
        task_mode: TaskMode::IkRegion {
            targets,
            tolerance: IK_TOLERANCE,
        },
    }
}

fn dist3(a: &Vec3, b: &Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Draws a valid configuration uniformly from the environment's free space.
pub fn sample_free<R: Rng + ?Sized>(env: &Environment, oracle: &ValidityOracle, rng: &mut R) -> Result<Configuration> {
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let c = env.space.sample_uniform(rng);
        if oracle.is_valid_uncounted(&c) {
            return Ok(c);
        }
    }
    Err(Error::SamplingFailure {
        mode: TaskMode::UniformFree.name().into(),
        attempts: MAX_SAMPLING_ATTEMPTS,
    })
}

/// Rejection-samples a collision-free configuration whose end effector lies
/// within `tolerance` of `target`.
///
/// Proposals are uniform over a region that contains every solution (joint
/// space restricted to configurations that can reach the target), so the
/// accepted samples are uniform over the solution set.
pub fn sample_ik<R: Rng + ?Sized>(
    env: &Environment,
    oracle: &ValidityOracle,
    target: &Vec3,
    tolerance: f64,
    rng: &mut R,
) -> Result<Configuration> {
    let space = &env.space;
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let mut c: Vec<f64> = space
            .sample_uniform(rng)
            .into_inner();
        match &env.robot.kind {
            RobotKind::Point2d => {}
            RobotKind::PlanarMobileManipulator { link_lengths, .. } => {
                let reach: f64 = link_lengths.iter().sum::<f64>() + tolerance;
                for (axis, v) in c.iter_mut().take(2).enumerate() {
                    let d = &space.dims[axis];
                    let lo = (target[axis] - reach).max(d.lower);
                    let hi = (target[axis] + reach).min(d.upper);
                    if lo < hi {
                        *v = rng.random_range(lo..hi);
                    }
                }
            }
            RobotKind::Arm5Dof { base_position, .. } => {
                let bearing = (target[1] - base_position[1]).atan2(target[0] - base_position[0]);
                let w = constants::shelves::YAW_WINDOW;
                c[0] = crate::space::wrap_angle(bearing + rng.random_range(-w..w));
            }
        }
        let c = Configuration::from_raw(c);
        if dist3(&env.robot.end_effector(&c), target) <= tolerance && oracle.is_valid_uncounted(&c) {
            return Ok(c);
        }
    }
    Err(Error::SamplingFailure {
        mode: "ik_region".into(),
        attempts: MAX_SAMPLING_ATTEMPTS,
    })
}

/// Samples a task whose endpoints are both valid in `env`.
pub fn sample_task<R: Rng + ?Sized>(env: &Environment, mode: &TaskMode, rng: &mut R) -> Result<Task> {
    let oracle = env.oracle();
    match mode {
        TaskMode::UniformFree => {
            let start = sample_free(env, &oracle, rng)?;
            let goal = sample_free(env, &oracle, rng)?;
            Ok(Task { start, goal })
        }
        TaskMode::IkRegion { targets, tolerance } => {
            if targets.is_empty() {
                return Err(Error::SamplingFailure {
                    mode: mode.name().into(),
                    attempts: 0,
                });
            }
            let i = rng.random_range(0..targets.len());
            let mut j = rng.random_range(0..targets.len());
            if targets.len() > 1 {
                while j == i {
                    j = rng.random_range(0..targets.len());
                }
            }
            let start = sample_ik(env, &oracle, &targets[i], *tolerance, rng)?;
            let goal = sample_ik(env, &oracle, &targets[j], *tolerance, rng)?;
            Ok(Task { start, goal })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::DimKind;
    use std::collections::{HashSet, VecDeque};
    use std::f64::consts::TAU;

    #[test]
    fn random_passage_layout_count() {
        let mut layouts = HashSet::new();
        for seed in 0..4000 {
            let env = gen_random_passage(seed, 8);
            layouts.insert(serde_json::to_string(&env.obstacles).unwrap());
        }
        assert_eq!(layouts.len(), 256);

        let ones: HashSet<_> = (0..200)
            .map(|s| serde_json::to_string(&gen_random_passage(s, 1).obstacles).unwrap())
            .collect();
        assert_eq!(ones.len(), 2);
    }

    #[test]
    fn generators_are_deterministic() {
        for seed in [0, 7, 123456] {
            assert_eq!(
                gen_random_passage(seed, 8).to_json().unwrap(),
                gen_random_passage(seed, 8).to_json().unwrap()
            );
            assert_eq!(gen_cubicles(seed).to_json().unwrap(), gen_cubicles(seed).to_json().unwrap());
            assert_eq!(gen_shelves(seed).to_json().unwrap(), gen_shelves(seed).to_json().unwrap());
        }
        assert_ne!(gen_cubicles(1).obstacles, gen_cubicles(2).obstacles);
    }

    #[test]
    fn obstacles_intersect_bounds() {
        for seed in 0..20 {
            for env in [gen_random_passage(seed, 8), gen_cubicles(seed), gen_shelves(seed)] {
                assert!(env.obstacles.iter().all(|o| env.bounds.intersects(o)));
            }
        }
    }

    #[test]
    fn random_passage_free_space_connected() {
        use constants::random_passage::HEIGHT;
        for seed in 0..20 {
            let env = gen_random_passage(seed, 8);
            let o = env.oracle();
            let res = 0.25;
            let (nx, ny) = ((env.bounds.max[0] / res) as usize, (HEIGHT / res) as usize);
            let free = |i: usize, j: usize| {
                o.is_valid_uncounted(&env.config(vec![(i as f64 + 0.5) * res, (j as f64 + 0.5) * res]).unwrap())
            };
            let mut seen = vec![vec![false; ny]; nx];
            let mut total = 0;
            let mut start = None;
            for i in 0..nx {
                for j in 0..ny {
                    if free(i, j) {
                        total += 1;
                        start.get_or_insert((i, j));
                    }
                }
            }
            let mut q = VecDeque::from([start.unwrap()]);
            seen[start.unwrap().0][start.unwrap().1] = true;
            let mut reached = 1;
            while let Some((i, j)) = q.pop_front() {
                let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
                for (a, b) in nbrs {
                    if a < nx && b < ny && !seen[a][b] && free(a, b) {
                        seen[a][b] = true;
                        reached += 1;
                        q.push_back((a, b));
                    }
                }
            }
            assert_eq!(reached, total, "seed {seed} has disconnected free space");
        }
    }

    #[test]
    fn cubicles_space_and_base_exclusion() {
        let env = gen_cubicles(3);
        assert_eq!(
            env.space.kinds(),
            vec![
                DimKind::Linear,
                DimKind::Linear,
                DimKind::Angular,
                DimKind::Angular,
                DimKind::Angular,
                DimKind::Angular
            ]
        );
        let Layout::Cubicles { groups } = &env.layout else {
            panic!("wrong layout")
        };
        assert_eq!(groups.len(), 9);
        assert!(groups.iter().all(|g| (1..=4).contains(&g.count)));
        use constants::cubicles::*;
        assert!(INNER_WIDTH > 2.0 * LINK_RADIUS && INNER_WIDTH < 2.0 * BASE_RADIUS);
        let TaskMode::IkRegion { targets, .. } = &env.task_mode else {
            panic!("cubicles use ik tasks")
        };
        assert_eq!(targets.len(), groups.iter().map(|g| g.count).sum::<usize>());
        let o = env.oracle();
        for t in targets {
            // base centered in the cubicle, arm folded back over it
            let c = env
                .config(vec![t[0], t[1], std::f64::consts::FRAC_PI_2, TAU / 2.0, 0.0, TAU / 2.0])
                .unwrap();
            assert_eq!(o.validate_batch(&[c]).unwrap(), vec![false]);
        }
    }

    #[test]
    fn shelves_parameters_in_range() {
        use constants::shelves::*;
        for seed in 0..1000 {
            let Layout::Shelves {
                count,
                standoff,
                size,
                depth,
            } = gen_shelves(seed).layout
            else {
                panic!("wrong layout")
            };
            assert!((COUNT.0..=COUNT.1).contains(&count));
            assert!((STANDOFF.0..STANDOFF.1).contains(&standoff));
            assert!((SIZE.0..SIZE.1).contains(&size));
            assert!((DEPTH.0..DEPTH.1).contains(&depth));
        }
    }

    #[test]
    fn uniform_tasks_in_empty_env() {
        let env = Environment::empty_plane(10.0, 10.0, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = sample_task(&env, &TaskMode::UniformFree, &mut rng).unwrap();
        let o = env.oracle();
        assert_eq!(o.validate_batch(&[t.start, t.goal]).unwrap(), vec![true, true]);
    }

    #[test]
    fn unreachable_ik_target_fails() {
        let env = gen_shelves(0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mode = TaskMode::IkRegion {
            targets: vec![[10.0, 10.0, 10.0]],
            tolerance: 0.0,
        };
        match sample_task(&env, &mode, &mut rng) {
            Err(Error::SamplingFailure { mode, .. }) => assert_eq!(mode, "ik_region"),
            other => panic!("expected sampling failure, got {other:?}"),
        }
    }

    #[test]
    fn ik_tasks_reach_their_targets() {
        for (env, seeds) in [(gen_shelves(4), 0..5), (gen_cubicles(4), 0..5)] {
            let TaskMode::IkRegion { targets, tolerance } = &env.task_mode else {
                unreachable!()
            };
            let o = env.oracle();
            for s in seeds {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let t = sample_task(&env, &env.task_mode, &mut rng).unwrap();
                for c in [&t.start, &t.goal] {
                    let ee = env.robot.end_effector(c);
                    assert!(targets.iter().any(|tg| dist3(tg, &ee) <= *tolerance));
                    assert!(o.validate_batch(std::slice::from_ref(c)).unwrap()[0]);
                }
            }
        }
    }

    #[test]
    fn file_round_trip_and_version_check() {
        let env = gen_cubicles(11);
        let back = Environment::from_json(&env.to_json().unwrap()).unwrap();
        assert_eq!(back, env);
        let mut v: serde_json::Value = serde_json::from_str(&env.to_json().unwrap()).unwrap();
        v["version"] = 99.into();
        assert!(matches!(
            Environment::from_json(&v.to_string()),
            Err(Error::FormatVersion { found: 99, .. })
        ));
    }
}
