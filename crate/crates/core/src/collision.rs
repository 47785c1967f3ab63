//! Sphere-approximated robots, workspace obstacles, and the batched validity
//! oracle that every planner goes through.
//!
//! All collision-check cost is accounted in [`CCStats`]: configurations
//! checked, batch calls issued, and edges validated.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ConfigKey, Configuration, SpaceSpec};

pub type Vec3 = [f64; 3];

/// Closed workspace obstacle; its boundary counts as collision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Obstacle {
    Box { min: Vec3, max: Vec3 },
    Sphere { center: Vec3, radius: f64 },
}

impl Obstacle {
    pub fn aabb(min: Vec3, max: Vec3) -> Self {
        Obstacle::Box { min, max }
    }

    /// Box spanning `[-1, 1]` in z, for planar workspaces.
    pub fn rect(min: [f64; 2], max: [f64; 2]) -> Self {
        Obstacle::Box {
            min: [min[0], min[1], -1.0],
            max: [max[0], max[1], 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Obstacle::Box { min, max } => {
                if (0..3).all(|i| min[i] < max[i]) {
                    Ok(())
                } else {
                    Err(Error::Contract(format!("box min {min:?} not below max {max:?}")))
                }
            }
            Obstacle::Sphere { radius, .. } if *radius > 0.0 => Ok(()),
            Obstacle::Sphere { radius, .. } => {
                Err(Error::Contract(format!("sphere radius {radius} must be positive")))
            }
        }
    }

    /// Smallest extent of the obstacle along any axis.
    pub fn min_extent(&self, planar: bool) -> f64 {
        match self {
            Obstacle::Box { min, max } => {
                let axes = if planar { 2 } else { 3 };
                (0..axes).map(|i| max[i] - min[i]).fold(f64::INFINITY, f64::min)
            }
            Obstacle::Sphere { radius, .. } => 2.0 * radius,
        }
    }

    #[inline]
    pub fn intersects(&self, s: &Sphere) -> bool {
        match self {
            Obstacle::Box { min, max } => sphere_box_intersects(s, min, max),
            Obstacle::Sphere { center, radius } => {
                let r = radius + s.radius;
                dist2(center, &s.center) <= r * r
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

#[inline]
fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

#[inline]
fn sphere_box_intersects(s: &Sphere, min: &Vec3, max: &Vec3) -> bool {
    let mut d2 = 0.0;
    for i in 0..3 {
        let c = s.center[i];
        if c < min[i] {
            d2 += (min[i] - c).powi(2);
        } else if c > max[i] {
            d2 += (c - max[i]).powi(2);
        }
    }
    d2 <= s.radius * s.radius
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RobotKind {
    /// Configuration `(x, y)` is the robot's position.
    Point2d,
    /// Disc base at `(x, y)` carrying a 4-link planar arm; configuration
    /// `(x, y, q1..q4)` with relative joint angles.
    PlanarMobileManipulator {
        base_radius: f64,
        link_lengths: [f64; 4],
        link_radii: [f64; 4],
    },
    /// Fixed-base arm: base yaw, a vertical column, three pitch joints, and a
    /// wrist yaw; configuration `(q1..q5)`.
    Arm5Dof {
        base_position: Vec3,
        link_lengths: [f64; 5],
        link_radii: [f64; 5],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub kind: RobotKind,
    /// Maximum gap between consecutive link spheres.
    pub sphere_spacing: f64,
}

impl RobotModel {
    pub fn point2d() -> Self {
        RobotModel {
            kind: RobotKind::Point2d,
            sphere_spacing: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |xs: &[f64]| xs.iter().all(|&v| v > 0.0);
        let ok = self.sphere_spacing > 0.0
            && match &self.kind {
                RobotKind::Point2d => true,
                RobotKind::PlanarMobileManipulator {
                    base_radius,
                    link_lengths,
                    link_radii,
                } => *base_radius > 0.0 && positive(link_lengths) && positive(link_radii),
                RobotKind::Arm5Dof {
                    link_lengths,
                    link_radii,
                    ..
                } => positive(link_lengths) && positive(link_radii),
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Contract("robot radii, lengths and spacing must be positive".into()))
        }
    }

    pub fn dof(&self) -> usize {
        match self.kind {
            RobotKind::Point2d => 2,
            RobotKind::PlanarMobileManipulator { .. } => 6,
            RobotKind::Arm5Dof { .. } => 5,
        }
    }

    pub fn is_planar(&self) -> bool {
        !matches!(self.kind, RobotKind::Arm5Dof { .. })
    }

    /// Sphere cloud of the robot at configuration `c`.
    pub fn forward_kinematics(&self, c: &Configuration) -> Vec<Sphere> {
        let mut out = Vec::new();
        self.spheres_into(c.coords(), &mut out);
        out
    }

    /// Center of the last sphere on the last link.
    pub fn end_effector(&self, c: &Configuration) -> Vec3 {
        match &self.kind {
            RobotKind::Point2d => [c[0], c[1], 0.0],
            _ => {
                let mut frames = Vec::new();
                self.joint_points(c.coords(), &mut frames);
                *frames.last().unwrap()
            }
        }
    }

    /// Start of each link followed by the tip of the last link.
    fn joint_points(&self, q: &[f64], out: &mut Vec<Vec3>) {
        match &self.kind {
            RobotKind::Point2d => out.push([q[0], q[1], 0.0]),
            RobotKind::PlanarMobileManipulator { link_lengths, .. } => {
                let mut p = [q[0], q[1], 0.0];
                let mut heading = 0.0;
                out.push(p);
                for (k, len) in link_lengths.iter().enumerate() {
                    heading += q[2 + k];
                    p = [p[0] + len * heading.cos(), p[1] + len * heading.sin(), 0.0];
                    out.push(p);
                }
            }
            RobotKind::Arm5Dof {
                base_position,
                link_lengths,
                ..
            } => {
                let mut rot = rot_z(q[0]);
                let mut p = *base_position;
                out.push(p);
                p = add(&p, &mat_vec(&rot, &[0.0, 0.0, link_lengths[0]]));
                out.push(p);
                for k in 1..5 {
                    let joint = if k == 4 { rot_z(q[4]) } else { rot_y(q[k]) };
                    rot = mat_mul(&rot, &joint);
                    p = add(&p, &mat_vec(&rot, &[link_lengths[k], 0.0, 0.0]));
                    out.push(p);
                }
            }
        }
    }

    fn spheres_into(&self, q: &[f64], out: &mut Vec<Sphere>) {
        out.clear();
        match &self.kind {
            RobotKind::Point2d => out.push(Sphere {
                center: [q[0], q[1], 0.0],
                radius: 0.0,
            }),
            RobotKind::PlanarMobileManipulator {
                base_radius,
                link_radii,
                ..
            } => {
                let mut joints = Vec::with_capacity(5);
                self.joint_points(q, &mut joints);
                out.push(Sphere {
                    center: joints[0],
                    radius: *base_radius,
                });
                for k in 0..4 {
                    spheres_along(&joints[k], &joints[k + 1], link_radii[k], self.sphere_spacing, out);
                }
            }
            RobotKind::Arm5Dof { link_radii, .. } => {
                let mut joints = Vec::with_capacity(6);
                self.joint_points(q, &mut joints);
                out.push(Sphere {
                    center: joints[0],
                    radius: link_radii[0],
                });
                for k in 0..5 {
                    spheres_along(&joints[k], &joints[k + 1], link_radii[k], self.sphere_spacing, out);
                }
            }
        }
    }
}

/// Spheres from `a` (exclusive) to `b` (inclusive), at most `spacing` apart.
fn spheres_along(a: &Vec3, b: &Vec3, radius: f64, spacing: f64, out: &mut Vec<Sphere>) {
    let len = dist2(a, b).sqrt();
    let n = ((len / spacing).ceil() as usize).max(1);
    for i in 1..=n {
        let t = i as f64 / n as f64;
        out.push(Sphere {
            center: [
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ],
            radius,
        });
    }
}

type Mat3 = [[f64; 3]; 3];

fn rot_z(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Snapshot of collision-check cost counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CCStats {
    pub configs_checked: u64,
    pub batch_calls: u64,
    pub edges_checked: u64,
}

impl CCStats {
    pub fn since(&self, earlier: &CCStats) -> CCStats {
        CCStats {
            configs_checked: self.configs_checked - earlier.configs_checked,
            batch_calls: self.batch_calls - earlier.batch_calls,
            edges_checked: self.edges_checked - earlier.edges_checked,
        }
    }
}

impl std::ops::Add for CCStats {
    type Output = CCStats;

    fn add(self, o: CCStats) -> CCStats {
        CCStats {
            configs_checked: self.configs_checked + o.configs_checked,
            batch_calls: self.batch_calls + o.batch_calls,
            edges_checked: self.edges_checked + o.edges_checked,
        }
    }
}

#[derive(Debug, Default)]
struct Counters {
    configs: AtomicU64,
    batches: AtomicU64,
    edges: AtomicU64,
}

/// Ordered endpoint pair of an edge, bitwise.
pub type EdgeKey = (ConfigKey, ConfigKey);

/// Records every validated edge and batch size, for accounting audits.
#[derive(Debug, Default)]
pub struct Audit {
    pub edges: HashMap<EdgeKey, u32>,
    pub batch_sizes: Vec<u64>,
}

impl Audit {
    /// Number of edge validations beyond the first for each ordered pair.
    pub fn duplicate_edges(&self) -> u64 {
        self.edges.values().map(|&n| u64::from(n.saturating_sub(1))).sum()
    }
}

/// Result of validating one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeOutcome {
    /// Every interpolated configuration, endpoints included, is valid.
    pub valid: bool,
    pub from_valid: bool,
    pub to_valid: bool,
}

#[derive(Debug)]
struct Scene {
    space: SpaceSpec,
    robot: RobotModel,
    obstacles: Vec<Obstacle>,
    step: f64,
}

/// Deterministic black-box validity checker with exact cost accounting.
///
/// Geometry is shared and immutable; counters are atomic so a single oracle
/// can serve concurrent callers.
#[derive(Debug)]
pub struct ValidityOracle {
    scene: Arc<Scene>,
    counters: Counters,
    audit: Option<Mutex<Audit>>,
}

impl ValidityOracle {
    pub fn new(
        space: SpaceSpec,
        robot: RobotModel,
        obstacles: Vec<Obstacle>,
        step: f64,
    ) -> Result<Self> {
        space.validate()?;
        robot.validate()?;
        if space.dim() != robot.dof() {
            return Err(Error::DimensionMismatch {
                expected: robot.dof(),
                got: space.dim(),
            });
        }
        for o in &obstacles {
            o.validate()?;
        }
        if !(step > 0.0) {
            return Err(Error::Contract(format!("edge step must be positive, got {step}")));
        }
        Ok(ValidityOracle {
            scene: Arc::new(Scene {
                space,
                robot,
                obstacles,
                step,
            }),
            counters: Counters::default(),
            audit: None,
        })
    }

    /// Same geometry, zeroed counters, no audit.
    pub fn fresh(&self) -> Self {
        ValidityOracle {
            scene: Arc::clone(&self.scene),
            counters: Counters::default(),
            audit: None,
        }
    }

    pub fn with_audit(mut self) -> Self {
        self.audit = Some(Mutex::new(Audit::default()));
        self
    }

    pub fn take_audit(&self) -> Option<Audit> {
        self.audit
            .as_ref()
            .map(|m| std::mem::take(&mut *m.lock().unwrap()))
    }

    pub fn with_audit_ref<T>(&self, f: impl FnOnce(&Audit) -> T) -> Option<T> {
        self.audit.as_ref().map(|m| f(&m.lock().unwrap()))
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.scene.space
    }

    pub fn robot(&self) -> &RobotModel {
        &self.scene.robot
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.scene.obstacles
    }

    pub fn step(&self) -> f64 {
        self.scene.step
    }

    pub fn stats(&self) -> CCStats {
        CCStats {
            configs_checked: self.counters.configs.load(Ordering::Relaxed),
            batch_calls: self.counters.batches.load(Ordering::Relaxed),
            edges_checked: self.counters.edges.load(Ordering::Relaxed),
        }
    }

    /// Validity of a single configuration with no cost accounting.
    pub fn is_valid_uncounted(&self, c: &Configuration) -> bool {
        let mut buf = Vec::new();
        self.coords_valid(c.coords(), &mut buf)
    }

    fn coords_valid(&self, q: &[f64], buf: &mut Vec<Sphere>) -> bool {
        let scene = &*self.scene;
        if !scene.space.in_bounds_coords(q) {
            return false;
        }
        if let RobotKind::Point2d = scene.robot.kind {
            let s = Sphere {
                center: [q[0], q[1], 0.0],
                radius: 0.0,
            };
            return !scene.obstacles.iter().any(|o| o.intersects(&s));
        }
        scene.robot.spheres_into(q, buf);
        !buf
            .iter()
            .any(|s| scene.obstacles.iter().any(|o| o.intersects(s)))
    }

    fn record_batch(&self, size: u64) {
        self.counters.configs.fetch_add(size, Ordering::Relaxed);
        self.counters.batches.fetch_add(1, Ordering::Relaxed);
        if let Some(a) = &self.audit {
            a.lock().unwrap().batch_sizes.push(size);
        }
    }

    /// Validates a nonempty batch as one call.
    pub fn validate_batch(&self, cs: &[Configuration]) -> Result<Vec<bool>> {
        if cs.is_empty() {
            return Err(Error::Contract("validate_batch called with an empty batch".into()));
        }
        self.record_batch(cs.len() as u64);
        let mut buf = Vec::new();
        Ok(cs
            .iter()
            .map(|c| c.dim() == self.space().dim() && self.coords_valid(c.coords(), &mut buf))
            .collect())
    }

    /// Validates several edges in a single batch call.
    pub fn validate_edges(&self, edges: &[(&Configuration, &Configuration)]) -> Vec<EdgeOutcome> {
        if edges.is_empty() {
            return Vec::new();
        }
        let space = self.space();
        let dim = space.dim();
        let mut flat = Vec::new();
        let mut total = 0u64;
        let mut buf = Vec::new();
        let mut out = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            flat.clear();
            let n = space.interpolate_flat(a, b, self.step(), &mut flat);
            total += n as u64;
            // every configuration is charged; evaluation stops at the first
            // invalid interior configuration since the verdict is then fixed
            let from_valid = self.coords_valid(&flat[..dim], &mut buf);
            let to_valid = if n == 1 {
                from_valid
            } else {
                self.coords_valid(&flat[(n - 1) * dim..], &mut buf)
            };
            let valid = from_valid
                && to_valid
                && (1..n.saturating_sub(1))
                    .all(|k| self.coords_valid(&flat[k * dim..(k + 1) * dim], &mut buf));
            out.push(EdgeOutcome {
                valid,
                from_valid,
                to_valid,
            });
        }
        self.record_batch(total);
        self.counters
            .edges
            .fetch_add(edges.len() as u64, Ordering::Relaxed);
        if let Some(a) = &self.audit {
            let mut a = a.lock().unwrap();
            for (from, to) in edges {
                *a.edges.entry((from.key(), to.key())).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn validate_edge(&self, from: &Configuration, to: &Configuration) -> bool {
        self.validate_edges(&[(from, to)])[0].valid
    }

    /// Full re-validation of a path's states and edges with no accounting
    /// side effects on this oracle.
    pub fn path_is_valid(&self, states: &[Configuration]) -> bool {
        let checker = self.fresh();
        match states {
            [] => false,
            [only] => checker.is_valid_uncounted(only),
            _ => states.windows(2).all(|w| checker.validate_edge(&w[0], &w[1])),
        }
    }
}

/// Collision-checking interface used by every planner.
///
/// Implemented by [`ValidityOracle`] and by caching wrappers that avoid
/// validating the same edge twice.
pub trait Validator {
    fn oracle(&self) -> &ValidityOracle;

    fn check_edges(&mut self, edges: &[(&Configuration, &Configuration)]) -> Vec<EdgeOutcome>;

    fn check_edge(&mut self, from: &Configuration, to: &Configuration) -> EdgeOutcome {
        self.check_edges(&[(from, to)])[0]
    }

    /// Validates configurations as one batch; an empty slice costs nothing.
    fn check_configs(&mut self, cs: &[Configuration]) -> Vec<bool> {
        if cs.is_empty() {
            Vec::new()
        } else {
            self.oracle().validate_batch(cs).expect("nonempty batch")
        }
    }

    fn space(&self) -> &SpaceSpec {
        self.oracle().space()
    }

    fn stats(&self) -> CCStats {
        self.oracle().stats()
    }
}

impl Validator for ValidityOracle {
    fn oracle(&self) -> &ValidityOracle {
        self
    }

    fn check_edges(&mut self, edges: &[(&Configuration, &Configuration)]) -> Vec<EdgeOutcome> {
        self.validate_edges(edges)
    }
}

impl Validator for &ValidityOracle {
    fn oracle(&self) -> &ValidityOracle {
        self
    }

    fn check_edges(&mut self, edges: &[(&Configuration, &Configuration)]) -> Vec<EdgeOutcome> {
        self.validate_edges(edges)
    }
}

/// Validator that remembers every edge outcome, so no ordered edge is
/// collision-checked twice.
#[derive(Debug)]
pub struct CachedValidator<'a> {
    oracle: &'a ValidityOracle,
    cache: HashMap<EdgeKey, EdgeOutcome>,
    hits: u64,
}

impl<'a> CachedValidator<'a> {
    pub fn new(oracle: &'a ValidityOracle) -> Self {
        CachedValidator {
            oracle,
            cache: HashMap::new(),
            hits: 0,
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn cached(&self, from: &Configuration, to: &Configuration) -> Option<EdgeOutcome> {
        self.cache.get(&(from.key(), to.key())).copied()
    }
}

impl Validator for CachedValidator<'_> {
    fn oracle(&self) -> &ValidityOracle {
        self.oracle
    }

    fn check_edges(&mut self, edges: &[(&Configuration, &Configuration)]) -> Vec<EdgeOutcome> {
        let keys: Vec<EdgeKey> = edges.iter().map(|(a, b)| (a.key(), b.key())).collect();
        let mut out: Vec<Option<EdgeOutcome>> = keys.iter().map(|k| self.cache.get(k).copied()).collect();
        let mut missing = Vec::new();
        let mut missing_idx = Vec::new();
        let mut queued: HashMap<&EdgeKey, usize> = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            if out[i].is_some() {
                self.hits += 1;
            } else if !queued.contains_key(k) {
                queued.insert(k, missing.len());
                missing.push(edges[i]);
                missing_idx.push(i);
            }
        }
        let fresh = self.oracle.validate_edges(&missing);
        for (j, o) in fresh.iter().enumerate() {
            self.cache.insert(keys[missing_idx[j]].clone(), *o);
        }
        for (i, k) in keys.iter().enumerate() {
            if out[i].is_none() {
                out[i] = Some(fresh[queued[k]]);
            }
        }
        out.into_iter().map(|o| o.unwrap()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Dim, SpaceSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn plane() -> SpaceSpec {
        SpaceSpec::euclidean(&[(0.0, 10.0), (0.0, 10.0)]).unwrap()
    }

    fn box_oracle(step: f64) -> ValidityOracle {
        ValidityOracle::new(
            plane(),
            RobotModel::point2d(),
            vec![Obstacle::rect([4.0, 4.0], [6.0, 6.0])],
            step,
        )
        .unwrap()
    }

    fn cfg(s: &SpaceSpec, v: &[f64]) -> Configuration {
        s.config(v.to_vec()).unwrap()
    }

    #[test]
    fn point_robot_fk() {
        let s = plane();
        let fk = RobotModel::point2d().forward_kinematics(&cfg(&s, &[1.0, 2.0]));
        assert_eq!(
            fk,
            vec![Sphere {
                center: [1.0, 2.0, 0.0],
                radius: 0.0
            }]
        );
    }

    fn manipulator() -> RobotModel {
        RobotModel {
            kind: RobotKind::PlanarMobileManipulator {
                base_radius: 1.5,
                link_lengths: [1.0; 4],
                link_radii: [0.3; 4],
            },
            sphere_spacing: 0.3,
        }
    }

    fn manip_space() -> SpaceSpec {
        let mut dims = vec![Dim::linear(0.0, 20.0), Dim::linear(0.0, 20.0)];
        dims.extend(std::iter::repeat(Dim::angular()).take(4));
        SpaceSpec::new(dims, 4.0).unwrap()
    }

    #[test]
    fn planar_manipulator_identity_pose_is_collinear() {
        let s = manip_space();
        let spheres = manipulator().forward_kinematics(&cfg(&s, &[5.0, 5.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(spheres[0].radius, 1.5);
        let mut last_x = 5.0;
        for sp in &spheres[1..] {
            assert!((sp.center[1] - 5.0).abs() < 1e-12);
            assert!(sp.center[0] > last_x);
            last_x = sp.center[0];
        }
        assert!((last_x - 9.0).abs() < 1e-12);
        for w in spheres[1..].windows(2) {
            assert!(dist2(&w[0].center, &w[1].center).sqrt() <= 0.3 + 1e-12);
        }
    }

    fn arm() -> RobotModel {
        RobotModel {
            kind: RobotKind::Arm5Dof {
                base_position: [0.1, -0.2, 0.05],
                link_lengths: [0.8, 1.0, 0.9, 0.5, 0.3],
                link_radii: [0.1; 5],
            },
            sphere_spacing: 0.1,
        }
    }

    type Mat4 = [[f64; 4]; 4];

    fn m4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    m[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        m
    }

    fn m4_trans(x: f64, y: f64, z: f64) -> Mat4 {
        [[1.0, 0.0, 0.0, x], [0.0, 1.0, 0.0, y], [0.0, 0.0, 1.0, z], [0.0, 0.0, 0.0, 1.0]]
    }

    fn m4_rz(t: f64) -> Mat4 {
        [[t.cos(), -t.sin(), 0.0, 0.0], [t.sin(), t.cos(), 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    }

    fn m4_ry(t: f64) -> Mat4 {
        [[t.cos(), 0.0, t.sin(), 0.0], [0.0, 1.0, 0.0, 0.0], [-t.sin(), 0.0, t.cos(), 0.0], [0.0, 0.0, 0.0, 1.0]]
    }

    #[test]
    fn arm_end_effector_matches_homogeneous_chain() {
        let s = SpaceSpec::new(vec![Dim::angular(); 5], 1.0).unwrap();
        let robot = arm();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let q = s.sample_uniform(&mut rng);
            let chain = [
                m4_trans(0.1, -0.2, 0.05),
                m4_rz(q[0]),
                m4_trans(0.0, 0.0, 0.8),
                m4_ry(q[1]),
                m4_trans(1.0, 0.0, 0.0),
                m4_ry(q[2]),
                m4_trans(0.9, 0.0, 0.0),
                m4_ry(q[3]),
                m4_trans(0.5, 0.0, 0.0),
                m4_rz(q[4]),
                m4_trans(0.3, 0.0, 0.0),
            ];
            let t = chain.iter().skip(1).fold(chain[0], |acc, m| m4_mul(&acc, m));
            let ee = robot.end_effector(&q);
            for i in 0..3 {
                assert!((ee[i] - t[i][3]).abs() < 1e-9);
            }
            let spheres = robot.forward_kinematics(&q);
            let tip = spheres.last().unwrap().center;
            for i in 0..3 {
                assert!((tip[i] - t[i][3]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn arm_straight_up_and_folded() {
        let s = SpaceSpec::new(vec![Dim::angular(); 5], 1.0).unwrap();
        // pitching the shoulder by -pi/2 points the rest of the arm up
        let q = cfg(&s, &[0.0, -FRAC_PI_2, 0.0, 0.0, 0.0]);
        let ee = arm().end_effector(&q);
        assert!((ee[0] - 0.1).abs() < 1e-9);
        assert!((ee[2] - (0.05 + 0.8 + 1.0 + 0.9 + 0.5 + 0.3)).abs() < 1e-9);
    }

    #[test]
    fn point_inside_box_is_invalid() {
        let o = box_oracle(0.1);
        let s = plane();
        let mask = o
            .validate_batch(&[cfg(&s, &[5.0, 5.0]), cfg(&s, &[1.0, 1.0])])
            .unwrap();
        assert_eq!(mask, vec![false, true]);
        assert_eq!(o.stats().configs_checked, 2);
        assert_eq!(o.stats().batch_calls, 1);
    }

    #[test]
    fn box_boundary_is_collision() {
        let o = box_oracle(0.1);
        let s = plane();
        let mask = o
            .validate_batch(&[
                cfg(&s, &[4.0, 5.0]),
                cfg(&s, &[6.0, 6.0]),
                cfg(&s, &[4.0 - 1e-9, 5.0]),
            ])
            .unwrap();
        assert_eq!(mask, vec![false, false, true]);
    }

    #[test]
    fn empty_environment_all_valid_and_out_of_bounds_invalid() {
        let o = ValidityOracle::new(plane(), RobotModel::point2d(), vec![], 0.1).unwrap();
        let s = plane();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch: Vec<_> = (0..50).map(|_| s.sample_uniform(&mut rng)).collect();
        assert!(o.validate_batch(&batch).unwrap().iter().all(|&v| v));
        let out = Configuration::from_raw(vec![11.0, 5.0]);
        assert_eq!(o.validate_batch(&[out]).unwrap(), vec![false]);
        assert_eq!(o.stats().configs_checked, 51);
    }

    #[test]
    fn empty_batch_is_contract_violation() {
        let o = box_oracle(0.1);
        assert!(matches!(o.validate_batch(&[]), Err(Error::Contract(_))));
        assert_eq!(o.stats(), CCStats::default());
    }

    #[test]
    fn edge_validation() {
        let o = box_oracle(0.1);
        let s = plane();
        assert!(o.validate_edge(&cfg(&s, &[1.0, 1.0]), &cfg(&s, &[1.0, 9.0])));
        let st = o.stats();
        assert_eq!(st.batch_calls, 1);
        assert_eq!(st.edges_checked, 1);
        assert_eq!(st.configs_checked, 81);
        assert!(!o.validate_edge(&cfg(&s, &[1.0, 5.0]), &cfg(&s, &[9.0, 5.0])));
        let r = o.validate_edges(&[(&cfg(&s, &[5.0, 5.0]), &cfg(&s, &[1.0, 1.0]))]);
        assert_eq!(
            r[0],
            EdgeOutcome {
                valid: false,
                from_valid: false,
                to_valid: true
            }
        );
    }

    #[test]
    fn thin_wall_resolution_limit() {
        // a wall of thickness 0.05 between samples 0.5 apart is missed
        let s = plane();
        let o = ValidityOracle::new(
            s.clone(),
            RobotModel::point2d(),
            vec![Obstacle::rect([5.2, 0.0], [5.25, 10.0])],
            0.5,
        )
        .unwrap();
        assert!(o.validate_edge(&cfg(&s, &[1.0, 5.0]), &cfg(&s, &[9.0, 5.0])));
        // a step no larger than the wall thickness catches it
        let fine = ValidityOracle::new(
            s.clone(),
            RobotModel::point2d(),
            vec![Obstacle::rect([5.2, 0.0], [5.25, 10.0])],
            0.05,
        )
        .unwrap();
        assert!(!fine.validate_edge(&cfg(&s, &[1.0, 5.0]), &cfg(&s, &[9.0, 5.0])));
    }

    #[test]
    fn batching_is_transparent() {
        let s = manip_space();
        let o = ValidityOracle::new(
            s.clone(),
            manipulator(),
            vec![
                Obstacle::rect([8.0, 8.0], [12.0, 9.0]),
                Obstacle::Sphere {
                    center: [4.0, 14.0, 0.0],
                    radius: 2.0,
                },
            ],
            0.2,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let batch: Vec<_> = (0..300).map(|_| s.sample_uniform(&mut rng)).collect();
        let mask = o.validate_batch(&batch).unwrap();
        let single: Vec<bool> = batch
            .iter()
            .map(|c| o.validate_batch(std::slice::from_ref(c)).unwrap()[0])
            .collect();
        assert_eq!(mask, single);
        assert!(mask.iter().any(|&v| v) && mask.iter().any(|&v| !v));
    }

    #[test]
    fn configs_checked_equals_batch_size_sum() {
        let o = box_oracle(0.25).with_audit();
        let s = plane();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let a = s.sample_uniform(&mut rng);
            let b = s.sample_uniform(&mut rng);
            if rng.random_bool(0.5) {
                o.validate_edges(&[(&a, &b), (&b, &a)]);
            } else {
                o.validate_batch(&[a, b]).unwrap();
            }
        }
        let audit = o.take_audit().unwrap();
        assert_eq!(audit.batch_sizes.iter().sum::<u64>(), o.stats().configs_checked);
        assert_eq!(audit.batch_sizes.len() as u64, o.stats().batch_calls);
    }

    #[test]
    fn sphere_box_agrees_with_point_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let min = [rng.random_range(-2.0..1.0), rng.random_range(-2.0..1.0), rng.random_range(-2.0..1.0)];
            let max = [
                min[0] + rng.random_range(0.1..2.0),
                min[1] + rng.random_range(0.1..2.0),
                min[2] + rng.random_range(0.1..2.0),
            ];
            let s = Sphere {
                center: [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
                radius: rng.random_range(0.05..1.5),
            };
            let hit = Obstacle::aabb(min, max).intersects(&s);
            // dense samples of the sphere shrunk by the clearance margin
            let r = s.radius - 1e-6;
            let mut sampled_hit = false;
            let n = 12;
            'outer: for i in 0..=n {
                for j in 0..=n {
                    for k in 0..=n {
                        let p = [
                            s.center[0] + r * (2.0 * i as f64 / n as f64 - 1.0),
                            s.center[1] + r * (2.0 * j as f64 / n as f64 - 1.0),
                            s.center[2] + r * (2.0 * k as f64 / n as f64 - 1.0),
                        ];
                        if dist2(&p, &s.center) > r * r {
                            continue;
                        }
                        if (0..3).all(|a| p[a] >= min[a] && p[a] <= max[a]) {
                            sampled_hit = true;
                            break 'outer;
                        }
                    }
                }
            }
            if sampled_hit {
                assert!(hit, "false negative for {s:?} vs {min:?}..{max:?}");
            }
            if hit {
                // closest point on the box lies within the sphere
                let c: Vec3 = std::array::from_fn(|a| s.center[a].clamp(min[a], max[a]));
                assert!(dist2(&c, &s.center) <= s.radius * s.radius);
            }
        }
    }

    #[test]
    fn cached_validator_never_repeats() {
        let o = box_oracle(0.1).with_audit();
        let s = plane();
        let a = cfg(&s, &[1.0, 1.0]);
        let b = cfg(&s, &[9.0, 9.0]);
        let mut v = CachedValidator::new(&o);
        let first = v.check_edges(&[(&a, &b), (&a, &b), (&b, &a)]);
        let again = v.check_edge(&a, &b);
        assert_eq!(first[0], again);
        assert_eq!(first[0], first[1]);
        assert_eq!(o.stats().edges_checked, 2);
        assert_eq!(o.take_audit().unwrap().duplicate_edges(), 0);
    }

    #[test]
    fn oracle_rejects_bad_geometry() {
        assert!(ValidityOracle::new(plane(), RobotModel::point2d(), vec![], 0.0).is_err());
        assert!(ValidityOracle::new(
            plane(),
            RobotModel::point2d(),
            vec![Obstacle::rect([1.0, 1.0], [1.0, 2.0])],
            0.1
        )
        .is_err());
        assert!(ValidityOracle::new(manip_space(), RobotModel::point2d(), vec![], 0.1).is_err());
        let s = SpaceSpec::new(vec![Dim::angular(); 5], 1.0).unwrap();
        assert!(ValidityOracle::new(s, arm(), vec![], 0.1).is_ok());
    }
}
