//! Configuration spaces built from linear and wrapped angular dimensions.
//!
//! Angular coordinates are normalized into `[0, 2π)` when a [`Configuration`]
//! is built through [`SpaceSpec::config`], so equality between configurations
//! is exact and stable across operations.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimKind {
    Linear,
    Angular,
}

/// One coordinate axis of a configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub kind: DimKind,
    pub lower: f64,
    pub upper: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl Dim {
    pub fn linear(lower: f64, upper: f64) -> Self {
        Dim {
            kind: DimKind::Linear,
            lower,
            upper,
            weight: 1.0,
        }
    }

    pub fn angular() -> Self {
        Dim {
            kind: DimKind::Angular,
            lower: 0.0,
            upper: TAU,
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// Product space of linear and angular dimensions with a weighted 2-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub dims: Vec<Dim>,
    /// Multiplier applied to every angular delta before weighting.
    pub angular_scale: f64,
}

/// A point in a [`SpaceSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(Vec<f64>);

/// Bitwise identity of a configuration, usable as a hash key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey(Vec<u64>);

impl Configuration {
    /// Wraps raw coordinates without normalization. Prefer [`SpaceSpec::config`].
    pub fn from_raw(coords: Vec<f64>) -> Self {
        Configuration(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn key(&self) -> ConfigKey {
        ConfigKey(self.0.iter().map(|v| v.to_bits()).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for Configuration {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Straight-line (geodesic) connection between two configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: Configuration,
    pub to: Configuration,
}

impl Edge {
    pub fn new(from: Configuration, to: Configuration) -> Self {
        Edge { from, to }
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed shortest-arc delta from `a` to `b` in `(-π, π]`; antipodal ties go positive.
pub fn angular_delta(a: f64, b: f64) -> f64 {
    let d = (b - a + PI).rem_euclid(TAU) - PI;
    if d <= -PI {
        PI
    } else {
        d
    }
}

impl SpaceSpec {
    pub fn new(dims: Vec<Dim>, angular_scale: f64) -> Result<Self> {
        let space = SpaceSpec {
            dims,
            angular_scale,
        };
        space.validate()?;
        Ok(space)
    }

    /// `n`-dimensional box with unit weights.
    pub fn euclidean(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            bounds.iter().map(|&(lo, hi)| Dim::linear(lo, hi)).collect(),
            1.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidSpace("space has no dimensions".into()));
        }
        if !(self.angular_scale > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "angular scale must be positive, got {}",
                self.angular_scale
            )));
        }
        for (i, d) in self.dims.iter().enumerate() {
            if !(d.weight > 0.0) {
                return Err(Error::InvalidSpace(format!("dim {i}: weight must be positive")));
            }
            match d.kind {
                DimKind::Linear if !(d.lower < d.upper) => {
                    return Err(Error::InvalidSpace(format!(
                        "dim {i}: lower bound {} not below upper bound {}",
                        d.lower, d.upper
                    )))
                }
                DimKind::Angular if d.lower != 0.0 || d.upper != TAU => {
                    return Err(Error::InvalidSpace(format!("dim {i}: angular dims span [0, 2pi)")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn kinds(&self) -> Vec<DimKind> {
        self.dims.iter().map(|d| d.kind).collect()
    }

    /// Builds a configuration, normalizing angular coordinates.
    pub fn config(&self, coords: Vec<f64>) -> Result<Configuration> {
        self.check_len(coords.len())?;
        let mut coords = coords;
        for (v, d) in coords.iter_mut().zip(&self.dims) {
            if d.kind == DimKind::Angular {
                *v = wrap_angle(*v);
            }
        }
        Ok(Configuration(coords))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Per-dimension multiplier: weight, times alpha for angular dims.
    #[inline]
    fn scale(&self, i: usize) -> f64 {
        let d = &self.dims[i];
        match d.kind {
            DimKind::Linear => d.weight,
            DimKind::Angular => d.weight * self.angular_scale,
        }
    }

    #[inline]
    fn delta(&self, i: usize, a: f64, b: f64) -> f64 {
        match self.dims[i].kind {
            DimKind::Linear => b - a,
            DimKind::Angular => angular_delta(a, b),
        }
    }

    pub fn try_distance(&self, a: &Configuration, b: &Configuration) -> Result<f64> {
        self.check_len(a.dim())?;
        self.check_len(b.dim())?;
        Ok(self.distance_coords(&a.0, &b.0))
    }

    /// Weighted 2-norm of the per-dimension (wrapped) deltas.
    ///
    /// Panics if either configuration does not conform to the space.
    pub fn distance(&self, a: &Configuration, b: &Configuration) -> f64 {
        assert!(
            a.dim() == self.dim() && b.dim() == self.dim(),
            "contract violation: configuration dimension does not match space"
        );
        self.distance_coords(&a.0, &b.0)
    }

    pub(crate) fn distance_coords(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut sum = 0.0;
        for i in 0..a.len() {
            let d = self.delta(i, a[i], b[i]) * self.scale(i);
            sum += d * d;
        }
        sum.sqrt()
    }

    /// Largest per-dimension scaled delta that keeps the pair within `radius`.
    pub(crate) fn coord_radius(&self, i: usize, radius: f64) -> f64 {
        radius / self.scale(i)
    }

    pub fn in_bounds(&self, c: &Configuration) -> bool {
        self.in_bounds_coords(&c.0)
    }

    pub(crate) fn in_bounds_coords(&self, c: &[f64]) -> bool {
        c.len() == self.dim()
            && c.iter().zip(&self.dims).all(|(&v, d)| match d.kind {
                DimKind::Linear => v >= d.lower && v <= d.upper,
                DimKind::Angular => v.is_finite(),
            })
    }

    /// Point at fraction `t` along the geodesic from `a` to `b`.
    pub fn lerp(&self, a: &Configuration, b: &Configuration, t: f64) -> Configuration {
        let mut out = Vec::with_capacity(self.dim());
        self.lerp_into(&a.0, &b.0, t, &mut out);
        Configuration(out)
    }

    fn lerp_into(&self, a: &[f64], b: &[f64], t: f64, out: &mut Vec<f64>) {
        for (i, d) in self.dims.iter().enumerate() {
            match d.kind {
                DimKind::Linear => out.push(a[i] + t * (b[i] - a[i])),
                DimKind::Angular => out.push(wrap_angle(a[i] + t * angular_delta(a[i], b[i]))),
            }
        }
    }

    /// Moves from `a` toward `b` by at most `max_len`.
    pub fn steer(&self, a: &Configuration, b: &Configuration, max_len: f64) -> Configuration {
        let d = self.distance(a, b);
        if d <= max_len {
            return b.clone();
        }
        self.lerp(a, b, max_len / d)
    }

    /// Number of configurations [`interpolate`](Self::interpolate) produces for a pair.
    pub fn interpolation_count(&self, a: &Configuration, b: &Configuration, step: f64) -> usize {
        let d = self.distance(a, b);
        if d == 0.0 {
            1
        } else {
            (d / step).ceil() as usize + 1
        }
    }

    /// Evenly spaced configurations along the geodesic, endpoints included.
    pub fn interpolate(&self, e: &Edge, step: f64) -> Vec<Configuration> {
        assert!(step > 0.0, "contract violation: interpolation step must be positive");
        let n = self.interpolation_count(&e.from, &e.to, step);
        if n == 1 {
            return vec![e.from.clone()];
        }
        let segments = (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == 0 {
                    e.from.clone()
                } else if k == n - 1 {
                    e.to.clone()
                } else {
                    self.lerp(&e.from, &e.to, k as f64 / segments)
                }
            })
            .collect()
    }

    /// Flat-buffer variant of [`interpolate`](Self::interpolate); returns the count.
    pub(crate) fn interpolate_flat(
        &self,
        a: &Configuration,
        b: &Configuration,
        step: f64,
        out: &mut Vec<f64>,
    ) -> usize {
        let n = self.interpolation_count(a, b, step);
        if n == 1 {
            out.extend_from_slice(&a.0);
            return 1;
        }
        let segments = (n - 1) as f64;
        out.extend_from_slice(&a.0);
        for k in 1..n - 1 {
            self.lerp_into(&a.0, &b.0, k as f64 / segments, out);
        }
        out.extend_from_slice(&b.0);
        n
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        Configuration(
            self.dims
                .iter()
                .map(|d| match d.kind {
                    DimKind::Linear => rng.random_range(d.lower..d.upper),
                    DimKind::Angular => rng.random_range(0.0..TAU),
                })
                .collect(),
        )
    }

    /// Displaces `a` by a tangent vector rescaled to metric length `len`.
    ///
    /// Returns `None` for a zero direction.
    pub fn offset(&self, a: &Configuration, direction: &[f64], len: f64) -> Option<Configuration> {
        let norm = direction
            .iter()
            .enumerate()
            .map(|(i, v)| (v * self.scale(i)).powi(2))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        let k = len / norm;
        Some(Configuration(
            self.dims
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let v = a.0[i] + k * direction[i];
                    match d.kind {
                        DimKind::Linear => v,
                        DimKind::Angular => wrap_angle(v),
                    }
                })
                .collect(),
        ))
    }

    /// Sum of consecutive distances along a sequence of configurations.
    pub fn path_length(&self, states: &[Configuration]) -> f64 {
        states.windows(2).map(|w| self.distance(&w[0], &w[1])).sum()
    }
}
