//! Path-database guided motion planning.
//!
//! The crate provides configuration spaces and batched collision checking,
//! procedural environment distributions, plan-from-scratch planners (RRT,
//! RSG, BiRRT, PRM, PRM*), an offline path-database pipeline, the
//! database-guided planner, and the Lightning retrieve-and-repair baseline.

pub mod collision;
pub mod environment;
pub mod lightning;
pub mod error;
pub mod path;
pub mod pathdb;
pub mod pdg;
pub mod planners;
pub mod seed;
pub mod space;

pub use error::{Error, Result};
