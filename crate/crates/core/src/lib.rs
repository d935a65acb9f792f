//! Induced triangulations and complexes of f-neighbors for piecewise-linear maps
//! from convex polyhedral surfaces to the plane.

pub mod arrangement;
pub mod cdt;
pub mod complex;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod generate;
pub mod hopf;
pub mod induced;
pub mod levelset;
pub mod mesh;
pub mod pipeline;

pub use error::{Error, Result};
