//! Variational regularization with general misfit functionals: models,
//! solvers and convergence-rate analysis on uniform 1-D grids.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod harness;
pub mod levelset;
pub mod model;
pub mod nonlinearity;
pub mod operator;
mod parallel;
pub mod penalty;
pub mod rng;
pub mod similarity;
pub mod solver;
pub mod wasserstein;

pub use error::{Error, Result};
pub use grid::{GridKind, GridVector};
pub use model::{LevelSetSpec, Problem};
pub use operator::ForwardOperator;
pub use penalty::{Penalty, SubgradientElement};
pub use similarity::Similarity;
