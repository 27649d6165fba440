//! Neumann problems for Kolmogorov operators on convex sets of a truncated
//! Gaussian space: weighted Galerkin solves, Moreau–Yosida penalization,
//! reflected SDEs and Feynman–Kac estimates.
//!
//! Everything numerical is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`.

pub mod error;
pub mod geometry;
pub mod measure;
pub mod models;
pub mod potentials;
mod quadrature;
mod real;
pub mod rng;
pub mod sde;
pub mod solver;

pub use error::{Error, Result};
pub use real::{dist, dot, norm, Real};

pub type MeasureSpace = measure::MeasureSpace<f64>;
pub type ConvexBody = geometry::ConvexBody<f64>;
pub type Weighting = potentials::Weighting<f64>;
pub type PenalizedPotential = potentials::PenalizedPotential<f64>;
pub type MoreauEnvelope = potentials::MoreauEnvelope<f64>;
pub type Phi = potentials::Phi<f64>;
pub type WeakProblem<'a> = solver::WeakProblem<'a, f64>;
pub type WeakSolution = solver::WeakSolution<f64>;
pub type Domain = solver::Domain<f64>;
pub type Dynamics = sde::Dynamics<f64>;
pub type PathEnsemble<'a> = sde::PathEnsemble<'a, f64>;
pub type RdModel = models::RdModel<f64>;
pub type ChModel = models::ChModel<f64>;
