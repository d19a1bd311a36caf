//! Loop O(n) model on finite regions of the hexagonal lattice.
//!
//! The crate provides lattice geometry ([`hexlattice`]), the loop
//! configuration algebra ([`loopcore`]), exact enumeration and a Metropolis
//! sampler ([`sampler`]), red/blue/defect couplings ([`coupling`]), the Ising
//! and FK correspondences ([`isingfk`]) and the auxiliary quotient graph with
//! its percolation process ([`auxgraph`]).
//!
//! Weights are generic over [`Scalar`]; use [`Exact`] for rational checks and
//! `f64` otherwise.

pub mod auxgraph;
pub mod coupling;
pub mod error;
pub mod hexlattice;
pub mod io;
pub mod isingfk;
pub mod loopcore;
pub mod sampler;
pub mod scalar;

pub use error::{Error, Result};
pub use hexlattice::{face_distance, FaceCoord, Region};
pub use loopcore::{Loop, LoopConfig, SpinConfig};
pub use sampler::{Ensemble, ModelParams};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Params = ModelParams<f64>;
pub type ExactParams = ModelParams<Exact>;
pub type Distribution = sampler::ExactDistribution<f64>;
pub type ExactDistributionQ = sampler::ExactDistribution<Exact>;

/// Convenience constructor for exact rationals.
pub fn q(num: i64, den: i64) -> Exact {
    <Exact as Scalar>::from_ratio(num, den)
}
