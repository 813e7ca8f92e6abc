//! Quantum state transfer between a Bose-condensate side mode and an
//! optomechanical end mirror, mediated by the quantum fluctuations of a
//! driven cavity field.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`]: physical inputs, effective couplings, classical steady
//!   state and frequency matching.
//! * [`gaussian`]: the beamsplitter Gaussian channel (symplectic propagator
//!   plus accumulated cavity noise) and its moment action.
//! * [`sde`]: seeded stochastic trajectories of the same dynamics.
//! * [`phase_space`]: Wigner grids, the channel acting on them, overlaps.
//! * [`fock`]: truncated number-basis oracle for all of the above.
//! * [`full_model`]: mean-field integration and spectrum of the model before
//!   the cavity is eliminated.
//!
//! Numerics are generic over [`Real`] (`f32`, `f64`); the aliases below fix
//! the common double-precision instantiations.

pub mod constants;
pub mod error;
pub mod fock;
pub mod full_model;
pub mod gaussian;
pub mod linalg;
pub mod params;
pub mod phase_space;
pub mod sde;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PhysicalParams = params::PhysicalParams<f64>;
pub type DerivedParams = params::DerivedParams<f64>;
pub type SteadyState = params::SteadyState<f64>;
pub type QuadratureState = gaussian::QuadratureState<f64>;
pub type GaussianChannel = gaussian::GaussianChannel<f64>;
pub type FockDensityMatrix = fock::FockDensityMatrix<f64>;
pub type FullState = full_model::FullState<f64>;
pub type ModelParams = full_model::ModelParams<f64>;

pub type PhysicalParamsF32 = params::PhysicalParams<f32>;
pub type DerivedParamsF32 = params::DerivedParams<f32>;
pub type GaussianChannelF32 = gaussian::GaussianChannel<f32>;
pub type WignerGrid = phase_space::WignerGrid<f64>;
pub type GridSpec = phase_space::GridSpec<f64>;
