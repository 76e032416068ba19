//! Boundary damping identification for the wave equation.
//!
//! The domain is the unit interval or unit square. Its left side carries a
//! homogeneous Dirichlet condition and its right side Γ₁ carries either the
//! dissipative condition `∂ν u + b ∂_t u = 0` or a prescribed Neumann flux.
//! From the Neumann trace of the damped solution the crate estimates the
//! stability constant of the map `b ↦ ∂ν u_b` and reconstructs `b`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod domain;
pub mod elliptic;
pub mod error;
pub mod fit;
pub mod inverse;
pub mod measure;
pub mod wave;

mod linalg;

pub use domain::{DomainMesh, GridFunction, NodeKind, TimeGrid};
pub use elliptic::{
    eigen_decompose, harmonic_extend, vanishing_set_fraction, EigenBasis, VanishingSet,
};
pub use error::{Error, Result};
pub use measure::{besov_half_norm, neumann_trace, BoundaryTrace};
pub use wave::{
    duhamel_boundary_solve, duhamel_spectral_solve, energy, solve_damped, solve_neumann_forced,
    CompatibilityPolicy, DampingField, WaveState, WaveTrajectory,
};
