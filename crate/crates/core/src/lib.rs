//! Fluid-structure interaction on a fixed Eulerian grid with a single
//! velocity field shared by fluid and solid.
//!
//! The fluid is discretized with biquadratic (Q2) velocity and a mixed
//! linear-plus-constant (Q1 + P0) pressure space on a structured grid. An
//! immersed hyperelastic solid is carried as an updated-Lagrangian simplex
//! mesh whose nodal velocities are interpolated from the fluid field through
//! a sparse coupling matrix, so one saddle-point solve per step advances
//! both phases. Energy bookkeeping (kinetic, elastic, accumulated viscous
//! dissipation, per-step remainder terms) is first-class: the discrete
//! scheme is designed so total energy is nonincreasing up to a computable
//! per-step remainder, and the diagnostics module exposes exactly the
//! quantities needed to verify that in tests.

pub mod assembly;
pub mod config;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod output;
pub mod scenario;
pub mod solver;
pub mod sparse;
pub mod stepper;
pub mod tensor;

pub use error::FsiError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, FsiError>;
