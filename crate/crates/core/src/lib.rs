//! Operator-growth dynamics in the Krylov chain picture.
//!
//! The library builds orthonormal Krylov chains from dense Hamiltonians via the
//! Lanczos recursion on the commutator action, evolves the resulting real
//! amplitude vector on the unit sphere by two independent methods, and computes
//! the geometric and bound-type diagnostics of that motion: constant speed,
//! curvature and torsion, geodesic residuals, return-amplitude margins, the
//! exact uncertainty product, light-cone tail envelopes, front indices, and
//! quadratic invariants. A small zoo of exactly solvable coefficient families
//! is included for end-to-end validation.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod lanczos;
pub mod models;
pub mod ode;
pub mod operator_space;
pub mod pauli;

pub use error::{Error, Result};
pub use operator_space::{HermitianMatrix, Liouvillian, OperatorState};
