//! Geometric phases, off-diagonal geometric phases and their nodal structure
//! for two-qubit mixed states evolving under parallel transport.
//!
//! The crate is organised bottom-up: [`linalg`] supplies the small complex
//! matrices, [`model`] builds Hamiltonians and initial states, [`transport`]
//! constructs `U(t)` and `U∥(t)`, [`phases`] evaluates the phases,
//! [`entanglement`] runs the partial-transpose test and [`scanner`] sweeps
//! parameter grids for nodal points.

pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod phases;
pub mod scanner;
pub mod selftest;
pub mod transport;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexScalar, SpectralDecomposition};
pub use model::{HamiltonianKind, ModelParams, StateParams, Variant};
pub use phases::PhaseResult;
