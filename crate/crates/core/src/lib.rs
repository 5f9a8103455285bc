//! Entanglement and measurement-induced nonlocality (MIN) of two-qubit
//! Heisenberg XYZ spins in thermal equilibrium.
//!
//! The crate computes the Wootters concurrence and three MIN variants
//! (Hilbert-Schmidt, trace distance, fidelity) from closed formulas, and
//! checks every one of them against a definition-level oracle that
//! optimizes over projective measurements on the first qubit.
//!
//! Module map:
//! - [`linalg`]: 2×2 / 4×4 complex matrices, Hermitian eigensolver, norms.
//! - [`model`]: Hamiltonian, closed-form spectrum, Gibbs state.
//! - [`decomp`]: Fano (Bloch) decomposition.
//! - [`measures`]: closed-form concurrence, critical window and MINs.
//! - [`oracle`]: brute-force optimization over measurement axes.
//! - [`cli`]: sweeps, reports and figure presets behind the binary.

pub mod cli;
pub mod decomp;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod sampling;

pub use decomp::{fano_decompose, reconstruct, FanoForm};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use measures::{CriticalWindow, MeasureReport};
pub use model::{DensityMatrix, ModelParams, SpectralDecomposition, ThermalElements};
pub use oracle::{MeasurementAxis, ObjectiveKind, OracleResult};
