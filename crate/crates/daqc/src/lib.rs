//! Digital-analog quantum computation (DAQC).
//!
//! Compiles target spin Hamiltonians into schedules of analog blocks of a
//! fixed Ising resource Hamiltonian interleaved with layers of single-qubit
//! rotations, and executes those schedules exactly on state vectors:
//!
//! - [`ising`]: inhomogeneous ZZ targets from a fixed ZZ resource via
//!   `sigma_x sigma_x` sandwiches and a sign-matrix solve.
//! - [`xz`]: two-body XZ targets, Trotterized over four rotated ZZ sub-schedules.
//! - [`mbody`]: nearest-neighbour Hamiltonians with up to four-body terms.
//! - [`executor`]: stepwise (sDAQC), banged (bDAQC) and purely digital (DQC)
//!   execution plus time accounting.
//! - [`noise`]: coherent stochastic noise and Monte Carlo fidelity estimates.
//! - [`bench`]: the figure reproductions used by the command-line tool.
//!
//! Conventions: qubit 0 is the leftmost tensor factor and the most
//! significant bit of a basis index; analog blocks evolve as `e^{+iHt}`
//! with `hbar = 1`; spin up is `|0>`.

pub mod bench;
pub mod error;
pub mod executor;
pub mod hamiltonian;
pub mod ising;
pub mod layer;
pub mod linalg;
pub mod mbody;
pub mod models;
pub mod noise;
pub mod pauli;
pub mod schedule;
pub mod state;
pub mod verify;
pub mod xz;

pub use error::{DaqcError, Result};
pub use hamiltonian::SpinHamiltonian;
pub use layer::RotationLayer;
pub use pauli::{Pauli, PauliWord};
pub use schedule::{Block, Schedule};
pub use state::{fidelity, StateVector};

/// Largest qubit count handled by the dense routines (4096-dimensional).
pub const MAX_QUBITS: usize = 12;
