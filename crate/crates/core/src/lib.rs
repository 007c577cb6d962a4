//! Ground-state estimation for quantum-dot cellular automata circuits with
//! the variational quantum eigensolver.
//!
//! A [`layout::CircuitLayout`] places device and driver cells on a grid,
//! [`hamiltonian::build_hamiltonian`] turns it into a transverse-field Ising
//! Hamiltonian, and [`vqe::run_vqe`] minimizes the energy of a parametric
//! [`ansatz::AnsatzSpec`] on the built-in simulator. [`exact`] supplies the
//! reference ground states and [`experiments`] reproduces the standard
//! studies (response curves, wires, inverter, majority gates, shot and
//! parameter scaling).

pub mod ansatz;
pub mod config;
pub mod electrostatics;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod hamiltonian;
pub mod layout;
pub mod optimize;
pub mod sampling;
pub mod sparse;
pub mod statevector;
pub mod vqe;

pub use error::{QcaError, Result};
