//! Maximum-likelihood detection of BPSK symbols in real MIMO channels with
//! the Quantum Approximate Optimization Algorithm, simulated exactly on a
//! dense statevector.
//!
//! Pipeline: [`instance`] draws a channel use, [`ising`] turns the ML
//! objective into a diagonal cost Hamiltonian, [`simulator`] evolves the
//! p-level circuit (with [`analytic`] as a closed form for p = 1),
//! [`metainit`] learns shared initial angles with the Gaussian-process
//! optimizer in [`bayesopt`], and [`localopt`] refines them per instance.

pub mod analytic;
pub mod bayesopt;
pub mod cli;
pub mod error;
pub mod instance;
pub mod ising;
pub mod localopt;
pub mod matrix;
pub mod metainit;
pub mod persist;
pub mod rng;
pub mod simulator;
pub mod spin;

pub use error::{Error, Result};
pub use instance::{ChannelInstance, Detection};
pub use ising::{decode_state, IsingModel};
pub use matrix::RealMatrix;
pub use simulator::{QaoaParams, Simulator, Statevector};
pub use spin::SpinVector;
