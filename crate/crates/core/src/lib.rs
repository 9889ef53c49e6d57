//! Simulation, heterodyne sampling and Hamiltonian learning for bosonic
//! lattices with engineered photon-driven dissipation.

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod harness;
pub mod lattice;
pub mod learner;
pub mod linalg;
pub mod measurement;
pub mod poly;
pub mod polyfit;
pub mod verify;

pub use error::{Error, Result};
