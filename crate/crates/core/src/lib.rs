//! Digital simulation of linear-optical interferometers on qubit registers.
//!
//! Bosonic modes are encoded with a Gray code, optical elements become
//! exponentials of mapped hopping Hamiltonians, blockers are measure-and-reset
//! operations, and complementarity quantifiers are evaluated on the exact states.

pub mod analysis;
pub mod bosonic;
pub mod error;
pub mod graycode;
pub mod experiments;
pub mod linalg;
pub mod optics;
pub mod pauli;
pub mod simulator;

pub use error::{Error, Result};
