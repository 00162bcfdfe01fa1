//! Depth-modulated classical shadows.
//!
//! Snapshots come from circular brickwork circuits of random Clifford gates.
//! The measurement channel of such circuits is diagonal in the Pauli basis,
//! and its eigenvalues are exactly representable as a periodic MPS. This
//! crate builds that MPS, inverts it variationally, and uses the result to
//! estimate observables and bound the sample complexity.

pub mod brickwork;
pub mod channel;
pub mod clifford;
pub mod dense;
pub mod error;
pub mod inverse;
pub mod mps;
pub mod norms;
pub mod pauli;
pub mod records;
pub mod rng;
pub mod shadows;
pub mod stabilizer;

pub use error::{Error, Result};
