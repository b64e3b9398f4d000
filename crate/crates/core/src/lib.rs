//! Dense state-vector simulation of the N-qubit teleportation protocol,
//! together with closed-form analytic oracles used to verify it.
//!
//! Register layout for an N-qubit teleportation is 3N qubits, numbered
//! 1..=3N from the most-significant bit of a basis index:
//!
//! * `1..=N` hold the state being teleported,
//! * `N+1..=2N` are Alice's half of the generalized Bell state,
//! * `2N+1..=3N` are Bob's half.
//!
//! The [`teleport`] module runs the protocol gate by gate, while [`oracle`]
//! builds every intermediate state by direct index arithmetic so that the two
//! can be compared amplitude by amplitude.

pub mod bitchain;
pub mod cli;
pub mod error;
pub mod gates;
pub mod oracle;
pub mod statevector;
pub mod teleport;

pub use bitchain::BitChain;
pub use error::{Error, Result};
pub use gates::{Gate2x2, PauliCorrection};
pub use oracle::VerificationReport;
pub use statevector::{MeasurementOutcome, StateVector};
pub use teleport::{Op, Schedule, TeleportTrace};

/// Complex amplitude type used throughout the crate.
pub type Amplitude = num_complex::Complex64;
