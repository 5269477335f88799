//! Anonymous transmission of quantum messages in noisy N-node networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`qcore`]: dense kets and density matrices addressed by qubit label,
//!   partial trace, post-selection, Bell measurement, fidelity and trace
//!   distance.
//! - [`channels`]: single-qubit Kraus channels (dephasing, depolarizing,
//!   arbitrary) and the induced trace-norm distance between two channels.
//! - [`analytic`]: closed-form fidelities and success probabilities, the
//!   structured evaluator for the post-selected two-qubit states, and noise
//!   thresholds.
//! - [`protocols`]: round-based simulation of the W-state protocol, the GHZ
//!   protocol and the Bell-pair relay, including the classical subroutines.
//! - [`security`]: adversary views, independence checks, guessing
//!   probabilities and the epsilon-security bound.
//! - [`oracle`]: closed forms and structured evaluators checked against
//!   dense runs of the protocols.

pub mod analytic;
pub mod channels;
pub mod error;
pub mod oracle;
pub mod protocols;
pub mod qcore;
pub mod security;

pub use error::{Error, Result};
