//! Exact dense quantum states.
//!
//! Qubits are addressed by stable [`Qubit`] labels rather than positions. In
//! every register the first label is the most significant bit of the basis
//! index, so `|q0 q1 ... q(n-1)>` maps to index `q0 * 2^(n-1) + ... + q(n-1)`.

mod density;
pub mod gates;
mod ket;
mod measure;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use density::{trace_distance, DensityMatrix};
pub use gates::Mat2;
pub use ket::{make_ghz_state, make_w_state, Ket};
pub use measure::{Basis, Branch, MeasurementRecord};

pub use num_complex::Complex64 as C64;

/// Tolerance for normalisation, Hermiticity and equality checks.
pub const TOL: f64 = 1e-12;

/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

/// Branch probabilities below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-15;

/// Default number of qubits a dense register may hold.
pub const DEFAULT_QUBIT_CAP: usize = 12;

/// Stable identifier of a register slot.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Qubit(pub u32);

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl From<u32> for Qubit {
    fn from(v: u32) -> Self {
        Qubit(v)
    }
}

/// Labels `0..n` in order.
pub fn qubits(n: usize) -> Vec<Qubit> {
    (0..n as u32).map(Qubit).collect()
}

pub(crate) fn check_unique(labels: &[Qubit]) -> crate::Result<()> {
    for (i, a) in labels.iter().enumerate() {
        if labels[i + 1..].contains(a) {
            return crate::error::invalid(format!("duplicate qubit label {a}"));
        }
    }
    Ok(())
}
