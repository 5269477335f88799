use serde::{Deserialize, Serialize};

use super::{check_unique, qubits, DensityMatrix, Qubit, C64, TOL};
use crate::error::{invalid, Error, Result};

/// Normalised pure state of a labelled register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ket {
    amplitudes: Vec<C64>,
    labels: Vec<Qubit>,
}

impl Ket {
    /// Builds a ket, rejecting non-unit norm, wrong length or repeated labels.
    pub fn new(amplitudes: Vec<C64>, labels: Vec<Qubit>) -> Result<Self> {
        let ket = Self::unchecked(amplitudes, labels)?;
        let norm = ket.norm();
        if (norm - 1.0).abs() > TOL {
            return invalid(format!("ket norm is {norm}, expected 1"));
        }
        Ok(ket)
    }

    /// Builds a ket and rescales it to unit norm.
    pub fn normalized(amplitudes: Vec<C64>, labels: Vec<Qubit>) -> Result<Self> {
        let mut ket = Self::unchecked(amplitudes, labels)?;
        let norm = ket.norm();
        if norm < 1e-300 {
            return invalid("cannot normalise the zero vector");
        }
        for a in &mut ket.amplitudes {
            *a /= norm;
        }
        Ok(ket)
    }

    fn unchecked(amplitudes: Vec<C64>, labels: Vec<Qubit>) -> Result<Self> {
        if amplitudes.len() != 1usize << labels.len() {
            return invalid(format!(
                "{} amplitudes do not match {} labels",
                amplitudes.len(),
                labels.len()
            ));
        }
        check_unique(&labels)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return invalid("non-finite amplitude");
        }
        Ok(Self { amplitudes, labels })
    }

    /// Computational basis state `index` on `labels`.
    pub fn basis(labels: Vec<Qubit>, index: usize) -> Result<Self> {
        let dim = 1usize << labels.len();
        if index >= dim {
            return invalid(format!("basis index {index} out of range for dimension {dim}"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps, labels)
    }

    /// Single-qubit state `alpha|0> + beta|1>` (normalised on construction).
    pub fn qubit(label: Qubit, alpha: C64, beta: C64) -> Result<Self> {
        Self::normalized(vec![alpha, beta], vec![label])
    }

    /// Single-qubit state from Bloch angles.
    pub fn from_bloch(label: Qubit, theta: f64, phi: f64) -> Self {
        let alpha = C64::new((theta / 2.0).cos(), 0.0);
        let beta = C64::from_polar((theta / 2.0).sin(), phi);
        Self {
            amplitudes: vec![alpha, beta],
            labels: vec![label],
        }
    }

    pub fn zero(label: Qubit) -> Self {
        Self::from_bloch(label, 0.0, 0.0)
    }

    pub fn one(label: Qubit) -> Self {
        Self::from_bloch(label, std::f64::consts::PI, 0.0)
    }

    pub fn plus(label: Qubit) -> Self {
        Self::from_bloch(label, std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn minus(label: Qubit) -> Self {
        Self::from_bloch(label, std::f64::consts::FRAC_PI_2, std::f64::consts::PI)
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on the given labels.
    pub fn ghz(labels: Vec<Qubit>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return invalid(format!("GHZ state needs at least 2 qubits, got {n}"));
        }
        let dim = 1usize << n;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[0] = C64::new(h, 0.0);
        amps[dim - 1] = C64::new(h, 0.0);
        Self::new(amps, labels)
    }

    /// Equal superposition of all weight-one basis states on the given labels.
    pub fn w(labels: Vec<Qubit>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return invalid(format!("W state needs at least 2 qubits, got {n}"));
        }
        let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for bit in 0..n {
            amps[1 << bit] = a;
        }
        Self::new(amps, labels)
    }

    /// `(|00> + |11>)/sqrt(2)`.
    pub fn phi_plus(a: Qubit, b: Qubit) -> Result<Self> {
        Self::ghz(vec![a, b])
    }

    /// `(|01> + |10>)/sqrt(2)`.
    pub fn psi_plus(a: Qubit, b: Qubit) -> Result<Self> {
        Self::w(vec![a, b])
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> &[Qubit] {
        &self.labels
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Same amplitudes on new labels.
    pub fn relabel(&self, labels: Vec<Qubit>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return invalid("relabel must keep the qubit count");
        }
        Self::new(self.amplitudes.clone(), labels)
    }

    /// `<self|other>`; both kets must carry the same labels in the same order.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.labels != other.labels {
            return invalid("inner product needs identical label order");
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_ket(self)
    }

    /// Applies a single-qubit operator to `qubit` and returns the (unnormalised) result.
    pub fn apply_1q(&self, qubit: Qubit, m: &super::Mat2) -> Result<Self> {
        let pos = self
            .labels
            .iter()
            .position(|&l| l == qubit)
            .ok_or(Error::UnknownQubit(qubit))?;
        let mask = 1usize << (self.labels.len() - 1 - pos);
        let mut out = self.amplitudes.clone();
        for i0 in 0..out.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            out[i0] = m[0][0] * a0 + m[0][1] * a1;
            out[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(Self {
            amplitudes: out,
            labels: self.labels.clone(),
        })
    }
}

/// `|W>_n` on labels `0..n`.
pub fn make_w_state(n: usize) -> Result<Ket> {
    Ket::w(qubits(n))
}

/// `|GHZ>_n` on labels `0..n`.
pub fn make_ghz_state(n: usize) -> Result<Ket> {
    Ket::ghz(qubits(n))
}
