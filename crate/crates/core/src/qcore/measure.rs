use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gates::{self, Mat4};
use super::{DensityMatrix, Qubit, C64, ZERO_PROBABILITY};
use crate::error::{invalid, Error, Result};

/// Projective measurement bases used by the protocols.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `{|0>, |1>}`.
    Standard,
    /// `{|+>, |->}`; outcome 0 is `|+>`.
    Hadamard,
    /// Two-qubit Bell basis. Outcome `m` selects `(I (x) P_m)|phi+>` with
    /// `P_m` running over `I, X, Z, XZ`, so `m = 0, 1, 2, 3` are
    /// `phi+, psi+, phi-, psi-` (the last up to a global sign).
    Bell,
}

impl Basis {
    pub fn cardinality(self) -> u8 {
        match self {
            Basis::Standard | Basis::Hadamard => 2,
            Basis::Bell => 4,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Basis::Standard | Basis::Hadamard => 1,
            Basis::Bell => 2,
        }
    }
}

/// Unnormalised post-measurement state together with its Born weight.
#[derive(Clone, Debug)]
pub struct Branch {
    pub state: DensityMatrix,
    pub probability: f64,
}

impl Branch {
    pub fn new(state: DensityMatrix) -> Self {
        let probability = state.trace();
        Self { state, probability }
    }

    pub fn is_possible(&self) -> bool {
        self.probability >= ZERO_PROBABILITY
    }

    /// The conditional state; refuses branches of (numerically) zero weight.
    pub fn normalized(&self) -> Result<DensityMatrix> {
        if !self.is_possible() {
            return Err(Error::ZeroProbability(self.probability));
        }
        Ok(self.state.scaled(1.0 / self.probability))
    }
}

/// One observed measurement result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub qubits: Vec<Qubit>,
    pub basis: Basis,
    pub outcome: u8,
    pub branch_probability: f64,
}

impl MeasurementRecord {
    pub fn new(qubits: Vec<Qubit>, basis: Basis, outcome: u8, branch_probability: f64) -> Result<Self> {
        if qubits.len() != basis.arity() {
            return invalid(format!("{basis:?} measurement acts on {} qubits", basis.arity()));
        }
        if outcome >= basis.cardinality() {
            return invalid(format!("outcome {outcome} out of range for {basis:?}"));
        }
        if !(0.0..=1.0 + 1e-12).contains(&branch_probability) {
            return invalid(format!("branch probability {branch_probability} outside [0, 1]"));
        }
        Ok(Self {
            qubits,
            basis,
            outcome,
            branch_probability,
        })
    }
}

/// `|B_m><B_m|` as a 4x4 matrix on the ordered pair.
fn bell_projector(m: u8) -> Mat4 {
    let p = gates::bell_pauli(m);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (I (x) P)|phi+> = (|0>P|0> + |1>P|1>)/sqrt2
    let mut v = [C64::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            v[2 * a + b] = p[b][a] * h;
        }
    }
    std::array::from_fn(|r| std::array::from_fn(|c| v[r] * v[c].conj()))
}

impl DensityMatrix {
    fn check_outcome(basis: Basis, qs: &[Qubit], outcome: u8) -> Result<()> {
        if qs.len() != basis.arity() {
            return invalid(format!("{basis:?} measurement acts on {} qubits", basis.arity()));
        }
        if outcome >= basis.cardinality() {
            return invalid(format!("outcome {outcome} out of range for {basis:?}"));
        }
        Ok(())
    }

    /// `Pi rho Pi` and `Tr[Pi rho]`, keeping the measured qubits in the register.
    pub fn postselect(&self, qs: &[Qubit], basis: Basis, outcome: u8) -> Result<Branch> {
        Self::check_outcome(basis, qs, outcome)?;
        let state = match basis {
            Basis::Standard => self.apply_1q(qs[0], &gates::outer_basis(outcome as usize, outcome as usize))?,
            Basis::Hadamard => {
                let ket = if outcome == 0 {
                    super::Ket::plus(qs[0])
                } else {
                    super::Ket::minus(qs[0])
                };
                let a = ket.amplitudes();
                let proj = [
                    [a[0] * a[0].conj(), a[0] * a[1].conj()],
                    [a[1] * a[0].conj(), a[1] * a[1].conj()],
                ];
                self.apply_1q(qs[0], &proj)?
            }
            Basis::Bell => self.apply_2q(qs[0], qs[1], &bell_projector(outcome))?,
        };
        Ok(Branch::new(state))
    }

    /// Projects onto the outcome and traces the measured qubits out.
    ///
    /// The result is unnormalised; its trace is the Born probability.
    pub fn measure_out(&self, qs: &[Qubit], basis: Basis, outcome: u8) -> Result<Branch> {
        Self::check_outcome(basis, qs, outcome)?;
        let rotated;
        let (state, bits): (&DensityMatrix, Vec<(Qubit, u8)>) = match basis {
            Basis::Standard => (self, vec![(qs[0], outcome)]),
            Basis::Hadamard => {
                rotated = self.apply_1q(qs[0], &gates::hadamard())?;
                (&rotated, vec![(qs[0], outcome)])
            }
            Basis::Bell => {
                rotated = self.apply_cnot(qs[0], qs[1])?.apply_1q(qs[0], &gates::hadamard())?;
                (&rotated, vec![(qs[0], outcome >> 1), (qs[1], outcome & 1)])
            }
        };
        Ok(Branch::new(state.slice_out(&bits)?))
    }

    /// Keeps the block where each listed qubit has the given bit, and drops those qubits.
    fn slice_out(&self, bits: &[(Qubit, u8)]) -> Result<DensityMatrix> {
        let n = self.n_qubits();
        let mut fixed_mask = 0usize;
        let mut fixed_val = 0usize;
        for &(q, b) in bits {
            let m = 1usize << (n - 1 - self.position(q)?);
            fixed_mask |= m;
            if b == 1 {
                fixed_val |= m;
            }
        }
        let idx: Vec<usize> = (0..self.dim()).filter(|i| i & fixed_mask == fixed_val).collect();
        let d = idx.len();
        let mut data = Vec::with_capacity(d * d);
        for &r in &idx {
            for &c in &idx {
                data.push(self.entry(r, c));
            }
        }
        let labels = self
            .labels()
            .iter()
            .copied()
            .filter(|l| !bits.iter().any(|(q, _)| q == l))
            .collect();
        DensityMatrix::from_entries(labels, data)
    }

    /// All outcomes of a measurement with the measured qubits traced out.
    pub fn measure_all_outcomes(&self, qs: &[Qubit], basis: Basis) -> Result<Vec<(u8, Branch)>> {
        (0..basis.cardinality())
            .map(|o| Ok((o, self.measure_out(qs, basis, o)?)))
            .collect()
    }

    /// Samples a measurement outcome; returns it with the normalised
    /// post-measurement state (measured qubits kept, projected).
    pub fn measure<R: Rng + ?Sized>(
        &self,
        qs: &[Qubit],
        basis: Basis,
        rng: &mut R,
    ) -> Result<(MeasurementRecord, DensityMatrix)> {
        let total = self.trace();
        let branches: Vec<Branch> = (0..basis.cardinality())
            .map(|o| self.postselect(qs, basis, o))
            .collect::<Result<_>>()?;
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = branches.len() - 1;
        for (i, b) in branches.iter().enumerate() {
            if b.probability > 0.0 && u < b.probability {
                chosen = i;
                break;
            }
            u -= b.probability;
        }
        // guard against falling off the end onto an impossible outcome
        while !branches[chosen].is_possible() && chosen > 0 {
            chosen -= 1;
        }
        let branch = &branches[chosen];
        let record = MeasurementRecord::new(qs.to_vec(), basis, chosen as u8, branch.probability / total)?;
        Ok((record, branch.normalized()?))
    }

    /// Samples a Bell measurement on `(q1, q2)`.
    pub fn bell_measure<R: Rng + ?Sized>(&self, q1: Qubit, q2: Qubit, rng: &mut R) -> Result<(u8, DensityMatrix)> {
        let (rec, state) = self.measure(&[q1, q2], Basis::Bell, rng)?;
        Ok((rec.outcome, state))
    }
}
