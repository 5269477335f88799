use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gates::{Mat2, Mat4};
use super::{check_unique, Ket, Qubit, C64, PSD_TOL, TOL, ZERO_PROBABILITY};
use crate::error::{invalid, Error, Result};

/// Density operator of a labelled register, stored densely in row-major order.
///
/// Operations never renormalise silently: post-selected branches keep their
/// weight in the trace until the caller asks for [`DensityMatrix::normalized`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<Qubit>,
    dim: usize,
    data: Vec<C64>,
}

/// JSON form: labels plus row-major `[re, im]` entries.
#[derive(Serialize, Deserialize)]
struct DensityRepr {
    labels: Vec<u32>,
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityRepr {
            labels: self.labels.iter().map(|q| q.0).collect(),
            dim: self.dim,
            entries: self.data.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DensityRepr::deserialize(d)?;
        if repr.dim != 1 << repr.labels.len() {
            return Err(serde::de::Error::custom("dim does not match label count"));
        }
        let data = repr.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        DensityMatrix::from_entries(repr.labels.into_iter().map(Qubit).collect(), data)
            .map_err(serde::de::Error::custom)
    }
}

impl DensityMatrix {
    /// Wraps raw row-major entries. Checks shape and labels only; use
    /// [`DensityMatrix::validate`] for the physical invariants.
    pub fn from_entries(labels: Vec<Qubit>, data: Vec<C64>) -> Result<Self> {
        check_unique(&labels)?;
        let dim = 1usize << labels.len();
        if data.len() != dim * dim {
            return invalid(format!("expected {} entries, got {}", dim * dim, data.len()));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return invalid("non-finite matrix entry");
        }
        Ok(Self { labels, dim, data })
    }

    pub fn from_ket(ket: &Ket) -> Self {
        let amps = ket.amplitudes();
        let dim = amps.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in amps {
            for b in amps {
                data.push(a * b.conj());
            }
        }
        Self {
            labels: ket.labels().to_vec(),
            dim,
            data,
        }
    }

    /// Diagonal state with the given weights on the computational basis.
    pub fn diagonal(labels: Vec<Qubit>, weights: &[f64]) -> Result<Self> {
        let dim = 1usize << labels.len();
        if weights.len() != dim {
            return invalid("diagonal length does not match register");
        }
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for (i, w) in weights.iter().enumerate() {
            data[i * dim + i] = C64::new(*w, 0.0);
        }
        Self::from_entries(labels, data)
    }

    pub fn maximally_mixed(labels: Vec<Qubit>) -> Result<Self> {
        let dim = 1usize << labels.len();
        Self::diagonal(labels, &vec![1.0 / dim as f64; dim])
    }

    /// Zero-qubit state with the given weight (a classical probability).
    pub fn scalar(weight: f64) -> Self {
        Self {
            labels: Vec::new(),
            dim: 1,
            data: vec![C64::new(weight, 0.0)],
        }
    }

    /// `Tr_k |W><W|_N` built directly as `(N-k)/N |W><W|_{N-k} + k/N |0..0><0..0|`.
    ///
    /// `total` is the number of qubits the source prepared; `kept` labels the
    /// survivors.
    pub fn w_with_loss(total: usize, kept: Vec<Qubit>) -> Result<Self> {
        let n = kept.len();
        if n > total {
            return invalid("more kept qubits than prepared");
        }
        if n < 2 {
            return invalid("need at least two surviving qubits");
        }
        let lost = total - n;
        let w = Ket::w(kept.clone())?.to_density().scaled(n as f64 / total as f64);
        let mut zeros = vec![0.0; 1 << n];
        zeros[0] = lost as f64 / total as f64;
        w.add(&Self::diagonal(kept, &zeros)?)
    }

    pub fn labels(&self) -> &[Qubit] {
        &self.labels
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn contains(&self, q: Qubit) -> bool {
        self.labels.contains(&q)
    }

    pub fn position(&self, q: Qubit) -> Result<usize> {
        self.labels.iter().position(|&l| l == q).ok_or(Error::UnknownQubit(q))
    }

    fn mask(&self, q: Qubit) -> Result<usize> {
        let pos = self.position(q)?;
        Ok(1usize << (self.labels.len() - 1 - pos))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            dim: self.dim,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    /// Entrywise sum; the second operand is reordered to match `self`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let other = other.reorder(&self.labels)?;
        Ok(Self {
            labels: self.labels.clone(),
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Rescales to unit trace. Fails on zero-weight branches.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t < ZERO_PROBABILITY {
            return Err(Error::ZeroProbability(t));
        }
        Ok(self.scaled(1.0 / t))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for r in 0..self.dim {
            for c in r..self.dim {
                if (self.entry(r, c) - self.entry(c, r).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dim, &self.data)
    }

    /// Checks Hermiticity, unit trace and positivity within the crate tolerances.
    pub fn validate(&self) -> Result<()> {
        if !self.is_hermitian(TOL) {
            return invalid("density matrix is not Hermitian");
        }
        let t = self.trace();
        if (t - 1.0).abs() > TOL {
            return invalid(format!("trace is {t}, expected 1"));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < PSD_TOL {
            return invalid(format!("minimum eigenvalue {min} is negative"));
        }
        Ok(())
    }

    /// Largest entrywise modulus difference; `other` is reordered to match.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let other = other.reorder(&self.labels)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Kronecker product with labels concatenated.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if let Some(q) = other.labels.iter().find(|q| self.labels.contains(q)) {
            return invalid(format!("label {q} present in both factors"));
        }
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for ra in 0..da {
            for ca in 0..da {
                let a = self.data[ra * da + ca];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for rb in 0..db {
                    let row = (ra * db + rb) * dim + ca * db;
                    for cb in 0..db {
                        data[row + cb] = a * other.data[rb * db + cb];
                    }
                }
            }
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Self { labels, dim, data })
    }

    /// Traces out `discard`, keeping the remaining labels in their current order.
    pub fn partial_trace(&self, discard: &[Qubit]) -> Result<Self> {
        for q in discard {
            self.position(*q)?;
        }
        check_unique(discard)?;
        if discard.is_empty() {
            return Ok(self.clone());
        }
        let n = self.labels.len();
        let keep: Vec<usize> = (0..n).filter(|&i| !discard.contains(&self.labels[i])).collect();
        let gone: Vec<usize> = (0..n).filter(|&i| discard.contains(&self.labels[i])).collect();
        let scatter = |positions: &[usize], local: usize| -> usize {
            let k = positions.len();
            positions.iter().enumerate().fold(0usize, |acc, (j, &p)| {
                if local >> (k - 1 - j) & 1 == 1 {
                    acc | 1 << (n - 1 - p)
                } else {
                    acc
                }
            })
        };
        let keep_idx: Vec<usize> = (0..1usize << keep.len()).map(|i| scatter(&keep, i)).collect();
        let gone_idx: Vec<usize> = (0..1usize << gone.len()).map(|i| scatter(&gone, i)).collect();
        let dk = keep_idx.len();
        let mut data = vec![C64::new(0.0, 0.0); dk * dk];
        for (r, &kr) in keep_idx.iter().enumerate() {
            for (c, &kc) in keep_idx.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &g in &gone_idx {
                    acc += self.data[(kr | g) * self.dim + (kc | g)];
                }
                data[r * dk + c] = acc;
            }
        }
        Ok(Self {
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            dim: dk,
            data,
        })
    }

    /// Keeps only `keep` (in the given order), tracing out everything else.
    pub fn reduce_to(&self, keep: &[Qubit]) -> Result<Self> {
        let discard: Vec<Qubit> = self.labels.iter().copied().filter(|q| !keep.contains(q)).collect();
        self.partial_trace(&discard)?.reorder(keep)
    }

    /// Same state with the register permuted into `order`.
    pub fn reorder(&self, order: &[Qubit]) -> Result<Self> {
        if order == self.labels.as_slice() {
            return Ok(self.clone());
        }
        if order.len() != self.labels.len() {
            return invalid("reorder must list every label exactly once");
        }
        check_unique(order)?;
        let n = order.len();
        let src: Vec<usize> = order.iter().map(|q| self.position(*q)).collect::<Result<_>>()?;
        let map: Vec<usize> = (0..self.dim)
            .map(|i| {
                (0..n).fold(0usize, |acc, j| {
                    if i >> (n - 1 - j) & 1 == 1 {
                        acc | 1 << (n - 1 - src[j])
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let mut data = vec![C64::new(0.0, 0.0); self.dim * self.dim];
        for r in 0..self.dim {
            for c in 0..self.dim {
                data[r * self.dim + c] = self.data[map[r] * self.dim + map[c]];
            }
        }
        Ok(Self {
            labels: order.to_vec(),
            dim: self.dim,
            data,
        })
    }

    /// Physically exchanges the contents of qubits `a` and `b`.
    pub fn swap_qubits(&self, a: Qubit, b: Qubit) -> Result<Self> {
        let (pa, pb) = (self.position(a)?, self.position(b)?);
        let mut swapped = self.clone();
        swapped.labels.swap(pa, pb);
        swapped.reorder(&self.labels)
    }

    /// Renames labels in place of position (`from[i]` becomes `to[i]`).
    pub fn relabel(&self, from: &[Qubit], to: &[Qubit]) -> Result<Self> {
        if from.len() != to.len() {
            return invalid("relabel lists differ in length");
        }
        let mut labels = self.labels.clone();
        for (f, t) in from.iter().zip(to) {
            let p = self.position(*f)?;
            labels[p] = *t;
        }
        check_unique(&labels)?;
        Ok(Self {
            labels,
            dim: self.dim,
            data: self.data.clone(),
        })
    }

    /// `M rho M^dagger` with `M` acting on `q`.
    pub fn apply_1q(&self, q: Qubit, m: &Mat2) -> Result<Self> {
        let mask = self.mask(q)?;
        let d = self.dim;
        let mut data = self.data.clone();
        // rows
        for i0 in (0..d).filter(|i| i & mask == 0) {
            let i1 = i0 | mask;
            for c in 0..d {
                let (a, b) = (data[i0 * d + c], data[i1 * d + c]);
                data[i0 * d + c] = m[0][0] * a + m[0][1] * b;
                data[i1 * d + c] = m[1][0] * a + m[1][1] * b;
            }
        }
        // columns, with M^dagger on the right
        let (c00, c01, c10, c11) = (m[0][0].conj(), m[0][1].conj(), m[1][0].conj(), m[1][1].conj());
        for r in 0..d {
            let row = &mut data[r * d..(r + 1) * d];
            for j0 in (0..d).filter(|j| j & mask == 0) {
                let j1 = j0 | mask;
                let (a, b) = (row[j0], row[j1]);
                row[j0] = a * c00 + b * c01;
                row[j1] = a * c10 + b * c11;
            }
        }
        Ok(Self {
            labels: self.labels.clone(),
            dim: d,
            data,
        })
    }

    /// `sum_k K_k rho K_k^dagger` on qubit `q`.
    pub fn apply_kraus(&self, q: Qubit, kraus: &[Mat2]) -> Result<Self> {
        self.position(q)?;
        let mut acc: Option<Self> = None;
        for k in kraus {
            let term = self.apply_1q(q, k)?;
            acc = Some(match acc {
                None => term,
                Some(mut a) => {
                    for (x, y) in a.data.iter_mut().zip(&term.data) {
                        *x += y;
                    }
                    a
                }
            });
        }
        acc.ok_or_else(|| Error::InvalidArgument("empty Kraus set".into()))
    }

    /// `U rho U^dagger` with the 4x4 `U` acting on `(q1, q2)`, `q1` as the high bit.
    pub fn apply_2q(&self, q1: Qubit, q2: Qubit, u: &Mat4) -> Result<Self> {
        let (m1, m2) = (self.mask(q1)?, self.mask(q2)?);
        if m1 == m2 {
            return invalid("two-qubit gate needs distinct qubits");
        }
        let d = self.dim;
        let idx = |base: usize| [base, base | m2, base | m1, base | m1 | m2];
        let mut data = self.data.clone();
        for base in (0..d).filter(|i| i & (m1 | m2) == 0) {
            let ix = idx(base);
            for c in 0..d {
                let v: [C64; 4] = std::array::from_fn(|k| data[ix[k] * d + c]);
                for (a, &ia) in ix.iter().enumerate() {
                    data[ia * d + c] = (0..4).map(|b| u[a][b] * v[b]).sum();
                }
            }
        }
        for r in 0..d {
            let row = &mut data[r * d..(r + 1) * d];
            for base in (0..d).filter(|i| i & (m1 | m2) == 0) {
                let ix = idx(base);
                let v: [C64; 4] = std::array::from_fn(|k| row[ix[k]]);
                for (a, &ia) in ix.iter().enumerate() {
                    row[ia] = (0..4).map(|b| v[b] * u[a][b].conj()).sum();
                }
            }
        }
        Ok(Self {
            labels: self.labels.clone(),
            dim: d,
            data,
        })
    }

    pub fn apply_cnot(&self, control: Qubit, target: Qubit) -> Result<Self> {
        self.apply_2q(control, target, &super::gates::cnot())
    }

    /// `<target| rho |target>`, with the ket matched to this register by label.
    pub fn fidelity_with_pure(&self, target: &Ket) -> Result<f64> {
        if target.n_qubits() != self.n_qubits() {
            return invalid(format!(
                "dimension mismatch: state has {} qubits, target {}",
                self.n_qubits(),
                target.n_qubits()
            ));
        }
        let rho = self
            .reorder(target.labels())
            .map_err(|_| Error::InvalidArgument("target labels do not match the state's labels".into()))?;
        let amps = target.amplitudes();
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            if amps[r] == C64::new(0.0, 0.0) {
                continue;
            }
            let row: C64 = rho.data[r * d..(r + 1) * d].iter().zip(amps).map(|(x, a)| x * a).sum();
            acc += amps[r].conj() * row;
        }
        Ok(acc.re)
    }

    /// `Re Tr[self * other]`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        let other = other.reorder(&self.labels)?;
        let d = self.dim;
        let mut acc = 0.0;
        for r in 0..d {
            for c in 0..d {
                acc += (self.data[r * d + c] * other.data[c * d + r]).re;
            }
        }
        Ok(acc)
    }
}

fn hermitian_eigenvalues(dim: usize, data: &[C64]) -> Vec<f64> {
    if dim == 1 {
        return vec![data[0].re];
    }
    let m = DMatrix::from_fn(dim, dim, |r, c| (data[r * dim + c] + data[c * dim + r].conj()) * 0.5);
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `(1/2) sum |eig(a - b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return invalid("trace distance needs equal dimensions");
    }
    let b = b
        .reorder(a.labels())
        .map_err(|_| Error::InvalidArgument("trace distance needs identical label sets".into()))?;
    let diff: Vec<C64> = a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect();
    Ok(0.5 * hermitian_eigenvalues(a.dim, &diff).iter().map(|e| e.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{make_ghz_state, make_w_state, qubits};

    fn q(i: u32) -> Qubit {
        Qubit(i)
    }

    #[test]
    fn tensor_of_mixed_is_identity_over_four() {
        let a = DensityMatrix::maximally_mixed(vec![q(0)]).unwrap();
        let b = DensityMatrix::maximally_mixed(vec![q(1)]).unwrap();
        let t = a.tensor(&b).unwrap();
        let expect = DensityMatrix::maximally_mixed(vec![q(0), q(1)]).unwrap();
        assert!(t.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = Ket::zero(q(0)).to_density();
        let b = Ket::one(q(1)).to_density();
        let t = a.tensor(&b).unwrap();
        let expect = Ket::basis(vec![q(0), q(1)], 0b01).unwrap().to_density();
        assert!(t.max_abs_diff(&expect).unwrap() < 1e-15);
        assert!(a.tensor(&a).is_err());
    }

    #[test]
    fn bell_pair_marginal_is_mixed() {
        let bell = Ket::psi_plus(q(0), q(1)).unwrap().to_density();
        let red = bell.partial_trace(&[q(1)]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![q(0)]).unwrap();
        assert!(red.max_abs_diff(&mixed).unwrap() < 1e-15);
        assert!(bell.partial_trace(&[q(7)]).is_err());
    }

    #[test]
    fn reduced_w_matches_mixture() {
        // Tr_1 |W><W|_4 = 3/4 |W><W|_3 + 1/4 |000><000|
        let w4 = make_w_state(4).unwrap().to_density();
        let red = w4.partial_trace(&[q(3)]).unwrap();
        let expect = DensityMatrix::w_with_loss(4, qubits(3)).unwrap();
        assert!(red.max_abs_diff(&expect).unwrap() < 1e-15);
        let w3 = make_w_state(3).unwrap();
        assert!((red.fidelity_with_pure(&w3).unwrap() - 0.75).abs() < 1e-15);
        assert!((red.entry(0, 0).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reduced_w_general_loss() {
        for total in 3..8 {
            let w = make_w_state(total).unwrap().to_density();
            for k in 1..total - 1 {
                let discard: Vec<Qubit> = (0..k as u32).map(Qubit).collect();
                let red = w.partial_trace(&discard).unwrap();
                let kept: Vec<Qubit> = (k as u32..total as u32).map(Qubit).collect();
                let expect = DensityMatrix::w_with_loss(total, kept).unwrap();
                assert!(red.max_abs_diff(&expect).unwrap() < 1e-14);
            }
        }
    }

    #[test]
    fn ghz_loses_entanglement_on_loss() {
        let g = make_ghz_state(4).unwrap().to_density();
        let red = g.partial_trace(&[q(2)]).unwrap();
        let expect = DensityMatrix::diagonal(vec![q(0), q(1), q(3)], &[0.5, 0., 0., 0., 0., 0., 0., 0.5]).unwrap();
        assert!(red.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn product_trace_recovers_factor() {
        let a = Ket::from_bloch(q(0), 0.4, 1.1).to_density();
        let b = Ket::from_bloch(q(5), 2.0, -0.3).to_density();
        let ab = a.tensor(&b).unwrap();
        assert!(ab.partial_trace(&[q(5)]).unwrap().max_abs_diff(&a).unwrap() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let psi = Ket::psi_plus(q(0), q(1)).unwrap();
        let rho = psi.to_density();
        assert!((rho.fidelity_with_pure(&psi).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(vec![q(0), q(1)]).unwrap();
        assert!((mixed.fidelity_with_pure(&psi).unwrap() - 0.25).abs() < 1e-15);
        let zz = Ket::basis(vec![q(0), q(1)], 0).unwrap().to_density();
        let lossy = rho.scaled(2.0 / 3.0).add(&zz.scaled(1.0 / 3.0)).unwrap();
        assert!((lossy.fidelity_with_pure(&psi).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(lossy.fidelity_with_pure(&Ket::zero(q(0))).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let z = Ket::zero(q(0)).to_density();
        let o = Ket::one(q(0)).to_density();
        let p = Ket::plus(q(0)).to_density();
        assert!(trace_distance(&z, &z).unwrap().abs() < 1e-15);
        assert!((trace_distance(&z, &o).unwrap() - 1.0).abs() < 1e-12);
        // eigenvalues of |0><0| - |+><+| are +-1/sqrt(2) / 1, halved sum 1/sqrt(2)
        assert!((trace_distance(&z, &p).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        let two = Ket::plus(q(1)).to_density();
        assert!(trace_distance(&z, &z.tensor(&two).unwrap()).is_err());
    }

    #[test]
    fn cnot_builds_bell_pair() {
        let plus = Ket::plus(q(0)).to_density();
        let zero = Ket::zero(q(1)).to_density();
        let bell = plus.tensor(&zero).unwrap().apply_cnot(q(0), q(1)).unwrap();
        let phi = Ket::phi_plus(q(0), q(1)).unwrap();
        assert!((bell.fidelity_with_pure(&phi).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn swap_exchanges_contents() {
        let s = Ket::basis(vec![q(0), q(1)], 0b10).unwrap().to_density();
        let t = s.swap_qubits(q(0), q(1)).unwrap();
        assert!((trace_distance(&s, &t).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(t.labels(), s.labels());
        assert!((t.entry(1, 1).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let s = make_w_state(3).unwrap().to_density();
        let text = serde_json::to_string(&s).unwrap();
        let back: DensityMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
