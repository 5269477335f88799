//! Closed-form fidelities, success probabilities and noise thresholds, plus a
//! structured evaluator for the post-selected two-qubit states that works for
//! any single-qubit channel and any network size.

use serde::{Deserialize, Serialize};

use crate::channels::{ChannelKind, QuantumChannel};
use crate::error::{invalid, Error, Result};
use crate::qcore::gates::{self, Mat2};
use crate::qcore::{DensityMatrix, Ket, Qubit, C64};

/// Which anonymous-entanglement resource a report describes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    W,
    Ghz,
    WLoss,
}

/// Fidelity of anonymous entanglement for one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub protocol: ResourceKind,
    pub channel: String,
    pub q: f64,
    pub n_nodes: usize,
    pub fidelity: f64,
    pub success_probability: f64,
    pub useful: bool,
}

impl FidelityReport {
    /// Evaluates the closed forms for a named channel family.
    pub fn closed_form(protocol: ResourceKind, kind: ChannelKind, q: f64, n: usize) -> Result<Self> {
        check_q(q)?;
        check_n(n, 3)?;
        let (fidelity, success_probability) = match protocol {
            ResourceKind::W => (
                select(kind, || f_ae_w_dephasing(q), || f_ae_w_depolarizing(q, n))?,
                p_success_w(kind, q, n)?,
            ),
            ResourceKind::Ghz => (
                select(kind, || f_ae_ghz_dephasing(q, n), || f_ae_ghz_depolarizing(q, n))?,
                1.0,
            ),
            ResourceKind::WLoss => {
                let moments = ChannelMoments::from_channel(&channel_of(kind, q)?);
                let (_, p) = omega_sr_structured_lossy(&moments, n, 1)?;
                (f_ae_w_loss(kind, q, n)?, p)
            }
        };
        Ok(Self {
            protocol,
            channel: channel_of(kind, q)?.spec(),
            q,
            n_nodes: n,
            fidelity,
            success_probability,
            useful: is_useful(fidelity),
        })
    }
}

/// Usefulness: fidelity strictly above one half.
pub fn is_useful(fidelity: f64) -> bool {
    fidelity > 0.5
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return invalid(format!("q = {q} outside [0, 1]"));
    }
    Ok(())
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return invalid(format!("need at least {min} nodes, got {n}"));
    }
    Ok(())
}

fn select(kind: ChannelKind, deph: impl Fn() -> f64, depol: impl Fn() -> f64) -> Result<f64> {
    match kind {
        ChannelKind::Dephasing => Ok(deph()),
        ChannelKind::Depolarizing => Ok(depol()),
        ChannelKind::Identity => Ok(1.0),
        ChannelKind::Custom => invalid("closed forms exist only for dephasing and depolarizing noise"),
    }
}

fn channel_of(kind: ChannelKind, q: f64) -> Result<QuantumChannel> {
    match kind {
        ChannelKind::Dephasing => QuantumChannel::dephasing(q),
        ChannelKind::Depolarizing => QuantumChannel::depolarizing(q),
        ChannelKind::Identity => Ok(QuantumChannel::identity()),
        ChannelKind::Custom => invalid("closed forms exist only for dephasing and depolarizing noise"),
    }
}

/// W resource under dephasing; independent of the network size.
pub fn f_ae_w_dephasing(q: f64) -> f64 {
    1.0 - 2.0 * q * (1.0 - q)
}

pub fn f_ae_ghz_dephasing(q: f64, n: usize) -> f64 {
    (1.0 + (2.0 * q - 1.0).powi(n as i32)) / 2.0
}

pub fn f_ae_w_depolarizing(q: f64, n: usize) -> f64 {
    let n = n as f64;
    (1.0 + q) * (n * (q - 1.0).powi(2) + 4.0 * q * (1.0 + q)) / (4.0 * (n * (1.0 - q) + 4.0 * q))
}

pub fn f_ae_ghz_depolarizing(q: f64, n: usize) -> f64 {
    (2.0 * q.powi(n as i32) + q * q + 1.0) / 4.0
}

/// Probability that every non-S/R node of the W protocol reads 0.
pub fn p_success_w(kind: ChannelKind, q: f64, n: usize) -> Result<f64> {
    check_q(q)?;
    check_n(n, 3)?;
    let nf = n as f64;
    match kind {
        ChannelKind::Dephasing | ChannelKind::Identity => Ok(2.0 / nf),
        ChannelKind::Depolarizing => {
            Ok((q + 1.0).powi(n as i32 - 3) * (nf * (1.0 - q) + 4.0 * q) / (nf * 2f64.powi(n as i32 - 2)))
        }
        ChannelKind::Custom => invalid("success probability closed form needs dephasing or depolarizing noise"),
    }
}

/// Loss-plus-noise closed forms for one lost node, as usually quoted.
///
/// At `q = 1` these give `(n-1)/n`, which disagrees with the value `2/3`
/// obtained by tracing out the lost qubit; see [`f_ae_w_loss_traced`] for
/// the expression that agrees with simulation.
pub fn f_ae_w_loss(kind: ChannelKind, q: f64, n: usize) -> Result<f64> {
    check_q(q)?;
    check_n(n, 4)?;
    let nf = n as f64;
    match kind {
        ChannelKind::Dephasing => Ok((nf - 1.0) / nf * f_ae_w_dephasing(q)),
        ChannelKind::Depolarizing | ChannelKind::Identity => Ok((1.0 + q)
            * (nf * nf * (q - 1.0).powi(2) - 8.0 * q * q + 4.0 * nf * q * (1.0 + q))
            / (4.0 * nf * (nf * (1.0 - q) + 4.0 * q))),
        ChannelKind::Custom => invalid("loss closed form needs dephasing or depolarizing noise"),
    }
}

/// Fidelity after one of `n` W qubits is lost and the rest pass through the
/// channel, from the structured expansion with the lost qubit traced out.
pub fn f_ae_w_loss_traced(kind: ChannelKind, q: f64, n: usize) -> Result<f64> {
    check_q(q)?;
    check_n(n, 4)?;
    match kind {
        ChannelKind::Dephasing | ChannelKind::Identity => {
            let q = if kind == ChannelKind::Identity { 1.0 } else { q };
            Ok((1.0 + (2.0 * q - 1.0).powi(2)) / 3.0)
        }
        ChannelKind::Depolarizing => {
            let a = (1.0 + q) / 2.0;
            let b = (1.0 - q) / 2.0;
            let m = n as f64 - 3.0;
            Ok(a * (m * b * b + a * b + q * q + a * a + b * b) / (m * b + 3.0 * a))
        }
        ChannelKind::Custom => invalid("loss closed form needs dephasing or depolarizing noise"),
    }
}

/// Relay chain of `n` nodes with S and R at positions `s` and `r` (1-based)
/// and the same channel on every transmitted qubit.
pub fn f_ae_relay(kind: ChannelKind, q: f64, n: usize, s: usize, r: usize) -> Result<f64> {
    check_q(q)?;
    check_n(n, 2)?;
    if s == r || s == 0 || r == 0 || s > n || r > n {
        return invalid(format!("bad relay positions s = {s}, r = {r} for n = {n}"));
    }
    let hops = n as i32 - 1;
    match kind {
        ChannelKind::Identity => Ok(1.0),
        ChannelKind::Depolarizing => Ok((1.0 + 2.0 * q.powi(hops) + q.powi(s.abs_diff(r) as i32)) / 4.0),
        ChannelKind::Dephasing => Ok((1.0 + (2.0 * q - 1.0).powi(hops)) / 2.0),
        ChannelKind::Custom => invalid("relay closed form needs dephasing or depolarizing noise"),
    }
}

/// Images of the four matrix units under a channel and their `|0>` and
/// `|+>` overlaps.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMoments {
    /// `lam[x][y] = Lambda(|x><y|)`.
    pub lam: [[Mat2; 2]; 2],
    /// `tr[x][y] = <0| Lambda(|x><y|) |0>`.
    pub tr: [[C64; 2]; 2],
    /// `plus[x][y] = <+| Lambda(|x><y|) |+>`.
    pub plus: [[C64; 2]; 2],
}

impl ChannelMoments {
    pub fn from_channel(channel: &QuantumChannel) -> Self {
        let lam: [[Mat2; 2]; 2] =
            std::array::from_fn(|x| std::array::from_fn(|y| channel.apply_matrix(&gates::outer_basis(x, y))));
        let tr = std::array::from_fn(|x| std::array::from_fn(|y| lam[x][y][0][0]));
        let plus = std::array::from_fn(|x| {
            std::array::from_fn(|y| {
                let m = &lam[x][y];
                (m[0][0] + m[0][1] + m[1][0] + m[1][1]) * 0.5
            })
        });
        Self { lam, tr, plus }
    }

    pub fn tr00(&self) -> C64 {
        self.tr[0][0]
    }
    pub fn tr01(&self) -> C64 {
        self.tr[0][1]
    }
    pub fn tr10(&self) -> C64 {
        self.tr[1][0]
    }
    pub fn tr11(&self) -> C64 {
        self.tr[1][1]
    }
}

type Mat4 = [[C64; 4]; 4];

fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    std::array::from_fn(|r| std::array::from_fn(|c| a[r >> 1][c >> 1] * b[r & 1][c & 1]))
}

fn accumulate(acc: &mut Mat4, coeff: C64, m: &Mat4) {
    for (row, mrow) in acc.iter_mut().zip(m) {
        for (v, x) in row.iter_mut().zip(mrow) {
            *v += coeff * x;
        }
    }
}

fn powc(z: C64, k: usize) -> C64 {
    (0..k).fold(C64::new(1.0, 0.0), |acc, _| acc * z)
}

fn two_qubit_state(m: Mat4) -> Result<DensityMatrix> {
    DensityMatrix::from_entries(vec![Qubit(0), Qubit(1)], m.iter().flatten().copied().collect())
}

/// Post-selected S-R state of the W protocol and its success probability.
///
/// Labels are `q0` (S) and `q1` (R). The state is normalised; the
/// probability is the Born weight of all `n - 2` other nodes reading 0.
pub fn omega_sr_structured(moments: &ChannelMoments, n: usize) -> Result<(DensityMatrix, f64)> {
    check_n(n, 4)?;
    omega_sr_structured_lossy(moments, n, 0)
}

/// As [`omega_sr_structured`], with `lost` of the `n` W qubits traced out
/// (their nodes never report). `n - lost` must be at least 3.
pub fn omega_sr_structured_lossy(moments: &ChannelMoments, n: usize, lost: usize) -> Result<(DensityMatrix, f64)> {
    if n < lost + 3 {
        return invalid(format!("{n} nodes with {lost} lost leaves fewer than 3 live nodes"));
    }
    let m = n - lost - 2;
    let l = lost as f64;
    let mf = m as f64;
    let t = &moments.tr;
    let lam = &moments.lam;
    let t00 = |k: usize| powc(t[0][0], k);
    let ll = |a: (usize, usize), b: (usize, usize)| kron(&lam[a.0][a.1], &lam[b.0][b.1]);

    let zero = C64::new(0.0, 0.0);
    let mut acc: Mat4 = [[zero; 4]; 4];
    let base = ll((0, 0), (0, 0));

    // one excitation on a measured or lost qubit, in both bra and ket
    let mut c_base = C64::new(l, 0.0) * t00(m);
    if m >= 1 {
        c_base += t[1][1] * t00(m - 1) * mf;
    }
    // excitation moves between two distinct measured qubits
    if m >= 2 {
        c_base += t[1][0] * t[0][1] * t00(m - 2) * (mf * (mf - 1.0));
    }
    accumulate(&mut acc, c_base, &base);

    if m >= 1 {
        let c10 = t[1][0] * t00(m - 1) * mf;
        accumulate(&mut acc, c10, &ll((0, 1), (0, 0)));
        accumulate(&mut acc, c10, &ll((0, 0), (0, 1)));
        let c01 = t[0][1] * t00(m - 1) * mf;
        accumulate(&mut acc, c01, &ll((1, 0), (0, 0)));
        accumulate(&mut acc, c01, &ll((0, 0), (1, 0)));
    }

    let c_sr = t00(m);
    for (a, b) in [((1, 1), (0, 0)), ((0, 0), (1, 1)), ((1, 0), (0, 1)), ((0, 1), (1, 0))] {
        accumulate(&mut acc, c_sr, &ll(a, b));
    }

    let unnormalised = two_qubit_state(acc)?.scaled(1.0 / n as f64);
    let p = unnormalised.trace();
    Ok((unnormalised.normalized()?, p))
}

/// GHZ analogue: the S-R state when all `n - 2` other nodes project onto
/// `|+>`, and the weight of that branch.
pub fn gamma_sr_structured(channel: &QuantumChannel, n: usize) -> Result<(DensityMatrix, f64)> {
    check_n(n, 3)?;
    let moments = ChannelMoments::from_channel(channel);
    let m = n - 2;
    let mut acc: Mat4 = [[C64::new(0.0, 0.0); 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            let c = powc(moments.plus[x][y], m) * 0.5;
            accumulate(&mut acc, c, &kron(&moments.lam[x][y], &moments.lam[x][y]));
        }
    }
    let unnormalised = two_qubit_state(acc)?;
    let p = unnormalised.trace();
    Ok((unnormalised.normalized()?, p))
}

/// `|psi+>` on the structured evaluator's labels.
pub fn psi_plus_target() -> Ket {
    Ket::psi_plus(Qubit(0), Qubit(1)).expect("two distinct labels")
}

/// `|phi+>` on the structured evaluator's labels.
pub fn phi_plus_target() -> Ket {
    Ket::phi_plus(Qubit(0), Qubit(1)).expect("two distinct labels")
}

/// Closed forms available to the threshold search.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdFormula {
    WDepol,
    GhzDepol,
    WDeph,
    GhzDeph,
}

impl ThresholdFormula {
    pub fn fidelity(self, q: f64, n: usize) -> f64 {
        match self {
            Self::WDepol => f_ae_w_depolarizing(q, n),
            Self::GhzDepol => f_ae_ghz_depolarizing(q, n),
            Self::WDeph => f_ae_w_dephasing(q),
            Self::GhzDeph => f_ae_ghz_dephasing(q, n),
        }
    }

    /// `F - 1/2`, written without cancellation where the closed form allows.
    pub fn excess(self, q: f64, n: usize) -> f64 {
        match self {
            Self::WDeph => 2.0 * (q - 0.5).powi(2),
            Self::GhzDeph => (2.0 * q - 1.0).powi(n as i32) / 2.0,
            _ => self.fidelity(q, n) - 0.5,
        }
    }
}

const THRESHOLD_TOL: f64 = 1e-13;

/// Smallest `q` in `[0.5, 1]` at which the fidelity reaches one half.
///
/// Bisection keeps the invariant `F(hi) > 1/2`. When the fidelity exceeds
/// one half on the whole open interval the result is exactly `0.5`.
pub fn threshold_q(formula: ThresholdFormula, n: usize) -> Result<f64> {
    check_n(n, 3)?;
    let g = |q: f64| formula.excess(q, n);
    if g(1.0) <= 0.0 {
        return Err(Error::NoRoot(format!(
            "{formula:?} fidelity at q = 1 is not above 1/2 for n = {n}"
        )));
    }
    let (mut lo, mut hi) = (0.5, 1.0);
    if g(lo) > 0.0 {
        return Ok(0.5);
    }
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - 0.5 < 1e-9 {
        return Ok(0.5);
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest network size from which the W resource tolerates less
/// depolarizing noise than the GHZ resource.
pub fn crossover_n() -> Result<usize> {
    (4..100_000)
        .find_map(|n| {
            let w = threshold_q(ThresholdFormula::WDepol, n);
            let g = threshold_q(ThresholdFormula::GhzDepol, n);
            match (w, g) {
                (Ok(w), Ok(g)) if w > g => Some(Ok(n)),
                (Err(e), _) | (_, Err(e)) => Some(Err(e)),
                _ => None,
            }
        })
        .unwrap_or_else(|| Err(Error::NoRoot("no crossover below 100000 nodes".into())))
}
