//! Bell-pair relay along a chain of nodes `1..=n`.
//!
//! Node 1 prepares `|phi+>` and sends one half down the chain. Each
//! intermediate node swaps it against a fresh local pair and broadcasts the
//! Bell outcome, applying the Pauli correction to the half it sends on. S and
//! R each copy the passing qubit onto a fresh `|0>` ancilla with a CNOT. At
//! the end node 1 and node n measure their qubits in the X basis and R
//! applies `Z` on odd parity, leaving the ancillas of S and R entangled.
//!
//! Local preparation is noiseless; every transmitted qubit passes through the
//! channel of the node receiving it. Qubits are measured as soon as they are
//! no longer needed, so at most six qubits are ever live.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    announce_roles, sample_index, teleport_branch, teleport_step, EventKind, NetworkConfig, NodeId, ProtocolKind,
    Resource, RunMode, RunOutcome, Transcript, Visibility,
};
use crate::channels::QuantumChannel;
use crate::error::{invalid, Result};
use crate::qcore::gates;
use crate::qcore::{Basis, DensityMatrix, Ket, Qubit};

/// Largest register the relay ever holds.
pub const RELAY_MAX_LIVE: usize = 6;

/// All ordered (S, R) placements on an `n`-node chain.
pub fn relay_placements(n: usize) -> Vec<(u32, u32)> {
    let n = n as u32;
    (1..=n)
        .flat_map(|s| (1..=n).filter(move |&r| r != s).map(move |r| (s, r)))
        .collect()
}

struct Labels(u32);

impl Labels {
    fn fresh(&mut self) -> Qubit {
        self.0 += 1;
        Qubit(self.0)
    }
}

struct Chain {
    rho: DensityMatrix,
    max_live: usize,
}

impl Chain {
    fn set(&mut self, rho: DensityMatrix) {
        self.max_live = self.max_live.max(rho.n_qubits());
        self.rho = rho;
    }
}

fn copy_to_ancilla(rho: &DensityMatrix, through: Qubit, ancilla: Qubit) -> Result<DensityMatrix> {
    rho.tensor(&Ket::zero(ancilla).to_density())?
        .apply_cnot(through, ancilla)
}

/// Measures `q` in the X basis. Exact mode folds the `Z` correction on `r`
/// into the state; sampled mode returns the drawn bit for the caller to
/// announce.
fn end_measurement<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    q: Qubit,
    r: Qubit,
    mode: RunMode,
    rng: &mut R,
) -> Result<(DensityMatrix, u8)> {
    let branches = rho.measure_all_outcomes(&[q], Basis::Hadamard)?;
    match mode {
        RunMode::Exact => {
            let odd = branches[1].1.state.apply_1q(r, &gates::Z)?;
            Ok((branches[0].1.state.add(&odd)?, 0))
        }
        RunMode::Sampled => {
            let b = sample_index(branches.iter().map(|(_, b)| b.probability), rng);
            Ok((branches[b as usize].1.normalized()?, b))
        }
    }
}

/// The S-R pair produced by the chain, normalised, plus the peak register size.
fn relay_pair<R: Rng + ?Sized>(
    config: &NetworkConfig,
    channel_for: impl Fn(NodeId) -> QuantumChannel,
    mode: RunMode,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<(DensityMatrix, usize)> {
    let n = config.n_nodes as u32;
    let is_role = |k: u32| k == config.sender.0 || k == config.receiver.0;
    let anc_r = config.receiver.qubit();
    // node ids occupy 1..=n; chain qubits are numbered above them
    let mut labels = Labels(n);
    let a1 = labels.fresh();
    let mut t = labels.fresh();
    let mut chain = Chain {
        rho: Ket::phi_plus(a1, t)?.to_density(),
        max_live: 2,
    };
    if is_role(1) {
        chain.set(copy_to_ancilla(&chain.rho, t, Qubit(1))?);
    }

    for k in 2..=n {
        transcript.next_round();
        transcript.private_send(NodeId(k - 1), NodeId(k), "relay/qubit", Vec::new());
        chain.rho = channel_for(NodeId(k)).apply_to(&chain.rho, t)?;
        if is_role(k) {
            chain.set(copy_to_ancilla(&chain.rho, t, Qubit(k))?);
        }
        if k == n {
            break;
        }
        let (a, b) = (labels.fresh(), labels.fresh());
        chain.set(chain.rho.tensor(&Ket::phi_plus(a, b)?.to_density())?);
        let branches: Vec<DensityMatrix> = (0..4)
            .map(|m| teleport_branch(&chain.rho, t, a, b, m, Resource::PhiPlus).map(|br| br.state))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = branches.iter().map(|s| s.trace()).collect();
        let m = sample_index(weights.iter().copied(), rng);
        chain.rho = match mode {
            RunMode::Exact => branches
                .iter()
                .skip(1)
                .try_fold(branches[0].clone(), |acc, s| acc.add(s))?,
            RunMode::Sampled => branches[m as usize].normalized()?,
        };
        transcript.broadcast(NodeId(k), "relay/swap", vec![m]);
        t = b;
    }

    transcript.next_round();
    let (rho, x1) = end_measurement(&chain.rho, a1, anc_r, mode, rng)?;
    transcript.broadcast(NodeId(1), "relay/end", vec![x1]);
    let (rho, xn) = end_measurement(&rho, t, anc_r, mode, rng)?;
    transcript.broadcast(NodeId(n), "relay/end", vec![xn]);
    let rho = if (x1 ^ xn) == 1 {
        rho.apply_1q(anc_r, &gates::Z)?
    } else {
        rho
    };
    transcript.record(
        EventKind::TeleportCorrection,
        config.receiver,
        Visibility::PrivateTo(config.receiver),
        "relay/correct",
        vec![x1 ^ xn],
    );
    let pair = rho.reorder(&[config.sender.qubit(), anc_r])?.normalized()?;
    Ok((pair, chain.max_live))
}

fn check_relay(config: &NetworkConfig) -> Result<()> {
    config.validate()?;
    if config.n_nodes < 4 {
        return invalid(format!("the relay needs at least 4 nodes, got {}", config.n_nodes));
    }
    if !config.lost_nodes.is_empty() {
        return invalid("the relay chain cannot bridge a lost node");
    }
    Ok(())
}

/// The state the same placement yields over identity channels.
pub fn relay_target(config: &NetworkConfig) -> Result<DensityMatrix> {
    check_relay(config)?;
    // outcomes drawn here only feed the throwaway transcript
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (pair, _) = relay_pair(
        config,
        |_| QuantumChannel::identity(),
        RunMode::Exact,
        &mut Transcript::new(),
        &mut rng,
    )?;
    Ok(pair)
}

/// Runs the relay protocol. The reported AE fidelity is `Tr[rho rho_0]`
/// with `rho_0` the noiseless output for the same placement.
pub fn run_relay_protocol<R: Rng + ?Sized>(config: &NetworkConfig, mode: RunMode, rng: &mut R) -> Result<RunOutcome> {
    check_relay(config)?;
    let live: Vec<NodeId> = config.nodes().collect();
    let mut transcript = Transcript::new();
    if !announce_roles(config, &live, &mut transcript)? {
        return Ok(RunOutcome::aborted(ProtocolKind::Relay, mode, 0.0, transcript));
    }
    let (pair, max_live) = relay_pair(config, |k| config.channel_for(k).clone(), mode, &mut transcript, rng)?;
    debug_assert!(max_live <= RELAY_MAX_LIVE);
    let target = relay_target(config)?;
    let ae_fidelity = pair.overlap(&target)?;
    let (s, r) = (config.sender.qubit(), config.receiver.qubit());
    let (delivered, masked) = teleport_step(
        config,
        &pair,
        (s, r),
        Resource::PhiPlus,
        &live,
        mode,
        &mut transcript,
        rng,
    )?;
    Ok(RunOutcome {
        protocol: ProtocolKind::Relay,
        mode,
        aborted: false,
        delivered_fidelity: Some(delivered),
        ae_fidelity: Some(ae_fidelity),
        analytic_success_probability: 1.0,
        masked_outcome: Some(masked),
        anonymous_entanglement: Some(pair),
        transcript,
    })
}
