//! Round-based simulation of the anonymous-transmission protocols.
//!
//! Nodes are numbered `1..=n`; node `k` holds the register slot `Qubit(k)`.
//! The message qubit is [`MESSAGE_QUBIT`]. Every run works in one of two
//! modes:
//!
//! - [`RunMode::Exact`] sums over measurement branches with their Born
//!   weights, so reported fidelities and probabilities are deterministic.
//!   The transcript then follows the accepting branch, with the random
//!   choices of the classical subroutines drawn from the generator.
//! - [`RunMode::Sampled`] draws every measurement outcome from the
//!   generator, as a physical run would.

mod classical;
mod config;
mod ghz;
mod relay;
mod transcript;
mod w;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use classical::{collision_detection, parity_protocol, receiver_notification, veto_protocol, FUNCTIONALITY};
pub use config::{message_spec, parse_message, ConfigFile, NetworkConfig, DEFAULT_VETO_ROUNDS, MESSAGE_QUBIT};
pub use ghz::run_ghz_protocol;
pub use relay::{relay_placements, run_relay_protocol};
pub use transcript::{Event, EventKind, Transcript, Visibility};
pub use w::{run_protocol1, w_post_selected};

use crate::error::{Error, Result};
use crate::qcore::gates::{self, Mat2};
use crate::qcore::{Basis, Branch, DensityMatrix, Ket, Qubit};

/// Network node, numbered from 1. Node 0 stands for an ideal functionality
/// or the trusted source.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    /// The register slot of this node's share of the resource state.
    pub fn qubit(self) -> Qubit {
        Qubit(self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node{}", self.0)
    }
}

/// Which protocol to run.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    W,
    Ghz,
    Relay,
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "w" => Ok(Self::W),
            "ghz" => Ok(Self::Ghz),
            "relay" => Ok(Self::Relay),
            other => Err(Error::Parse(format!(
                "unknown protocol '{other}' (expected w, ghz or relay)"
            ))),
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::W => "w",
            Self::Ghz => "ghz",
            Self::Relay => "relay",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Exact,
    Sampled,
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "sampled" | "sample" | "sampling" => Ok(Self::Sampled),
            other => Err(Error::Parse(format!(
                "unknown mode '{other}' (expected exact or sampled)"
            ))),
        }
    }
}

/// Result of one protocol execution.
#[derive(Clone, Debug, Serialize)]
pub struct RunOutcome {
    pub protocol: ProtocolKind,
    pub mode: RunMode,
    pub aborted: bool,
    /// `<psi| rho_R |psi>` for the teleported message; absent after an abort.
    pub delivered_fidelity: Option<f64>,
    /// Fidelity of the shared S-R pair with its target Bell state.
    pub ae_fidelity: Option<f64>,
    /// Born weight of the accepting branch (1 for deterministic protocols).
    pub analytic_success_probability: f64,
    /// The two-bit value `m xor rand` announced during teleportation.
    pub masked_outcome: Option<u8>,
    #[serde(skip)]
    pub anonymous_entanglement: Option<DensityMatrix>,
    #[serde(skip)]
    pub transcript: Transcript,
}

impl RunOutcome {
    fn aborted(protocol: ProtocolKind, mode: RunMode, p: f64, transcript: Transcript) -> Self {
        Self {
            protocol,
            mode,
            aborted: true,
            delivered_fidelity: None,
            ae_fidelity: None,
            analytic_success_probability: p,
            masked_outcome: None,
            anonymous_entanglement: None,
            transcript,
        }
    }
}

/// Runs the selected protocol.
pub fn run<R: Rng + ?Sized>(
    kind: ProtocolKind,
    config: &NetworkConfig,
    mode: RunMode,
    rng: &mut R,
) -> Result<RunOutcome> {
    match kind {
        ProtocolKind::W => run_protocol1(config, mode, rng),
        ProtocolKind::Ghz => run_ghz_protocol(config, mode, rng),
        ProtocolKind::Relay => run_relay_protocol(config, mode, rng),
    }
}

/// Bell pair shared by S and R before teleportation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Resource {
    /// `(|00> + |11>)/sqrt2`.
    PhiPlus,
    /// `(|01> + |10>)/sqrt2`.
    PsiPlus,
}

impl Resource {
    pub fn ket(self, s: Qubit, r: Qubit) -> Result<Ket> {
        match self {
            Resource::PhiPlus => Ket::phi_plus(s, r),
            Resource::PsiPlus => Ket::psi_plus(s, r),
        }
    }
}

/// Receiver's correction after Bell outcome `m` on (message, sender half).
///
/// For `phi+` it is `P_m` itself (Paulis are self-inverse up to phase). The
/// `psi+` resource is `phi+` with an extra `X` on the receiver's half, which
/// the correction undoes first.
pub fn correction(m: u8, resource: Resource) -> Mat2 {
    let p = gates::dagger(&gates::bell_pauli(m));
    match resource {
        Resource::PhiPlus => p,
        Resource::PsiPlus => gates::mul(&p, &gates::X),
    }
}

/// Bell-measures `(msg, s)` with outcome `m`, applies the correction to `r`
/// and returns the receiver's (unnormalised) branch.
pub fn teleport_branch(
    rho: &DensityMatrix,
    msg: Qubit,
    s: Qubit,
    r: Qubit,
    m: u8,
    resource: Resource,
) -> Result<Branch> {
    let b = rho.measure_out(&[msg, s], Basis::Bell, m)?;
    let corrected = b.state.apply_1q(r, &correction(m, resource))?;
    Ok(Branch::new(corrected))
}

/// Receiver's state averaged over all four Bell outcomes.
pub fn teleport_average(
    rho: &DensityMatrix,
    msg: Qubit,
    s: Qubit,
    r: Qubit,
    resource: Resource,
) -> Result<DensityMatrix> {
    let mut acc: Option<DensityMatrix> = None;
    for m in 0..4 {
        let b = teleport_branch(rho, msg, s, r, m, resource)?;
        acc = Some(match acc {
            None => b.state,
            Some(a) => a.add(&b.state)?,
        });
    }
    Ok(acc.expect("four outcomes"))
}

/// Sends the Bell outcome `m` from S to R through two parity runs in which R
/// inputs a private random mask. Returns the public value `m xor rand` and
/// the value R recovers.
fn send_masked_outcome<R: Rng + ?Sized>(
    m: u8,
    sender: NodeId,
    receiver: NodeId,
    live: &[NodeId],
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<(u8, u8)> {
    let mask: u8 = rng.gen_range(0..4);
    let mut public = 0u8;
    for bit in [1u8, 0] {
        let inputs: Vec<(NodeId, u8)> = live
            .iter()
            .map(|&n| {
                let v = if n == sender {
                    (m >> bit) & 1
                } else if n == receiver {
                    (mask >> bit) & 1
                } else {
                    0
                };
                (n, v)
            })
            .collect();
        public |= parity_protocol(&inputs, &format!("teleport/{bit}"), transcript, rng)? << bit;
    }
    Ok((public, public ^ mask))
}

/// Step shared by all protocols: teleports the message over the S-R pair.
///
/// Returns the delivered fidelity and the public masked outcome.
#[allow(clippy::too_many_arguments)]
fn teleport_step<R: Rng + ?Sized>(
    config: &NetworkConfig,
    pair: &DensityMatrix,
    (s, r): (Qubit, Qubit),
    resource: Resource,
    live: &[NodeId],
    mode: RunMode,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<(f64, u8)> {
    let msg = MESSAGE_QUBIT;
    let joint = config.message.to_density().tensor(pair)?;
    let outcomes: Vec<Branch> = (0..4)
        .map(|m| joint.measure_out(&[msg, s], Basis::Bell, m))
        .collect::<Result<_>>()?;
    let m = sample_index(outcomes.iter().map(|b| b.probability), rng);
    transcript.next_round();
    transcript.record(
        EventKind::Measurement,
        config.sender,
        Visibility::PrivateTo(config.sender),
        "teleport/bell",
        vec![m],
    );
    let (public, recovered) = send_masked_outcome(m, config.sender, config.receiver, live, transcript, rng)?;
    transcript.record(
        EventKind::TeleportCorrection,
        config.receiver,
        Visibility::PrivateTo(config.receiver),
        "teleport/correct",
        vec![recovered],
    );
    let delivered = match mode {
        RunMode::Exact => teleport_average(&joint, msg, s, r, resource)?,
        RunMode::Sampled => {
            let b = &outcomes[m as usize];
            b.state.apply_1q(r, &correction(recovered, resource))?.normalized()?
        }
    };
    let delivered = delivered.relabel(&[r], &[msg])?;
    Ok((delivered.fidelity_with_pure(&config.message)?, public))
}

/// Draws an index with probability proportional to the given weights.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> u8 {
    let total: f64 = weights.clone().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last_possible = 0u8;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_possible = i as u8;
            if u < w {
                return i as u8;
            }
        }
        u -= w;
    }
    last_possible
}

pub(crate) fn check_cap(config: &NetworkConfig, qubits: usize) -> Result<()> {
    if qubits > config.dense_cap {
        return Err(Error::CapExceeded {
            qubits,
            cap: config.dense_cap,
        });
    }
    Ok(())
}

/// Steps 1 and 2: collision detection with S as the only volunteer, then
/// receiver notification.
fn announce_roles(config: &NetworkConfig, live: &[NodeId], transcript: &mut Transcript) -> Result<bool> {
    let wishes: Vec<(NodeId, u8)> = live.iter().map(|&n| (n, u8::from(n == config.sender))).collect();
    if collision_detection(&wishes, transcript)? != 0 {
        return Ok(false);
    }
    receiver_notification(live, config.sender, config.receiver, transcript)?;
    Ok(true)
}

/// The source hands every live node its share of the resource.
fn record_distribution(live: &[NodeId], transcript: &mut Transcript) {
    transcript.next_round();
    for &n in live {
        transcript.record(
            EventKind::PrivateSend,
            FUNCTIONALITY,
            Visibility::PrivateTo(n),
            "distribute",
            Vec::new(),
        );
    }
}
