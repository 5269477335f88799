//! Anonymous transmission with the GHZ state.
//!
//! Every node other than S and R measures in the X basis. The parity of the
//! outcomes is computed anonymously and R applies `Z` when it is odd, which
//! maps every branch onto the all-`|+>` branch. The protocol never aborts.

use rand::Rng;

use super::{
    announce_roles, check_cap, parity_protocol, record_distribution, sample_index, teleport_step, EventKind,
    NetworkConfig, NodeId, ProtocolKind, Resource, RunMode, RunOutcome, Transcript, Visibility,
};
use crate::error::{Error, Result};
use crate::qcore::gates;
use crate::qcore::{Basis, DensityMatrix, Ket};

pub fn run_ghz_protocol<R: Rng + ?Sized>(config: &NetworkConfig, mode: RunMode, rng: &mut R) -> Result<RunOutcome> {
    config.validate()?;
    if !config.lost_nodes.is_empty() {
        return Err(Error::ProtocolImpossible(
            "a GHZ state with a lost qubit is separable; no entanglement can be shared".into(),
        ));
    }
    let live: Vec<NodeId> = config.nodes().collect();
    check_cap(config, live.len() + 1)?;
    let mut transcript = Transcript::new();
    let (s, r) = (config.sender.qubit(), config.receiver.qubit());

    if !announce_roles(config, &live, &mut transcript)? {
        return Ok(RunOutcome::aborted(ProtocolKind::Ghz, mode, 0.0, transcript));
    }
    record_distribution(&live, &mut transcript);

    let mut rho: DensityMatrix = Ket::ghz(live.iter().map(|n| n.qubit()).collect())?.to_density();
    rho = config.channel_for(config.sender).apply_to(&rho, s)?;
    rho = config.channel_for(config.receiver).apply_to(&rho, r)?;

    transcript.next_round();
    let mut outcomes = Vec::new();
    for &k in live.iter().filter(|&&n| n != config.sender && n != config.receiver) {
        rho = config.channel_for(k).apply_to(&rho, k.qubit())?;
        let branches = rho.measure_all_outcomes(&[k.qubit()], Basis::Hadamard)?;
        let b = match mode {
            RunMode::Exact => {
                // Z on R commutes with everything still to come, so the parity
                // correction can be folded in outcome by outcome.
                let odd = branches[1].1.state.apply_1q(r, &gates::Z)?;
                rho = branches[0].1.state.add(&odd)?;
                0
            }
            RunMode::Sampled => {
                let b = sample_index(branches.iter().map(|(_, b)| b.probability), rng);
                rho = branches[b as usize].1.normalized()?;
                b
            }
        };
        transcript.record(EventKind::Measurement, k, Visibility::PrivateTo(k), "measure", vec![b]);
        outcomes.push((k, b));
    }

    let inputs: Vec<(NodeId, u8)> = live
        .iter()
        .map(|&n| (n, outcomes.iter().find(|(k, _)| *k == n).map_or(0, |(_, b)| *b)))
        .collect();
    let parity = parity_protocol(&inputs, "parity", &mut transcript, rng)?;
    if mode == RunMode::Sampled && parity == 1 {
        rho = rho.apply_1q(r, &gates::Z)?;
    }
    transcript.record(
        EventKind::TeleportCorrection,
        config.receiver,
        Visibility::PrivateTo(config.receiver),
        "parity-correct",
        vec![parity],
    );

    let pair = rho.reorder(&[s, r])?.normalized()?;
    let ae_fidelity = pair.fidelity_with_pure(&Resource::PhiPlus.ket(s, r)?)?;
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
        protocol: ProtocolKind::Ghz,
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
