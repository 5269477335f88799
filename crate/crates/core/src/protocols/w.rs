//! Anonymous transmission with the W state.

use rand::Rng;

use super::{
    announce_roles, check_cap, record_distribution, sample_index, teleport_step, veto_protocol, EventKind,
    NetworkConfig, NodeId, ProtocolKind, Resource, RunMode, RunOutcome, Transcript, Visibility, FUNCTIONALITY,
};
use crate::error::Result;
use crate::qcore::{Basis, DensityMatrix, ZERO_PROBABILITY};

/// The shared W state after distribution: lost qubits traced out, the
/// channels of S and R already applied. Measurers' channels are applied just
/// before each measurement, which is equivalent because the channels act on
/// distinct qubits.
fn distributed_state(config: &NetworkConfig, live: &[NodeId]) -> Result<DensityMatrix> {
    let labels = live.iter().map(|n| n.qubit()).collect();
    let rho = DensityMatrix::w_with_loss(config.n_nodes, labels)?;
    let rho = config
        .channel_for(config.sender)
        .apply_to(&rho, config.sender.qubit())?;
    config
        .channel_for(config.receiver)
        .apply_to(&rho, config.receiver.qubit())
}

fn measurers(config: &NetworkConfig, live: &[NodeId]) -> Vec<NodeId> {
    live.iter()
        .copied()
        .filter(|&n| n != config.sender && n != config.receiver)
        .collect()
}

/// Post-selected S-R state (all measurers read 0) and its Born weight.
///
/// The state is returned unnormalised; its trace is the success probability.
pub fn w_post_selected(config: &NetworkConfig) -> Result<DensityMatrix> {
    config.validate()?;
    let live: Vec<NodeId> = config.live_nodes().collect();
    check_cap(config, live.len())?;
    let mut rho = distributed_state(config, &live)?;
    for k in measurers(config, &live) {
        rho = config.channel_for(k).apply_to(&rho, k.qubit())?;
        rho = rho.measure_out(&[k.qubit()], Basis::Standard, 0)?.state;
    }
    rho.reorder(&[config.sender.qubit(), config.receiver.qubit()])
}

/// Runs the W-state protocol end to end.
///
/// Lost nodes never respond: their qubits are traced out and they take no
/// part in any classical subroutine.
pub fn run_protocol1<R: Rng + ?Sized>(config: &NetworkConfig, mode: RunMode, rng: &mut R) -> Result<RunOutcome> {
    config.validate()?;
    let live: Vec<NodeId> = config.live_nodes().collect();
    // message qubit plus the live W register
    check_cap(config, live.len() + 1)?;
    let mut transcript = Transcript::new();
    let (s, r) = (config.sender.qubit(), config.receiver.qubit());

    let accepted = w_post_selected(config)?;
    let p_success = accepted.trace();

    if !announce_roles(config, &live, &mut transcript)? {
        return Ok(RunOutcome::aborted(ProtocolKind::W, mode, p_success, transcript));
    }
    record_distribution(&live, &mut transcript);

    let mut outcomes = Vec::new();
    let pair = match mode {
        RunMode::Exact => {
            transcript.next_round();
            for k in measurers(config, &live) {
                transcript.record(EventKind::Measurement, k, Visibility::PrivateTo(k), "measure", vec![0]);
                outcomes.push((k, 0u8));
            }
            accepted.clone()
        }
        RunMode::Sampled => {
            let mut rho = distributed_state(config, &live)?;
            transcript.next_round();
            for k in measurers(config, &live) {
                rho = config.channel_for(k).apply_to(&rho, k.qubit())?;
                let branches = rho.measure_all_outcomes(&[k.qubit()], Basis::Standard)?;
                let b = sample_index(branches.iter().map(|(_, b)| b.probability), rng);
                transcript.record(EventKind::Measurement, k, Visibility::PrivateTo(k), "measure", vec![b]);
                outcomes.push((k, b));
                rho = branches[b as usize].1.normalized()?;
            }
            rho.reorder(&[s, r])?
        }
    };

    let veto = veto_protocol(&outcomes, config.veto_rounds, &mut transcript, rng)?;
    if veto == 1 || p_success < ZERO_PROBABILITY {
        transcript.record(EventKind::Abort, FUNCTIONALITY, Visibility::Public, "abort", vec![1]);
        return Ok(RunOutcome::aborted(ProtocolKind::W, mode, p_success, transcript));
    }

    let pair = pair.normalized()?;
    let ae_fidelity = pair.fidelity_with_pure(&Resource::PsiPlus.ket(s, r)?)?;
    let (delivered, masked) = teleport_step(
        config,
        &pair,
        (s, r),
        Resource::PsiPlus,
        &live,
        mode,
        &mut transcript,
        rng,
    )?;
    Ok(RunOutcome {
        protocol: ProtocolKind::W,
        mode,
        aborted: false,
        delivered_fidelity: Some(delivered),
        ae_fidelity: Some(ae_fidelity),
        analytic_success_probability: p_success,
        masked_outcome: Some(masked),
        anonymous_entanglement: Some(pair),
        transcript,
    })
}
