//! Classical multiparty subroutines.
//!
//! Parity and veto run at message level: additive XOR secret sharing over
//! pairwise private channels followed by a broadcast. Collision detection and
//! receiver notification are ideal functionalities that reveal only their
//! outputs.

use rand::Rng;

use super::transcript::Transcript;
use super::NodeId;
use crate::error::{invalid, Result};

/// The ideal functionality / trusted source.
pub const FUNCTIONALITY: NodeId = NodeId(0);

fn check_bits(inputs: &[(NodeId, u8)]) -> Result<()> {
    if inputs.is_empty() {
        return invalid("a subroutine needs at least one participant");
    }
    if let Some((n, b)) = inputs.iter().find(|(_, b)| *b > 1) {
        return invalid(format!("{n} supplied non-bit input {b}"));
    }
    for (i, (a, _)) in inputs.iter().enumerate() {
        if inputs[i + 1..].iter().any(|(b, _)| a == b) {
            return invalid(format!("{a} listed twice"));
        }
    }
    Ok(())
}

/// XOR of all inputs, computed without revealing individual inputs.
///
/// Every participant splits its bit into one random share per participant
/// (the shares XOR to the bit), sends each share privately, then broadcasts
/// the XOR of what it received. The output is the XOR of the broadcasts.
pub fn parity_protocol<R: Rng + ?Sized>(
    inputs: &[(NodeId, u8)],
    step: &str,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<u8> {
    check_bits(inputs)?;
    let k = inputs.len();
    transcript.next_round();
    // shares[i][j]: share of participant i's bit destined for participant j
    let shares: Vec<Vec<u8>> = inputs
        .iter()
        .map(|&(_, bit)| {
            let mut row: Vec<u8> = (0..k - 1).map(|_| rng.gen_range(0..2u8)).collect();
            row.push(row.iter().fold(bit, |acc, s| acc ^ s));
            row
        })
        .collect();
    for (i, &(from, _)) in inputs.iter().enumerate() {
        for (j, &(to, _)) in inputs.iter().enumerate() {
            if i != j {
                transcript.private_send(from, to, &format!("{step}/share"), vec![shares[i][j]]);
            }
        }
    }
    transcript.next_round();
    let mut out = 0u8;
    for (j, &(node, _)) in inputs.iter().enumerate() {
        let sum = shares.iter().fold(0u8, |acc, row| acc ^ row[j]);
        transcript.broadcast(node, &format!("{step}/sum"), vec![sum]);
        out ^= sum;
    }
    Ok(out)
}

/// 1 if any participant inputs 1.
///
/// Runs `rounds` parity rounds; a participant with input 1 contributes a
/// fresh random bit to each, so a single round misses with probability 1/2
/// and the whole protocol with probability `2^-rounds`. All rounds are always
/// executed so the transcript shape does not depend on the inputs.
pub fn veto_protocol<R: Rng + ?Sized>(
    inputs: &[(NodeId, u8)],
    rounds: u32,
    transcript: &mut Transcript,
    rng: &mut R,
) -> Result<u8> {
    check_bits(inputs)?;
    if rounds == 0 {
        return invalid("veto needs at least one round");
    }
    let mut out = 0u8;
    for r in 0..rounds {
        let masked: Vec<(NodeId, u8)> = inputs
            .iter()
            .map(|&(n, b)| (n, if b == 1 { rng.gen_range(0..2u8) } else { 0 }))
            .collect();
        out |= parity_protocol(&masked, &format!("veto/{r}"), transcript, rng)?;
    }
    Ok(out)
}

/// 0 iff exactly one node wishes to send.
pub fn collision_detection(wish_bits: &[(NodeId, u8)], transcript: &mut Transcript) -> Result<u8> {
    check_bits(wish_bits)?;
    let senders = wish_bits.iter().filter(|(_, b)| *b == 1).count();
    let out = u8::from(senders != 1);
    transcript.next_round();
    transcript.broadcast(FUNCTIONALITY, "collision", vec![out]);
    Ok(out)
}

/// Private notification bits: 1 for the receiver, 0 for everybody else.
///
/// Each node's bit is delivered privately by the functionality; nothing is
/// broadcast.
pub fn receiver_notification(
    nodes: &[NodeId],
    sender: NodeId,
    receiver: NodeId,
    transcript: &mut Transcript,
) -> Result<Vec<(NodeId, u8)>> {
    if sender == receiver {
        return invalid("sender and receiver must differ");
    }
    if !nodes.contains(&receiver) || !nodes.contains(&sender) {
        return invalid("sender and receiver must take part in the notification");
    }
    transcript.next_round();
    Ok(nodes
        .iter()
        .map(|&n| {
            let bit = u8::from(n == receiver);
            transcript.private_send(FUNCTIONALITY, n, "notify", vec![bit]);
            (n, bit)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::transcript::{EventKind, Visibility};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nodes(bits: &[u8]) -> Vec<(NodeId, u8)> {
        bits.iter()
            .enumerate()
            .map(|(i, &b)| (NodeId(i as u32 + 1), b))
            .collect()
    }

    #[test]
    fn parity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = Transcript::new();
        assert_eq!(
            parity_protocol(&nodes(&[1, 0, 1, 0]), "p", &mut t, &mut rng).unwrap(),
            0
        );
        assert_eq!(parity_protocol(&nodes(&[1, 0, 0]), "p", &mut t, &mut rng).unwrap(), 1);
        assert!(parity_protocol(&nodes(&[2, 0]), "p", &mut t, &mut rng).is_err());
        t.validate().unwrap();
    }

    #[test]
    fn parity_message_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = Transcript::new();
        parity_protocol(&nodes(&[1, 1, 0, 1]), "p", &mut t, &mut rng).unwrap();
        let private = t.events().iter().filter(|e| e.kind == EventKind::PrivateSend).count();
        let public = t.public_events().count();
        assert_eq!((private, public), (12, 4));
    }

    #[test]
    fn received_shares_look_uniform() {
        // node 2 watches the share node 1 sends it; with node 1's input fixed
        // at 1 the share must still be a fair coin
        let mut ones = 0;
        let trials = 1000;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = Transcript::new();
            parity_protocol(&nodes(&[1, 0, 0, 1]), "p", &mut t, &mut rng).unwrap();
            let e = t
                .events()
                .iter()
                .find(|e| e.actor == NodeId(1) && e.visibility == Visibility::PrivateTo(NodeId(2)))
                .unwrap();
            ones += e.payload[0] as u64;
        }
        let frac = ones as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.05, "{frac}");
    }

    #[test]
    fn veto_completeness_and_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut t = Transcript::new();
            assert_eq!(veto_protocol(&nodes(&[0, 0, 0, 0]), 20, &mut t, &mut rng).unwrap(), 0);
        }
        for _ in 0..200 {
            let mut t = Transcript::new();
            assert_eq!(veto_protocol(&nodes(&[0, 1, 0, 1]), 20, &mut t, &mut rng).unwrap(), 1);
        }
        let mut t = Transcript::new();
        assert!(veto_protocol(&nodes(&[0, 1]), 0, &mut t, &mut rng).is_err());
    }

    #[test]
    fn single_round_veto_misses_half_the_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 4000;
        let hits: u32 = (0..trials)
            .map(|_| veto_protocol(&nodes(&[1, 0, 0]), 1, &mut Transcript::new(), &mut rng).unwrap() as u32)
            .sum();
        assert!((hits as f64 / trials as f64 - 0.5).abs() < 0.04);
    }

    #[test]
    fn collision_examples() {
        let mut t = Transcript::new();
        assert_eq!(collision_detection(&nodes(&[0, 1, 0, 0]), &mut t).unwrap(), 0);
        assert_eq!(collision_detection(&nodes(&[1, 1, 0]), &mut t).unwrap(), 1);
        assert_eq!(collision_detection(&nodes(&[0, 0, 0]), &mut t).unwrap(), 1);
        assert!(t
            .public_events()
            .all(|e| e.actor == FUNCTIONALITY && e.payload.len() == 1));
    }

    #[test]
    fn notification_examples() {
        let ids: Vec<NodeId> = (1..=4).map(NodeId).collect();
        let mut t = Transcript::new();
        let bits = receiver_notification(&ids, NodeId(1), NodeId(3), &mut t).unwrap();
        assert_eq!(
            bits,
            vec![(NodeId(1), 0), (NodeId(2), 0), (NodeId(3), 1), (NodeId(4), 0)]
        );
        assert_eq!(t.public_events().count(), 0);
        assert!(receiver_notification(&ids, NodeId(2), NodeId(2), &mut t).is_err());
    }
}
