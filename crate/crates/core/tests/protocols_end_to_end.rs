use anontx::channels::QuantumChannel;
use anontx::protocols::{run, ConfigFile, EventKind, NodeId, ProtocolKind, RunMode, Transcript, Visibility};
use anontx::security::{audit, AdversaryScenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CONFIG: &str = "\
# five nodes, node 3 noisier than the rest
protocol = w
nodes = 5
sender = 2
receiver = 4
channel = depolarizing:q=0.9
node3 = depolarizing:q=0.85
message = bloch:0.8,0.1
seed = 11
";

#[test]
fn config_file_drives_a_run() {
    let cfg: ConfigFile = CONFIG.parse().unwrap();
    let net = cfg.network().unwrap();
    assert_eq!(net.sender, NodeId(2));
    assert_eq!(net.channel_for(NodeId(3)).q(), Some(0.85));
    let out = run(
        cfg.protocol.unwrap(),
        &net,
        RunMode::Exact,
        &mut ChaCha8Rng::seed_from_u64(net.seed),
    )
    .unwrap();
    assert!(!out.aborted);
    let f = out.delivered_fidelity.unwrap();
    assert!(f > 0.5 && f < 1.0);
}

#[test]
fn unknown_keys_are_rejected() {
    let err = "nodes = 5\nflavour = mint\n".parse::<ConfigFile>().unwrap_err();
    assert!(err.to_string().contains("line 2"));
}

#[test]
fn sampled_transcripts_round_trip() {
    let net: ConfigFile = CONFIG.parse().unwrap();
    let net = net.network().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in [ProtocolKind::W, ProtocolKind::Ghz, ProtocolKind::Relay] {
        let out = run(kind, &net, RunMode::Sampled, &mut rng).unwrap();
        out.transcript.validate().unwrap();
        let text = out.transcript.to_jsonl();
        assert_eq!(text.lines().count(), out.transcript.events().len());
        let back = Transcript::from_jsonl(&text).unwrap();
        assert_eq!(back.events(), out.transcript.events());
    }
}

#[test]
fn private_events_stay_private() {
    let net: ConfigFile = CONFIG.parse().unwrap();
    let net = net.network().unwrap();
    let out = run(
        ProtocolKind::W,
        &net,
        RunMode::Sampled,
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    for e in out.transcript.events() {
        match e.visibility {
            Visibility::Public => assert!(e.visible_to(NodeId(5))),
            Visibility::PrivateTo(k) => {
                let outsider = (1..=5).map(NodeId).find(|&n| n != k && n != e.actor).unwrap();
                assert!(!e.visible_to(outsider));
            }
        }
        if e.kind == EventKind::Measurement {
            assert_eq!(e.visibility, Visibility::PrivateTo(e.actor));
        }
    }
}

#[test]
fn noisy_network_audit_passes() {
    let cfg: ConfigFile = "nodes = 6\nchannel = dephasing:q=0.9\n".parse().unwrap();
    let net = cfg.network().unwrap();
    let report = audit(&net, &AdversaryScenario::new([2, 6])).unwrap();
    assert!(report.within_bound);
    assert_eq!(report.epsilon_bound, 0.0);
    assert!((report.sender.guessing_probability - 0.25).abs() < 1e-12);
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["sender"]["certificate"], "state-independence");
}

#[test]
fn perturbed_audit_reports_a_positive_bound() {
    let net = ConfigFile::default()
        .network()
        .unwrap()
        .with_channel(QuantumChannel::depolarizing(0.8).unwrap())
        .with_override(5, QuantumChannel::depolarizing(0.83).unwrap());
    let report = audit(&net, &AdversaryScenario::new([3])).unwrap();
    assert!((report.epsilon_bound - 0.15).abs() < 1e-4);
    assert!(report.sender.max_deviation > 0.0);
    assert!(report.within_bound);
}
