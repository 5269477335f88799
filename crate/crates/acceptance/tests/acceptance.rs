//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anontx::analytic::{crossover_n, f_ae_relay, f_ae_w_loss, f_ae_w_loss_traced, threshold_q, ThresholdFormula};
use anontx::channels::{channel_distance, ChannelKind, QuantumChannel};
use anontx::oracle::{dense_w, oracle_suite};
use anontx::protocols::{
    parity_protocol, relay_placements, run, run_ghz_protocol, run_protocol1, teleport_branch, veto_protocol,
    NetworkConfig, NodeId, ProtocolKind, Resource, RunMode, Transcript, MESSAGE_QUBIT,
};
use anontx::qcore::{Ket, Qubit};
use anontx::security::{
    all_views, epsilon_security_bound, guessing_probability, independence_check, max_pairwise_helstrom, node_channels,
    AdversaryScenario, Certificate, Role,
};
use anontx::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Check = anontx::Result<(bool, String)>;
type Criterion = (&'static str, Duration, fn() -> Check);

const GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

fn channels(q: f64) -> [QuantumChannel; 2] {
    [
        QuantumChannel::dephasing(q).expect("q on grid"),
        QuantumChannel::depolarizing(q).expect("q on grid"),
    ]
}

fn success_probability() -> Check {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 4..=10 {
        let out = run_protocol1(&NetworkConfig::new(n, 1, 2)?, RunMode::Exact, &mut rng)?;
        worst = worst.max((out.analytic_success_probability - 2.0 / n as f64).abs());
    }
    let exact_ok = worst <= 1e-12;

    let (n, samples) = (5, 10_000);
    let cfg = NetworkConfig::new(n, 1, 2)?;
    let mut aborts = 0;
    for _ in 0..samples {
        if run_protocol1(&cfg, RunMode::Sampled, &mut rng)?.aborted {
            aborts += 1;
        }
    }
    let p_abort = 1.0 - 2.0 / n as f64;
    let sigma = (p_abort * (1.0 - p_abort) / samples as f64).sqrt();
    let rate = aborts as f64 / samples as f64;
    let sampled_ok = (rate - p_abort).abs() <= 3.0 * sigma;
    Ok((
        exact_ok && sampled_ok,
        format!(
            "max |P - 2/N| = {worst:.1e}; abort rate {rate:.4} vs {p_abort} +- {:.4}",
            3.0 * sigma
        ),
    ))
}

fn fidelity_table() -> Check {
    let checks = oracle_suite(&[4, 5, 6, 7, 8], &GRID)?;
    let wanted = [
        "w_dephasing_closed_vs_dense",
        "w_depolarizing_closed_vs_dense",
        "ghz_dephasing_closed_vs_dense",
        "ghz_depolarizing_closed_vs_dense",
        "w_structured_vs_dense_entrywise",
        "ghz_structured_vs_dense_entrywise",
    ];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for c in checks.iter().filter(|c| wanted.contains(&c.name)) {
        ok &= c.max_delta <= 1e-10;
        worst = worst.max(c.max_delta);
    }
    Ok((
        ok,
        format!("max delta over four closed forms and structured states = {worst:.1e}"),
    ))
}

fn threshold_crossover() -> Check {
    let w = threshold_q(ThresholdFormula::WDepol, 182)?;
    let g = threshold_q(ThresholdFormula::GhzDepol, 182)?;
    let cross = crossover_n()?;
    let ok = (w - 0.979057).abs() <= 1e-5 && (g - 0.979043).abs() <= 1e-5 && cross == 182;
    Ok((
        ok,
        format!("q*_W(182) = {w:.6}, q*_GHZ(182) = {g:.6}, crossover_n = {cross}"),
    ))
}

fn relay_table() -> Check {
    let printed = [
        (0.8, [0.5738, 0.6138, 0.5418, 0.5162, 0.4958]),
        (0.95, [0.8625, 0.8744, 0.8512, 0.8405, 0.8303]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (q, values) in printed {
        let mut found = Vec::new();
        for (s, r) in relay_placements(6) {
            let cfg = NetworkConfig::new(6, s, r)?.with_channel(QuantumChannel::depolarizing(q)?);
            let f = run(ProtocolKind::Relay, &cfg, RunMode::Exact, &mut rng)?
                .ae_fidelity
                .unwrap_or(f64::NAN);
            found.push(f);
            // dense run and derived closed form must also agree
            ok &= (f - f_ae_relay(ChannelKind::Depolarizing, q, 6, s as usize, r as usize)?).abs() < 1e-10;
        }
        for v in values {
            let d = found.iter().map(|f| (f - v).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
            ok &= d <= 1e-3;
        }
    }
    Ok((
        ok,
        format!("largest distance from a printed value to the computed multiset = {worst:.1e}"),
    ))
}

fn particle_loss() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = NetworkConfig::new(5, 1, 2)?.with_lost([4])?;
    let f = run_protocol1(&cfg, RunMode::Exact, &mut rng)?
        .ae_fidelity
        .unwrap_or(f64::NAN);
    let lost_ok = (f - 2.0 / 3.0).abs() <= 1e-12;

    let (mut printed, mut derived): (f64, f64) = (0.0, 0.0);
    for n in 4..=8 {
        for q in GRID {
            for ch in channels(q) {
                let cfg = NetworkConfig::new(n, 1, 2)?
                    .with_channel(ch.clone())
                    .with_lost([n as u32])?;
                let (rho, _) = dense_w(&cfg)?;
                let f = rho.fidelity_with_pure(&Resource::PsiPlus.ket(Qubit(1), Qubit(2))?)?;
                printed = printed.max((f - f_ae_w_loss(ch.kind(), q, n)?).abs());
                derived = derived.max((f - f_ae_w_loss_traced(ch.kind(), q, n)?).abs());
            }
        }
    }
    let ghz = run_ghz_protocol(&cfg, RunMode::Exact, &mut rng);
    let ghz_ok = matches!(ghz, Err(Error::ProtocolImpossible(_)));
    Ok((
        lost_ok && printed <= 1e-9 && ghz_ok,
        format!(
            "F(one lost, identity) = {f:.12}; printed loss closed forms vs dense max delta = {printed:.3e} \
             (derived forms: {derived:.1e}); GHZ on loss impossible: {ghz_ok}"
        ),
    ))
}

fn success_formula() -> Check {
    let mut depol: f64 = 0.0;
    let mut deph: f64 = 0.0;
    for n in 4..=8 {
        let nf = n as f64;
        for q in GRID {
            let cfg = NetworkConfig::new(n, 1, 2)?.with_channel(QuantumChannel::depolarizing(q)?);
            let (_, p) = dense_w(&cfg)?;
            let formula = (q + 1.0).powi(n as i32 - 3) * (nf * (1.0 - q) + 4.0 * q) / (nf * 2f64.powi(n as i32 - 2));
            depol = depol.max((p - formula).abs());
            let cfg = NetworkConfig::new(n, 1, 2)?.with_channel(QuantumChannel::dephasing(q)?);
            let (_, p) = dense_w(&cfg)?;
            deph = deph.max((p - 2.0 / nf).abs());
        }
    }
    Ok((
        depol <= 1e-12 && deph <= 1e-12,
        format!("depolarizing max delta {depol:.1e}; dephasing max |P - 2/N| {deph:.1e}"),
    ))
}

fn subsets(items: &[u32], k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn security() -> Check {
    let mut worst_dev: f64 = 0.0;
    let mut guess_ok = true;
    let mut scenarios = 0;
    for n in [5usize, 6] {
        let nodes: Vec<u32> = (1..=n as u32).collect();
        for t in [1, 2] {
            for adv in subsets(&nodes, t) {
                for ch in [
                    QuantumChannel::identity(),
                    QuantumChannel::dephasing(0.9)?,
                    QuantumChannel::depolarizing(0.8)?,
                ] {
                    let cfg = NetworkConfig::new(n, 1, 2)?.with_channel(ch);
                    let sc = AdversaryScenario::new(adv.clone());
                    let prior = sc.prior_for(&cfg)?;
                    for role in [Role::Sender, Role::Receiver] {
                        let views = all_views(&cfg, &sc, role)?;
                        worst_dev = worst_dev.max(independence_check(&views)?);
                        let (p, cert) = guessing_probability(&views, &prior)?;
                        guess_ok &= cert == Certificate::StateIndependence && (p - 1.0 / (n - t) as f64).abs() < 1e-12;
                        scenarios += 1;
                    }
                }
            }
        }
    }

    // perturbed noise: one to three nodes moved by at most 0.05 in channel distance
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bound_ok = true;
    let mut ratio: f64 = 0.0;
    for _ in 0..50 {
        let q0: f64 = rng.gen_range(0.6..0.95);
        let depol = rng.gen_bool(0.5);
        let make = |q: f64| {
            if depol {
                QuantumChannel::depolarizing(q)
            } else {
                QuantumChannel::dephasing(q)
            }
        };
        let mut cfg = NetworkConfig::new(5, 1, 2)?.with_channel(make(q0)?);
        for _ in 0..rng.gen_range(1..=3) {
            let node = rng.gen_range(1..=5u32);
            // dephasing distance is 2|dq|, depolarizing |dq|
            let max_dq = if depol { 0.05 } else { 0.025 };
            cfg = cfg.with_override(node, make(q0 + rng.gen_range(-max_dq..max_dq))?);
        }
        let t = rng.gen_range(1..=2);
        let adv: Vec<u32> = rand::seq::index::sample(&mut rng, 5, t)
            .into_iter()
            .map(|i| i as u32 + 1)
            .collect();
        let sc = AdversaryScenario::new(adv);
        let eps_max = node_channels(&cfg)
            .iter()
            .map(|c| channel_distance(&cfg.channel, c))
            .fold(0.0, f64::max);
        bound_ok &= eps_max <= 0.05 + 1e-6;
        let bound = epsilon_security_bound(&cfg.channel, &node_channels(&cfg));
        let prior = sc.prior_for(&cfg)?;
        let max_prior = prior.iter().copied().fold(0.0, f64::max);
        for role in [Role::Sender, Role::Receiver] {
            let views = all_views(&cfg, &sc, role)?;
            let helstrom = max_pairwise_helstrom(&views)?;
            let (p, _) = guessing_probability(&views, &prior)?;
            bound_ok &= helstrom <= 0.5 + bound + 1e-12 && p <= max_prior + bound + 1e-12;
            if bound > 0.0 {
                ratio = ratio.max((helstrom - 0.5) / bound);
            }
        }
    }
    Ok((
        worst_dev <= 1e-10 && guess_ok && bound_ok,
        format!(
            "{scenarios} uniform-noise analyses: max deviation {worst_dev:.1e}, P_guess = 1/(N-t): {guess_ok}; \
             50 perturbations within bound: {bound_ok} (largest advantage/bound ratio {ratio:.3})"
        ),
    ))
}

fn haar_message(rng: &mut impl Rng) -> Ket {
    let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
    Ket::from_bloch(MESSAGE_QUBIT, theta, 2.0 * PI * rng.gen::<f64>())
}

fn teleportation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (s, r) = (Qubit(1), Qubit(2));
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let msg = haar_message(&mut rng);
        for resource in [Resource::PhiPlus, Resource::PsiPlus] {
            let joint = msg.to_density().tensor(&resource.ket(s, r)?.to_density())?;
            for m in 0..4 {
                let held = teleport_branch(&joint, MESSAGE_QUBIT, s, r, m, resource)?.normalized()?;
                let target = Ket::new(msg.amplitudes().to_vec(), vec![r])?;
                worst = worst.max((held.fidelity_with_pure(&target)? - 1.0).abs());
            }
        }
    }

    let chi = ChiSquared::new(3.0).expect("positive dof");
    let mut pvals = Vec::new();
    for msg in [Ket::zero(MESSAGE_QUBIT), Ket::from_bloch(MESSAGE_QUBIT, 1.1, 0.4)] {
        let cfg = NetworkConfig::new(5, 2, 4)?.with_message(msg)?;
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            let out = run_ghz_protocol(&cfg, RunMode::Sampled, &mut rng)?;
            counts[out.masked_outcome.unwrap_or(0) as usize] += 1;
        }
        let stat: f64 = counts.iter().map(|&c| (c as f64 - 2500.0).powi(2) / 2500.0).sum();
        pvals.push(1.0 - chi.cdf(stat));
    }
    Ok((
        worst <= 1e-12 && pvals.iter().all(|&p| p > 0.01),
        format!("max |F - 1| over 2 resources x 4 branches x 20 messages = {worst:.1e}; chi-square p = {pvals:.3?}"),
    ))
}

fn classical() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let nodes = |bits: &[u8]| -> Vec<(NodeId, u8)> {
        bits.iter()
            .enumerate()
            .map(|(i, &b)| (NodeId(i as u32 + 1), b))
            .collect()
    };
    let mut complete = true;
    for n in 3..=8 {
        complete &= veto_protocol(&nodes(&vec![0; n]), 20, &mut Transcript::new(), &mut rng)? == 0;
    }
    let mut misses = 0;
    for _ in 0..10_000 {
        let mut bits = vec![0u8; 5];
        let ones: BTreeSet<usize> = (0..rng.gen_range(1..=5)).map(|_| rng.gen_range(0..5)).collect();
        for i in ones {
            bits[i] = 1;
        }
        if veto_protocol(&nodes(&bits), 20, &mut Transcript::new(), &mut rng)? == 0 {
            misses += 1;
        }
    }
    let mut parity_ok = true;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=10);
        let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let xor = bits.iter().fold(0, |a, b| a ^ b);
        parity_ok &= parity_protocol(&nodes(&bits), "parity", &mut Transcript::new(), &mut rng)? == xor;
    }
    Ok((
        complete && misses == 0 && parity_ok,
        format!(
            "veto complete: {complete}; misses in 10^4 trials: {misses}; parity = XOR on 1000 vectors: {parity_ok}"
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "success probability 2/N and sampled abort rate",
            Duration::from_secs(10),
            success_probability,
        ),
        (
            "closed-form and structured fidelities vs dense",
            Duration::from_secs(120),
            fidelity_table,
        ),
        (
            "threshold crossover at N = 182",
            Duration::from_secs(5),
            threshold_crossover,
        ),
        ("relay fidelity table", Duration::from_secs(60), relay_table),
        ("particle loss", Duration::from_secs(30), particle_loss),
        (
            "success probability closed forms",
            Duration::from_secs(30),
            success_formula,
        ),
        ("anonymity of sender and receiver", Duration::from_secs(300), security),
        ("teleportation and masking", Duration::from_secs(60), teleportation),
        ("classical subroutines", Duration::from_secs(60), classical),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok((pass, detail)) if elapsed <= *limit => (pass, detail),
            Ok((_, detail)) => (false, format!("{detail}; exceeded {limit:?}")),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {}. {name}: {detail} ({:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
