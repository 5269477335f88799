//! Implementations of the subcommands.

use std::collections::BTreeSet;

use anontx::analytic::{crossover_n, f_ae_relay, threshold_q, FidelityReport, ResourceKind, ThresholdFormula};
use anontx::channels::{parse_node_override, ChannelKind, QuantumChannel};
use anontx::oracle::{dense_ghz, dense_w, oracle_suite, OracleCheck};
use anontx::protocols::{
    parse_message, relay_placements, run as run_protocol, ConfigFile, NetworkConfig, NodeId, ProtocolKind, Resource,
    RunMode, RunOutcome,
};
use anontx::security::{audit, AdversaryScenario};
use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::parse::{n_grid, parse_list, parse_n_range, parse_q_range, q_grid};
use crate::table::{coord, Cell, Table};
use crate::{
    CliError, NetworkArgs, OracleArgs, Output, RelayArgs, RunArgs, SweepArgs, SweepMode, SweepProtocol, ThresholdArgs,
};

/// Largest network the security audit enumerates exactly.
pub const SECURITY_MAX_NODES: usize = 7;

fn family(name: &str) -> Result<ChannelKind, CliError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "dephasing" => Ok(ChannelKind::Dephasing),
        "depolarizing" => Ok(ChannelKind::Depolarizing),
        "identity" | "id" | "none" => Ok(ChannelKind::Identity),
        other => Err(CliError::Usage(format!(
            "unknown noise family '{other}' (expected dephasing, depolarizing or identity; q comes from the grid)"
        ))),
    }
}

fn channel(kind: ChannelKind, q: f64) -> Result<QuantumChannel, CliError> {
    Ok(match kind {
        ChannelKind::Dephasing => QuantumChannel::dephasing(q)?,
        ChannelKind::Depolarizing => QuantumChannel::depolarizing(q)?,
        _ => QuantumChannel::identity(),
    })
}

fn family_name(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::Dephasing => "dephasing",
        ChannelKind::Depolarizing => "depolarizing",
        _ => "identity",
    }
}

struct SweepPoint {
    analytic: Option<(f64, f64)>,
    exact: Option<(f64, f64)>,
}

fn sweep_analytic(a: &SweepArgs, kind: ChannelKind, q: f64, n: usize) -> Result<(f64, f64), CliError> {
    let resource = match a.protocol {
        SweepProtocol::W => ResourceKind::W,
        SweepProtocol::Ghz => ResourceKind::Ghz,
        SweepProtocol::WLoss => ResourceKind::WLoss,
        SweepProtocol::Relay => {
            let (s, r) = relay_roles(a, n);
            return Ok((f_ae_relay(kind, q, n, s as usize, r as usize)?, 1.0));
        }
    };
    let report = FidelityReport::closed_form(resource, kind, q, n)?;
    Ok((report.fidelity, report.success_probability))
}

fn relay_roles(a: &SweepArgs, n: usize) -> (u32, u32) {
    (a.sender.unwrap_or(1), a.receiver.unwrap_or(n as u32))
}

fn sweep_exact(a: &SweepArgs, kind: ChannelKind, q: f64, n: usize) -> Result<(f64, f64), CliError> {
    let ch = channel(kind, q)?;
    let cfg = NetworkConfig::new(n, 1, 2)?.with_channel(ch.clone());
    let (s, r) = (cfg.sender.qubit(), cfg.receiver.qubit());
    Ok(match a.protocol {
        SweepProtocol::W => {
            let (rho, p) = dense_w(&cfg)?;
            (rho.fidelity_with_pure(&Resource::PsiPlus.ket(s, r)?)?, p)
        }
        SweepProtocol::WLoss => {
            let (rho, p) = dense_w(&cfg.with_lost([n as u32])?)?;
            (rho.fidelity_with_pure(&Resource::PsiPlus.ket(s, r)?)?, p)
        }
        SweepProtocol::Ghz => {
            let rho = dense_ghz(&cfg)?;
            (rho.fidelity_with_pure(&Resource::PhiPlus.ket(s, r)?)?, 1.0)
        }
        SweepProtocol::Relay => {
            let (s, r) = relay_roles(a, n);
            let cfg = NetworkConfig::new(n, s, r)?.with_channel(ch);
            let out = run_protocol(
                ProtocolKind::Relay,
                &cfg,
                RunMode::Exact,
                &mut ChaCha8Rng::seed_from_u64(a.seed),
            )?;
            (out.ae_fidelity.unwrap_or(f64::NAN), 1.0)
        }
    })
}

/// `sweep`: one row per (N, q) grid point, N outer.
pub fn sweep(a: &SweepArgs, json: bool) -> Result<Output, CliError> {
    let kind = family(&a.channel)?;
    let qs = q_grid(a.q.as_deref(), a.q_range.as_deref(), "0:1:0.01")?;
    let ns = n_grid(a.nodes.as_deref(), a.n_range.as_deref(), "4,10,50")?;
    let min_n = if matches!(a.protocol, SweepProtocol::W | SweepProtocol::Ghz) {
        3
    } else {
        4
    };
    if let Some(n) = ns.iter().find(|&&n| n < min_n) {
        return Err(CliError::Usage(format!(
            "N = {n} is below the minimum of {min_n} for this protocol"
        )));
    }
    let protocol = a
        .protocol
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let mode = a
        .mode
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();

    let grid: Vec<(usize, f64)> = ns.iter().flat_map(|&n| qs.iter().map(move |&q| (n, q))).collect();
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&(n, q)| {
            let analytic = match a.mode {
                SweepMode::Exact => None,
                _ => Some(sweep_analytic(a, kind, q, n)?),
            };
            let exact = match a.mode {
                SweepMode::Analytic => None,
                _ => Some(sweep_exact(a, kind, q, n)?),
            };
            Ok(SweepPoint { analytic, exact })
        })
        .collect::<Result<_, CliError>>()?;

    let mut columns = vec!["protocol", "channel", "N", "q", "F_AE", "P_success", "useful", "mode"];
    if a.mode == SweepMode::Both {
        columns.extend(["F_AE_exact", "delta"]);
    }
    let mut table = Table::new("sweep", columns)
        .meta("protocol", &protocol)
        .meta("channel", family_name(kind))
        .meta("mode", &mode)
        .meta("seed", a.seed);
    if a.protocol == SweepProtocol::Relay {
        table = table.meta("placement", "sender=1 receiver=N unless given");
    }
    for (&(n, q), p) in grid.iter().zip(points) {
        let (f, ps) = p.analytic.or(p.exact).expect("every mode computes one value");
        let mut row = vec![
            Cell::Text(protocol.clone()),
            Cell::Text(family_name(kind).into()),
            Cell::Int(n as u64),
            coord(q),
            Cell::Float(f),
            Cell::Float(ps),
            Cell::Bool(f > 0.5),
            Cell::Text(mode.clone()),
        ];
        if let (Some(_), Some((fe, _))) = (p.analytic, p.exact) {
            row.extend([Cell::Float(fe), Cell::Sci((f - fe).abs())]);
        }
        table.rows.push(row);
    }
    Ok(Output::ok(table.render(json)))
}

/// `threshold`: q* for both resources per N, plus the crossover size.
pub fn threshold(a: &ThresholdArgs, json: bool) -> Result<Output, CliError> {
    let kind = family(&a.channel)?;
    let (fw, fg) = match kind {
        ChannelKind::Depolarizing => (ThresholdFormula::WDepol, ThresholdFormula::GhzDepol),
        ChannelKind::Dephasing => (ThresholdFormula::WDeph, ThresholdFormula::GhzDeph),
        _ => {
            return Err(CliError::Usage(
                "thresholds need dephasing or depolarizing noise".into(),
            ))
        }
    };
    let ns = match (&a.nodes, &a.n_range) {
        (None, None) => parse_n_range("3:200")?,
        (n, r) => n_grid(n.as_deref(), r.as_deref(), "")?,
    };
    if let Some(n) = ns.iter().find(|&&n| n < 3) {
        return Err(CliError::Usage(format!("N = {n} is below 3")));
    }
    let rows: Vec<(usize, f64, f64)> = ns
        .par_iter()
        .map(|&n| Ok((n, threshold_q(fw, n)?, threshold_q(fg, n)?)))
        .collect::<Result<_, CliError>>()?;
    let mut table =
        Table::new("threshold", vec!["N", "qstar_W", "qstar_GHZ", "W_better"]).meta("channel", family_name(kind));
    if kind == ChannelKind::Depolarizing {
        table = table.meta("crossover_n", crossover_n()?);
    }
    for (n, w, g) in rows {
        table.rows.push(vec![
            Cell::Int(n as u64),
            Cell::Float(w),
            Cell::Float(g),
            Cell::Bool(w < g),
        ]);
    }
    Ok(Output::ok(table.render(json)))
}

/// `relay`: dense fidelity and closed form for every placement, with the W
/// and GHZ values at the same q for comparison.
pub fn relay(a: &RelayArgs, json: bool) -> Result<Output, CliError> {
    let kind = family(&a.channel)?;
    if a.nodes < 4 {
        return Err(CliError::Usage(format!(
            "the relay needs at least 4 nodes, got {}",
            a.nodes
        )));
    }
    let qs = q_grid(Some(&a.q), None, "")?;
    let cases: Vec<(f64, (u32, u32))> = qs
        .iter()
        .flat_map(|&q| relay_placements(a.nodes).into_iter().map(move |p| (q, p)))
        .collect();
    let values: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|&(q, (s, r))| {
            let cfg = NetworkConfig::new(a.nodes, s, r)?.with_channel(channel(kind, q)?);
            let out = run_protocol(
                ProtocolKind::Relay,
                &cfg,
                RunMode::Exact,
                &mut ChaCha8Rng::seed_from_u64(0),
            )?;
            let closed = f_ae_relay(kind, q, a.nodes, s as usize, r as usize)?;
            Ok((out.ae_fidelity.unwrap_or(f64::NAN), closed))
        })
        .collect::<Result<_, CliError>>()?;

    let mut table = Table::new("relay", vec!["N", "S", "R", "q", "F_AE", "F_closed"])
        .meta("channel", family_name(kind))
        .meta("nodes", a.nodes);
    for (&(q, (s, r)), &(f, closed)) in cases.iter().zip(&values) {
        table.rows.push(vec![
            Cell::Int(a.nodes as u64),
            Cell::Int(s.into()),
            Cell::Int(r.into()),
            coord(q),
            Cell::Float(f),
            Cell::Float(closed),
        ]);
    }
    for &q in &qs {
        let distinct: BTreeSet<String> = cases
            .iter()
            .zip(&values)
            .filter(|((cq, _), _)| *cq == q)
            .map(|(_, (f, _))| format!("{f:.4}"))
            .collect();
        let w = FidelityReport::closed_form(ResourceKind::W, kind, q, a.nodes)?.fidelity;
        let g = FidelityReport::closed_form(ResourceKind::Ghz, kind, q, a.nodes)?.fidelity;
        table.footer.push(format!(
            "q={}: W={w:.4} GHZ={g:.4} relay_values={}",
            crate::parse::tidy(q),
            distinct.into_iter().collect::<Vec<_>>().join(" ")
        ));
    }
    Ok(Output::ok(table.render(json)))
}

fn read_config(args: &NetworkArgs) -> Result<ConfigFile, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            text.parse::<ConfigFile>()?
        }
        None => ConfigFile::default(),
    };
    if let Some(n) = args.nodes {
        cfg.nodes = Some(n);
    }
    if let Some(s) = args.sender {
        cfg.sender = Some(s);
    }
    if let Some(r) = args.receiver {
        cfg.receiver = Some(r);
    }
    if let Some(c) = &args.channel {
        cfg.channel = Some(c.parse()?);
    }
    for o in &args.overrides {
        let (k, ch) = parse_node_override(o)?;
        cfg.overrides.insert(NodeId(k), ch);
    }
    if let Some(l) = &args.lost {
        cfg.lost = Some(parse_list(l)?);
    }
    if let Some(a) = &args.adversaries {
        cfg.adversaries = Some(parse_list(a)?);
    }
    if let Some(m) = &args.message {
        cfg.message = Some(parse_message(m)?);
    }
    Ok(cfg)
}

/// `security`: JSON audit; status 1 when a guessing probability exceeds
/// `max prior + epsilon bound`.
pub fn security(a: &NetworkArgs) -> Result<Output, CliError> {
    let cfg = read_config(a)?;
    let network = cfg.network()?;
    if network.n_nodes > SECURITY_MAX_NODES {
        return Err(CliError::Usage(format!(
            "exact view enumeration is capped at {SECURITY_MAX_NODES} nodes, got {}",
            network.n_nodes
        )));
    }
    let scenario = AdversaryScenario::new(cfg.adversaries.clone().unwrap_or_default());
    let report = audit(&network, &scenario)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))? + "\n";
    Ok(Output {
        text,
        status: if report.within_bound { 0 } else { 1 },
    })
}

fn outcome_json(index: Option<usize>, out: &RunOutcome) -> Result<String, CliError> {
    let mut v = serde_json::to_value(out).map_err(|e| CliError::Internal(e.to_string()))?;
    if let (Some(i), Value::Object(map)) = (index, &mut v) {
        map.insert("run".into(), json!(i));
    }
    Ok(v.to_string())
}

/// `run`: one outcome as a JSON line, or `--samples k` sampled runs followed
/// by a summary line.
pub fn run(a: &RunArgs) -> Result<Output, CliError> {
    let cfg = read_config(&a.network)?;
    let network = cfg.network()?;
    let protocol = match &a.protocol {
        Some(p) => p.parse()?,
        None => cfg.protocol.unwrap_or(ProtocolKind::W),
    };
    let samples = a.samples.or(cfg.samples);
    let mode = match (&a.mode, samples) {
        (Some(m), _) => m.parse()?,
        (None, Some(_)) => RunMode::Sampled,
        (None, None) => cfg.mode.unwrap_or(RunMode::Exact),
    };
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let Some(k) = samples else {
        let out = run_protocol(protocol, &network, mode, &mut rng)?;
        if let Some(path) = &a.transcript {
            std::fs::write(path, out.transcript.to_jsonl())?;
        }
        return Ok(Output::ok(outcome_json(None, &out)? + "\n"));
    };
    if a.transcript.is_some() {
        return Err(CliError::Usage(
            "--transcript records a single run; drop --samples".into(),
        ));
    }
    if k == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let mut text = String::new();
    let (mut aborts, mut delivered, mut ae) = (0usize, Vec::new(), Vec::new());
    for i in 0..k {
        let out = run_protocol(protocol, &network, mode, &mut rng)?;
        text.push_str(&outcome_json(Some(i), &out)?);
        text.push('\n');
        if out.aborted {
            aborts += 1;
        }
        delivered.extend(out.delivered_fidelity);
        ae.extend(out.ae_fidelity);
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            Value::Null
        } else {
            json!(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    let summary = json!({
        "summary": {
            "protocol": protocol.to_string(),
            "samples": k,
            "seed": seed,
            "aborts": aborts,
            "abort_rate": aborts as f64 / k as f64,
            "mean_delivered_fidelity": mean(&delivered),
            "mean_ae_fidelity": mean(&ae),
        }
    });
    text.push_str(&summary.to_string());
    text.push('\n');
    Ok(Output::ok(text))
}

fn merge(into: &mut [OracleCheck], from: Vec<OracleCheck>) {
    for (a, b) in into.iter_mut().zip(from) {
        a.cases += b.cases;
        if b.max_delta.is_nan() || b.max_delta > a.max_delta {
            a.max_delta = b.max_delta;
        }
    }
}

/// `oracle-check`: status 1 when any comparison exceeds its tolerance.
pub fn oracle_check(a: &OracleArgs, json: bool) -> Result<Output, CliError> {
    let ns = parse_n_range(&a.n_range)?;
    let qs = parse_q_range(&a.q_range)?;
    if let Some(n) = ns.iter().find(|&&n| n < 4) {
        return Err(CliError::Usage(format!("N = {n} is below 4")));
    }
    if let Some(bad) = qs.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(CliError::Usage(format!("q = {bad} outside [0, 1]")));
    }
    let per_n: Vec<Vec<OracleCheck>> = ns
        .par_iter()
        .map(|&n| oracle_suite(&[n], &qs).map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    let mut iter = per_n.into_iter();
    let mut checks = iter.next().unwrap_or_default();
    for more in iter {
        merge(&mut checks, more);
    }
    let mut table = Table::new(
        "oracle-check",
        vec!["check", "cases", "max_delta", "tolerance", "status"],
    )
    .meta("n_range", &a.n_range)
    .meta("q_range", &a.q_range);
    for c in &checks {
        table.rows.push(vec![
            Cell::Text(c.name.into()),
            Cell::Int(c.cases as u64),
            Cell::Text(format!("{:.3e}", c.max_delta)),
            Cell::Text(format!("{:.0e}", c.tolerance)),
            Cell::Text(if c.passed() { "pass" } else { "FAIL" }.into()),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    table.footer.push(format!("{failed} of {} checks failed", checks.len()));
    Ok(Output {
        text: table.render(json),
        status: i32::from(failed > 0),
    })
}
