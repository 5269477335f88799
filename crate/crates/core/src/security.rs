//! Anonymity checks for the W-state protocol against passive adversaries.
//!
//! An adversary view is the classical-quantum state a coalition holds at the
//! end of a run: the subroutine outputs it can see, its own measurement
//! outcomes, and (when the receiver is corrupt) the receiver's qubit. Views
//! are computed exactly by enumerating the coalition's outcomes. The
//! classical subroutines are represented by their ideal outputs; their
//! message-level shares are uniformly random and carry no further
//! information.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::channels::{channel_distance, QuantumChannel};
use crate::error::{invalid, Result};
use crate::protocols::{correction, NetworkConfig, NodeId, Resource, MESSAGE_QUBIT};
use crate::qcore::{trace_distance, Basis, DensityMatrix, Qubit, ZERO_PROBABILITY};

/// Tolerance below which views count as identical.
pub const INDEPENDENCE_TOL: f64 = 1e-9;

/// One classical label with its probability and the coalition's quantum state.
#[derive(Clone, Debug)]
pub struct LabeledBranch {
    pub label: String,
    pub weight: f64,
    /// Normalised state of the coalition's qubits (a 0-qubit scalar when it
    /// holds none).
    pub state: DensityMatrix,
}

/// Classical-quantum state of a coalition, one entry per distinct label.
#[derive(Clone, Debug, Default)]
pub struct LabeledEnsemble {
    branches: Vec<LabeledBranch>,
}

impl LabeledEnsemble {
    /// Merges unnormalised per-label states; weights are their traces.
    fn from_unnormalised(parts: BTreeMap<String, DensityMatrix>) -> Result<Self> {
        let branches = parts
            .into_iter()
            .map(|(label, state)| {
                let weight = state.trace();
                let state = if weight > ZERO_PROBABILITY {
                    state.scaled(1.0 / weight)
                } else {
                    state
                };
                LabeledBranch { label, weight, state }
            })
            .collect();
        let e = Self { branches };
        e.validate()?;
        Ok(e)
    }

    pub fn branches(&self) -> &[LabeledBranch] {
        &self.branches
    }

    pub fn get(&self, label: &str) -> Option<&LabeledBranch> {
        self.branches.iter().find(|b| b.label == label)
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.total_weight();
        if (total - 1.0).abs() > 1e-10 {
            return invalid(format!("ensemble weights sum to {total}"));
        }
        if self.branches.iter().any(|b| b.weight < -1e-12) {
            return invalid("negative branch weight");
        }
        let labels: BTreeSet<&str> = self.branches.iter().map(|b| b.label.as_str()).collect();
        if labels.len() != self.branches.len() {
            return invalid("duplicate labels in ensemble");
        }
        Ok(())
    }
}

/// How the protocol partner of the hypothesised party is chosen.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartnerPolicy {
    /// The partner is this node.
    Fixed(NodeId),
    /// The partner is uniform over the other live nodes.
    Uniform,
}

/// Which role the hypotheses are about.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sender,
    Receiver,
}

/// A non-adaptive passive coalition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversaryScenario {
    pub adversaries: BTreeSet<NodeId>,
    /// Prior over the candidates, in candidate order; uniform when absent.
    pub prior: Option<Vec<f64>>,
}

impl AdversaryScenario {
    pub fn new(adversaries: impl IntoIterator<Item = u32>) -> Self {
        Self {
            adversaries: adversaries.into_iter().map(NodeId).collect(),
            prior: None,
        }
    }

    pub fn is_adversary(&self, n: NodeId) -> bool {
        self.adversaries.contains(&n)
    }

    /// Honest live nodes, i.e. the possible values of the hidden role.
    pub fn candidates(&self, config: &NetworkConfig) -> Vec<NodeId> {
        config.live_nodes().filter(|n| !self.is_adversary(*n)).collect()
    }

    /// The prior over [`AdversaryScenario::candidates`].
    pub fn prior_for(&self, config: &NetworkConfig) -> Result<Vec<f64>> {
        let k = self.candidates(config).len();
        match &self.prior {
            None => Ok(vec![1.0 / k as f64; k]),
            Some(p) if p.len() != k => invalid(format!("prior has {} entries for {k} candidates", p.len())),
            Some(p) => {
                if (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 || p.iter().any(|&x| x < 0.0) {
                    return invalid("prior must be a probability vector");
                }
                Ok(p.clone())
            }
        }
    }

    fn validate(&self, config: &NetworkConfig) -> Result<()> {
        if let Some(n) = self.adversaries.iter().find(|&&n| !config.is_live(n)) {
            return invalid(format!("adversary {n} is not a live node"));
        }
        if self.candidates(config).len() < 2 {
            return invalid("need at least two honest candidates");
        }
        Ok(())
    }

    /// Default partner policy for hypotheses about `role`: the configured
    /// partner if it is corrupt, otherwise uniform over the other live nodes.
    pub fn partner_policy(&self, config: &NetworkConfig, role: Role) -> PartnerPolicy {
        let partner = match role {
            Role::Sender => config.receiver,
            Role::Receiver => config.sender,
        };
        if self.is_adversary(partner) {
            PartnerPolicy::Fixed(partner)
        } else {
            PartnerPolicy::Uniform
        }
    }
}

fn bits_label(nodes: &[NodeId], bits: impl Fn(NodeId) -> u8) -> String {
    nodes
        .iter()
        .map(|&n| format!("{}:{}", n.0, bits(n)))
        .collect::<Vec<_>>()
        .join(",")
}

fn add_part(parts: &mut BTreeMap<String, DensityMatrix>, label: String, state: DensityMatrix) -> Result<()> {
    match parts.remove(&label) {
        Some(prev) => {
            parts.insert(label, prev.add(&state)?);
        }
        None => {
            parts.insert(label, state);
        }
    }
    Ok(())
}

/// Adds the coalition's view of one run with fixed sender and receiver,
/// scaled by `scale`, into `parts`.
fn accumulate_view(
    config: &NetworkConfig,
    scenario: &AdversaryScenario,
    sender: NodeId,
    receiver: NodeId,
    scale: f64,
    parts: &mut BTreeMap<String, DensityMatrix>,
) -> Result<()> {
    let live: Vec<NodeId> = config.live_nodes().collect();
    let adv: Vec<NodeId> = live.iter().copied().filter(|n| scenario.is_adversary(*n)).collect();
    let measurers: Vec<NodeId> = live.iter().copied().filter(|&n| n != sender && n != receiver).collect();
    let adv_measurers: Vec<NodeId> = measurers
        .iter()
        .copied()
        .filter(|n| scenario.is_adversary(*n))
        .collect();
    let honest_measurers: Vec<NodeId> = measurers
        .iter()
        .copied()
        .filter(|n| !scenario.is_adversary(*n))
        .collect();
    let (s, r) = (sender.qubit(), receiver.qubit());
    let r_corrupt = scenario.is_adversary(receiver);
    let s_corrupt = scenario.is_adversary(sender);

    let mut rho = DensityMatrix::w_with_loss(config.n_nodes, live.iter().map(|n| n.qubit()).collect())?;
    for &n in &live {
        rho = config.channel_for(n).apply_to(&rho, n.qubit())?;
    }
    let notify = bits_label(&adv, |n| u8::from(n == receiver));

    for mu in 0..1u32 << adv_measurers.len() {
        let bit = |i: usize| ((mu >> (adv_measurers.len() - 1 - i)) & 1) as u8;
        let mut branch = rho.clone();
        for (i, k) in adv_measurers.iter().enumerate() {
            branch = branch.measure_out(&[k.qubit()], Basis::Standard, bit(i))?.state;
        }
        let p_mu = branch.trace();
        let outs = bits_label(&adv_measurers, |n| {
            bit(adv_measurers.iter().position(|&a| a == n).unwrap_or(0))
        });
        let head = format!("cd=0;rn={notify};out={outs}");
        if mu != 0 {
            add_part(parts, format!("{head};veto=1"), DensityMatrix::scalar(p_mu * scale))?;
            continue;
        }
        for k in &honest_measurers {
            branch = branch.measure_out(&[k.qubit()], Basis::Standard, 0)?.state;
        }
        let pair = branch.reorder(&[s, r])?;
        let p_acc = pair.trace();
        // honest non-zero outcomes: everything in this mu-branch that was not accepted
        add_part(
            parts,
            format!("{head};veto=1"),
            DensityMatrix::scalar((p_mu - p_acc).max(0.0) * scale),
        )?;
        if p_acc < ZERO_PROBABILITY {
            continue;
        }
        let joint = config.message.to_density().tensor(&pair)?;
        for m in 0..4u8 {
            let b = joint.measure_out(&[MESSAGE_QUBIT, s], Basis::Bell, m)?;
            let held = b.state.apply_1q(r, &correction(m, Resource::PsiPlus))?;
            for rand in 0..4u8 {
                let mut label = format!("{head};veto=0;T={}", m ^ rand);
                if r_corrupt {
                    label.push_str(&format!(";rand={rand}"));
                }
                if s_corrupt {
                    label.push_str(&format!(";m={m}"));
                }
                let state = if r_corrupt {
                    held.scaled(0.25 * scale)
                } else {
                    DensityMatrix::scalar(held.trace() * 0.25 * scale)
                };
                add_part(parts, label, state)?;
            }
        }
    }
    Ok(())
}

/// The coalition's view given that `hypothesis` holds `role`.
pub fn adversary_view_for(
    config: &NetworkConfig,
    scenario: &AdversaryScenario,
    role: Role,
    hypothesis: NodeId,
    partner: PartnerPolicy,
) -> Result<LabeledEnsemble> {
    config.validate()?;
    scenario.validate(config)?;
    if scenario.is_adversary(hypothesis) {
        return invalid(format!("hypothesis {hypothesis} is an adversary"));
    }
    if !config.is_live(hypothesis) {
        return invalid(format!("hypothesis {hypothesis} is not a live node"));
    }
    let partners: Vec<NodeId> = match partner {
        PartnerPolicy::Fixed(p) if p == hypothesis => return invalid("sender and receiver must differ"),
        PartnerPolicy::Fixed(p) if !config.is_live(p) => return invalid(format!("partner {p} is not live")),
        PartnerPolicy::Fixed(p) => vec![p],
        PartnerPolicy::Uniform => config.live_nodes().filter(|&n| n != hypothesis).collect(),
    };
    let scale = 1.0 / partners.len() as f64;
    let mut parts = BTreeMap::new();
    for p in partners {
        let (s, r) = match role {
            Role::Sender => (hypothesis, p),
            Role::Receiver => (p, hypothesis),
        };
        accumulate_view(config, scenario, s, r, scale, &mut parts)?;
    }
    LabeledEnsemble::from_unnormalised(parts)
}

/// Sender-hypothesis view with the scenario's default receiver policy.
pub fn adversary_view(
    config: &NetworkConfig,
    scenario: &AdversaryScenario,
    hypothesis: NodeId,
) -> Result<LabeledEnsemble> {
    adversary_view_for(
        config,
        scenario,
        Role::Sender,
        hypothesis,
        scenario.partner_policy(config, Role::Sender),
    )
}

/// Receiver-hypothesis view with the scenario's default sender policy.
pub fn adversary_view_receiver(
    config: &NetworkConfig,
    scenario: &AdversaryScenario,
    hypothesis: NodeId,
) -> Result<LabeledEnsemble> {
    adversary_view_for(
        config,
        scenario,
        Role::Receiver,
        hypothesis,
        scenario.partner_policy(config, Role::Receiver),
    )
}

/// Views for every candidate of `role`, in candidate order.
pub fn all_views(config: &NetworkConfig, scenario: &AdversaryScenario, role: Role) -> Result<Vec<LabeledEnsemble>> {
    let policy = scenario.partner_policy(config, role);
    scenario
        .candidates(config)
        .into_iter()
        .map(|h| adversary_view_for(config, scenario, role, h, policy))
        .collect()
}

/// Total variation of the label distributions plus the largest per-label
/// trace distance between the conditional states.
pub fn pair_deviation(a: &LabeledEnsemble, b: &LabeledEnsemble) -> Result<f64> {
    let labels: BTreeSet<&str> = a.branches.iter().chain(&b.branches).map(|x| x.label.as_str()).collect();
    let mut tv = 0.0;
    let mut worst: f64 = 0.0;
    for l in labels {
        let (x, y) = (a.get(l), b.get(l));
        let (wx, wy) = (x.map_or(0.0, |v| v.weight), y.map_or(0.0, |v| v.weight));
        tv += (wx - wy).abs();
        if let (Some(x), Some(y)) = (x, y) {
            if wx > ZERO_PROBABILITY && wy > ZERO_PROBABILITY {
                worst = worst.max(trace_distance(&x.state, &y.state)?);
            }
        }
    }
    Ok(0.5 * tv + worst)
}

/// Largest [`pair_deviation`] over all pairs of views.
pub fn independence_check(views: &[LabeledEnsemble]) -> Result<f64> {
    if views.len() < 2 {
        return invalid("independence check needs at least two views");
    }
    Ok(pairwise_deviations(views)?
        .iter()
        .map(|d| d.deviation)
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDeviation {
    pub a: usize,
    pub b: usize,
    pub deviation: f64,
}

pub fn pairwise_deviations(views: &[LabeledEnsemble]) -> Result<Vec<PairDeviation>> {
    let mut out = Vec::new();
    for a in 0..views.len() {
        for b in a + 1..views.len() {
            out.push(PairDeviation {
                a,
                b,
                deviation: pair_deviation(&views[a], &views[b])?,
            });
        }
    }
    Ok(out)
}

/// How a guessing probability was obtained.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Certificate {
    /// Views are identical, so no measurement beats the prior.
    #[serde(rename = "state-independence")]
    StateIndependence,
    /// Exact optimum for two hypotheses.
    #[serde(rename = "helstrom")]
    Helstrom,
    /// Upper bound only.
    #[serde(rename = "bound-only")]
    BoundOnly,
}

/// Optimal success probability of telling two weighted cq-states apart.
pub fn helstrom(a: &LabeledEnsemble, pa: f64, b: &LabeledEnsemble, pb: f64) -> Result<f64> {
    let labels: BTreeSet<&str> = a.branches.iter().chain(&b.branches).map(|x| x.label.as_str()).collect();
    let mut total = 0.0;
    for l in labels {
        let x = a.get(l).map(|v| v.state.scaled(v.weight * pa));
        let y = b.get(l).map(|v| v.state.scaled(v.weight * pb));
        total += match (x, y) {
            (Some(x), Some(y)) => 0.5 * (x.trace() + y.trace()) + trace_distance(&x, &y)?,
            (Some(x), None) => x.trace(),
            (None, Some(y)) => y.trace(),
            (None, None) => 0.0,
        };
    }
    Ok(total.min(1.0))
}

/// Guessing probability for the hidden role, with how it was certified.
pub fn guessing_probability(views: &[LabeledEnsemble], prior: &[f64]) -> Result<(f64, Certificate)> {
    if prior.len() != views.len() {
        return invalid(format!("{} priors for {} views", prior.len(), views.len()));
    }
    if views.is_empty() {
        return invalid("no views");
    }
    let max_prior = prior.iter().copied().fold(0.0, f64::max);
    if views.len() == 1 {
        return Ok((1.0, Certificate::StateIndependence));
    }
    let deviations = pairwise_deviations(views)?;
    if deviations.iter().all(|d| d.deviation <= INDEPENDENCE_TOL) {
        return Ok((max_prior, Certificate::StateIndependence));
    }
    if views.len() == 2 {
        let p = helstrom(&views[0], prior[0], &views[1], prior[1])?;
        return Ok((p.max(max_prior), Certificate::Helstrom));
    }
    let per_view = |i: usize| {
        deviations
            .iter()
            .filter(|d| d.a == i || d.b == i)
            .map(|d| d.deviation)
            .fold(0.0, f64::max)
    };
    let bound = max_prior + prior.iter().enumerate().map(|(i, p)| p * per_view(i)).sum::<f64>();
    Ok((bound.min(1.0), Certificate::BoundOnly))
}

/// Largest two-hypothesis Helstrom value over all pairs, with equal priors.
pub fn max_pairwise_helstrom(views: &[LabeledEnsemble]) -> Result<f64> {
    let mut best: f64 = 0.5;
    for a in 0..views.len() {
        for b in a + 1..views.len() {
            best = best.max(helstrom(&views[a], 0.5, &views[b], 0.5)?);
        }
    }
    Ok(best)
}

/// `N * max_i ||Lambda_i - Lambda||`, one channel per node.
pub fn epsilon_security_bound(base: &QuantumChannel, per_node: &[QuantumChannel]) -> f64 {
    let worst = per_node
        .iter()
        .map(|c| if c == base { 0.0 } else { channel_distance(base, c) })
        .fold(0.0, f64::max);
    per_node.len() as f64 * worst
}

/// Channels of all nodes of a configuration, in node order.
pub fn node_channels(config: &NetworkConfig) -> Vec<QuantumChannel> {
    config.nodes().map(|n| config.channel_for(n).clone()).collect()
}

/// Largest trace distance between `rho` and its image under a transposition
/// of adjacent members of `subset` (adjacent transpositions generate the
/// full permutation group).
pub fn permutation_invariance_check(rho: &DensityMatrix, subset: &[Qubit]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for w in subset.windows(2) {
        worst = worst.max(trace_distance(rho, &rho.swap_qubits(w[0], w[1])?)?);
    }
    for q in subset {
        rho.position(*q)?;
    }
    Ok(worst)
}

/// Analysis for one hidden role.
#[derive(Clone, Debug, Serialize)]
pub struct RoleAnalysis {
    pub role: Role,
    pub candidates: Vec<NodeId>,
    pub partner: PartnerPolicy,
    pub deviations: Vec<PairDeviation>,
    pub max_deviation: f64,
    pub guessing_probability: f64,
    pub certificate: Certificate,
    pub max_prior: f64,
}

/// Full audit of one configuration and coalition.
#[derive(Clone, Debug, Serialize)]
pub struct SecurityReport {
    pub n_nodes: usize,
    pub adversaries: Vec<NodeId>,
    pub channel: String,
    pub overrides: BTreeMap<String, String>,
    pub sender: RoleAnalysis,
    pub receiver: RoleAnalysis,
    pub epsilon_bound: f64,
    /// Both guessing probabilities respect `max prior + epsilon_bound`.
    pub within_bound: bool,
}

fn analyse(config: &NetworkConfig, scenario: &AdversaryScenario, role: Role) -> Result<RoleAnalysis> {
    let views = all_views(config, scenario, role)?;
    let prior = scenario.prior_for(config)?;
    let deviations = pairwise_deviations(&views)?;
    let (guessing_probability, certificate) = guessing_probability(&views, &prior)?;
    Ok(RoleAnalysis {
        role,
        candidates: scenario.candidates(config),
        partner: scenario.partner_policy(config, role),
        max_deviation: deviations.iter().map(|d| d.deviation).fold(0.0, f64::max),
        deviations,
        guessing_probability,
        certificate,
        max_prior: prior.iter().copied().fold(0.0, f64::max),
    })
}

/// Runs the sender and receiver analyses and the epsilon bound.
pub fn audit(config: &NetworkConfig, scenario: &AdversaryScenario) -> Result<SecurityReport> {
    let sender = analyse(config, scenario, Role::Sender)?;
    let receiver = analyse(config, scenario, Role::Receiver)?;
    let epsilon_bound = epsilon_security_bound(&config.channel, &node_channels(config));
    let ok = |a: &RoleAnalysis| a.guessing_probability <= a.max_prior + epsilon_bound + 1e-9;
    Ok(SecurityReport {
        n_nodes: config.n_nodes,
        adversaries: scenario.adversaries.iter().copied().collect(),
        channel: config.channel.spec(),
        overrides: config
            .overrides
            .iter()
            .map(|(k, v)| (k.to_string(), v.spec()))
            .collect(),
        within_bound: ok(&sender) && ok(&receiver),
        sender,
        receiver,
        epsilon_bound,
    })
}
