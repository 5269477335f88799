use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::Serialize;

use super::{NodeId, ProtocolKind, RunMode};
use crate::channels::{parse_node_override, QuantumChannel};
use crate::error::{invalid, Error, Result};
use crate::qcore::{Ket, Qubit, C64, DEFAULT_QUBIT_CAP};

/// Default number of veto parity rounds (miss probability `2^-20`).
pub const DEFAULT_VETO_ROUNDS: u32 = 20;

/// Label of the message qubit held by the sender.
pub const MESSAGE_QUBIT: Qubit = Qubit(0);

/// Network size, roles, noise and run parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkConfig {
    pub n_nodes: usize,
    pub sender: NodeId,
    pub receiver: NodeId,
    /// Channel for nodes without an override.
    pub channel: QuantumChannel,
    pub overrides: BTreeMap<NodeId, QuantumChannel>,
    #[serde(skip)]
    pub message: Ket,
    pub seed: u64,
    pub veto_rounds: u32,
    pub dense_cap: usize,
    pub lost_nodes: BTreeSet<NodeId>,
}

impl NetworkConfig {
    /// Noiseless network with message `|0>`; validated.
    pub fn new(n_nodes: usize, sender: u32, receiver: u32) -> Result<Self> {
        let cfg = Self {
            n_nodes,
            sender: NodeId(sender),
            receiver: NodeId(receiver),
            channel: QuantumChannel::identity(),
            overrides: BTreeMap::new(),
            message: Ket::zero(MESSAGE_QUBIT),
            seed: 0,
            veto_rounds: DEFAULT_VETO_ROUNDS,
            dense_cap: DEFAULT_QUBIT_CAP,
            lost_nodes: BTreeSet::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_channel(mut self, channel: QuantumChannel) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_override(mut self, node: u32, channel: QuantumChannel) -> Self {
        self.overrides.insert(NodeId(node), channel);
        self
    }

    pub fn with_message(mut self, message: Ket) -> Result<Self> {
        if message.n_qubits() != 1 {
            return invalid("the message must be a single qubit");
        }
        self.message = message.relabel(vec![MESSAGE_QUBIT])?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_lost(mut self, lost: impl IntoIterator<Item = u32>) -> Result<Self> {
        self.lost_nodes = lost.into_iter().map(NodeId).collect();
        self.validate()?;
        Ok(self)
    }

    pub fn with_roles(mut self, sender: u32, receiver: u32) -> Result<Self> {
        self.sender = NodeId(sender);
        self.receiver = NodeId(receiver);
        self.validate()?;
        Ok(self)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (1..=self.n_nodes as u32).map(NodeId)
    }

    pub fn live_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|n| !self.lost_nodes.contains(n))
    }

    pub fn is_live(&self, n: NodeId) -> bool {
        n.0 >= 1 && n.0 as usize <= self.n_nodes && !self.lost_nodes.contains(&n)
    }

    /// Channel acting on the qubit delivered to `node`.
    pub fn channel_for(&self, node: NodeId) -> &QuantumChannel {
        self.overrides.get(&node).unwrap_or(&self.channel)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 3 {
            return invalid(format!("need at least 3 nodes, got {}", self.n_nodes));
        }
        let in_range = |n: NodeId| n.0 >= 1 && n.0 as usize <= self.n_nodes;
        if !in_range(self.sender) || !in_range(self.receiver) {
            return invalid(format!("sender and receiver must be nodes 1..={}", self.n_nodes));
        }
        if self.sender == self.receiver {
            return invalid("sender and receiver must differ");
        }
        if let Some(n) = self.lost_nodes.iter().find(|&&n| !in_range(n)) {
            return invalid(format!("lost {n} is not in the network"));
        }
        if self.lost_nodes.contains(&self.sender) || self.lost_nodes.contains(&self.receiver) {
            return invalid("sender and receiver cannot be lost");
        }
        if self.n_nodes - self.lost_nodes.len() < 3 {
            return invalid("fewer than 3 live nodes remain");
        }
        if let Some(n) = self.overrides.keys().find(|&&n| !in_range(n)) {
            return invalid(format!("channel override for {n}, which is not in the network"));
        }
        if self.veto_rounds == 0 {
            return invalid("veto_rounds must be at least 1");
        }
        if (self.message.norm() - 1.0).abs() > 1e-12 {
            return invalid("message state is not normalised");
        }
        Ok(())
    }
}

/// Parses a message spec: `zero`, `one`, `plus`, `minus` or `bloch:<theta>,<phi>`.
pub fn parse_message(s: &str) -> Result<Ket> {
    let s = s.trim();
    match s {
        "zero" | "0" => Ok(Ket::zero(MESSAGE_QUBIT)),
        "one" | "1" => Ok(Ket::one(MESSAGE_QUBIT)),
        "plus" | "+" => Ok(Ket::plus(MESSAGE_QUBIT)),
        "minus" | "-" => Ok(Ket::minus(MESSAGE_QUBIT)),
        _ => {
            let angles = s
                .strip_prefix("bloch:")
                .ok_or_else(|| Error::Parse(format!("unknown message state '{s}'")))?;
            let parts: Vec<f64> = angles
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad angle '{p}': {e}")))
                })
                .collect::<Result<_>>()?;
            match parts.as_slice() {
                [theta, phi] => Ok(Ket::from_bloch(MESSAGE_QUBIT, *theta, *phi)),
                _ => Err(Error::Parse("bloch: needs exactly two angles".into())),
            }
        }
    }
}

/// Renders a single-qubit message as `bloch:<theta>,<phi>`.
pub fn message_spec(k: &Ket) -> String {
    let a = k.amplitudes();
    // strip the global phase of the |0> amplitude
    let phase = if a[0].norm() > 1e-15 {
        a[0] / a[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let b = a[1] / phase;
    let theta = 2.0 * a[0].norm().clamp(0.0, 1.0).acos();
    let phi = if b.norm() > 1e-15 { b.arg() } else { 0.0 };
    format!("bloch:{theta},{phi}")
}

fn parse_list(value: &str) -> Result<Vec<u32>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<u32>()
                .map_err(|e| Error::Parse(format!("bad node id '{v}': {e}")))
        })
        .collect()
}

/// Contents of a `key = value` configuration file.
///
/// Recognised keys: `protocol`, `mode`, `nodes`, `sender`, `receiver`,
/// `channel`, `node<k>` (per-node channel override), `message`, `seed`,
/// `veto_rounds`, `dense_cap`, `lost`, `adversaries`, `samples`. Blank lines
/// and lines starting with `#` are ignored; unknown keys are errors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub protocol: Option<ProtocolKind>,
    pub mode: Option<RunMode>,
    pub nodes: Option<usize>,
    pub sender: Option<u32>,
    pub receiver: Option<u32>,
    pub channel: Option<QuantumChannel>,
    pub overrides: BTreeMap<NodeId, QuantumChannel>,
    pub message: Option<Ket>,
    pub seed: Option<u64>,
    pub veto_rounds: Option<u32>,
    pub dense_cap: Option<usize>,
    pub lost: Option<Vec<u32>>,
    pub adversaries: Option<Vec<u32>>,
    pub samples: Option<usize>,
}

impl FromStr for ConfigFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = |e: Error| Error::Parse(format!("line {}: {}", lineno + 1, e));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|e| Error::Parse(format!("bad number '{v}' for {key}: {e}")))
            };
            match key {
                "protocol" => cfg.protocol = Some(value.parse().map_err(ctx)?),
                "mode" => cfg.mode = Some(value.parse().map_err(ctx)?),
                "nodes" | "n_nodes" => cfg.nodes = Some(num(value).map_err(ctx)? as usize),
                "sender" => cfg.sender = Some(num(value).map_err(ctx)? as u32),
                "receiver" => cfg.receiver = Some(num(value).map_err(ctx)? as u32),
                "channel" => cfg.channel = Some(value.parse().map_err(ctx)?),
                "message" => cfg.message = Some(parse_message(value).map_err(ctx)?),
                "seed" => cfg.seed = Some(num(value).map_err(ctx)?),
                "veto_rounds" => cfg.veto_rounds = Some(num(value).map_err(ctx)? as u32),
                "dense_cap" => cfg.dense_cap = Some(num(value).map_err(ctx)? as usize),
                "lost" | "lost_nodes" => cfg.lost = Some(parse_list(value).map_err(ctx)?),
                "adversaries" => cfg.adversaries = Some(parse_list(value).map_err(ctx)?),
                "samples" => cfg.samples = Some(num(value).map_err(ctx)? as usize),
                k if k.starts_with("node") => {
                    let (id, ch) = parse_node_override(&format!("{k}={value}")).map_err(ctx)?;
                    cfg.overrides.insert(NodeId(id), ch);
                }
                other => return Err(Error::Parse(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        Ok(cfg)
    }
}

impl ConfigFile {
    /// Builds a validated network, with defaults for anything unset
    /// (5 nodes, sender 1, receiver 2, identity channels, message `|0>`).
    pub fn network(&self) -> Result<NetworkConfig> {
        let mut cfg = NetworkConfig {
            n_nodes: self.nodes.unwrap_or(5),
            sender: NodeId(self.sender.unwrap_or(1)),
            receiver: NodeId(self.receiver.unwrap_or(2)),
            channel: self.channel.clone().unwrap_or_else(QuantumChannel::identity),
            overrides: self.overrides.clone(),
            message: self.message.clone().unwrap_or_else(|| Ket::zero(MESSAGE_QUBIT)),
            seed: self.seed.unwrap_or(0),
            veto_rounds: self.veto_rounds.unwrap_or(DEFAULT_VETO_ROUNDS),
            dense_cap: self.dense_cap.unwrap_or(DEFAULT_QUBIT_CAP),
            lost_nodes: BTreeSet::new(),
        };
        if let Some(lost) = &self.lost {
            cfg.lost_nodes = lost.iter().copied().map(NodeId).collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
