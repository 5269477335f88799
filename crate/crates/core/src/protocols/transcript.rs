use std::fmt;

use serde::{Deserialize, Serialize};

use super::NodeId;
use crate::error::{invalid, Result};

/// What happened in one transcript event.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Broadcast,
    PrivateSend,
    Measurement,
    Abort,
    TeleportCorrection,
}

/// Who can see an event.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Visibility {
    Public,
    PrivateTo(NodeId),
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Visibility::Public => f.write_str("public"),
            Visibility::PrivateTo(n) => write!(f, "private:{}", n.0),
        }
    }
}

impl Serialize for Visibility {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Visibility {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "public" {
            return Ok(Visibility::Public);
        }
        s.strip_prefix("private:")
            .and_then(|k| k.parse().ok())
            .map(|k| Visibility::PrivateTo(NodeId(k)))
            .ok_or_else(|| serde::de::Error::custom(format!("bad visibility '{s}'")))
    }
}

/// One message or local action. Actor `0` is an ideal functionality or the
/// trusted source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub round: u32,
    pub kind: EventKind,
    pub actor: NodeId,
    pub visibility: Visibility,
    /// Short name of the step that produced the event, e.g. `veto`.
    pub step: String,
    #[serde(with = "hex_bytes")]
    pub payload: Vec<u8>,
}

impl Event {
    /// Whether `node` can see this event.
    pub fn visible_to(&self, node: NodeId) -> bool {
        match self.visibility {
            Visibility::Public => true,
            Visibility::PrivateTo(n) => n == node || self.actor == node,
        }
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

/// Ordered event log of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    events: Vec<Event>,
    round: u32,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    /// Starts a new synchronous round.
    pub fn next_round(&mut self) -> u32 {
        self.round += 1;
        self.round
    }

    pub fn record(&mut self, kind: EventKind, actor: NodeId, visibility: Visibility, step: &str, payload: Vec<u8>) {
        self.events.push(Event {
            round: self.round,
            kind,
            actor,
            visibility,
            step: step.to_string(),
            payload,
        });
    }

    pub fn broadcast(&mut self, actor: NodeId, step: &str, payload: Vec<u8>) {
        self.record(EventKind::Broadcast, actor, Visibility::Public, step, payload);
    }

    pub fn private_send(&mut self, from: NodeId, to: NodeId, step: &str, payload: Vec<u8>) {
        self.record(EventKind::PrivateSend, from, Visibility::PrivateTo(to), step, payload);
    }

    pub fn public_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.visibility == Visibility::Public)
    }

    /// Events a set of nodes can jointly see.
    pub fn restricted_to<'a>(&'a self, nodes: &'a [NodeId]) -> impl Iterator<Item = &'a Event> {
        self.events
            .iter()
            .filter(move |e| nodes.iter().any(|&n| e.visible_to(n)))
    }

    /// Checks that rounds never decrease.
    pub fn validate(&self) -> Result<()> {
        if self.events.windows(2).any(|w| w[1].round < w[0].round) {
            return invalid("transcript rounds decrease");
        }
        Ok(())
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("events serialise") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let events: Vec<Event> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| crate::Error::Parse(e.to_string())))
            .collect::<Result<_>>()?;
        let round = events.last().map_or(0, |e| e.round);
        let t = Self { events, round };
        t.validate()?;
        Ok(t)
    }
}
