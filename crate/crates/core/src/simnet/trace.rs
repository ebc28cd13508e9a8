//! Execution records: the operation history the checkers consume and the
//! JSON-lines transition log used for determinism checks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::client::OpKind;
use crate::field::Value;
use crate::server::{InternalAction, Output, StateDigest};
use crate::types::{ClientId, ClientRequest, ClientResponse, OpId, ServerMessage, Tag, VectorClock};

/// Virtual time in ticks; one abstract latency unit is [`TICKS_PER_UNIT`].
pub type Ticks = u64;

pub const TICKS_PER_UNIT: u64 = 1000;

/// Converts abstract time units to ticks, rounding to the nearest tick.
pub fn units_to_ticks(units: f64) -> Ticks {
    (units * TICKS_PER_UNIT as f64).round().max(0.0) as Ticks
}

pub fn ticks_to_units(t: Ticks) -> f64 {
    t as f64 / TICKS_PER_UNIT as f64
}

/// A trace participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Node {
    Server(usize),
    Client(ClientId),
}

impl std::fmt::Display for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Node::Server(s) => write!(f, "s{}", s + 1),
            Node::Client(c) => write!(f, "c{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceEvent {
    /// A client hands a request to its link.
    Invoke {
        request: ClientRequest,
    },
    /// A request reaches the home server.
    Request {
        request: ClientRequest,
    },
    /// A server-to-server message is delivered.
    Deliver {
        from: usize,
        msg: ServerMessage,
    },
    /// A response reaches the client.
    Response {
        response: ClientResponse,
    },
    Internal {
        action: InternalAction,
    },
    Halt,
}

/// One transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: Ticks,
    pub node: Node,
    pub event: TraceEvent,
    /// Server state after the transition; `None` for client transitions.
    pub state_digest: Option<StateDigest>,
    pub emitted: Vec<Output>,
}

/// The transition log of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One JSON object per line, in transition order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of [`Trace::to_jsonl`], hex encoded.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for r in &self.records {
            h.update(serde_json::to_vec(r).expect("trace records serialize"));
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Digests of one server in transition order.
    pub fn digests_of(&self, server: usize) -> impl Iterator<Item = (&TraceRecord, &StateDigest)> {
        self.records
            .iter()
            .filter_map(move |r| match (r.node, &r.state_digest) {
                (Node::Server(s), Some(d)) if s == server => Some((r, d)),
                _ => None,
            })
    }
}

/// What happened to one client operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationRecord {
    pub client: ClientId,
    pub opid: OpId,
    pub kind: OpKind,
    pub object: usize,
    pub home: usize,
    /// Value written, or value returned by a completed read.
    pub value: Option<Value>,
    pub invoked_at: Ticks,
    /// When the request reached the home server.
    pub delivered_at: Option<Ticks>,
    /// When the response reached the client.
    pub responded_at: Option<Ticks>,
    /// Home-server clock at the response point.
    pub ts: Option<VectorClock>,
    pub tag: Option<Tag>,
    /// Writes only: the acknowledgement left in the same transition that
    /// delivered the request.
    pub ack_in_delivery: Option<bool>,
    /// Position of the op in its client's workload plan.
    pub plan_index: usize,
}

impl OperationRecord {
    pub fn is_complete(&self) -> bool {
        self.responded_at.is_some()
    }

    pub fn is_write(&self) -> bool {
        self.kind == OpKind::Write
    }

    pub fn latency_units(&self) -> Option<f64> {
        self.responded_at.map(|r| ticks_to_units(r - self.invoked_at))
    }
}
