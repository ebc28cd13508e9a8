//! Versioning primitives and the messages exchanged by clients and servers.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::field::Value;

/// Client identifier. `0` is reserved for server-internal reads.
pub type ClientId = u64;

/// The reserved client id servers use for their own internal reads.
pub const LOCALHOST: ClientId = 0;

/// Outcome of comparing two vector clocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClockOrder {
    Less,
    Equal,
    Greater,
    Incomparable,
}

/// A vector clock with one entry per server.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorClock(Vec<u64>);

impl VectorClock {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_entries(entries: Vec<u64>) -> Self {
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u64) {
        self.0[i] = v;
    }

    pub fn increment(&mut self, i: usize) {
        self.0[i] += 1;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Pointwise comparison.
    pub fn compare(&self, other: &Self) -> Result<ClockOrder, ProtocolError> {
        if self.len() != other.len() {
            return Err(ProtocolError::ClockDimension(self.len(), other.len()));
        }
        let mut less = false;
        let mut greater = false;
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.cmp(b) {
                Ordering::Less => less = true,
                Ordering::Greater => greater = true,
                Ordering::Equal => {}
            }
        }
        Ok(match (less, greater) {
            (false, false) => ClockOrder::Equal,
            (true, false) => ClockOrder::Less,
            (false, true) => ClockOrder::Greater,
            (true, true) => ClockOrder::Incomparable,
        })
    }

    /// `self <= other` pointwise. Panics on a dimension mismatch.
    pub fn le(&self, other: &Self) -> bool {
        assert_eq!(self.len(), other.len(), "vector clock dimension mismatch");
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self < other`: pointwise `<=` and different.
    pub fn lt(&self, other: &Self) -> bool {
        self.le(other) && self != other
    }

    /// Pointwise maximum.
    pub fn merge(&mut self, other: &Self) {
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a = (*a).max(b);
        }
    }
}

impl fmt::Display for VectorClock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A version tag: the writer's vector clock paired with its client id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tag {
    pub ts: VectorClock,
    pub id: ClientId,
}

impl Tag {
    /// The tag of the initial value of every object.
    pub fn zero(n: usize) -> Self {
        Self {
            ts: VectorClock::zero(n),
            id: LOCALHOST,
        }
    }

    pub fn new(ts: VectorClock, id: ClientId) -> Self {
        Self { ts, id }
    }

    pub fn is_zero(&self) -> bool {
        self.ts.is_zero() && self.id == LOCALHOST
    }

    /// The tag order: `t1 < t2` iff `(sum(t1.ts), t1.id) < (sum(t2.ts), t2.id)`
    /// lexicographically.
    ///
    /// This extends the clock order (`t1.ts < t2.ts` implies a smaller entry
    /// sum) and breaks ties between concurrent clocks with equal sums by
    /// client id. Ordering every concurrent pair by id instead is not
    /// transitive: `([0,1,0], 3) < ([0,2,0], 1)` by clock, yet `([0,2,0], 1)`
    /// and `([0,0,1], 2)` are concurrent with ids 1 < 2, as are `([0,0,1], 2)`
    /// and `([0,1,0], 3)` with 2 < 3, which closes a cycle.
    ///
    /// Distinct write tags are always comparable: one client's writes have
    /// strictly increasing clocks.
    pub fn less(&self, other: &Self) -> bool {
        self.order_key() < other.order_key()
    }

    fn order_key(&self) -> (u128, ClientId) {
        (self.ts.entries().iter().map(|&e| e as u128).sum(), self.id)
    }

    /// `less` or equal.
    pub fn le(&self, other: &Self) -> bool {
        self == other || self.less(other)
    }

    /// Comparison under the tag order, `None` when neither direction holds
    /// and the tags differ.
    pub fn cmp_tag(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else if self.less(other) {
            Some(Ordering::Less)
        } else if other.less(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.ts, self.id)
    }
}

/// The unique maximum of a set of tags under the tag order.
pub fn tag_max<'a, I>(tags: I) -> Result<&'a Tag, ProtocolError>
where
    I: IntoIterator<Item = &'a Tag>,
{
    let tags: Vec<&Tag> = tags.into_iter().collect();
    let mut best = *tags.first().ok_or(ProtocolError::EmptyTagSet)?;
    for &t in &tags[1..] {
        match best.cmp_tag(t) {
            Some(Ordering::Less) => best = t,
            Some(_) => {}
            None => return Err(ProtocolError::IncomparableTags(best.to_string(), t.to_string())),
        }
    }
    // A non-transitive order can pick a candidate that some earlier tag beats.
    for &t in &tags {
        if best.less(t) {
            return Err(ProtocolError::IncomparableTags(best.to_string(), t.to_string()));
        }
    }
    Ok(best)
}

/// Identifies one client operation. Server-internal reads use
/// `client == LOCALHOST` with the issuing server packed into `seq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpId {
    pub client: ClientId,
    pub seq: u64,
}

impl OpId {
    pub fn new(client: ClientId, seq: u64) -> Self {
        Self { client, seq }
    }

    /// An id for server `server`'s `counter`-th internal read.
    pub fn internal(server: usize, counter: u32) -> Self {
        Self {
            client: LOCALHOST,
            seq: ((server as u64) << 32) | u64::from(counter),
        }
    }
}

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.client == LOCALHOST {
            write!(f, "s{}#{}", (self.seq >> 32) + 1, self.seq & 0xffff_ffff)
        } else {
            write!(f, "c{}#{}", self.client, self.seq)
        }
    }
}

/// Messages a client sends to its home server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ClientRequest {
    Write {
        client: ClientId,
        opid: OpId,
        object: usize,
        value: Value,
    },
    Read {
        client: ClientId,
        opid: OpId,
        object: usize,
    },
}

impl ClientRequest {
    pub fn opid(&self) -> OpId {
        match self {
            Self::Write { opid, .. } | Self::Read { opid, .. } => *opid,
        }
    }

    pub fn client(&self) -> ClientId {
        match self {
            Self::Write { client, .. } | Self::Read { client, .. } => *client,
        }
    }
}

/// Messages a server sends back to a client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ClientResponse {
    WriteReturn {
        opid: OpId,
        /// The tag the home server assigned; exposed for trace analysis.
        tag: Tag,
    },
    ReadReturn {
        opid: OpId,
        value: Value,
        /// Server-side timestamp of the read, when one was assigned.
        ts: Option<VectorClock>,
    },
}

impl ClientResponse {
    pub fn opid(&self) -> OpId {
        match self {
            Self::WriteReturn { opid, .. } | Self::ReadReturn { opid, .. } => *opid,
        }
    }
}

/// Server-to-server messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ServerMessage {
    App {
        object: usize,
        value: Value,
        tag: Tag,
    },
    Del {
        object: usize,
        tag: Tag,
    },
    ValInq {
        client: ClientId,
        opid: OpId,
        object: usize,
        wanted: Vec<Tag>,
    },
    ValResp {
        client: ClientId,
        opid: OpId,
        object: usize,
        value: Value,
        requested: Vec<Tag>,
    },
    ValRespEncoded {
        client: ClientId,
        opid: OpId,
        object: usize,
        symbol: Value,
        requested: Vec<Tag>,
        /// The tag vector the symbol actually encodes.
        encoded: Vec<Tag>,
    },
}

impl ServerMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::App { .. } => "App",
            Self::Del { .. } => "Del",
            Self::ValInq { .. } => "ValInq",
            Self::ValResp { .. } => "ValResp",
            Self::ValRespEncoded { .. } => "ValRespEncoded",
        }
    }

    /// Approximate wire size in field elements plus clock entries.
    pub fn payload_elements(&self) -> usize {
        let tags = |ts: &[Tag]| ts.iter().map(|t| t.ts.len() + 1).sum::<usize>();
        match self {
            Self::App { value, tag, .. } => value.len() + tag.ts.len() + 1,
            Self::Del { tag, .. } => tag.ts.len() + 1,
            Self::ValInq { wanted, .. } => tags(wanted),
            Self::ValResp { value, requested, .. } => value.len() + tags(requested),
            Self::ValRespEncoded {
                symbol,
                requested,
                encoded,
                ..
            } => symbol.len() + tags(requested) + tags(encoded),
        }
    }
}
