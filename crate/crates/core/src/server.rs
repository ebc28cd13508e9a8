//! The server automaton.
//!
//! One `Server` holds the full state of a CausalEC node and exposes one
//! method per transition. Each transition runs its handler body atomically
//! and returns the messages it emits, in emission order. EventualEC shares
//! every handler and differs only where `Protocol::is_eventual` is checked.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::code::LinearCode;
use crate::error::ProtocolError;
use crate::field::Value;
use crate::types::{tag_max, ClientId, ClientResponse, OpId, ServerMessage, Tag, VectorClock, LOCALHOST};

/// Which server variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    #[default]
    CausalEc,
    EventualEc,
}

impl Protocol {
    pub fn is_eventual(self) -> bool {
        self == Protocol::EventualEc
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::CausalEc => "causalec",
            Protocol::EventualEc => "eventualec",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "causalec" => Ok(Protocol::CausalEc),
            "eventualec" => Ok(Protocol::EventualEc),
            other => Err(format!("unknown protocol `{other}` (expected causalec or eventualec)")),
        }
    }
}

/// The three internal actions a server can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InternalAction {
    ApplyInqueue,
    Encoding,
    GarbageCollection,
}

impl InternalAction {
    pub const ALL: [InternalAction; 3] = [
        InternalAction::ApplyInqueue,
        InternalAction::Encoding,
        InternalAction::GarbageCollection,
    ];
}

/// One `(tag, value)` version in a history list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListEntry {
    pub tag: Tag,
    pub value: Value,
}

/// An `App` waiting to be applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InQueueEntry {
    pub origin: usize,
    pub object: usize,
    pub value: Value,
    pub tag: Tag,
}

/// A pending read, external or internal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadLEntry {
    pub client: ClientId,
    pub opid: OpId,
    pub object: usize,
    pub tagvec: Vec<Tag>,
    pub symbols: Vec<Option<Value>>,
}

/// The stored codeword symbol and the versions it encodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codeword {
    pub val: Value,
    pub tagvec: Vec<Tag>,
}

/// A message emitted by a transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "dest", rename_all = "lowercase")]
pub enum Output {
    Server { to: usize, msg: ServerMessage },
    Client { client: ClientId, resp: ClientResponse },
}

/// Compact per-transition summary used by trace records and probes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDigest {
    pub vc: VectorClock,
    pub tagvec: Vec<Tag>,
    pub list_sizes: Vec<usize>,
    pub inqueue: usize,
    pub readl: usize,
    pub error1: Vec<bool>,
    pub error2: Vec<bool>,
    pub tmax: Vec<Tag>,
}

/// Bytes a server holds, split into payload and metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StorageAccount {
    /// Field elements in `M.val`.
    pub symbol_elements: usize,
    /// Field elements held in history lists.
    pub list_elements: usize,
    /// Field elements held in queued `App`s.
    pub inqueue_elements: usize,
    /// Field elements held in pending reads.
    pub readl_elements: usize,
    /// Clock entries in tags, `DelL`, `tmax` and `vc`.
    pub metadata_entries: usize,
}

impl StorageAccount {
    pub fn payload_elements(&self) -> usize {
        self.symbol_elements + self.list_elements + self.inqueue_elements + self.readl_elements
    }
}

/// A CausalEC (or EventualEC) server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Server {
    id: usize,
    protocol: Protocol,
    code: Arc<LinearCode>,
    vc: VectorClock,
    inqueue: Vec<InQueueEntry>,
    lists: Vec<Vec<ListEntry>>,
    del: Vec<Vec<(Tag, usize)>>,
    m: Codeword,
    readl: Vec<ReadLEntry>,
    error1: Vec<bool>,
    error2: Vec<bool>,
    tmax: Vec<Tag>,
    internal_reads: u32,
    /// Last tag garbage collection broadcast per object. Resending an
    /// identical `Del` only adds a duplicate to a set, so it is skipped.
    gc_sent: Vec<Option<Tag>>,
}

impl Server {
    pub fn new(id: usize, code: Arc<LinearCode>, protocol: Protocol) -> Self {
        let n = code.n();
        let k = code.k();
        let zero = Tag::zero(n);
        Self {
            id,
            protocol,
            vc: VectorClock::zero(n),
            inqueue: Vec::new(),
            lists: vec![
                vec![ListEntry {
                    tag: zero.clone(),
                    value: code.zero_value(),
                }];
                k
            ],
            del: vec![Vec::new(); k],
            m: Codeword {
                val: code.zero_value(),
                tagvec: vec![zero.clone(); k],
            },
            readl: Vec::new(),
            error1: vec![false; k],
            error2: vec![false; k],
            tmax: vec![zero; k],
            internal_reads: 0,
            gc_sent: vec![None; k],
            code,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn vc(&self) -> &VectorClock {
        &self.vc
    }

    pub fn inqueue(&self) -> &[InQueueEntry] {
        &self.inqueue
    }

    pub fn list(&self, object: usize) -> &[ListEntry] {
        &self.lists[object]
    }

    pub fn del_list(&self, object: usize) -> &[(Tag, usize)] {
        &self.del[object]
    }

    pub fn codeword(&self) -> &Codeword {
        &self.m
    }

    pub fn readl(&self) -> &[ReadLEntry] {
        &self.readl
    }

    pub fn error_flags(&self, object: usize) -> (bool, bool) {
        (self.error1[object], self.error2[object])
    }

    pub fn tmax(&self, object: usize) -> &Tag {
        &self.tmax[object]
    }

    fn n(&self) -> usize {
        self.code.n()
    }

    fn k(&self) -> usize {
        self.code.k()
    }

    fn zero_tag(&self) -> Tag {
        Tag::zero(self.n())
    }

    fn stores(&self, object: usize) -> bool {
        self.code.objects_at(self.id).contains(&object)
    }

    fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&j| j != self.id)
    }

    pub fn digest(&self) -> StateDigest {
        StateDigest {
            vc: self.vc.clone(),
            tagvec: self.m.tagvec.clone(),
            list_sizes: self.lists.iter().map(Vec::len).collect(),
            inqueue: self.inqueue.len(),
            readl: self.readl.len(),
            error1: self.error1.clone(),
            error2: self.error2.clone(),
            tmax: self.tmax.clone(),
        }
    }

    pub fn storage(&self) -> StorageAccount {
        let tag_entries = |t: &Tag| t.ts.len() + 1;
        let mut acc = StorageAccount {
            symbol_elements: self.m.val.len(),
            ..Default::default()
        };
        for list in &self.lists {
            for e in list {
                acc.list_elements += e.value.len();
                acc.metadata_entries += tag_entries(&e.tag);
            }
        }
        for e in &self.inqueue {
            acc.inqueue_elements += e.value.len();
            acc.metadata_entries += tag_entries(&e.tag) + 2;
        }
        for r in &self.readl {
            acc.readl_elements += r.symbols.iter().flatten().map(Value::len).sum::<usize>();
            acc.metadata_entries += r.tagvec.iter().map(tag_entries).sum::<usize>() + 3;
        }
        for d in &self.del {
            acc.metadata_entries += d.iter().map(|(t, _)| tag_entries(t) + 1).sum::<usize>();
        }
        acc.metadata_entries += self.m.tagvec.iter().map(tag_entries).sum::<usize>();
        acc.metadata_entries += self.tmax.iter().map(tag_entries).sum::<usize>();
        acc.metadata_entries += self.vc.len();
        acc
    }

    // ---- list helpers -------------------------------------------------

    fn list_insert(&mut self, object: usize, tag: Tag, value: Value) {
        let list = &mut self.lists[object];
        if !list.iter().any(|e| e.tag == tag && e.value == value) {
            list.push(ListEntry { tag, value });
        }
    }

    fn list_value(&self, object: usize, tag: &Tag) -> Option<&Value> {
        let mut found = self.lists[object].iter().filter(|e| &e.tag == tag);
        let first = found.next()?;
        // The pseudocode asks for a unique value; a second one means no match.
        if found.any(|e| e.value != first.value) {
            return None;
        }
        Some(&first.value)
    }

    /// `L[X].Highesttagged`, or `None` for an empty list.
    fn highest(&self, object: usize) -> Result<Option<&ListEntry>, ProtocolError> {
        let list = &self.lists[object];
        if list.is_empty() {
            return Ok(None);
        }
        let top = tag_max(list.iter().map(|e| &e.tag))?;
        Ok(list.iter().find(|e| &e.tag == top))
    }

    fn del_insert(&mut self, object: usize, tag: Tag, from: usize) {
        let d = &mut self.del[object];
        if !d.iter().any(|(t, j)| *t == tag && *j == from) {
            d.push((tag, from));
        }
    }

    /// True when every server in `who` has some `Del` with tag `>= t`.
    fn covered_by(&self, object: usize, t: &Tag, who: &BTreeSet<usize>) -> bool {
        who.iter()
            .all(|&i| self.del[object].iter().any(|(hat, j)| *j == i && t.le(hat)))
    }

    /// Tags appearing in `DelL[X]` that every server in `who` covers. The
    /// maxima the protocol takes over these sets are always such tags.
    fn covered_tags(&self, object: usize, who: &BTreeSet<usize>) -> Vec<Tag> {
        let mut out: Vec<Tag> = Vec::new();
        for (t, _) in &self.del[object] {
            if !out.contains(t) && self.covered_by(object, t, who) {
                out.push(t.clone());
            }
        }
        out
    }

    fn reencode(&self, val: &Value, object: usize, old: &Value, new: &Value) -> Result<Value, ProtocolError> {
        Ok(self.code.reencode(self.id, object, val, old, new)?)
    }

    fn empty_symbols(&self, own: Value) -> Vec<Option<Value>> {
        let mut symbols = vec![None; self.n()];
        symbols[self.id] = Some(own);
        symbols
    }

    fn next_internal_opid(&mut self) -> OpId {
        self.internal_reads += 1;
        OpId::internal(self.id, self.internal_reads)
    }

    fn read_return(&self, client: ClientId, opid: OpId, value: Value) -> Output {
        Output::Client {
            client,
            resp: ClientResponse::ReadReturn {
                opid,
                value,
                ts: Some(self.vc.clone()),
            },
        }
    }

    // ---- client messages ----------------------------------------------

    pub fn on_write(
        &mut self,
        client: ClientId,
        opid: OpId,
        object: usize,
        value: Value,
    ) -> Result<Vec<Output>, ProtocolError> {
        self.vc.increment(self.id);
        let tag = Tag::new(self.vc.clone(), client);
        self.list_insert(object, tag.clone(), value.clone());
        let mut out = vec![Output::Client {
            client,
            resp: ClientResponse::WriteReturn { opid, tag: tag.clone() },
        }];
        for j in self.others() {
            out.push(Output::Server {
                to: j,
                msg: ServerMessage::App {
                    object,
                    value: value.clone(),
                    tag: tag.clone(),
                },
            });
        }
        let (answered, kept): (Vec<_>, Vec<_>) = std::mem::take(&mut self.readl)
            .into_iter()
            .partition(|r| r.client != LOCALHOST && r.object == object);
        self.readl = kept;
        for r in answered {
            out.push(self.read_return(r.client, r.opid, value.clone()));
        }
        Ok(out)
    }

    pub fn on_read(&mut self, client: ClientId, opid: OpId, object: usize) -> Result<Vec<Output>, ProtocolError> {
        if let Some(top) = self.highest(object)? {
            if self.protocol.is_eventual() || self.m.tagvec[object].le(&top.tag) {
                let value = top.value.clone();
                return Ok(vec![self.read_return(client, opid, value)]);
            }
        }
        if let Some(rs) = self.code.locally_decodable(self.id, object) {
            let symbols = [(self.id, self.m.val.clone())].into_iter().collect();
            let value = self.code.decode(rs, &symbols)?;
            return Ok(vec![self.read_return(client, opid, value)]);
        }
        let entry = ReadLEntry {
            client,
            opid,
            object,
            tagvec: self.m.tagvec.clone(),
            symbols: self.empty_symbols(self.m.val.clone()),
        };
        let out = self
            .others()
            .map(|j| Output::Server {
                to: j,
                msg: ServerMessage::ValInq {
                    client,
                    opid,
                    object,
                    wanted: entry.tagvec.clone(),
                },
            })
            .collect();
        self.readl.push(entry);
        Ok(out)
    }

    // ---- server messages ----------------------------------------------

    pub fn on_server_message(&mut self, from: usize, msg: ServerMessage) -> Result<Vec<Output>, ProtocolError> {
        match msg {
            ServerMessage::App { object, value, tag } => {
                self.on_app(from, object, value, tag);
                Ok(Vec::new())
            }
            ServerMessage::Del { object, tag } => {
                self.on_del(from, object, tag);
                Ok(Vec::new())
            }
            ServerMessage::ValInq {
                client,
                opid,
                object,
                wanted,
            } => self.on_val_inq(from, client, opid, object, wanted).map(|o| vec![o]),
            ServerMessage::ValResp {
                client,
                opid,
                object,
                value,
                requested,
            } => self.on_val_resp(client, opid, object, value, requested),
            ServerMessage::ValRespEncoded {
                client,
                opid,
                object,
                symbol,
                requested,
                encoded,
            } => self.on_val_resp_encoded(from, client, opid, object, symbol, encoded, requested),
        }
    }

    pub fn on_del(&mut self, from: usize, object: usize, tag: Tag) {
        self.del_insert(object, tag, from);
    }

    pub fn on_app(&mut self, from: usize, object: usize, value: Value, tag: Tag) {
        self.inqueue.push(InQueueEntry {
            origin: from,
            object,
            value,
            tag,
        });
    }

    /// Index of the queue head: among entries whose timestamp no other entry
    /// is strictly below, the earliest enqueued. A later arrival therefore
    /// sits behind every entry with an equal or incomparable timestamp.
    pub fn inqueue_head(&self) -> Option<usize> {
        (0..self.inqueue.len()).find(|&i| {
            let ts = &self.inqueue[i].tag.ts;
            !self.inqueue.iter().any(|e| e.tag.ts.lt(ts))
        })
    }

    pub fn on_val_inq(
        &mut self,
        from: usize,
        client: ClientId,
        opid: OpId,
        object: usize,
        wanted: Vec<Tag>,
    ) -> Result<Output, ProtocolError> {
        let direct = if self.protocol.is_eventual() {
            if client != LOCALHOST {
                self.highest(object)?.map(|e| e.value.clone())
            } else {
                None
            }
        } else {
            self.list_value(object, &wanted[object]).cloned()
        };
        if let Some(value) = direct {
            return Ok(Output::Server {
                to: from,
                msg: ServerMessage::ValResp {
                    client,
                    opid,
                    object,
                    value,
                    requested: wanted,
                },
            });
        }
        let zero_value = self.code.zero_value();
        let zero_tag = self.zero_tag();
        let mut resp = self.m.clone();
        for &x in self.code.objects_at(self.id) {
            if self.m.tagvec[x] == wanted[x] {
                continue;
            }
            if let Some(v) = self.list_value(x, &self.m.tagvec[x]) {
                resp.val = self.reencode(&resp.val, x, v, &zero_value)?;
                resp.tagvec[x] = zero_tag.clone();
                if let Some(w) = self.list_value(x, &wanted[x]) {
                    resp.val = self.reencode(&resp.val, x, &zero_value, w)?;
                    resp.tagvec[x] = wanted[x].clone();
                }
            }
        }
        Ok(Output::Server {
            to: from,
            msg: ServerMessage::ValRespEncoded {
                client,
                opid,
                object,
                symbol: resp.val,
                requested: wanted,
                encoded: resp.tagvec,
            },
        })
    }

    fn find_read(&self, client: ClientId, opid: OpId, object: usize, tagvec: &[Tag]) -> Option<usize> {
        self.readl
            .iter()
            .position(|r| r.client == client && r.opid == opid && r.object == object && r.tagvec == tagvec)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn on_val_resp_encoded(
        &mut self,
        from: usize,
        client: ClientId,
        opid: OpId,
        object: usize,
        symbol: Value,
        encoded: Vec<Tag>,
        requested: Vec<Tag>,
    ) -> Result<Vec<Output>, ProtocolError> {
        for x in 0..self.k() {
            self.error1[x] = false;
            self.error2[x] = false;
        }
        let Some(idx) = self.find_read(client, opid, object, &requested) else {
            return Ok(Vec::new());
        };
        let zero_value = self.code.zero_value();
        let mut modified = symbol;
        for &x in self.code.objects_at(from) {
            if requested[x] == encoded[x] {
                continue;
            }
            if !encoded[x].is_zero() {
                match self.list_value(x, &encoded[x]) {
                    Some(w) => {
                        modified = self.code.reencode(from, x, &modified, w, &zero_value)?;
                    }
                    None => self.error1[x] = true,
                }
            }
            match self.list_value(x, &requested[x]) {
                Some(v) if !self.error1[x] => {
                    modified = self.code.reencode(from, x, &modified, &zero_value, v)?;
                }
                _ => self.error2[x] = true,
            }
        }
        if self.error1.iter().chain(&self.error2).any(|&e| e) {
            return Ok(Vec::new());
        }
        self.readl[idx].symbols[from] = Some(modified);
        let available: BTreeSet<usize> = self.readl[idx]
            .symbols
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|_| i))
            .collect();
        let Some(rs) = self.code.recovery_set_within(object, &available) else {
            return Ok(Vec::new());
        };
        let symbols = self.readl[idx]
            .symbols
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.clone().map(|s| (i, s)))
            .collect();
        let value = self.code.decode(rs, &symbols)?;
        let mut out = Vec::new();
        if client == LOCALHOST {
            let tag = self.m.tagvec[object].clone();
            self.list_insert(object, tag, value);
        } else {
            out.push(self.read_return(client, opid, value));
        }
        self.readl
            .retain(|r| !(r.client == client && r.opid == opid && r.object == object && r.tagvec == requested));
        Ok(out)
    }

    pub fn on_val_resp(
        &mut self,
        client: ClientId,
        opid: OpId,
        object: usize,
        value: Value,
        requested: Vec<Tag>,
    ) -> Result<Vec<Output>, ProtocolError> {
        let mut out = Vec::new();
        if self.protocol.is_eventual() {
            let (hit, kept): (Vec<_>, Vec<_>) = std::mem::take(&mut self.readl)
                .into_iter()
                .partition(|r| r.object == object);
            self.readl = kept;
            for r in hit.into_iter().filter(|r| r.client != LOCALHOST) {
                out.push(self.read_return(r.client, r.opid, value.clone()));
            }
            return Ok(out);
        }
        let Some(idx) = self.find_read(client, opid, object, &requested) else {
            return Ok(out);
        };
        self.readl.remove(idx);
        if client == LOCALHOST {
            self.list_insert(object, requested[object].clone(), value);
        } else {
            out.push(self.read_return(client, opid, value));
        }
        Ok(out)
    }

    // ---- internal actions ---------------------------------------------

    pub fn internal(&mut self, action: InternalAction) -> Result<Vec<Output>, ProtocolError> {
        match action {
            InternalAction::ApplyInqueue => self.apply_inqueue(),
            InternalAction::Encoding => self.encoding(),
            InternalAction::GarbageCollection => self.garbage_collection(),
        }
    }

    pub fn apply_inqueue(&mut self) -> Result<Vec<Output>, ProtocolError> {
        let Some(h) = self.inqueue_head() else {
            return Ok(Vec::new());
        };
        let head = &self.inqueue[h];
        let j = head.origin;
        if !self.protocol.is_eventual() {
            let ts = &head.tag.ts;
            let ready = (0..self.n()).all(|p| p == j || ts.get(p) <= self.vc.get(p)) && ts.get(j) == self.vc.get(j) + 1;
            if !ready {
                return Ok(Vec::new());
            }
        }
        let InQueueEntry { object, value, tag, .. } = self.inqueue.remove(h);
        self.vc.set(j, tag.ts.get(j));
        self.list_insert(object, tag.clone(), value.clone());

        let eventual = self.protocol.is_eventual();
        let mut out = Vec::new();
        let mut kept = Vec::with_capacity(self.readl.len());
        for r in std::mem::take(&mut self.readl) {
            if r.object != object {
                kept.push(r);
            } else if r.client != LOCALHOST && (eventual || r.tagvec[object].le(&tag)) {
                out.push(self.read_return(r.client, r.opid, value.clone()));
            } else if r.client == LOCALHOST && r.tagvec[object] == tag {
                // The wanted version arrived; the internal read is moot.
            } else {
                kept.push(r);
            }
        }
        self.readl = kept;
        Ok(out)
    }

    pub fn encoding(&mut self) -> Result<Vec<Output>, ProtocolError> {
        let mut out = Vec::new();
        for x in 0..self.k() {
            let Some(top) = self.highest(x)? else {
                continue;
            };
            if !self.m.tagvec[x].less(&top.tag) {
                continue;
            }
            let top = top.clone();
            let holders = self.code.holders(x).clone();
            if self.stores(x) {
                // When this server alone recovers `x`, the internal read
                // would complete on its own symbol. Its result goes back into
                // the list as the read would put it there, so the encoded
                // version stays available to other servers' inquiries.
                if self.list_value(x, &self.m.tagvec[x]).is_none() {
                    if let Some(rs) = self.code.locally_decodable(self.id, x) {
                        let own = [(self.id, self.m.val.clone())].into_iter().collect();
                        let v = self.code.decode(rs, &own)?;
                        self.list_insert(x, self.m.tagvec[x].clone(), v);
                    }
                }
                let old = self.list_value(x, &self.m.tagvec[x]).cloned();
                if let Some(old) = old {
                    self.m.val = self.reencode(&self.m.val, x, &old, &top.value)?;
                    self.m.tagvec[x] = top.tag.clone();
                    for &j in holders.iter().filter(|&&j| j != self.id) {
                        out.push(Output::Server {
                            to: j,
                            msg: ServerMessage::Del {
                                object: x,
                                tag: top.tag.clone(),
                            },
                        });
                    }
                    self.del_insert(x, top.tag, self.id);
                } else if !self
                    .readl
                    .iter()
                    .any(|r| r.client == LOCALHOST && r.object == x && r.tagvec[x] == self.m.tagvec[x])
                {
                    let opid = self.next_internal_opid();
                    let entry = ReadLEntry {
                        client: LOCALHOST,
                        opid,
                        object: x,
                        tagvec: self.m.tagvec.clone(),
                        symbols: self.empty_symbols(self.m.val.clone()),
                    };
                    for j in self.others() {
                        out.push(Output::Server {
                            to: j,
                            msg: ServerMessage::ValInq {
                                client: LOCALHOST,
                                opid,
                                object: x,
                                wanted: entry.tagvec.clone(),
                            },
                        });
                    }
                    self.readl.push(entry);
                }
            } else {
                let newer: Vec<Tag> = self.lists[x]
                    .iter()
                    .filter(|e| self.m.tagvec[x].less(&e.tag))
                    .filter(|e| self.covered_by(x, &e.tag, &holders))
                    .map(|e| e.tag.clone())
                    .collect();
                if newer.is_empty() {
                    continue;
                }
                let best = tag_max(&newer)?.clone();
                self.m.tagvec[x] = best.clone();
                self.del_insert(x, best.clone(), self.id);
                for j in self.others() {
                    out.push(Output::Server {
                        to: j,
                        msg: ServerMessage::Del {
                            object: x,
                            tag: best.clone(),
                        },
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn garbage_collection(&mut self) -> Result<Vec<Output>, ProtocolError> {
        let all: BTreeSet<usize> = (0..self.n()).collect();
        let mut out = Vec::new();
        for x in 0..self.k() {
            let s_tags = self.covered_tags(x, &all);
            self.tmax[x] = if s_tags.is_empty() {
                self.zero_tag()
            } else {
                tag_max(&s_tags)?.clone()
            };
            let tmax = self.tmax[x].clone();
            let cur = self.m.tagvec[x].clone();
            let cur_exact_from_all = all
                .iter()
                .all(|&i| self.del[x].iter().any(|(t, j)| *j == i && *t == cur));
            let pending: Vec<Tag> = self
                .readl
                .iter()
                .map(|r| r.tagvec[x].clone())
                .filter(|t| t.less(&cur))
                .collect();
            let nothing_newer = match self.highest(x)? {
                None => true,
                Some(top) => top.tag.le(&cur),
            };
            let inclusive =
                (tmax == cur && cur_exact_from_all && nothing_newer) || (tmax.less(&cur) && !self.stores(x));
            self.lists[x].retain(|e| {
                let below = if inclusive { e.tag.le(&tmax) } else { e.tag.less(&tmax) };
                !below || pending.contains(&e.tag)
            });

            if self.stores(x) {
                let holders = self.code.holders(x).clone();
                let u = self.covered_tags(x, &holders);
                if !u.is_empty() {
                    let best = tag_max(&u)?.clone();
                    if self.gc_sent[x].as_ref() != Some(&best) {
                        self.gc_sent[x] = Some(best.clone());
                        for j in self.others() {
                            out.push(Output::Server {
                                to: j,
                                msg: ServerMessage::Del {
                                    object: x,
                                    tag: best.clone(),
                                },
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
