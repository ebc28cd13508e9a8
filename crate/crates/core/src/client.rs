//! The client automaton: one outstanding operation at a time, every
//! message addressed to the client's home server.

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::field::Value;
use crate::types::{ClientId, ClientRequest, ClientResponse, OpId, Tag, VectorClock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingOp {
    pub opid: OpId,
    pub kind: OpKind,
    pub object: usize,
    /// The written value, for writes.
    pub value: Option<Value>,
}

/// A finished operation as the client observed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub opid: OpId,
    pub kind: OpKind,
    pub object: usize,
    pub value: Value,
    /// Home-server clock at the response point, when the server reported it.
    pub ts: Option<VectorClock>,
    /// The write's tag; `None` for reads.
    pub tag: Option<Tag>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Client {
    id: ClientId,
    home: usize,
    counter: u64,
    pending: Option<PendingOp>,
}

impl Client {
    /// `id` must be nonzero; zero is reserved for server-internal reads.
    pub fn new(id: ClientId, home: usize) -> Self {
        assert_ne!(id, crate::types::LOCALHOST, "client id 0 is reserved");
        Self {
            id,
            home,
            counter: 0,
            pending: None,
        }
    }

    pub fn id(&self) -> ClientId {
        self.id
    }

    pub fn home(&self) -> usize {
        self.home
    }

    pub fn pending(&self) -> Option<&PendingOp> {
        self.pending.as_ref()
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_none()
    }

    fn next_opid(&mut self) -> Result<OpId, ProtocolError> {
        if self.pending.is_some() {
            return Err(ProtocolError::PendingOperation { client: self.id });
        }
        self.counter += 1;
        Ok(OpId::new(self.id, self.counter))
    }

    pub fn invoke_write(&mut self, object: usize, value: Value) -> Result<ClientRequest, ProtocolError> {
        let opid = self.next_opid()?;
        self.pending = Some(PendingOp {
            opid,
            kind: OpKind::Write,
            object,
            value: Some(value.clone()),
        });
        Ok(ClientRequest::Write {
            client: self.id,
            opid,
            object,
            value,
        })
    }

    pub fn invoke_read(&mut self, object: usize) -> Result<ClientRequest, ProtocolError> {
        let opid = self.next_opid()?;
        self.pending = Some(PendingOp {
            opid,
            kind: OpKind::Read,
            object,
            value: None,
        });
        Ok(ClientRequest::Read {
            client: self.id,
            opid,
            object,
        })
    }

    /// Completes the pending operation if `resp` answers it; a stale or
    /// mismatched response returns `None` and changes nothing.
    pub fn on_response(&mut self, resp: &ClientResponse) -> Option<Completion> {
        let pending = self.pending.as_ref()?;
        if pending.opid != resp.opid() {
            return None;
        }
        let done = match (pending.kind, resp) {
            (OpKind::Write, ClientResponse::WriteReturn { tag, .. }) => Completion {
                opid: pending.opid,
                kind: OpKind::Write,
                object: pending.object,
                value: pending.value.clone().expect("writes carry a value"),
                ts: Some(tag.ts.clone()),
                tag: Some(tag.clone()),
            },
            (OpKind::Read, ClientResponse::ReadReturn { value, ts, .. }) => Completion {
                opid: pending.opid,
                kind: OpKind::Read,
                object: pending.object,
                value: value.clone(),
                ts: ts.clone(),
                tag: None,
            },
            _ => return None,
        };
        self.pending = None;
        Some(done)
    }
}
